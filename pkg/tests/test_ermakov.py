import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from ermakat.ermakov import (
    IntegrationError,
    ermakov_residual,
    find_minima,
    solve_analytic_step,
    solve_numeric,
)
from ermakat.frequency import Constant, Tabulated, TanhStep
from oracles import STEP_MINIMA


def linear_route(profile, t_end, t_eval):
    """rho^2 = u1^2 + u2^2 for two solutions of u'' + Omega^2 u = 0 with unit Wronskian,
    scaled for the equilibrium start rho = w^-1/2."""
    w0 = profile.initial

    def f(t, y):
        w2 = profile(t) ** 2
        return [y[1], -w2 * y[0], y[3], -w2 * y[2]]

    s = solve_ivp(f, (0, t_end), [w0 ** -0.5, 0, 0, w0 ** 0.5], method="Radau",
                  rtol=1e-13, atol=1e-14, t_eval=t_eval, max_step=0.01)
    return np.sqrt(s.y[0] ** 2 + s.y[2] ** 2)


def test_constant_equilibrium_stays_flat():
    sol = solve_numeric(Constant(1.0), 1.0, 0.0, t_end=10)
    assert np.max(np.abs(sol.rho - 1)) <= 1e-9
    assert sol.minima == ()


def test_constant_four_equilibrium():
    sol = solve_numeric(Constant(4.0), t_end=5)
    assert sol.rho[0] == 0.5
    assert np.max(np.abs(sol.rho - 0.5)) <= 1e-9


def test_constant_theta_is_linear():
    sol = solve_numeric(Constant(4.0), t_end=3)
    # omega = 1/rho^2 = 4
    assert np.max(np.abs(sol.theta - 4 * sol.t)) < 1e-9


@pytest.mark.parametrize("wf", [2.0, 3.0, 4.0])
def test_numeric_matches_linear_route(wf):
    prof = TanhStep(1, wf, 2, 10)
    sol = solve_numeric(prof, t_end=10, mesh_step=0.01)
    ref = linear_route(prof, 10, sol.t)
    assert np.max(np.abs(sol.rho - ref)) < 1e-8


def test_numeric_matches_linear_route_tabulated():
    t = np.linspace(0, 6, 121)
    prof = Tabulated(t, 1.5 + 0.5 * np.tanh(2 * (t - 2)))
    sol = solve_numeric(prof, t_end=6, mesh_step=0.01)
    assert np.max(np.abs(sol.rho - linear_route(prof, 6, sol.t))) < 1e-8


def test_nonequilibrium_start_oscillates():
    sol = solve_numeric(Constant(1.0), rho0=2.0, rho_dot0=0.0, t_end=10)
    assert len(sol.minima) >= 2
    # rho^2 for a unit oscillator is periodic with period pi
    assert sol.minima[1].t - sol.minima[0].t == pytest.approx(math.pi, abs=1e-8)


@pytest.mark.parametrize("wf", [2.0, 3.0, 4.0])
def test_analytic_is_exact_for_nearly_ideal_step(wf):
    ana = solve_analytic_step(1, wf, 2, 1e4, t_end=6, mesh_step=0.01)
    ref = linear_route(TanhStep(1, wf, 2, 1e4), 6, ana.t)
    # agreement limited by the finite step width (error of order 1/eps)
    assert np.max(np.abs(ana.rho - ref)) < 2e-4


def test_analytic_flat_before_step():
    sol = solve_analytic_step(1, 2, 2, 10, t_end=10)
    assert np.max(np.abs(sol.rho[sol.t <= 1] - 1)) < 1e-6


def test_analytic_fig2_oscillation_range():
    sol = solve_analytic_step(1, 4, 2, 10, t_end=10)
    after = sol.rho[sol.t > 3]
    assert after.max() == pytest.approx(1.0, abs=0.05)
    assert after.min() == pytest.approx(0.25, abs=0.02)


def test_analytic_rho_dot_matches_difference():
    sol = solve_analytic_step(1, 3, 2, 10, t_end=6)
    t = np.linspace(0.5, 5.5, 41)
    h = 1e-6
    fd = (sol.evaluate(t + h)[0] - sol.evaluate(t - h)[0]) / (2 * h)
    assert np.max(np.abs(fd - sol.evaluate(t)[1])) < 1e-7


def test_analytic_requires_t_end_after_switch():
    with pytest.raises(ValueError):
        solve_analytic_step(1, 2, 2, 10, t_end=1.5)


@pytest.mark.parametrize("wf", [2.0, 3.0, 4.0])
def test_ideal_step_minimum_frozen(wf):
    t_ref, rho_ref = STEP_MINIMA[wf]
    sol = solve_numeric(TanhStep(1, wf, 2, 1e4), t_end=4)
    m = find_minima(sol, 2.0)[0]
    assert m.t == pytest.approx(t_ref, abs=1e-7)
    assert m.rho == pytest.approx(rho_ref, abs=1e-9)
    assert m.r == pytest.approx(math.log(wf), abs=1e-7)


def test_minima_are_refined():
    sol = solve_numeric(TanhStep(1, 3, 2, 10), t_end=10)
    assert sol.minima
    for m in sol.minima:
        _, rd, _ = sol.evaluate(m.t)
        assert abs(rd) <= 1e-10
        assert sol.rho_ddot(m.t) > 0
    assert all(a.t < b.t for a, b in zip(sol.minima, sol.minima[1:]))


def test_theta_increasing_and_r_nonnegative():
    sol = solve_numeric(TanhStep(1, 2, 2, 10), t_end=10)
    assert np.all(np.diff(sol.theta) > 0)
    assert all(m.r >= 0 for m in sol.with_minima(2.0).minima)


def test_residual_small_at_figure_steepness():
    sol = solve_numeric(TanhStep(1, 4, 2, 10), t_end=10)
    assert np.max(np.abs(ermakov_residual(sol))) <= 1e-4


def test_solution_is_immutable():
    sol = solve_numeric(Constant(1.0), t_end=1)
    with pytest.raises(ValueError):
        sol.rho[0] = 3.0


def test_evaluate_outside_range():
    sol = solve_numeric(Constant(1.0), t_end=1)
    with pytest.raises(ValueError):
        sol.evaluate(2.0)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        solve_numeric(Constant(1.0), rho0=-1)
    with pytest.raises(ValueError):
        solve_numeric(Constant(1.0), tol=0)


def test_integration_error_carries_time():
    err = IntegrationError("step size too small", 1.25)
    assert err.t_last == 1.25 and "1.25" in str(err)


def test_csv_and_minima_json(tmp_path):
    import json

    sol = solve_numeric(TanhStep(1, 2, 2, 10), t_end=4, mesh_step=0.5)
    sol.to_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "t,rho,rho_dot,theta"
    assert len(lines) == 1 + sol.t.size
    data = json.loads(sol.with_minima(2.0).minima_json())
    assert data["minima"][0]["rho"] == pytest.approx(sol.with_minima(2.0).minima[0].rho, rel=1e-11)
