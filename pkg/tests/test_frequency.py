import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ermakat.frequency import Constant, RangeError, Tabulated, TanhStep, omega_at, omega_integral


def test_tanh_midpoint_is_average():
    assert omega_at(TanhStep(1, 2, 2, 10), 2.0) == pytest.approx(1.5, abs=1e-15)


def test_tanh_far_past_is_initial():
    assert omega_at(TanhStep(1, 2, 2, 10), -50.0) == pytest.approx(1.0, abs=1e-15)


def test_constant_everywhere():
    p = Constant(3.0)
    assert np.all(omega_at(p, np.linspace(-5, 5, 11)) == 3.0)


def test_tanh_after_step_reaches_final():
    assert omega_at(TanhStep(1, 4, 2, 10), 3.0) == pytest.approx(4.0, abs=1e-7)


def test_tanh_derivative_matches_difference():
    p = TanhStep(1, 3, 2, 10)
    t = np.linspace(1.5, 2.5, 21)
    h = 1e-6
    fd = (p(t + h) - p(t - h)) / (2 * h)
    assert np.max(np.abs(fd - p.derivative(t))) < 1e-6


def test_tanh_monotone_when_rising():
    p = TanhStep(1, 4, 2, 10)
    assert np.all(np.diff(p(np.linspace(0, 10, 5001))) >= 0)


@pytest.mark.parametrize("bad", [dict(omega_i=0, omega_f=2), dict(omega_i=1, omega_f=-1)])
def test_tanh_rejects_non_positive(bad):
    with pytest.raises(ValueError):
        TanhStep(t_s=2, eps=10, **bad)


def test_tanh_rejects_bad_eps():
    with pytest.raises(ValueError):
        TanhStep(1, 2, 2, 0)


def test_constant_integral():
    assert omega_integral(Constant(2.0), 0, 3) == 6.0


def test_steep_step_integral():
    assert omega_integral(TanhStep(1, 2, 2, 1e4), 2, 4) == pytest.approx(4.0, abs=1e-4)


def test_integral_against_riemann_sum():
    p = TanhStep(1, 2, 2, 10)
    n = 10 ** 7
    h = 2.0 / n
    # midpoint sum, evaluated in blocks to bound memory
    total = 0.0
    for k in range(10):
        mids = (np.arange(k * n // 10, (k + 1) * n // 10) + 0.5) * h
        total += p(mids).sum() * h
    assert omega_integral(p, 0, 2) == pytest.approx(total, abs=1e-8)


def test_integral_zero_width_is_exact():
    assert omega_integral(TanhStep(1, 2, 2, 10), 1.7, 1.7) == 0.0


def test_integral_rejects_reversed():
    with pytest.raises(ValueError):
        omega_integral(Constant(1.0), 2, 1)


@settings(max_examples=25, deadline=None)
@given(
    st.floats(0.2, 5), st.floats(0.2, 5), st.floats(0, 4), st.floats(0.5, 1e3),
    st.floats(0, 3), st.floats(0, 3), st.floats(0, 3),
)
def test_integral_additive(wi, wf, ts, eps, a, b, c):
    p = TanhStep(wi, wf, ts, eps)
    t0, t1, t2 = sorted((a, a + b, a + b + c))
    lhs = omega_integral(p, t0, t1) + omega_integral(p, t1, t2)
    assert lhs == pytest.approx(omega_integral(p, t0, t2), abs=1e-9)


def test_tabulated_interpolates_and_guards_range(tmp_path):
    t = np.linspace(0, 5, 51)
    # zero slope at both ends, as the clamped spline assumes
    w = 1 + 0.2 * np.sin(np.pi * t / 5) ** 2
    f = tmp_path / "w.csv"
    f.write_text("time,omega\n" + "\n".join(f"{a},{b}" for a, b in zip(t, w)) + "\n")
    p = Tabulated.from_csv(f)
    assert p(2.05) == pytest.approx(1 + 0.2 * math.sin(math.pi * 2.05 / 5) ** 2, abs=1e-4)
    assert p.initial == pytest.approx(1.0)
    with pytest.raises(RangeError):
        p(5.5)
    assert omega_integral(p, 0, 5) == pytest.approx(5.5, abs=1e-4)


def test_tabulated_without_header():
    p = Tabulated([0, 1, 2, 3], [1, 1, 1, 1])
    assert p(1.5) == pytest.approx(1.0)


@pytest.mark.parametrize(
    "times, values",
    [([0, 1, 2], [1, 1, 1]), ([0, 2, 1, 3], [1, 1, 1, 1]), ([0, 1, 2, 3], [1, 0, 1, 1])],
)
def test_tabulated_validation(times, values):
    with pytest.raises(ValueError):
        Tabulated(times, values)
