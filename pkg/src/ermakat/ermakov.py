"""Solutions of the Ermakov equation ``rho'' + Omega(t)^2 rho = rho^-3``.

Two routes are provided. :func:`solve_analytic_step` evaluates the closed form
that is exact for an ideal frequency step (and a good approximation for a steep
tanh step), and :func:`solve_numeric` integrates the equation for any profile.
Both return an :class:`ErmakovSolution` that also carries the accumulated phase
``Theta(t) = int_0^t rho^-2 dt'``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .frequency import FrequencyProfile, TanhStep, omega_integral

Provenance = Literal["Analytic", "Numeric"]


class IntegrationError(RuntimeError):
    """The ODE integrator failed; ``t_last`` is the last time reached."""

    def __init__(self, message: str, t_last: float):
        super().__init__(f"{message} (last good t = {t_last:.6g})")
        self.t_last = t_last


@dataclass(frozen=True)
class Minimum:
    t: float
    rho: float

    @property
    def r(self) -> float:
        """Squeezing parameter ``-ln rho`` at this minimum."""
        return -float(np.log(self.rho))


@dataclass(frozen=True)
class ErmakovSolution:
    t: np.ndarray
    rho: np.ndarray
    rho_dot: np.ndarray
    theta: np.ndarray
    profile: FrequencyProfile
    provenance: Provenance
    minima: tuple[Minimum, ...] = ()
    _dense: Callable = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for name in ("t", "rho", "rho_dot", "theta"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if np.any(self.rho <= 0):
            raise ValueError("rho must stay positive on the mesh")

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    def evaluate(self, t):
        """Return ``(rho, rho_dot, theta)`` at arbitrary time(s) inside the mesh."""
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t[0] - 1e-12) or np.any(t > self.t[-1] + 1e-12):
            raise ValueError(f"t outside solution range [{self.t[0]}, {self.t[-1]}]")
        rho, rho_dot, theta = (v.reshape(t.shape) for v in self._dense(t))
        return rho[()], rho_dot[()], theta[()]

    def rho_ddot(self, t, h: float = 1e-6):
        """Second derivative of rho by central differencing of rho_dot."""
        lo, hi = self.t[0], self.t[-1]
        t = np.clip(np.asarray(t, dtype=float), lo + h, hi - h)
        return (self.evaluate(t + h)[1] - self.evaluate(t - h)[1]) / (2 * h)

    def with_minima(self, t_after: float | None = None) -> "ErmakovSolution":
        found = find_minima(self, self.t[0] if t_after is None else t_after)
        return ErmakovSolution(
            self.t, self.rho, self.rho_dot, self.theta, self.profile,
            self.provenance, tuple(found), self._dense,
        )

    def to_csv(self, path) -> None:
        """Write columns t, rho, rho_dot, theta (UTF-8, LF, %.12e)."""
        from .io import write_csv_table

        write_csv_table(
            path, ["t", "rho", "rho_dot", "theta"],
            np.column_stack([self.t, self.rho, self.rho_dot, self.theta]),
        )

    def minima_json(self) -> str:
        from .io import dumps

        return dumps({"minima": [{"t": m.t, "rho": m.rho, "r": m.r} for m in self.minima]})


def _mesh(t_end: float, mesh_step: float) -> np.ndarray:
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    if not 0 < mesh_step <= t_end:
        raise ValueError("mesh_step must lie in (0, t_end]")
    n = int(np.ceil(t_end / mesh_step - 1e-9))
    return np.linspace(0.0, t_end, n + 1)


class _Piecewise:
    """Dense output stitched together from per-segment ODE solutions."""

    def __init__(self, edges, sols):
        self.edges = np.asarray(edges)
        self.sols = sols

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.clip(np.searchsorted(self.edges, t, side="right") - 1, 0, len(self.sols) - 1)
        out = np.empty((self.sols[0](self.edges[0]).shape[0], t.size))
        for i in np.unique(idx):
            sel = idx == i
            out[:, sel] = self.sols[i](t[sel])
        return out


def _integrate(rhs, y0, profile, t_end, tol, max_step=np.inf) -> _Piecewise:
    edges = [0.0, *profile.breakpoints(0.0, t_end), t_end]
    sols = []
    y = np.asarray(y0, dtype=float)
    for a, b in zip(edges[:-1], edges[1:]):
        res = solve_ivp(rhs, (a, b), y, method="DOP853", rtol=tol, atol=tol,
                        dense_output=True, max_step=max_step)
        if not res.success:
            raise IntegrationError(res.message, float(res.t[-1]))
        sols.append(res.sol)
        y = res.y[:, -1]
    return _Piecewise(edges, sols)


def _default_initial(profile: FrequencyProfile) -> tuple[float, float]:
    return profile.initial ** -0.5, 0.0


def solve_numeric(
    profile: FrequencyProfile,
    rho0: float | None = None,
    rho_dot0: float | None = None,
    t_end: float = 10.0,
    tol: float = 1e-12,
    mesh_step: float = 1e-3,
) -> ErmakovSolution:
    """Integrate the Ermakov equation from t = 0 to ``t_end``.

    The default initial condition is the equilibrium of the initial frequency,
    ``rho = Omega(0)^-1/2`` and ``rho_dot = 0``. The state vector is
    ``(rho, rho_dot, Theta)`` so the phase is integrated alongside.
    """
    d_rho, d_rho_dot = _default_initial(profile)
    rho0 = d_rho if rho0 is None else float(rho0)
    rho_dot0 = d_rho_dot if rho_dot0 is None else float(rho_dot0)
    if not rho0 > 0:
        raise ValueError("rho0 must be positive")
    if not tol > 0:
        raise ValueError("tol must be positive")

    def rhs(t, y):
        r = y[0]
        return [y[1], r ** -3 - profile(t) ** 2 * r, r ** -2]

    dense = _integrate(rhs, [rho0, rho_dot0, 0.0], profile, t_end, tol)
    t = _mesh(t_end, mesh_step)
    rho, rho_dot, theta = dense(t)
    return ErmakovSolution(t, rho, rho_dot, theta, profile, "Numeric", (), dense).with_minima()


def _step_rho(profile: TanhStep, t, phi):
    """Closed-form rho and rho_dot given ``phi = int_{t_s}^t Omega``.

    The prefactor ``1/omega_i`` makes the expression the exact ideal-step
    solution for any ``omega_i`` (it is 1 for the unit initial frequency).
    """
    wi = profile.omega_i
    om = profile(t)
    om_dot = profile.derivative(t)
    c = wi ** 2 / om ** 2
    cos2, sin2 = np.cos(2 * phi), np.sin(2 * phi)
    rho2 = (1.0 + c + (1.0 - c) * cos2) / (2.0 * wi)
    c_dot = -2.0 * wi ** 2 * om_dot / om ** 3
    rho2_dot = (c_dot * (1.0 - cos2) - 2.0 * om * (1.0 - c) * sin2) / (2.0 * wi)
    rho = np.sqrt(rho2)
    return rho, rho2_dot / (2.0 * rho)


def solve_analytic_step(
    omega_i: float,
    omega_f: float,
    t_s: float,
    eps: float,
    t_end: float = 10.0,
    mesh_step: float = 1e-3,
    tol: float = 1e-12,
) -> ErmakovSolution:
    """Closed-form Ermakov solution for a tanh frequency step.

    ``rho^2 = [1 + w_i^2/W^2 + (1 - w_i^2/W^2) cos(2 int_{t_s}^t W)] / (2 w_i)``
    with ``W = Omega(t)``. ``rho_dot`` is the exact derivative of this
    expression. The phase integral and ``Theta`` are accumulated by a joint
    high-order quadrature on the mesh.
    """
    profile = TanhStep(omega_i, omega_f, t_s, eps)
    if not t_end > t_s:
        raise ValueError("t_end must exceed the switch time t_s")

    def rhs(t, y):
        rho, _ = _step_rho(profile, t, y[0])
        return [profile(t), rho ** -2]

    phi0 = -omega_integral(profile, 0.0, t_s) if t_s > 0 else omega_integral(profile, t_s, 0.0)
    acc = _integrate(rhs, [phi0, 0.0], profile, t_end, tol)

    def dense(t):
        phi, theta = acc(t)
        rho, rho_dot = _step_rho(profile, t, phi)
        return np.vstack([rho, rho_dot, theta])

    t = _mesh(t_end, mesh_step)
    rho, rho_dot, theta = dense(t)
    return ErmakovSolution(t, rho, rho_dot, theta, profile, "Analytic", (), dense).with_minima()


def find_minima(sol: ErmakovSolution, t_after: float = 0.0, curvature_floor: float = 1e-8) -> list[Minimum]:
    """Strict local minima of rho on ``[t_after, t_end]``, ordered by time.

    Candidates are sign changes of rho_dot on the mesh, refined by Brent's
    method on the dense rho_dot. Flat stretches (round-off sign flips with
    vanishing curvature) are rejected through ``curvature_floor``.
    """
    t, rd = sol.t, sol.rho_dot
    mask = t >= t_after
    out: list[Minimum] = []
    idx = np.nonzero(mask[:-1] & mask[1:] & (rd[:-1] < 0) & (rd[1:] >= 0))[0]
    f = lambda s: float(sol.evaluate(s)[1])
    for i in idx:
        a, b = t[i], t[i + 1]
        fa, fb = f(a), f(b)
        if fb == 0.0:
            tm = b
        elif fa * fb > 0:
            continue
        else:
            tm = brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        if sol.rho_ddot(tm) <= curvature_floor:
            continue
        if out and abs(tm - out[-1].t) < 1e-12:
            continue
        out.append(Minimum(float(tm), float(sol.evaluate(tm)[0])))
    return out


def ermakov_residual(sol: ErmakovSolution) -> np.ndarray:
    """``rho'' + Omega^2 rho - rho^-3`` on the mesh, from a fourth-order
    central difference of the rho column (two points trimmed at each end)."""
    t, r = sol.t, sol.rho
    h = np.diff(t)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise ValueError("residual check needs a uniform mesh")
    rdd = (-r[4:] + 16 * r[3:-1] - 30 * r[2:-2] + 16 * r[1:-3] - r[:-4]) / (12 * h[0] ** 2)
    mid = r[2:-2]
    return rdd + sol.profile(t[2:-2]) ** 2 * mid - mid ** -3
