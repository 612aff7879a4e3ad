"""Exact evolution of a coherent input in the Kerr cavity and cat construction.

For a coherent input ``|alpha>`` the state at time ``t`` is

    exp(i lam q^2) S(-ln rho) sum_n e^{-|alpha|^2/2} [alpha e^{-i Theta}]^n
        e^{-i chi n^2 t} / sqrt(n!) |n>

with ``rho``, ``rho_dot``, ``Theta`` taken from an Ermakov solution. At a
minimum of ``rho`` and ``chi t = pi/2`` the Kerr phases collapse to the two
values 1 and -i, leaving a superposition of two squeezed coherent states.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import fock
from .ermakov import ErmakovSolution, solve_analytic_step, solve_numeric
from .fock import FockState, TruncationWarning
from .frequency import TanhStep

Provenance = Literal["GeneralTime", "AtMinimum", "AnalyticCat"]

AT_MINIMUM_TOL = 1e-10


@dataclass(frozen=True)
class EvolutionResult:
    state: FockState
    t: float
    rho: float
    rho_dot: float
    theta: float
    chi: float
    provenance: Provenance
    metadata: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.state.dim

    def to_dict(self) -> dict:
        return {
            "provenance": self.provenance,
            "t": self.t,
            "rho": self.rho,
            "rho_dot": self.rho_dot,
            "theta": self.theta,
            "chi": self.chi,
            "metadata": self.metadata,
            "state": self.state.to_dict(),
        }


@dataclass(frozen=True)
class CatSpec:
    """Everything that fixes the cat state produced at a minimum of rho."""

    alpha: complex
    omega_i: float
    omega_f: float
    t_s: float
    eps: float
    k: int
    t_min: float
    rho_min: float
    theta_min: float
    method: str = "numeric"

    @property
    def r_min(self) -> float:
        return -math.log(self.rho_min)

    @property
    def chi(self) -> float:
        return math.pi / (2.0 * self.t_min)

    @property
    def alpha_tilde(self) -> complex:
        return complex(self.alpha) * complex(np.exp(-1j * self.theta_min))

    @property
    def degenerate(self) -> bool:
        return self.alpha == 0

    def to_dict(self) -> dict:
        at = self.alpha_tilde
        return {
            "alpha": [complex(self.alpha).real, complex(self.alpha).imag],
            "omega_i": self.omega_i,
            "omega_f": self.omega_f,
            "t_s": self.t_s,
            "eps": self.eps,
            "k": self.k,
            "method": self.method,
            "t_min": self.t_min,
            "rho_min": self.rho_min,
            "r_min": self.r_min,
            "chi": self.chi,
            "chi_t_min": self.chi * self.t_min,
            "theta_min": self.theta_min,
            "alpha_tilde": [at.real, at.imag],
        }


def solve_profile(omega_i, omega_f, t_s, eps, t_end, method="numeric", tol=1e-12, mesh_step=1e-3) -> ErmakovSolution:
    if method == "numeric":
        return solve_numeric(TanhStep(omega_i, omega_f, t_s, eps), t_end=t_end, tol=tol, mesh_step=mesh_step)
    if method == "analytic":
        return solve_analytic_step(omega_i, omega_f, t_s, eps, t_end=t_end, mesh_step=mesh_step, tol=tol)
    raise ValueError(f"unknown solution method {method!r}")


def cat_spec_from_solution(alpha: complex, sol: ErmakovSolution, k: int = 0) -> CatSpec:
    """Pick the ``k``-th minimum of rho after the switch time (0-based)."""
    prof = sol.profile
    if not isinstance(prof, TanhStep):
        raise TypeError("cat construction needs a tanh-step profile")
    if k < 0:
        raise ValueError("minimum index must be non-negative")
    minima = sol.with_minima(prof.t_s).minima
    if len(minima) <= k:
        raise ValueError(f"only {len(minima)} minima after t_s within t_end = {sol.t_end}; asked for index {k}")
    m = minima[k]
    _, _, theta = sol.evaluate(m.t)
    method = "numeric" if sol.provenance == "Numeric" else "analytic"
    return CatSpec(complex(alpha), prof.omega_i, prof.omega_f, prof.t_s, prof.eps, k, m.t, m.rho, float(theta), method)


def build_cat_spec(alpha, omega_i, omega_f, t_s, eps, k=0, method="numeric", t_end=None, tol=1e-12):
    """Solve for rho and return ``(CatSpec, ErmakovSolution)``."""
    if omega_i == omega_f:
        raise ValueError("omega_f equals omega_i: rho is constant and has no minima")
    if t_end is None:
        t_end = t_s + (k + 2) * math.pi / min(omega_i, omega_f) + 1.0
    sol = solve_profile(omega_i, omega_f, t_s, eps, t_end, method, tol)
    return cat_spec_from_solution(alpha, sol, k), sol


def kerr_phases(chi_t: float, n_max: int) -> np.ndarray:
    """``exp(-i chi t n^2)`` for n = 0 .. n_max-1, reduced modulo 2 pi."""
    n = np.arange(n_max, dtype=np.int64)
    ang = np.mod(chi_t * (n * n).astype(float), 2 * np.pi)
    # exact quarter-turn values for the cat condition
    if abs(chi_t - math.pi / 2) <= 4 * np.finfo(float).eps:
        return np.where(n % 2 == 0, 1.0 + 0j, -1j)
    return np.exp(-1j * ang)


def kerr_phase_parity_check(chi_t: float) -> tuple[complex, complex]:
    """Kerr phase on even and odd number states (n = 0 and n = 1).

    For ``chi t = pi/2`` every even n picks up 1 and every odd n picks up -i.
    """
    ph = kerr_phases(chi_t, 2)
    return complex(ph[0]), complex(ph[1])


def _check_start(sol: ErmakovSolution):
    rho0, rd0, _ = sol.evaluate(sol.t[0])
    if abs(rho0 - 1.0) > 1e-9 or abs(rd0) > 1e-9:
        raise ValueError(
            "the coherent-input evolution needs rho(0) = 1 and rho_dot(0) = 0 "
            f"(got {rho0:.6g}, {rd0:.6g}); use a unit initial frequency"
        )


def _effective_squeezing(r: float, lam: float) -> float:
    """Largest log singular value of the chirp-times-squeeze symplectic map."""
    sq = np.diag([math.exp(-r), math.exp(r)])
    chirp = np.array([[1.0, 0.0], [2.0 * lam, 1.0]])
    s = max(np.linalg.svd(chirp @ sq, compute_uv=False)[0], np.linalg.svd(sq @ chirp, compute_uv=False)[0])
    return math.log(s)


def evolve(
    alpha: complex,
    sol: ErmakovSolution,
    chi: float,
    t: float,
    n: int | None = None,
    pad: int = fock.DEFAULT_PAD,
    literal_phase: bool = False,
) -> EvolutionResult:
    """State at time ``t`` for the coherent input ``|alpha>``.

    The chirp exponent is ``lam = rho_dot / (2 rho)``, which is what the
    factorised propagator produces once ``S`` is moved to the right of the
    chirp; ``literal_phase=True`` uses ``rho_dot / (2 rho^3)`` instead.
    """
    _check_start(sol)
    rho, rho_dot, theta = (float(v) for v in sol.evaluate(t))
    r = -math.log(rho)
    lam = rho_dot / (2 * rho ** 3) if literal_phase else rho_dot / (2 * rho)
    if n is None:
        n = fock.worst_case_dimension(alpha, _effective_squeezing(r, lam))
    w = n + pad
    base = fock.coherent(complex(alpha) * np.exp(-1j * theta), w).amplitudes
    base = base * kerr_phases(chi * t, w)
    vec = fock.squeeze_matrix(r, w, pad).matrix @ base
    if lam != 0.0:
        vec = fock.quadratic_phase_matrix(lam, w, pad).matrix @ vec
    state = FockState(vec[:n])
    if state.truncated:
        warnings.warn(f"evolved state tail mass {state.tail_mass:.2e} at N = {n}", TruncationWarning, stacklevel=2)
    prov = "AtMinimum" if abs(rho_dot) <= AT_MINIMUM_TOL else "GeneralTime"
    meta = {"n": n, "r": r, "chirp": lam}
    return EvolutionResult(state, float(t), rho, rho_dot, theta, float(chi), prov, meta)


def make_cat(spec: CatSpec, n: int | None = None) -> EvolutionResult:
    """``(1-i)/2 |at; r> + (1+i)/2 |-at; r>`` with ``|x; r> = S(r)|x>``.

    The result is not renormalised: the cross terms cancel exactly, so the
    norm is 1 up to round-off.
    """
    at, r = spec.alpha_tilde, spec.r_min
    if n is None:
        n = fock.auto_dimension([at, -at], r)
    plus = fock.squeezed_coherent(at, r, n).amplitudes
    minus = fock.squeezed_coherent(-at, r, n).amplitudes
    state = FockState((1 - 1j) / 2 * plus + (1 + 1j) / 2 * minus)
    meta = {"n": n, "r": r}
    if spec.degenerate:
        meta["degenerate"] = "squeezed vacuum"
    return EvolutionResult(state, spec.t_min, spec.rho_min, 0.0, spec.theta_min, spec.chi, "AnalyticCat", meta)


def cat_branch(spec: CatSpec, sign: int = 1, n: int | None = None) -> FockState:
    """One squeezed branch ``S(r)|+-at>`` of the cat."""
    at, r = sign * spec.alpha_tilde, spec.r_min
    if n is None:
        n = fock.auto_dimension([at], r)
    return fock.squeezed_coherent(at, r, n)


def lewis_invariant_expectation(result: EvolutionResult) -> float:
    """``<I>`` with ``I = [(q/rho)^2 + (rho p - rho_dot q)^2] / 2``.

    Uses exact actions of q and p on the amplitude vector, so the only error
    is the truncation of the state itself.
    """
    st = result.state
    if st.truncated:
        warnings.warn("state carries truncation tail; invariant may be biased", TruncationWarning, stacklevel=2)
    c = st.amplitudes
    qc, pc = fock.apply_q(c), fock.apply_p(c)
    rho, rd = result.rho, result.rho_dot
    mix = rho * pc - rd * qc
    return 0.5 * float(np.vdot(qc, qc).real / rho ** 2 + np.vdot(mix, mix).real)
