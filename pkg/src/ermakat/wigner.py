"""Wigner functions on rectangular phase-space grids.

Two independent routes:

* :func:`wigner_series` works for any Fock state through the displaced parity
  series ``W = (1/pi) sum_k (-1)^k |<k|D^dag(gamma)|psi>|^2``,
  ``gamma = (Q + iP)/sqrt(2)``;
* :func:`wigner_closed_form` evaluates the Gaussian closed form of the
  two-branch squeezed cat directly from its :class:`CatSpec`.

Grid values are stored with shape ``(len(p), len(q))``: row ``i`` holds
``W(q, p[i])``.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import fock
from .evolution import CatSpec
from .fock import FockState, TruncationWarning
from .io import dumps, fmt, write_text

SERIES_TAIL_WARN = 1e-8


@dataclass(frozen=True)
class GridSpec:
    q_min: float
    q_max: float
    p_min: float
    p_max: float
    nq: int = 161
    np_: int = 161

    def __post_init__(self):
        if not (self.q_max > self.q_min and self.p_max > self.p_min):
            raise ValueError("grid ranges must be increasing")
        if self.nq < 2 or self.np_ < 2:
            raise ValueError("a grid needs at least 2 points per axis")

    @property
    def q(self) -> np.ndarray:
        return np.linspace(self.q_min, self.q_max, self.nq)

    @property
    def p(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.np_)

    @classmethod
    def symmetric(cls, q_half: float, p_half: float, points: int = 161) -> "GridSpec":
        return cls(-q_half, q_half, -p_half, p_half, points, points)


@dataclass(frozen=True)
class WignerGrid:
    q: np.ndarray
    p: np.ndarray
    values: np.ndarray
    method: str
    tail_mass: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("q", "p", "values"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.values.shape != (self.p.size, self.q.size):
            raise ValueError("values must have shape (len(p), len(q))")

    @property
    def dq(self) -> float:
        return float(self.q[1] - self.q[0])

    @property
    def dp(self) -> float:
        return float(self.p[1] - self.p[0])

    def integral(self) -> float:
        return float(self.values.sum() * self.dq * self.dp)

    def value_at(self, q: float, p: float) -> float:
        """Value at the grid node nearest to ``(q, p)``."""
        return float(self.values[np.argmin(abs(self.p - p)), np.argmin(abs(self.q - q))])

    def to_csv(self, path) -> None:
        """Line 1: ``Q`` then the q axis; line 2: ``P`` then the p axis;
        then one line per p value holding W along q."""
        lines = ["Q," + ",".join(fmt(v) for v in self.q), "P," + ",".join(fmt(v) for v in self.p)]
        lines += [",".join(fmt(v) for v in row) for row in self.values]
        write_text(path, "\n".join(lines) + "\n")

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "shape": [int(self.p.size), int(self.q.size)],
            "dq": self.dq,
            "dp": self.dp,
            "tail_mass": self.tail_mass,
            "q": self.q,
            "p": self.p,
            "values": [row for row in self.values],
        }

    def to_json(self, path) -> None:
        write_text(path, dumps(self.to_dict()))


def _thread_count(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("ERMAKAT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def auto_grid(state: FockState, points: int = 161, nsigma: float = 6.0) -> GridSpec:
    """Symmetric grid covering mean +- nsigma standard deviations of q and p."""
    mean, cov = fock.quadrature_moments(state)
    q_half = abs(mean[0]) + nsigma * math.sqrt(max(cov[0, 0], 0.0))
    p_half = abs(mean[1]) + nsigma * math.sqrt(max(cov[1, 1], 0.0))
    return GridSpec.symmetric(q_half, p_half, points)


def auto_grid_for_cat(spec: CatSpec, points: int = 161, nsigma: float = 6.0) -> GridSpec:
    """Symmetric grid covering both squeezed lobes to ``nsigma`` of their widths."""
    at, r = spec.alpha_tilde, spec.r_min
    mu, nu = math.cosh(r), math.sinh(r)
    centre = mu * at - nu * at.conjugate()
    q_half = math.sqrt(2) * abs(centre.real) + nsigma * math.exp(-r) / math.sqrt(2)
    p_half = math.sqrt(2) * abs(centre.imag) + nsigma * math.exp(r) / math.sqrt(2)
    return GridSpec.symmetric(q_half, p_half, points)


def _significant_dim(c: np.ndarray, floor: float = 1e-32) -> int:
    tail = np.cumsum((np.abs(c) ** 2)[::-1])[::-1]
    idx = np.nonzero(tail > floor)[0]
    return int(idx[-1] + 1) if idx.size else 1


def _series_chunk(psi: np.ndarray, radius: float, gam: np.ndarray, k_max: int | None, tol: float = 1e-12):
    """Wigner values and lost tail mass for one batch of grid points.

    The number of displaced levels is estimated from the reach
    ``|gamma| + radius`` and doubled until the lost probability drops
    below ``tol`` (or ``k_max`` is hit).
    """
    reach = float(np.abs(gam).max()) + radius
    m_work = int(reach ** 2 + 8 * reach + 40)
    while True:
        if k_max is not None:
            m_work = min(m_work, int(k_max))
        w, lost = _series_eval(psi, gam, m_work)
        if lost.max() <= tol or (k_max is not None and m_work >= k_max):
            return w, lost
        m_work *= 2


def _series_eval(psi: np.ndarray, gam: np.ndarray, m_work: int):
    npsi = psi.size
    dg = -gam  # D^dag(gamma) = D(-gamma)
    x = np.abs(dg) ** 2
    with np.errstate(divide="ignore"):
        la = np.log(np.abs(dg))
    th = np.angle(dg)
    # phases factor out of |<m|D|psi>|: use psi_n e^{-i n th}
    ptil = psi[:, None] * np.exp(-1j * np.arange(npsi)[:, None] * th[None, :])
    pre, pim = np.ascontiguousarray(ptil.real), np.ascontiguousarray(ptil.imag)
    phi_re = np.zeros((m_work, gam.size))
    phi_im = np.zeros((m_work, gam.size))
    # m >= n: <m|D|n> ~ l_n^{(m-n)}
    nlow = min(npsi, m_work)
    for n, ell in enumerate(fock._diagonal_laguerre(x, la, m_work, nlow, shrink=True)):
        span = m_work - n
        phi_re[n:] += ell[:span] * pre[n]
        phi_im[n:] += ell[:span] * pim[n]
    # m < n: <m|D|n> ~ (-1)^(n-m) l_m^{(n-m)}
    if npsi > 1:
        sign = ((-1.0) ** np.arange(npsi))[:, None]
        for m, ell in enumerate(fock._diagonal_laguerre(x, la, npsi, min(npsi - 1, m_work))):
            kk = npsi - m
            se = sign[1:kk] * ell[1:kk]
            phi_re[m] += (se * pre[m + 1:]).sum(axis=0)
            phi_im[m] += (se * pim[m + 1:]).sum(axis=0)
    prob = phi_re ** 2 + phi_im ** 2
    if m_work % 2:
        prob = np.vstack([prob, np.zeros((1, gam.size))])
    # alternating sum taken in (even, odd) pairs
    w = (prob[0::2] - prob[1::2]).sum(axis=0) / math.pi
    lost = np.vdot(psi, psi).real - prob.sum(axis=0)
    return w, lost


def wigner_series(
    state: FockState,
    grid: GridSpec,
    k_max: int | None = None,
    threads: int | None = None,
    chunk: int = 1024,
) -> WignerGrid:
    """Wigner function by the displaced-parity series.

    ``k_max`` caps the number of displaced levels; by default it adapts per
    batch of points to the reach of the displaced state. The largest
    probability lost to the cap is reported as ``tail_mass``.
    """
    psi = state.amplitudes[: _significant_dim(state.amplitudes)]
    radius = math.sqrt(_significant_dim(state.amplitudes, 1e-20))
    qq, pp = np.meshgrid(grid.q, grid.p)
    gam = ((qq + 1j * pp) / math.sqrt(2)).ravel()
    order = np.argsort(np.abs(gam), kind="stable")
    batches = [order[i:i + chunk] for i in range(0, order.size, chunk)]
    out = np.empty(gam.size)
    lost = np.empty(gam.size)

    def run(idx):
        return idx, *_series_chunk(psi, radius, gam[idx], k_max)

    with ThreadPoolExecutor(_thread_count(threads)) as pool:
        for idx, w, l in pool.map(run, batches):
            out[idx] = w
            lost[idx] = l
    tail = float(max(lost.max(), 0.0))
    if tail > SERIES_TAIL_WARN:
        warnings.warn(f"displaced-state tail mass {tail:.2e} exceeds {SERIES_TAIL_WARN:g}", TruncationWarning, stacklevel=2)
    return WignerGrid(grid.q, grid.p, out.reshape(qq.shape), "Series", tail)


def _h_log(x, y, mu, nu):
    """log of H(x, y) without its prefactor."""
    d = mu ** 2 - nu ** 2
    return -x / mu ** 2 * (np.conj(y) + nu / (2 * mu) * x) - nu / (2 * mu * d) * (np.conj(y) + nu / mu * x) ** 2


def wigner_closed_form(spec: CatSpec, grid: GridSpec, literal_beta: bool = False) -> WignerGrid:
    """Closed-form Wigner function of the two-branch squeezed cat.

    ``W = N mu^-1 [f f* H(b+, b+) + f g* H(b+, b-) + g f* H(b-, b+) + g g* H(b-, b-)]``
    with ``xi = -mu gamma - nu gamma*``, the branch coefficients ``f``, ``g``
    carrying (1 - i) and (1 + i), and ``b+- = +-at + xi``. With
    ``literal_beta=True`` the Hermite arguments become
    ``mu(+-at + xi) + nu(+-at + xi)*`` instead; that variant is the parity
    expectation of the displaced-squeezed-vacuum superposition, not of the
    evolved cat. Exponents are summed before a single exponentiation.
    """
    at, r = spec.alpha_tilde, spec.r_min
    mu, nu = math.cosh(r), math.sinh(r)
    qq, pp = np.meshgrid(grid.q, grid.p)
    gam = (qq + 1j * pp) / math.sqrt(2)
    xi = -mu * gam - nu * np.conj(gam)
    u_p, u_m = at + xi, -at + xi
    if literal_beta:
        b_p = mu * u_p + nu * np.conj(u_p)
        b_m = mu * u_m + nu * np.conj(u_m)
    else:
        b_p, b_m = u_p, u_m

    pref = mu / math.sqrt(mu ** 2 - nu ** 2)
    if not math.isclose(pref, mu, rel_tol=1e-12):
        raise ArithmeticError("H prefactor deviates from mu")
    log_n = -math.log(4 * math.pi) + 2 * np.real((xi * np.conj(at) - np.conj(xi) * at) / 2)
    lf = -np.abs(b_p) ** 2 / 2 + nu * b_p ** 2 / (2 * mu)
    lg = (np.conj(xi) * at - xi * np.conj(at)) - np.abs(b_m) ** 2 / 2 + nu * b_m ** 2 / (2 * mu)
    cf, cg = 1 - 1j, 1 + 1j

    total = np.zeros(gam.shape, dtype=complex)
    for c1, l1, x in ((cf, lf, b_p), (cg, lg, b_m)):
        for c2, l2, y in ((cf, lf, b_p), (cg, lg, b_m)):
            expo = log_n + l1 + np.conj(l2) + _h_log(x, y, mu, nu)
            total += c1 * np.conj(c2) * pref * np.exp(expo)
    total /= mu
    resid = float(np.max(np.abs(total.imag))) if total.size else 0.0
    if resid > 1e-9:
        raise ArithmeticError(f"closed-form Wigner has imaginary residue {resid:.2e}")
    meta = {"imag_residue": resid, "literal_beta": literal_beta}
    return WignerGrid(grid.q, grid.p, total.real, "ClosedForm", 0.0, meta)


def negativity_volume(grid: WignerGrid) -> float:
    """Phase-space volume of the negative part of W."""
    return float(np.clip(-grid.values, 0, None).sum() * grid.dq * grid.dp)


def marginals(grid: WignerGrid) -> tuple[np.ndarray, np.ndarray]:
    """``(P(q), P(p))``: W integrated over p and over q on the grid."""
    return grid.values.sum(axis=0) * grid.dp, grid.values.sum(axis=1) * grid.dq


def position_density(state: FockState, q) -> np.ndarray:
    """``|psi(q)|^2`` from the amplitudes, by Hermite-function synthesis."""
    q = np.asarray(q, dtype=float)
    c = state.amplitudes
    h_prev = np.zeros_like(q)
    h = np.pi ** -0.25 * np.exp(-q ** 2 / 2)
    psi = c[0] * h
    for n in range(1, c.size):
        h_prev, h = h, math.sqrt(2 / n) * q * h - math.sqrt((n - 1) / n) * h_prev
        psi = psi + c[n] * h
    return np.abs(psi) ** 2
