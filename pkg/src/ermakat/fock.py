"""Truncated Fock-basis states and operators.

Conventions: ``q = (a + a^dag)/sqrt(2)``, ``p = i(a^dag - a)/sqrt(2)`` and the
squeeze operator ``S(r) = exp[(r/2)(a a - a^dag a^dag)]``, so that
``S^dag a S = cosh(r) a - sinh(r) a^dag``. All amplitude recurrences are
ratio based; factorials are never formed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh, expm
from scipy.special import gammaln

DEFAULT_PAD = 32
TAIL_THRESHOLD = 1e-10


class TruncationWarning(UserWarning):
    """The truncated basis is too small for the requested state or operator."""


def tail_levels(n: int) -> int:
    return min(n, max(4, n // 16))


@dataclass(frozen=True)
class FockState:
    """Complex amplitudes ``c_0 .. c_{N-1}`` in the number basis.

    ``tail_mass`` is the probability held in the top ``max(4, N/16)`` levels;
    ``truncated`` is set when it exceeds ``threshold``.
    """

    amplitudes: np.ndarray
    threshold: float = TAIL_THRESHOLD
    normalized: bool = field(init=False)
    tail_mass: float = field(init=False)
    truncated: bool = field(init=False)

    def __post_init__(self):
        c = np.array(self.amplitudes, dtype=complex).ravel()
        if c.size == 0:
            raise ValueError("a FockState needs at least one level")
        c.flags.writeable = False
        object.__setattr__(self, "amplitudes", c)
        prob = np.abs(c) ** 2
        tail = float(prob[-tail_levels(c.size):].sum())
        object.__setattr__(self, "tail_mass", tail)
        object.__setattr__(self, "truncated", tail > self.threshold)
        object.__setattr__(self, "normalized", abs(prob.sum() - 1.0) <= 1e-8 and not tail > self.threshold)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def mean_photon(self) -> float:
        return float(np.arange(self.dim) @ self.probabilities())

    def parity(self) -> float:
        """Expectation of ``(-1)^n``."""
        p = self.probabilities()
        return float(p[0::2].sum() - p[1::2].sum())

    def resized(self, n: int) -> "FockState":
        c = np.zeros(n, dtype=complex)
        m = min(n, self.dim)
        c[:m] = self.amplitudes[:m]
        return FockState(c, self.threshold)

    def to_dict(self) -> dict:
        inter = np.empty(2 * self.dim)
        inter[0::2] = self.amplitudes.real
        inter[1::2] = self.amplitudes.imag
        return {"n": self.dim, "tail_mass": self.tail_mass, "amplitudes": inter}

    @classmethod
    def from_dict(cls, d: dict) -> "FockState":
        inter = np.asarray(d["amplitudes"], dtype=float)
        if inter.size != 2 * int(d["n"]):
            raise ValueError("amplitude array length does not match n")
        return cls(inter[0::2] + 1j * inter[1::2])


@dataclass(frozen=True)
class OperatorMatrix:
    matrix: np.ndarray
    label: str = "custom"

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("operator matrices must be square")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other):
        if isinstance(other, FockState):
            return FockState(self.matrix @ other.amplitudes, other.threshold)
        if isinstance(other, OperatorMatrix):
            return OperatorMatrix(self.matrix @ other.matrix)
        return self.matrix @ other

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.matrix.conj().T)


def annihilation(n: int) -> OperatorMatrix:
    return OperatorMatrix(np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1), "a")


def creation(n: int) -> OperatorMatrix:
    return OperatorMatrix(np.diag(np.sqrt(np.arange(1, n, dtype=float)), -1), "a†")


def number(n: int) -> OperatorMatrix:
    return OperatorMatrix(np.diag(np.arange(n, dtype=float)), "n")


def position(n: int) -> OperatorMatrix:
    a = annihilation(n).matrix
    return OperatorMatrix((a + a.T) / np.sqrt(2), "q")


def momentum(n: int) -> OperatorMatrix:
    a = annihilation(n).matrix
    return OperatorMatrix(1j * (a.T - a) / np.sqrt(2), "p")


# exact actions on vectors; the output has one more level than the input
def apply_a(c: np.ndarray) -> np.ndarray:
    out = np.zeros(c.size + 1, dtype=complex)
    out[:c.size - 1] = np.sqrt(np.arange(1, c.size)) * c[1:]
    return out


def apply_adag(c: np.ndarray) -> np.ndarray:
    out = np.zeros(c.size + 1, dtype=complex)
    out[1:] = np.sqrt(np.arange(1, c.size + 1)) * c
    return out


def apply_q(c: np.ndarray) -> np.ndarray:
    return (apply_a(c) + apply_adag(c)) / np.sqrt(2)


def apply_p(c: np.ndarray) -> np.ndarray:
    return 1j * (apply_adag(c) - apply_a(c)) / np.sqrt(2)


def expectation(state: FockState, op) -> complex:
    m = op.matrix if isinstance(op, OperatorMatrix) else np.asarray(op)
    c = state.amplitudes
    if m.shape[0] != c.size:
        raise ValueError("operator and state dimensions differ")
    return complex(np.vdot(c, m @ c))


def fidelity(a, b) -> float:
    """``|<a|b>|^2 / (<a|a><b|b>)``; states of different size are zero-padded."""
    x = a.amplitudes if isinstance(a, FockState) else np.asarray(a, dtype=complex)
    y = b.amplitudes if isinstance(b, FockState) else np.asarray(b, dtype=complex)
    n = max(x.size, y.size)
    x = np.pad(x, (0, n - x.size))
    y = np.pad(y, (0, n - y.size))
    return float(abs(np.vdot(x, y)) ** 2 / (np.vdot(x, x).real * np.vdot(y, y).real))


def coherent(alpha: complex, n: int, threshold: float = TAIL_THRESHOLD) -> FockState:
    """Coherent state ``|alpha>`` via ``c_{k+1} = c_k alpha / sqrt(k+1)``."""
    if n < 1:
        raise ValueError("dimension must be at least 1")
    alpha = complex(alpha)
    c = np.empty(n, dtype=complex)
    c[0] = math.exp(-abs(alpha) ** 2 / 2)
    for k in range(n - 1):
        c[k + 1] = c[k] * alpha / math.sqrt(k + 1)
    return FockState(c, threshold)


def squeezed_coherent(alpha: complex, r: float, n: int, threshold: float = TAIL_THRESHOLD) -> FockState:
    """Amplitudes of ``S(r)|alpha>``.

    The state is the eigenvector of ``mu a + nu a^dag`` (``mu = cosh r``,
    ``nu = sinh r``) with eigenvalue ``alpha``, which gives the recurrence
    ``mu sqrt(k+1) c_{k+1} = alpha c_k - nu sqrt(k) c_{k-1}``. At ``r = 0``
    it reduces to the coherent-state recurrence without any singular limit.
    """
    if n < 1:
        raise ValueError("dimension must be at least 1")
    alpha, r = complex(alpha), float(r)
    mu, nu = math.cosh(r), math.sinh(r)
    c = np.zeros(n, dtype=complex)
    c[0] = mu ** -0.5 * np.exp(-abs(alpha) ** 2 / 2 + nu * alpha ** 2 / (2 * mu))
    if n > 1:
        c[1] = alpha * c[0] / mu
    for k in range(1, n - 1):
        c[k + 1] = (alpha * c[k] - nu * math.sqrt(k) * c[k - 1]) / (mu * math.sqrt(k + 1))
    return FockState(c, threshold)


def hermite(n: int, z):
    """Physicists' Hermite polynomial ``H_n(z)`` by upward recurrence."""
    if n < 0:
        raise ValueError("order must be non-negative")
    z = np.asarray(z)
    h_prev, h = np.ones_like(z, dtype=complex), 2 * z + 0j
    if n == 0:
        return h_prev[()]
    for k in range(1, n):
        h_prev, h = h, 2 * z * h - 2 * k * h_prev
    return h[()]


def hermite_form(beta: complex, r: float, n: int) -> FockState:
    """Squeezed-state amplitudes written through Hermite polynomials,

    ``c_k = mu^-1/2 exp(-|beta|^2/2 + nu beta^2/(2 mu)) (nu/(2 mu))^{k/2}
    H_k(beta / sqrt(2 mu nu)) / sqrt(k!)``.

    This is the eigenvector of ``mu a + nu a^dag`` with eigenvalue ``beta``,
    i.e. ``S(r)|beta>``, equivalently ``D(mu beta - nu beta*) S(r)|0>``.
    Evaluated literally (direct Hermite values, exact factorials) so that it
    can serve as an independent check of :func:`squeezed_coherent`; it is
    singular at ``r = 0`` and only meant for modest ``n``.
    """
    r = float(r)
    if r == 0:
        raise ValueError("the Hermite form is singular at r = 0")
    beta = complex(beta)
    mu, nu = math.cosh(r), math.sinh(r)
    x = beta / np.sqrt(complex(2 * mu * nu))
    s = np.sqrt(complex(nu / (2 * mu)))
    pref = mu ** -0.5 * np.exp(-abs(beta) ** 2 / 2 + nu * beta ** 2 / (2 * mu))
    c = [pref * s ** k * hermite(k, x) / math.sqrt(math.factorial(k)) for k in range(n)]
    return FockState(np.array(c, dtype=complex))


def _diagonal_laguerre(x: np.ndarray, log_abs: np.ndarray, kmax: int, nmax: int, shrink: bool = False):
    """Yield ``l_n^{(k)}`` for n = 0 .. nmax-1 and all k in [0, kmax).

    ``l_n^{(k)} = sqrt(n!/(n+k)!) |g|^k exp(-|g|^2/2) L_n^{(k)}(|g|^2)`` is the
    modulus-normalised displacement matrix element on diagonal ``k``; the
    forward recurrence in ``n`` is stable. ``x`` and ``log_abs`` are per-point
    arrays (``|g|^2`` and ``ln|g|``); the yielded arrays have shape
    ``(kmax, points)``, or ``(kmax - n, points)`` with ``shrink=True`` for
    callers that only need ``n + k < kmax``.
    """
    k = np.arange(kmax, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", under="ignore"):
        expo = k[:, None] * log_abs[None, :] - x[None, :] / 2 - 0.5 * gammaln(k + 1)[:, None]
        expo[0] = -x / 2
        cur = np.exp(expo)
    prev = np.zeros_like(cur)
    for n in range(nmax):
        yield cur
        if n + 1 == nmax:
            break
        if shrink:
            keep = kmax - n - 1
            cur, prev, k = cur[:keep], prev[:keep], k[:keep]
        inv = 1.0 / np.sqrt((n + 1) * (n + 1 + k))
        a = ((2 * n + 1 + k) * inv)[:, None]
        b = (np.sqrt(n * (n + k)) * inv)[:, None]
        nxt = cur * (a - inv[:, None] * x[None, :])
        nxt -= b * prev
        prev, cur = cur, nxt


def displacement_elements(gamma: complex, rows: int, cols: int) -> np.ndarray:
    """``<m|D(gamma)|n>`` for ``m < rows``, ``n < cols`` (exact, untruncated)."""
    gamma = complex(gamma)
    x = np.array([abs(gamma) ** 2])
    la = np.array([math.log(abs(gamma)) if gamma != 0 else -np.inf])
    th = np.angle(gamma)
    out = np.zeros((rows, cols), dtype=complex)
    # m >= n: D = e^{ik th} l_n^{(k)}, k = m - n
    kk = np.arange(rows)
    ph = np.exp(1j * kk * th)
    for n, ell in enumerate(_diagonal_laguerre(x, la, rows, min(cols, rows))):
        m = n + kk
        ok = m < rows
        out[m[ok], n] = ph[ok] * ell[ok, 0]
    # m < n: D = (-1)^k e^{-ik th} l_m^{(k)}, k = n - m
    if cols > 1:
        kk = np.arange(cols)
        ph = (-1.0) ** kk * np.exp(-1j * kk * th)
        for m, ell in enumerate(_diagonal_laguerre(x, la, cols, min(rows, cols - 1))):
            n = m + kk
            ok = (n < cols) & (kk > 0)
            out[m, n[ok]] = ph[ok] * ell[ok, 0]
    return out


def displacement_matrix(gamma: complex, n: int) -> OperatorMatrix:
    """Matrix of ``D(gamma) = exp(gamma a^dag - gamma* a)`` on the first ``n`` levels.

    Elements are the exact infinite-space ones (associated Laguerre closed
    form, evaluated by recurrence), so the block is unitary only up to
    truncation; a warning is issued when ``|gamma|^2 > n/4``.
    """
    if n < 1:
        raise ValueError("dimension must be at least 1")
    if abs(gamma) ** 2 > n / 4:
        warnings.warn(f"|gamma|^2 = {abs(gamma) ** 2:.3g} exceeds N/4 = {n / 4:.3g}", TruncationWarning, stacklevel=2)
    return OperatorMatrix(displacement_elements(gamma, n, n), f"D({complex(gamma):.6g})")


def squeeze_matrix(r: float, n: int, pad: int = DEFAULT_PAD) -> OperatorMatrix:
    """``S(r)`` by matrix exponential of the padded generator, cropped to ``n``."""
    w = n + pad
    a = annihilation(w).matrix
    gen = 0.5 * float(r) * (a @ a - a.T @ a.T)
    return OperatorMatrix(expm(gen)[:n, :n], f"S({r:.6g})")


def quadratic_phase_matrix(lam: float, n: int, pad: int = DEFAULT_PAD) -> OperatorMatrix:
    """``exp(i lam q^2)`` via eigendecomposition of the padded, Hermitian ``q^2``."""
    if n < 4:
        raise ValueError("dimension must be at least 4")
    if lam == 0:
        return OperatorMatrix(np.eye(n), "exp(iλq²)")
    w = n + pad
    # build q^2 with one spare level so the kept block is exact
    q = position(w + 1).matrix
    q2 = (q @ q)[:w, :w].real
    vals, vecs = eigh(q2)
    u = (vecs * np.exp(1j * lam * vals)) @ vecs.T
    return OperatorMatrix(u[:n, :n], "exp(iλq²)")


def auto_dimension(alphas, r: float, tol: float = 1e-15, multiple: int = 32, floor: int = 64, cap: int = 4096) -> int:
    """Smallest multiple of 32 keeping ``S(r)|alpha>`` tails below ``tol``.

    Every amplitude in ``alphas`` is probed with the squeezed-coherent
    recurrence on a generous trial basis.
    """
    alphas = np.atleast_1d(np.asarray(alphas, dtype=complex))
    need = 1
    for al in alphas:
        trial = int(8 * (abs(al) ** 2 + abs(al) + 1) * math.exp(2 * abs(r))) + 64
        trial = min(trial, cap)
        p = np.abs(squeezed_coherent(al, r, trial).amplitudes) ** 2
        tail = np.cumsum(p[::-1])[::-1]
        idx = np.nonzero(tail > tol)[0]
        need = max(need, (idx[-1] + 2) if idx.size else 1)
    dim = max(floor, multiple * math.ceil(need / multiple))
    return min(dim, cap)


def worst_case_dimension(alpha: complex, r: float, **kw) -> int:
    """Dimension adequate for ``S(r)`` acting on any state on the circle ``|alpha|``."""
    # the anti-squeezed direction of S(r) is the imaginary axis
    return auto_dimension([1j * abs(alpha), abs(alpha)], r, **kw)


def quadrature_moments(state: FockState) -> tuple[np.ndarray, np.ndarray]:
    """Means ``(<q>, <p>)`` and symmetrised covariance matrix of q and p."""
    c = state.amplitudes
    ce = np.append(c, 0)
    qc, pc = apply_q(c), apply_p(c)
    mq = np.vdot(ce, qc).real
    mp = np.vdot(ce, pc).real
    vq = np.vdot(qc, qc).real - mq ** 2
    vp = np.vdot(pc, pc).real - mp ** 2
    # <{q,p}>/2 = Re <q psi | p psi>
    cqp = np.vdot(qc, pc).real - mq * mp
    return np.array([mq, mp]), np.array([[vq, cqp], [cqp, vp]])


def principal_variances(state: FockState) -> tuple[float, float]:
    """Minor and major axis variances of the quadrature covariance ellipse."""
    _, cov = quadrature_moments(state)
    lo, hi = np.linalg.eigvalsh(cov)
    return float(lo), float(hi)
