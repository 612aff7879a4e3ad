"""Time-dependent cavity frequency profiles.

Three profiles are supported: a constant frequency, the smooth tanh step used
to model a sudden change of cavity length, and a tabulated profile read from
samples (for example a two-column CSV file).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline


class RangeError(ValueError):
    """Raised when a tabulated profile is evaluated outside its samples."""


@dataclass(frozen=True)
class Constant:
    omega: float

    def __post_init__(self):
        if not np.isfinite(self.omega) or self.omega <= 0:
            raise ValueError(f"frequency must be positive, got {self.omega}")

    @property
    def initial(self) -> float:
        return self.omega

    def __call__(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.omega)[()]

    def derivative(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))[()]

    def breakpoints(self, t0: float, t1: float) -> list[float]:
        return []


@dataclass(frozen=True)
class TanhStep:
    """Smooth step from ``omega_i`` to ``omega_f`` centred on ``t_s``.

    ``eps`` is the steepness; the transition takes a time of order ``1/eps``.
    """

    omega_i: float
    omega_f: float
    t_s: float
    eps: float

    def __post_init__(self):
        if self.omega_i <= 0 or self.omega_f <= 0:
            raise ValueError("omega_i and omega_f must be positive")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")

    @property
    def initial(self) -> float:
        return self.omega_i

    @property
    def delta(self) -> float:
        return self.omega_f - self.omega_i

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        wi = self.omega_i
        return (wi * (1.0 + self.delta / (2.0 * wi) * (1.0 + np.tanh(self.eps * (t - self.t_s)))))[()]

    def derivative(self, t):
        x = np.abs(self.eps * (np.asarray(t, dtype=float) - self.t_s))
        e = np.exp(-2.0 * x)
        sech2 = 4.0 * e / (1.0 + e) ** 2
        return (0.5 * self.delta * self.eps * sech2)[()]

    def breakpoints(self, t0: float, t1: float) -> list[float]:
        # the transition is resolved better when the integrators restart on it
        w = 40.0 / self.eps
        pts = (self.t_s - w, self.t_s, self.t_s + w)
        return [p for p in pts if t0 < p < t1]


@dataclass(frozen=True)
class Tabulated:
    times: np.ndarray
    values: np.ndarray
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        w = np.array(self.values, dtype=float)
        if t.ndim != 1 or t.shape != w.shape:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if t.size < 4:
            raise ValueError("a tabulated profile needs at least 4 samples")
        if np.any(np.diff(t) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("tabulated frequencies must be positive")
        t.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", w)
        object.__setattr__(self, "_spline", CubicSpline(t, w, bc_type="clamped"))

    @property
    def initial(self) -> float:
        return float(self.values[0])

    def _check(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.times[0]) or np.any(t > self.times[-1]):
            raise RangeError(
                f"t outside tabulated range [{self.times[0]}, {self.times[-1]}]"
            )
        return t

    def __call__(self, t):
        out = self._spline(self._check(t))
        if np.any(out <= 0):
            raise ValueError("interpolated frequency is not positive")
        return out[()]

    def derivative(self, t):
        return self._spline(self._check(t), 1)[()]

    def breakpoints(self, t0: float, t1: float) -> list[float]:
        return []

    @classmethod
    def from_csv(cls, path) -> "Tabulated":
        """Read a two-column (time, frequency) CSV; a header row is optional."""
        rows = []
        with open(Path(path), newline="", encoding="utf-8") as fh:
            for i, rec in enumerate(csv.reader(fh)):
                if not rec or all(not c.strip() for c in rec):
                    continue
                try:
                    rows.append((float(rec[0]), float(rec[1])))
                except (ValueError, IndexError):
                    if i == 0 and not rows:
                        continue
                    raise ValueError(f"{path}: malformed row {i + 1}: {rec!r}")
        arr = np.array(rows, dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])


FrequencyProfile = Constant | TanhStep | Tabulated


def omega_at(profile: FrequencyProfile, t):
    """Evaluate the cavity frequency at time(s) ``t``."""
    return profile(t)


def omega_integral(profile: FrequencyProfile, t0: float, t1: float) -> float:
    """Accumulated phase ``int_{t0}^{t1} Omega(t') dt'`` by adaptive quadrature.

    The absolute error is kept below 1e-10; tanh steps are split at their
    centre so that very steep steps are not missed by the quadrature.
    """
    if t1 < t0:
        raise ValueError("omega_integral requires t0 <= t1")
    if t0 == t1:
        return 0.0
    if isinstance(profile, Constant):
        return profile.omega * (t1 - t0)
    edges = [t0, *profile.breakpoints(t0, t1), t1]
    if isinstance(profile, Tabulated):
        knots = profile.times[(profile.times > t0) & (profile.times < t1)]
        edges = sorted({*edges, *knots.tolist()})
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = quad(profile, a, b, epsabs=1e-13, epsrel=1e-13, limit=500)
        total += val
    return total
