"""Scenario files: INI sections of ``key = value`` pairs, strictly validated.

Every key is unique across sections, so a command-line flag of the same name
(``--omega_f 4``) can override it without naming the section. Precedence is
preset, then scenario file, then flags.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

from .frequency import Constant, Tabulated, TanhStep
from .wigner import GridSpec


class ConfigError(ValueError):
    """Invalid scenario; the CLI maps it to exit status 2."""


SCHEMA: dict[str, dict[str, str]] = {
    "profile": {
        "kind": "tanh",
        "omega_i": "1",
        "omega_f": "2",
        "t_s": "2",
        "eps": "10",
        "omega": "1",
        "table": "",
        "t_end": "10",
    },
    "state": {
        "alpha_re": "3",
        "alpha_im": "0",
        "k": "0",
        "n": "auto",
        "input": "cat",
    },
    "solver": {
        "ermakov": "auto",
        "tol": "1e-12",
        "mesh_step": "1e-3",
        "numeric": "false",
    },
    "grid": {
        "grid": "auto",
        "points": "161",
        "method": "both",
    },
    "output": {
        "dir": "out",
        "formats": "csv,json",
        "seed": "0",
    },
}

KEY_SECTION = {key: sec for sec, keys in SCHEMA.items() for key in keys}

_FIG = {"kind": "tanh", "omega_i": "1", "t_s": "2", "eps": "10", "t_end": "10"}
PRESETS: dict[str, dict[str, str]] = {
    "fig1": {**_FIG, "omega_f": "2,3,4", "dir": "out/fig1"},
    "fig2": {**_FIG, "omega_f": "2,3,4", "dir": "out/fig2"},
    "fig3a": {**_FIG, "omega_f": "2", "alpha_re": "3", "alpha_im": "0", "dir": "out/fig3a"},
    "fig3b": {**_FIG, "omega_f": "4", "alpha_re": "3", "alpha_im": "0", "dir": "out/fig3b"},
}

SWEEPABLE = ("omega_i", "omega_f", "t_s", "eps", "alpha_re", "alpha_im", "k")


@dataclass(frozen=True)
class Scenario:
    kind: str
    omega_i: float
    omega_f: tuple[float, ...]
    t_s: float
    eps: float
    omega: float
    table: str
    t_end: float
    alpha: complex
    k: int
    n: int | None
    input: str
    ermakov: str
    tol: float
    mesh_step: float
    numeric: bool
    grid: tuple[float, float, float, float] | None
    points: int
    method: str
    out_dir: Path
    formats: tuple[str, ...]
    seed: int
    raw: dict = field(default_factory=dict, compare=False)

    def profiles(self):
        """One frequency profile per final frequency (a single one otherwise)."""
        if self.kind == "tanh":
            return [TanhStep(self.omega_i, wf, self.t_s, self.eps) for wf in self.omega_f]
        if self.kind == "constant":
            return [Constant(self.omega)]
        return [Tabulated.from_csv(self.table)]

    def single_omega_f(self) -> float:
        if self.kind != "tanh":
            raise ConfigError("this command needs a tanh profile")
        if len(self.omega_f) != 1:
            raise ConfigError("omega_f must be a single value for this command (use sweep for lists)")
        return self.omega_f[0]

    def grid_spec(self) -> GridSpec | None:
        if self.grid is None:
            return None
        return GridSpec(*self.grid, self.points, self.points)

    def with_values(self, **values: str) -> "Scenario":
        """Re-validate with some raw keys replaced (used by sweeps)."""
        raw = dict(self.raw)
        raw.update({k: str(v) for k, v in values.items()})
        return build(raw)

    def echo(self) -> dict:
        """Raw key/value pairs, for reproducibility metadata."""
        return {k: self.raw[k] for sec in SCHEMA for k in SCHEMA[sec]}


def _float(raw, key, positive=False, nonneg=False) -> float:
    try:
        v = float(raw[key])
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw[key]!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"{key}: must be finite")
    if positive and v <= 0:
        raise ConfigError(f"{key}: must be positive")
    if nonneg and v < 0:
        raise ConfigError(f"{key}: must be non-negative")
    return v


def _int(raw, key, minimum=None) -> int:
    try:
        v = int(raw[key])
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw[key]!r}") from None
    if minimum is not None and v < minimum:
        raise ConfigError(f"{key}: must be >= {minimum}")
    return v


def _choice(raw, key, options) -> str:
    v = raw[key].strip().lower()
    if v not in options:
        raise ConfigError(f"{key}: expected one of {', '.join(options)}, got {raw[key]!r}")
    return v


def _bool(raw, key) -> bool:
    v = raw[key].strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw[key]!r}")


def build(raw: dict[str, str]) -> Scenario:
    """Validate flat raw values and build a :class:`Scenario`."""
    unknown = sorted(set(raw) - set(KEY_SECTION))
    if unknown:
        raise ConfigError(f"unknown key: {unknown[0]}")
    full = {k: v for sec in SCHEMA.values() for k, v in sec.items()}
    full.update(raw)
    raw = full

    kind = _choice(raw, "kind", ("tanh", "constant", "tabulated"))
    omega_i = _float(raw, "omega_i", positive=True)
    try:
        omega_f = tuple(float(v) for v in raw["omega_f"].split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"omega_f: expected a number or comma list, got {raw['omega_f']!r}") from None
    if not omega_f or any(not math.isfinite(v) or v <= 0 for v in omega_f):
        raise ConfigError("omega_f: values must be positive")
    t_s = _float(raw, "t_s", nonneg=True)
    eps = _float(raw, "eps", positive=True)
    omega = _float(raw, "omega", positive=True)
    table = raw["table"].strip()
    if kind == "tabulated":
        if not table:
            raise ConfigError("table: a tabulated profile needs a CSV path")
        if not Path(table).is_file():
            raise ConfigError(f"table: file not found: {table}")
        try:
            tab = Tabulated.from_csv(table)
        except ValueError as exc:
            raise ConfigError(f"table: {exc}") from None
    t_end = _float(raw, "t_end", positive=True)
    if kind == "tabulated" and not (tab.times[0] <= 0.0 and t_end <= tab.times[-1]):
        raise ConfigError("t_end: the table must cover [0, t_end]")
    if kind == "tanh" and t_end <= t_s:
        raise ConfigError("t_end: must exceed t_s")

    alpha = complex(_float(raw, "alpha_re"), _float(raw, "alpha_im"))
    k = _int(raw, "k", minimum=0)
    n_raw = raw["n"].strip().lower()
    n = None if n_raw == "auto" else _int(raw, "n", minimum=4)
    inp = _choice(raw, "input", ("cat", "vacuum"))

    ermakov = _choice(raw, "ermakov", ("auto", "numeric", "analytic"))
    if ermakov == "analytic" and kind != "tanh":
        raise ConfigError("ermakov: the analytic route exists only for tanh profiles")
    tol = _float(raw, "tol", positive=True)
    mesh_step = _float(raw, "mesh_step", positive=True)
    if mesh_step > t_end:
        raise ConfigError("mesh_step: must not exceed t_end")
    numeric = _bool(raw, "numeric")

    g = raw["grid"].strip().lower()
    if g == "auto":
        grid = None
    else:
        try:
            grid = tuple(float(v) for v in g.split(","))
        except ValueError:
            raise ConfigError(f"grid: expected 'auto' or q_min,q_max,p_min,p_max, got {raw['grid']!r}") from None
        if len(grid) != 4 or not (grid[1] > grid[0] and grid[3] > grid[2]):
            raise ConfigError("grid: need increasing q_min,q_max,p_min,p_max")
    points = _int(raw, "points", minimum=2)
    method = _choice(raw, "method", ("series", "closed", "both"))

    formats = tuple(sorted({f.strip().lower() for f in raw["formats"].split(",") if f.strip()}))
    if not formats or not set(formats) <= {"csv", "json"}:
        raise ConfigError("formats: must be a non-empty subset of csv,json")
    seed = _int(raw, "seed")

    return Scenario(
        kind, omega_i, omega_f, t_s, eps, omega, table, t_end, alpha, k, n, inp,
        ermakov, tol, mesh_step, numeric, grid, points, method,
        Path(raw["dir"]), formats, seed, raw,
    )


def read_file(path) -> dict[str, str]:
    """Flat raw values from an INI scenario file; unknown sections or keys raise."""
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except FileNotFoundError:
        raise ConfigError(f"scenario file not found: {path}") from None
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    out: dict[str, str] = {}
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section: {sec}")
        for key, value in cp.items(sec):
            if key not in SCHEMA[sec]:
                raise ConfigError(f"unknown key: {key}")
            out[key] = value
    return out


def load(path=None, preset: str | None = None, overrides: dict[str, str] | None = None) -> Scenario:
    raw: dict[str, str] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset: {preset}")
        raw.update(PRESETS[preset])
    if path is not None:
        raw.update(read_file(path))
    raw.update(overrides or {})
    return build(raw)


def dump(scenario: Scenario) -> str:
    """INI text that reproduces ``scenario``."""
    lines = []
    for sec, keys in SCHEMA.items():
        lines.append(f"[{sec}]")
        lines += [f"{k} = {scenario.raw[k]}" for k in keys]
        lines.append("")
    return "\n".join(lines)

