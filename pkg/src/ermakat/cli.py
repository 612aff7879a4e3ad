"""Command-line front end: ``ermakat <rho|cat|wigner|sweep>``.

Exit status: 0 success, 2 invalid scenario, 3 solver failure, 4 internal
consistency failure (cat fidelity or Wigner discrepancy), 5 every sweep point
failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, fock
from .config import PRESETS, SWEEPABLE, KEY_SECTION, ConfigError, Scenario, load
from .ermakov import IntegrationError, solve_analytic_step, solve_numeric
from .evolution import build_cat_spec, evolve, make_cat
from .frequency import TanhStep
from .io import fmt, write_csv_table, write_json, write_text
from .wigner import (
    WignerGrid,
    _thread_count,
    auto_grid,
    auto_grid_for_cat,
    marginals,
    negativity_volume,
    wigner_closed_form,
    wigner_series,
)

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_CONSISTENCY, EXIT_SWEEP = 0, 2, 3, 4, 5
CAT_FIDELITY_FLOOR = 1 - 1e-6
WIGNER_DISCREPANCY_CEIL = 1e-5


class SolverFailure(RuntimeError):
    pass


class ConsistencyFailure(RuntimeError):
    pass


def _tag(value: float) -> str:
    return "_wf" + format(value, "g")


def _run_meta(command: str, sc: Scenario) -> dict:
    return {"command": command, "version": __version__, "scenario": sc.echo()}


# --- rho -------------------------------------------------------------------


def _rho_method(sc: Scenario) -> str:
    if sc.ermakov == "auto":
        return "analytic" if sc.kind == "tanh" else "numeric"
    return sc.ermakov


def _solve(profile, sc: Scenario, method: str, t_end: float | None = None):
    t_end = sc.t_end if t_end is None else t_end
    try:
        if method == "analytic":
            p = profile
            return solve_analytic_step(p.omega_i, p.omega_f, p.t_s, p.eps, t_end, sc.mesh_step, sc.tol)
        return solve_numeric(profile, t_end=t_end, tol=sc.tol, mesh_step=sc.mesh_step)
    except IntegrationError as exc:
        raise SolverFailure(str(exc)) from exc


def _write_solution(sol, stem: Path, sc: Scenario):
    if "csv" in sc.formats:
        sol.to_csv(stem.with_suffix(".csv"))
    if "json" in sc.formats:
        write_json(stem.with_suffix(".json"), {
            "provenance": sol.provenance,
            "t": sol.t, "rho": sol.rho, "rho_dot": sol.rho_dot, "theta": sol.theta,
        })


def cmd_rho(sc: Scenario) -> int:
    out = sc.out_dir
    method = _rho_method(sc)
    profiles = sc.profiles()
    errors = []
    omega_cols, omega_names = [], []
    t_grid = None
    for prof in profiles:
        tag = _tag(prof.omega_f) if isinstance(prof, TanhStep) else ""
        sol = _solve(prof, sc, method)
        after = prof.t_s if isinstance(prof, TanhStep) else None
        sol = sol.with_minima(after)
        _write_solution(sol, out / f"rho{tag}", sc)
        write_text(out / f"minima{tag}.json", sol.minima_json())
        t_grid = sol.t
        omega_cols.append(prof(sol.t))
        omega_names.append("omega" + tag)
        if sc.numeric:
            if not isinstance(prof, TanhStep):
                raise ConfigError("numeric: the comparison needs a tanh profile (no closed form otherwise)")
            num = sol if sol.provenance == "Numeric" else _solve(prof, sc, "numeric")
            ana = sol if sol.provenance == "Analytic" else _solve(prof, sc, "analytic")
            _write_solution(num.with_minima(prof.t_s), out / f"rho_numeric{tag}", sc)
            errors.append({"omega_f": prof.omega_f, "max_abs_error": float(np.max(np.abs(num.rho - ana.rho)))})
    write_csv_table(out / "omega.csv", ["t", *omega_names], np.column_stack([t_grid, *omega_cols]))
    meta = _run_meta("rho", sc)
    meta["method"] = method
    if sc.numeric:
        write_json(out / "rho_error.json", {"cases": errors})
    write_json(out / "run.json", meta)
    return EXIT_OK


# --- cat -------------------------------------------------------------------


def _cat_method(sc: Scenario) -> str:
    return "numeric" if sc.ermakov == "auto" else sc.ermakov


def _cat_spec(sc: Scenario):
    wf = sc.single_omega_f()
    if wf == sc.omega_i:
        print("warning: omega_f equals omega_i; rho stays constant and no cat is produced", file=sys.stderr)
    t_auto = sc.t_s + (sc.k + 2) * math.pi / min(sc.omega_i, wf) + 1.0
    try:
        return build_cat_spec(sc.alpha, sc.omega_i, wf, sc.t_s, sc.eps, sc.k, _cat_method(sc),
                              t_end=max(sc.t_end, t_auto), tol=sc.tol)
    except IntegrationError as exc:
        raise SolverFailure(str(exc)) from exc
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise SolverFailure(str(exc)) from exc


def _cat_fidelity(sc: Scenario, spec, sol, cat):
    """Fidelity of the exactly evolved state against the cat formula, or
    ``(None, reason)`` when the coherent-input evolution does not apply."""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", fock.TruncationWarning)
            res = evolve(sc.alpha, sol, spec.chi, spec.t_min)
    except ValueError as exc:
        return None, None, str(exc)
    return fock.fidelity(res.state, cat.state), res.metadata["n"], None


def cat_summary(sc: Scenario, negativity: bool = True) -> dict:
    """Everything one sweep row or one ``cat`` run reports."""
    spec, sol = _cat_spec(sc)
    cat = make_cat(spec, sc.n)
    fid, n_evolve, reason = _cat_fidelity(sc, spec, sol, cat)
    row = {
        "spec": spec, "sol": sol, "cat": cat,
        "fidelity": fid, "n_evolve": n_evolve, "fidelity_note": reason,
        "mean_n": cat.state.mean_photon(), "parity": cat.state.parity(),
    }
    if negativity:
        grid = wigner_closed_form(spec, auto_grid_for_cat(spec, sc.points))
        row["negativity"] = negativity_volume(grid)
    return row


def _state_table(state) -> np.ndarray:
    c = state.amplitudes
    return np.column_stack([np.arange(c.size), c.real, c.imag, np.abs(c) ** 2])


def cmd_cat(sc: Scenario) -> int:
    out = sc.out_dir
    s = cat_summary(sc, negativity=False)
    spec, cat = s["spec"], s["cat"]
    meta = {"n": cat.metadata["n"], "n_policy": "auto" if sc.n is None else "fixed"}
    if "degenerate" in cat.metadata:
        meta["degenerate"] = cat.metadata["degenerate"]
    write_json(out / "catspec.json", {**spec.to_dict(), "metadata": meta})
    if "json" in sc.formats:
        write_json(out / "cat_state.json", {
            "provenance": cat.provenance, "metadata": meta,
            "norm": cat.state.norm(), "mean_photon": s["mean_n"], "parity": s["parity"],
            "state": cat.state.to_dict(),
        })
    if "csv" in sc.formats:
        write_csv_table(out / "cat_state.csv", ["n", "re", "im", "prob"], _state_table(cat.state))
    fid = {"fidelity": s["fidelity"], "threshold": CAT_FIDELITY_FLOOR,
           "n_evolve": s["n_evolve"], "n_cat": cat.metadata["n"]}
    if s["fidelity_note"]:
        fid["note"] = s["fidelity_note"]
    write_json(out / "fidelity.json", fid)
    write_json(out / "run.json", _run_meta("cat", sc))
    if s["fidelity"] is not None and s["fidelity"] < CAT_FIDELITY_FLOOR:
        raise ConsistencyFailure(f"evolve vs make_cat fidelity {s['fidelity']:.3e} below {CAT_FIDELITY_FLOOR}")
    return EXIT_OK


# --- wigner ----------------------------------------------------------------


def grid_summary(grid: WignerGrid) -> dict:
    pq, pp = marginals(grid)
    var = []
    for axis, m in ((grid.q, pq), (grid.p, pp)):
        d = axis[1] - axis[0]
        mean = float((axis * m).sum() * d)
        var.append(float(((axis - mean) ** 2 * m).sum() * d))
    return {
        "method": grid.method,
        "integral": grid.integral(),
        "min": float(grid.values.min()),
        "max": float(grid.values.max()),
        "w_origin": grid.value_at(0.0, 0.0),
        "negativity": negativity_volume(grid),
        "var_q": var[0],
        "var_p": var[1],
        "tail_mass": grid.tail_mass,
    }


def _write_grid(grid: WignerGrid, stem: Path, sc: Scenario):
    if "csv" in sc.formats:
        grid.to_csv(stem.with_suffix(".csv"))
    if "json" in sc.formats:
        grid.to_json(stem.with_suffix(".json"))


def cmd_wigner(sc: Scenario) -> int:
    out = sc.out_dir
    summary: dict = {}
    if sc.input == "vacuum":
        if sc.method != "series":
            raise ConfigError("method: the vacuum input supports only the series method")
        state = fock.coherent(0.0, sc.n or 32)
        spec = None
        spec_grid = sc.grid_spec() or auto_grid(state, sc.points)
        summary["n"] = state.dim
    else:
        spec, _ = _cat_spec(sc)
        cat = make_cat(spec, sc.n)
        state = cat.state
        spec_grid = sc.grid_spec() or auto_grid_for_cat(spec, sc.points)
        summary["n"] = cat.metadata["n"]
        summary["catspec"] = spec.to_dict()
    summary["n_policy"] = "auto" if sc.n is None else "fixed"
    summary["parity"] = state.parity()
    grids = {}
    if sc.method in ("series", "both"):
        grids["series"] = wigner_series(state, spec_grid)
    if sc.method in ("closed", "both"):
        grids["closed"] = wigner_closed_form(spec, spec_grid)
    for name, g in grids.items():
        _write_grid(g, out / f"wigner_{name}", sc)
        summary[name] = grid_summary(g)
    disc = None
    if len(grids) == 2:
        disc = float(np.max(np.abs(grids["series"].values - grids["closed"].values)))
        summary["max_discrepancy"] = disc
        write_json(out / "wigner_discrepancy.json", {"max_discrepancy": disc, "threshold": WIGNER_DISCREPANCY_CEIL})
    write_json(out / "wigner_summary.json", summary)
    write_json(out / "run.json", _run_meta("wigner", sc))
    if disc is not None and disc > WIGNER_DISCREPANCY_CEIL:
        raise ConsistencyFailure(f"series vs closed-form discrepancy {disc:.3e} exceeds {WIGNER_DISCREPANCY_CEIL}")
    return EXIT_OK


# --- sweep -----------------------------------------------------------------

SWEEP_COLUMNS = ["t_min", "rho_min", "r_min", "chi", "mean_n", "parity", "negativity", "fidelity"]


def parse_sweeps(items: list[str]) -> list[tuple[str, list[str]]]:
    if not items:
        raise ConfigError("sweep: give at least one --sweep key=v1,v2,...")
    if len(items) > 2:
        raise ConfigError("sweep: at most two parameters can be swept")
    out = []
    for item in items:
        key, sep, values = item.partition("=")
        key = key.strip()
        if not sep or key not in SWEEPABLE:
            raise ConfigError(f"sweep: expected key=v1,v2 with key in {', '.join(SWEEPABLE)}, got {item!r}")
        vals = [v.strip() for v in values.split(",") if v.strip()]
        if not vals:
            raise ConfigError(f"sweep: no values for {key}")
        out.append((key, vals))
    if len(out) == 2 and out[0][0] == out[1][0]:
        raise ConfigError("sweep: the two swept parameters must differ")
    return out


def _sweep_point(sc: Scenario, values: dict[str, str]) -> dict:
    try:
        point = sc.with_values(**values)
        s = cat_summary(point)
    except (ConfigError, SolverFailure, ValueError, ArithmeticError) as exc:
        return {"error": str(exc)}
    spec = s["spec"]
    row = {
        "t_min": spec.t_min, "rho_min": spec.rho_min, "r_min": spec.r_min, "chi": spec.chi,
        "mean_n": s["mean_n"], "parity": s["parity"], "negativity": s["negativity"],
        "fidelity": s["fidelity"], "error": s["fidelity_note"] or "",
    }
    return row


def cmd_sweep(sc: Scenario, sweeps: list[tuple[str, list[str]]]) -> int:
    keys = [k for k, _ in sweeps]
    points = [dict(zip(keys, combo)) for combo in itertools.product(*(v for _, v in sweeps))]
    with ThreadPoolExecutor(_thread_count(None)) as pool:
        rows = list(pool.map(lambda p: _sweep_point(sc, p), points))

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([*keys, *SWEEP_COLUMNS, "error"])
    for p, row in zip(points, rows):
        cells = [fmt(float(p[k])) for k in keys]
        cells += ["" if row.get(c) is None else fmt(row[c]) for c in SWEEP_COLUMNS]
        cells.append(row.get("error", ""))
        w.writerow(cells)
    write_text(sc.out_dir / "sweep.csv", buf.getvalue())
    if "json" in sc.formats:
        write_json(sc.out_dir / "sweep.json", {
            "parameters": keys,
            "points": [{**{k: float(p[k]) for k in keys}, **row} for p, row in zip(points, rows)],
        })
    write_json(sc.out_dir / "run.json", {**_run_meta("sweep", sc), "sweep": {k: v for k, v in sweeps}})
    failed = sum(1 for r in rows if "t_min" not in r)
    if failed:
        print(f"sweep: {failed} of {len(rows)} points failed", file=sys.stderr)
    return EXIT_SWEEP if failed == len(rows) else EXIT_OK


# --- entry point -----------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ermakat",
        allow_abbrev=False,
        description="Kerr-cavity cat states: Ermakov solutions, cat construction, Wigner grids, sweeps.",
        epilog="Any scenario key can be overridden with --<key> <value>, e.g. --omega_f 4 --eps 1e4.",
    )
    ap.add_argument("command", choices=["rho", "cat", "wigner", "sweep"])
    ap.add_argument("--config", help="INI scenario file")
    ap.add_argument("--preset", choices=sorted(PRESETS))
    ap.add_argument("--numeric", action="store_true", help="rho: also solve numerically and report the error")
    ap.add_argument("--sweep", action="append", default=[], metavar="KEY=V1,V2",
                    help="sweep: parameter and values (at most twice)")
    ap.add_argument("--version", action="version", version=f"ermakat {__version__}")
    return ap


def _overrides(rest: list[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    i = 0
    while i < len(rest):
        tok = rest[i]
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument: {tok}")
        key, eq, value = tok[2:].partition("=")
        if not eq:
            if i + 1 >= len(rest):
                raise ConfigError(f"missing value for --{key}")
            value = rest[i + 1]
            i += 1
        i += 1
        if key not in KEY_SECTION:
            raise ConfigError(f"unknown key: {key}")
        out[key] = value
    return out


def main(argv: list[str] | None = None) -> int:
    args, rest = _parser().parse_known_args(argv)
    try:
        ov = _overrides(rest)
        if args.numeric:
            ov["numeric"] = "true"
        if args.config is None and args.preset is None:
            raise ConfigError("give --config FILE and/or --preset NAME")
        sc = load(args.config, args.preset, ov)
        if args.command == "rho":
            return cmd_rho(sc)
        if args.command == "cat":
            return cmd_cat(sc)
        if args.command == "wigner":
            return cmd_wigner(sc)
        return cmd_sweep(sc, parse_sweeps(args.sweep))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ConsistencyFailure as exc:
        print(f"consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY


if __name__ == "__main__":
    sys.exit(main())
