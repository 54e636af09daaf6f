"""
Command-line driver.

    gasfold <thermo|profile|caustic|shock|validate> --config PATH [--out DIR] [--format csv,json,svg]

Exit codes: 0 success, 1 computation error (or failed validation), 2 usage
or configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import checks
from .config import RunConfig, parse_formats, load_config
from .errors import ConfigError, ContinuationStall, GasfoldError
from .family import fold_count, preimage_count, profile
from .geometry import classify
from .singularity import caustic, cut_profile, shock_front
from .svg import Series, line_plot
from .thermo import applicability, power_law_model

__all__ = ["main", "build_parser", "format_number", "write_csv"]

log = logging.getLogger("gasfold")

COMMANDS = ("thermo", "profile", "caustic", "shock", "validate")


def format_number(v):
    """Shortest round-trip decimal for floats, plain text otherwise."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(format_number(v) for v in row) for row in rows)
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if np.isfinite(v) else str(v)
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, Path):
        return str(v)
    return v


def write_json(path, obj):
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True)
    Path(path).write_bytes((text + "\n").encode("ascii"))


def _t_tag(t):
    text = repr(float(t))
    return text[:-2] if text.endswith(".0") else text


class _Run:
    """Output bookkeeping shared by the subcommands."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.out = cfg.out_dir
        self.out.mkdir(parents=True, exist_ok=True)
        self.written = []

    def wants(self, fmt):
        return fmt in self.cfg.formats

    def path(self, name):
        p = self.out / name
        self.written.append(str(p))
        return p

    def rho_grid(self):
        lo, hi = self.cfg.run["rho_range"]
        return np.geomspace(lo, hi, self.cfg.run["rho_points"])


def cmd_thermo(cfg: RunConfig, run: _Run):
    hm = cfg.hm
    rho = run.rho_grid()
    p = np.asarray(hm.p(rho), dtype=float)
    dp = np.asarray(hm.dp(rho), dtype=float)
    A = np.asarray(hm.A(rho), dtype=float)
    types = [classify(hm, r) for r in rho]
    T = np.asarray(hm.T(rho), dtype=float) if hm.T_of_rho is not None else None
    report = {"model": cfg.model_params, "descriptor": hm.descriptor, "rho_range": list(cfg.run["rho_range"]),
              "points": int(rho.size), "hyperbolic_everywhere": all(s.tag == "Hyperbolic" for s in types),
              "types": sorted({s.tag for s in types})}
    if "m" in hm.params:
        report["m"] = hm.params["m"]
    if cfg.thermo_model is not None and T is not None:
        _, _, ok = applicability(cfg.thermo_model, T, rho)
        report["applicable_everywhere"] = bool(np.all(ok))
        report["applicable_points"] = int(np.count_nonzero(ok))
    else:
        report["applicable_everywhere"] = None

    if run.wants("csv"):
        header = ["rho"] + (["T"] if T is not None else []) + ["p", "dp", "A", "det_P", "type"]
        rows = []
        for i, r in enumerate(rho):
            row = [r] + ([T[i]] if T is not None else []) + [p[i], dp[i], A[i], types[i].det_P, types[i].tag]
            rows.append(row)
        write_csv(run.path("thermo.csv"), header, rows)
    if run.wants("json"):
        write_json(run.path("thermo.json"), report)
    if run.wants("svg"):
        lr = np.log10(rho)
        svg = line_plot([Series(lr, np.log10(np.abs(p)), "log10 |p|"), Series(lr, np.log10(A), "log10 A"),
                         Series(lr, np.log10(dp), "log10 p'")],
                        f"Homentropic model: {hm.descriptor}", "log10 rho", "log10 value")
        run.path("thermo.svg").write_text(svg, encoding="ascii")

    if "m" in report:
        print(f"m = {format_number(report['m'])}")
    print(f"model: {hm.descriptor}")
    print(f"hyperbolic on [{cfg.run['rho_range'][0]!r}, {cfg.run['rho_range'][1]!r}]: "
          f"{'yes' if report['hyperbolic_everywhere'] else 'no'}")
    if report["applicable_everywhere"] is not None:
        print(f"applicability: {'pass' if report['applicable_everywhere'] else 'fail'}")
    return 0


def _fronts(cfg: RunConfig, branches, rho_grid=None):
    fam = cfg.require_family()
    fronts = {}
    for name in branches:
        curve = caustic(fam, rho_grid, name)
        if curve.cusp is None:
            continue
        t_c = curve.cusp[1]
        fronts[name] = shock_front(fam, (t_c, t_c + cfg.run["t_span"]), cfg.run["dt"], name, rho_grid, curve)
    return fronts


def _x_limits(cfg, xs, grid):
    """Plot window in x: ``run.x_range``, else the caustic's x-extent over ``run.t_window``."""
    if cfg.run["x_range"] is not None:
        return cfg.run["x_range"]
    fam = cfg.family
    if fam.lam != 0:
        t_lo, t_hi = cfg.run["t_window"]
        spans = []
        for b in ("plus", "minus"):
            _, t, x = caustic(fam, grid, b).arrays()
            spans.append(x[(t >= t_lo) & (t <= t_hi)])
        cx = np.concatenate(spans)
        if cx.size:
            pad = 0.2 * (cx.max() - cx.min() + 1.0)
            return float(cx.min() - pad), float(cx.max() + pad)
    xs = xs[np.isfinite(xs)]
    if xs.size == 0:
        return None
    lo, hi = np.percentile(xs, [10, 90])
    return (float(lo), float(hi)) if hi > lo else None


def cmd_profile(cfg: RunConfig, run: _Run):
    fam = cfg.require_family()
    if not cfg.run["t"]:
        raise ConfigError("run.t: required key is missing")
    grid = run.rho_grid()
    fronts = list(_fronts(cfg, ("plus", "minus")).values()) if cfg.run["cut"] else []
    summary = []
    series = []
    all_x = []
    for t in cfg.run["t"]:
        samples = cut_profile(fam, t, grid, fronts) if fronts else profile(fam, t, grid)
        if run.wants("csv"):
            rows = [(s.t, s.x, s.rho, s.u, s.branch) for s in samples]
            write_csv(run.path(f"profile_t{_t_tag(t)}.csv"), ["t", "x", "rho", "u", "branch"], rows)
        folds = fold_count(samples)
        xs = np.array([s.x for s in samples])
        probe = np.linspace(xs.min(), xs.max(), 2001) if xs.size else np.empty(0)
        most = max((preimage_count(samples, x) for x in probe), default=0)
        summary.append({"t": t, "samples": len(samples), "fold_count": folds, "max_preimages": most})
        print(f"t={format_number(float(t))}: {len(samples)} samples, fold count {folds}")
        for name in ("plus", "minus"):
            sel = [s for s in samples if s.branch == name]
            if sel:
                series.append(Series(np.array([s.x for s in sel]), np.array([s.rho for s in sel]),
                                     f"t={_t_tag(t)} {name}", dash=None if name == "plus" else "5,3"))
                all_x.append(series[-1].x)
    if run.wants("json"):
        write_json(run.path("profile.json"), {"profiles": summary, "cut": bool(fronts)})
    if run.wants("svg") and series:
        xlim = _x_limits(cfg, np.concatenate(all_x), grid)
        ylim = None
        if xlim is not None:
            ys = np.concatenate([s.y[(s.x >= xlim[0]) & (s.x <= xlim[1])] for s in series])
            ylim = (float(ys.min()), float(ys.max())) if ys.size else None
        svg = line_plot(series, "Density profiles", "x", "rho", xlim=xlim, ylim=ylim)
        run.path("profile.svg").write_text(svg, encoding="ascii")
    elif run.wants("svg"):
        run.path("profile.svg").write_text(line_plot([], "Density profiles (empty)", "x", "rho"), encoding="ascii")
    return 0


def _caustic_series(curves, t_window):
    series = []
    for curve in curves:
        _, t, x = curve.arrays()
        keep = (t >= t_window[0]) & (t <= t_window[1])
        tt, xx = t.copy(), x.copy()
        tt[~keep] = np.nan
        xx[~keep] = np.nan
        series.append(Series(tt, xx, f"caustic {curve.branch}", color="#000000",
                             dash=None if curve.branch == "plus" else "5,3"))
    return series


def cmd_caustic(cfg: RunConfig, run: _Run):
    fam = cfg.require_family()
    fam.require_lambda()
    grid = run.rho_grid()
    curves = [caustic(fam, grid, b) for b in ("plus", "minus")]
    report = {}
    for curve in curves:
        if run.wants("csv"):
            write_csv(run.path(f"caustic_{curve.branch}.csv"), ["rho", "t", "x", "branch"], curve.samples)
        report[curve.branch] = {"points": len(curve.samples), "skipped": curve.skipped,
                                "cusp": None if curve.cusp is None else dict(zip(("rho", "t", "x"), curve.cusp)),
                                "max_t_formula_gap": curve.max_t_formula_gap}
        cusp = "none" if curve.cusp is None else f"t={format_number(curve.cusp[1])} x={format_number(curve.cusp[2])}"
        print(f"caustic {curve.branch}: {len(curve.samples)} points, {curve.skipped} skipped, cusp {cusp}")
    if run.wants("json"):
        write_json(run.path("caustic.json"), report)
    if run.wants("svg"):
        svg = line_plot(_caustic_series(curves, cfg.run["t_window"]), "Caustics", "t", "x")
        run.path("caustic.svg").write_text(svg, encoding="ascii")
    return 0


SHOCK_HEADER = ["t", "x_s", "rho1", "rho2", "residual_H", "residual_x"]


def cmd_shock(cfg: RunConfig, run: _Run):
    fam = cfg.require_family()
    fam.require_lambda()
    branches = ("plus", "minus") if cfg.run["branch"] == "both" else (cfg.run["branch"],)
    grid = run.rho_grid()
    curves = {b: caustic(fam, grid, b) for b in ("plus", "minus")}
    fronts, stalled = {}, None
    for name in branches:
        curve = curves[name]
        if curve.cusp is None:
            raise GasfoldError(f"caustic {name} has no cusp on run.rho_range; no front to continue")
        t_c = curve.cusp[1]
        try:
            fronts[name] = shock_front(fam, (t_c, t_c + cfg.run["t_span"]), cfg.run["dt"], name, grid, curve)
        except ContinuationStall as exc:
            fronts[name] = exc.front
            stalled = (name, exc)
            break

    files = {"plus": "shock.csv", "minus": "shock_minus.csv"} if len(branches) == 2 else {branches[0]: "shock.csv"}
    report = {}
    for name, front in fronts.items():
        if front is None:
            continue
        if run.wants("csv"):
            write_csv(run.path(files[name]), SHOCK_HEADER, [tuple(s) for s in front.samples])
        report[name] = {"t_start": front.t_start, "rho_c": front.rho_c, "x_c": front.x_c,
                        "steps": len(front.samples), "status": front.status,
                        "max_residual_H": max((s.residual_H for s in front.samples), default=None),
                        "max_residual_x": max((s.residual_x for s in front.samples), default=None)}
        print(f"front {name}: t_start={format_number(front.t_start)}, {len(front.samples)} steps, {front.status}")
    if len(fronts) == 2 and stalled is None:
        report["gap"] = checks.check_front_gap(fam, fronts).detail
    if run.wants("json"):
        write_json(run.path("shock.json"), report)
    if run.wants("svg"):
        series = _caustic_series(list(curves.values()), cfg.run["t_window"])
        for name, front in fronts.items():
            if front is not None and front.samples:
                series.append(Series(front.column("t"), front.column("x_s"), f"front {name}", color="#c0392b",
                                     width=2.0, dash=None if name == "plus" else "5,3"))
        run.path("shock.svg").write_text(line_plot(series, "Caustics and shock fronts", "t", "x"), encoding="ascii")
    if stalled is not None:
        name, exc = stalled
        print(f"error: front {name} stalled after t={format_number(exc.last_t)}: {exc}", file=sys.stderr)
        return 1
    return 0


def run_validation(cfg: RunConfig):
    """All invariant checks for the configured family; returns a list of :class:`CheckResult`."""
    fam = cfg.require_family()
    hm = cfg.hm
    results = []
    forms_model = None
    if cfg.run["perturb_m"]:
        if "m" not in hm.params:
            raise ConfigError("run.perturb_m: needs a power-law or ideal-gas model")
        forms_model = power_law_model(hm.params["A0"], hm.params["m"] + cfg.run["perturb_m"], hm.rho_range)
    results.append(checks.check_solution_property(fam, forms_model=forms_model))
    if "m" in hm.params:
        results.append(checks.check_specialization(fam))
    results.append(checks.check_wave_equation(fam))
    results.append(checks.check_varkappa(fam))
    results.append(checks.check_thermodynamics(cfg.thermo_model, hm))
    if fam.lam != 0:
        results.append(checks.check_potential(fam))
        results.append(checks.check_caustic_on_fold(fam))
        results.append(checks.check_caustic_hausdorff(fam, cfg.run["t_window"]))
        try:
            fronts = {b: shock_front(fam, None, cfg.run["dt"], b) for b in ("plus", "minus")}
        except ContinuationStall as exc:
            results.append(checks.CheckResult("shock_front", False, float("inf"), 1e-8,
                                              {"stalled_after": exc.last_t, "message": str(exc)}))
            fronts = None
        if fronts is not None:
            for b, fr in fronts.items():
                results.append(checks.check_shock_front(fam, b, cfg.run["t_span"], cfg.run["dt"], front=fr))
            results.append(checks.check_front_gap(fam, fronts))
            t1, t2 = cfg.run["mass_t"]
            results.append(checks.check_mass_conservation(fam, list(fronts.values()), t1, t2,
                                                          cfg.run["mass_window"]))
            results.append(checks.check_fold_transition(fam, fronts["plus"].t_start, cfg.run["dt"]))
    return results


def cmd_validate(cfg: RunConfig, run: _Run):
    results = run_validation(cfg)
    ok = all(r.passed for r in results)
    report = {"passed": ok, "checks": [r.to_dict() for r in results]}
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: worst {r.worst:.3e} (tolerance {r.tolerance:.1e})")
    if run.wants("json"):
        write_json(run.path("validate.json"), report)
    else:
        print(json.dumps(_jsonable(report), sort_keys=True))
    return 0 if ok else 1


HANDLERS = {"thermo": cmd_thermo, "profile": cmd_profile, "caustic": cmd_caustic,
            "shock": cmd_shock, "validate": cmd_validate}


def build_parser():
    parser = argparse.ArgumentParser(prog="gasfold", description="Multivalued solutions of 1-D gas dynamics.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="INI configuration file")
    parser.add_argument("--out", help="output directory (overrides output.dir)")
    parser.add_argument("--format", help="comma-separated subset of csv,json,svg (overrides output.formats)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.out:
            cfg.out_dir = Path(args.out)
        if args.format:
            cfg.formats = parse_formats(args.format, "--format")
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"gasfold: config error: {exc}", file=sys.stderr)
        return 2
    try:
        return HANDLERS[args.command](cfg, _Run(cfg))
    except ConfigError as exc:
        print(f"gasfold: config error: {exc}", file=sys.stderr)
        return 2
    except (GasfoldError, ValueError, ArithmeticError) as exc:
        print(f"gasfold: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
