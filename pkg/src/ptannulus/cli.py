"""Command-line interface.

Every subcommand writes a CSV with one header line plus a sibling JSON file
with the run configuration, its hash, and results metadata. Identical
configurations give byte-identical files whatever ``--workers`` is.

Exit codes: 0 success, 1 invalid input, 2 solver failure, 3 the
``--check-convergence`` comparison exceeded its tolerance.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import field, io, phasemap, radial, threshold
from .eigen import EigenConvergenceError, eigpairs, eigvals
from .operator import PotentialSpec, SpecError, build, parse_term_key

log = logging.getLogger("ptannulus")

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_CONVERGENCE = 0, 1, 2, 3
DEFAULTS = {"cutoff_M": 100, "resolution": 1e-4, "grid": [101, 101], "a_ratio": 0.0, "output_dir": "."}
SPECTRUM_TOL = 1e-6  # lowest eigenvalues, M vs 2M
FLOW_TOL = 1e-6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _term_value(text):
    try:
        key, value = text.split("=")
        kind, order = parse_term_key(key)
        return f"{kind}:{order}", float(value)
    except (ValueError, SpecError) as exc:
        raise argparse.ArgumentTypeError(f"expected v:<n>=<beta> or u:<p>=<lambda>, got {text!r}: {exc}")


def _common(p, cutoff_default=None):
    p.add_argument("--config", help="JSON run configuration (flags override it)")
    p.add_argument("--M", type=int, dest="cutoff_M", help=f"angular momentum cutoff (default {cutoff_default or 100})")
    p.add_argument("--n", type=int, help="order of a single gain-loss term V_n")
    p.add_argument("--beta", type=float, help="strength of that term")
    p.add_argument("--add", type=_term_value, action="append", default=[], metavar="TERM=VALUE",
                   help="extra term, e.g. v:3=1.5 or u:2=-0.5 (repeatable)")
    p.add_argument("--workers", type=int, help="worker threads (default: CPU count)")
    p.add_argument("--output-dir", help="directory for output files (default: .)")
    p.add_argument("--check-convergence", action="store_true", help="rerun at 2M and compare (exit 3 on mismatch)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ptannulus", description="PT-symmetric annulus spectra, thresholds and phase diagrams")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("spectrum", help="eigenvalues alpha^2 of the angular matrix")
    _common(p)
    p.add_argument("--vectors", action="store_true", help="also write eigenvectors.csv")

    p = sub.add_parser("threshold", help="PT-breaking threshold")
    _common(p)
    p.add_argument("--method", choices=["scan", "2x2", "3x3"], default="scan")
    p.add_argument("--direction", help="term to scan (default v:<n>); prefix '-' for the negative ray, written --direction=-v:1")
    p.add_argument("--resolution", type=float)
    p.add_argument("--ceiling", type=float, help="largest strength scanned")

    p = sub.add_parser("flow", help="lowest eigenvalues followed as the strength grows")
    _common(p)
    p.add_argument("--direction", help="term to ramp (default v:<n>)")
    p.add_argument("--beta-max", type=float, required=True)
    p.add_argument("--steps", type=int, default=401)
    p.add_argument("--levels", type=int, default=4)

    p = sub.add_parser("phasemap", help="max |Im alpha^2| over two strengths")
    _common(p, cutoff_default=phasemap.DEFAULT_CUTOFF)
    p.add_argument("--axis1", required=True, help="term on axis 1, e.g. v:1 or u:2")
    p.add_argument("--axis2", required=True)
    p.add_argument("--range1", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--range2", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--grid", type=int, nargs=2, metavar=("N1", "N2"))
    p.add_argument("--normalized", action="store_true", help="axes in units of each term's own threshold")
    p.add_argument("--no-matrix", action="store_true", help="skip the gnuplot matrix file")

    p = sub.add_parser("density", help="eigenmode density and gain/loss weights")
    _common(p)
    p.add_argument("--beta-rel", type=float, help="strength in units of the term's threshold")
    p.add_argument("--level", type=int, default=0, help="index in the sorted spectrum (default 0)")
    p.add_argument("--q", type=int, default=1, help="radial quantum number")
    p.add_argument("--a-ratio", type=float)
    p.add_argument("--grid", type=int, nargs=2, metavar=("N_RHO", "N_PHI"), default=[256, 512])

    p = sub.add_parser("radial", help="radial momenta kappa and energies E = kappa^2")
    p.add_argument("--alpha", type=float, nargs="+", required=True)
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--a-ratio", type=float)
    p.add_argument("--config")
    p.add_argument("--output-dir")
    p.add_argument("--workers", type=int)
    p.add_argument("--check-convergence", action="store_true", help="accepted for uniformity; nothing to compare")
    p.add_argument("-v", "--verbose", action="store_true")
    return ap


# --- configuration -----------------------------------------------------------

def load_config(args) -> dict:
    cfg = dict(DEFAULTS)
    spec = PotentialSpec()
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}")
        unknown = set(data) - {"spec", "cutoff_M", "resolution", "grid", "a_ratio", "output_dir", "workers"}
        if unknown:
            raise UsageError(f"unknown config fields: {sorted(unknown)}")
        if "spec" in data:
            spec = PotentialSpec.from_dict(data["spec"])
        cfg.update({k: v for k, v in data.items() if k != "spec"})
    strengths = {}
    n = getattr(args, "n", None)
    beta = getattr(args, "beta", None)
    if beta is not None and n is None:
        raise UsageError("--beta needs --n")
    if n is not None:
        parse_term_key(f"v:{n}")
        if beta is not None:
            strengths[f"v:{n}"] = beta
    for key, value in getattr(args, "add", []):
        strengths[key] = value
    if strengths:
        spec = spec.with_strengths(strengths)
    cfg["spec"] = spec
    for key in ("cutoff_M", "resolution", "output_dir", "workers"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if getattr(args, "a_ratio", None) is not None:
        cfg["a_ratio"] = args.a_ratio
    if cfg.get("workers") is None:
        cfg["workers"] = os.cpu_count() or 1
    if int(cfg["workers"]) < 1:
        raise UsageError("--workers must be >= 1")
    if not 0 <= float(cfg["a_ratio"]) < 1:
        raise UsageError("a_ratio must lie in [0, 1)")
    return cfg


def _header(cfg, command, extra_cfg=None, **results):
    public = {k: v for k, v in cfg.items() if k not in ("workers", "output_dir", "spec")}
    public["spec"] = cfg["spec"].to_dict()
    public["command"] = command
    public.update(extra_cfg or {})
    return {"config": public, "config_hash": io.config_hash(public), **results}


def _out(cfg, name) -> Path:
    return Path(cfg["output_dir"]) / name


# --- commands ----------------------------------------------------------------

def cmd_spectrum(args, cfg):
    M = int(cfg["cutoff_M"])
    op = build(cfg["spec"], M)
    sp = eigpairs(op) if args.vectors else eigvals(op)
    io.write_csv(_out(cfg, "spectrum.csv"), ["index", "re", "im"], sp.value_rows())
    if args.vectors:
        io.write_csv(_out(cfg, "eigenvectors.csv"), ["index", "m", "c_re", "c_im"], sp.vector_rows())
    results = {"count": len(sp), "max_imag": sp.max_imag, "defective": sp.defective}
    status = EXIT_OK
    if args.check_convergence:
        k = min(10, len(sp))
        sp2 = eigvals(build(cfg["spec"], 2 * M))
        diff = float(np.max(np.abs(sp.eigenvalues[:k] - sp2.eigenvalues[:k])))
        results["convergence"] = {"cutoff_M_2": 2 * M, "lowest": k, "max_abs_diff": diff, "tolerance": SPECTRUM_TOL}
        status = EXIT_OK if diff <= SPECTRUM_TOL else EXIT_CONVERGENCE
    io.write_json(_out(cfg, "spectrum.json"), _header(cfg, "spectrum", {"vectors": args.vectors}, **results))
    print(f"max_imag {sp.max_imag!r}")
    return status


def _direction(args, cfg):
    text = args.direction
    if text is None:
        if args.n is None:
            raise UsageError("give --n or --direction")
        text = f"v:{args.n}"
    sign = -1.0 if text.startswith("-") else 1.0
    kind, order = parse_term_key(text.lstrip("+-"))
    return {f"{kind}:{order}": sign}


def cmd_threshold(args, cfg):
    if args.method in ("2x2", "3x3"):
        if args.n is None:
            raise UsageError(f"--method {args.method} needs --n")
        value = threshold.analytic_2x2(args.n) if args.method == "2x2" else threshold.analytic_3x3(args.n)
        res = threshold.ThresholdResult(value, (value, value), f"analytic_{args.method}")
        io.write_json(_out(cfg, "threshold.json"),
                      _header(cfg, "threshold", {"method": args.method, "n": args.n}, result=res.to_dict()))
        print(f"beta_c {value!r}")
        return EXIT_OK
    direction = _direction(args, cfg)
    base = cfg["spec"].with_strengths({k: 0.0 for k in direction})
    M = int(cfg["cutoff_M"])
    kw = dict(resolution=float(cfg["resolution"]), ceiling=args.ceiling)
    res = threshold.find_threshold(base, direction, M, workers=int(cfg["workers"]), **kw)
    results = {"result": res.to_dict()}
    status = EXIT_OK
    if args.check_convergence:
        res2 = threshold.find_threshold(base, direction, 2 * M, workers=int(cfg["workers"]),
                                        trace_levels=False, **kw)
        diff = abs(res2.beta_c - res.beta_c)
        tol = 10 * float(cfg["resolution"])
        results["convergence"] = {"cutoff_M_2": 2 * M, "beta_c_2": res2.beta_c, "abs_diff": diff, "tolerance": tol}
        status = EXIT_OK if diff <= tol else EXIT_CONVERGENCE
    extra = {"method": "scan", "direction": direction, "ceiling": args.ceiling}
    io.write_json(_out(cfg, "threshold.json"), _header(cfg, "threshold", extra, **results))
    print(f"beta_c {res.beta_c!r} bracket {res.bracket[0]!r} {res.bracket[1]!r} status {res.status}")
    return EXIT_OK if status == EXIT_OK else status


def cmd_flow(args, cfg):
    direction = _direction(args, cfg)
    base = cfg["spec"].with_strengths({k: 0.0 for k in direction})
    M = int(cfg["cutoff_M"])
    tr = threshold.flow(base, direction, args.beta_max, args.steps, args.levels, M, workers=int(cfg["workers"]))
    io.write_csv(_out(cfg, "flow.csv"), ["beta", "level_index", "re", "im"], tr.rows())
    merges = [{"beta": m.beta, "origins": list(m.origins), "value": [m.value.real, m.value.imag], "sector": m.sector}
              for m in tr.merges()]
    results = {"merges": merges, "ambiguous_steps": list(tr.ambiguous)}
    status = EXIT_OK
    if args.check_convergence:
        tr2 = threshold.flow(base, direction, args.beta_max, args.steps, args.levels, 2 * M, workers=int(cfg["workers"]))
        diff = float(np.max(np.abs(tr.levels - tr2.levels)))
        results["convergence"] = {"cutoff_M_2": 2 * M, "max_abs_diff": diff, "tolerance": FLOW_TOL}
        status = EXIT_OK if diff <= FLOW_TOL else EXIT_CONVERGENCE
    extra = {"direction": direction, "beta_max": args.beta_max, "steps": args.steps, "levels": args.levels}
    io.write_json(_out(cfg, "flow.json"), _header(cfg, "flow", extra, **results))
    for m in merges:
        print(f"merge beta {m['beta']!r} origins {m['origins'][0]!r} {m['origins'][1]!r}")
    return status


def _axis(term, rng, count, normalized):
    kind, order = parse_term_key(term)
    if rng is None:
        rng = (-2.0, 2.0) if normalized else (-2.0 * order, 2.0 * order)
    return phasemap.Axis(f"{kind}:{order}", float(rng[0]), float(rng[1]), int(count), normalized)


def cmd_phasemap(args, cfg):
    grid = args.grid or cfg["grid"]
    M = int(args.cutoff_M) if args.cutoff_M is not None else int(cfg.get("phasemap_M", phasemap.DEFAULT_CUTOFF))
    try:
        ax1 = _axis(args.axis1, args.range1, grid[0], args.normalized)
        ax2 = _axis(args.axis2, args.range2, grid[1], args.normalized)
    except ValueError as exc:
        raise UsageError(str(exc))
    base = cfg["spec"].with_strengths({ax1.term: 0.0, ax2.term: 0.0})
    pm = phasemap.scan(base, ax1, ax2, M, workers=int(cfg["workers"]))
    pm.write(_out(cfg, "phasemap"), gnuplot=not args.no_matrix)
    sym = pm.symmetric_mask()
    results = {"map": pm.header(), "symmetric_cells": int(sym.sum()), "failed_cells": len(pm.failures)}
    status = EXIT_OK
    if args.check_convergence:
        pm2 = phasemap.scan(base, ax1, ax2, 2 * M, workers=int(cfg["workers"]), normalization=pm.normalization)
        changed = int(np.sum(sym != pm2.symmetric_mask()))
        results["convergence"] = {"cutoff_M_2": 2 * M, "reclassified_cells": changed, "tolerance": 0}
        status = EXIT_OK if changed == 0 else EXIT_CONVERGENCE
    cfg_extra = {"cutoff_M": M, "axis1": ax1.to_dict(), "axis2": ax2.to_dict()}
    io.write_json(_out(cfg, "phasemap.json"), _header(cfg, "phasemap", cfg_extra, **results))
    print(f"symmetric cells {int(sym.sum())} of {sym.size}")
    return status if not pm.failures else EXIT_SOLVER


def _density_mode(args, cfg, M):
    spec = cfg["spec"]
    info = {}
    if args.beta_rel is not None:
        if args.n is None:
            raise UsageError("--beta-rel needs --n")
        bc = threshold.find_threshold(spec.with_strengths({f"v:{args.n}": 0.0}), f"v:{args.n}", M,
                                      workers=int(cfg["workers"]), trace_levels=False).beta_c
        spec = spec.with_strengths({f"v:{args.n}": args.beta_rel * bc})
        info = {"beta_c": bc, "beta_rel": args.beta_rel, "beta": args.beta_rel * bc}
    modes = field.angular_modes(spec, M)
    if not 0 <= args.level < len(modes):
        raise UsageError(f"--level must lie in [0, {len(modes) - 1}]")
    return spec, modes[args.level], info


def cmd_density(args, cfg):
    M = int(cfg["cutoff_M"])
    spec, mode, info = _density_mode(args, cfg, M)
    if args.q < 1:
        raise UsageError("--q must be >= 1")
    gl = [t.n for t in spec.gain_loss]
    weights = {f"v:{n}": dict(zip(("w_gain", "w_loss"), field.gain_loss_weights(mode, n))) for n in gl}
    meta = {"alpha_sq": [mode.alpha_sq.real, mode.alpha_sq.imag], "level": args.level, "weights": weights,
            "pi_rotation_asymmetry": field.pi_rotation_asymmetry(mode), **info}
    broken = abs(mode.alpha_sq.imag) > threshold.EPSILON
    extra = {"level": args.level, "q": args.q, "grid": list(args.grid), "beta_rel": args.beta_rel}
    if broken:
        # complex alpha: only the angular observables are available
        meta["density"] = "not computed: complex alpha^2 (PT-broken phase); angular weights only"
        io.write_csv(_out(cfg, "angular.csv"), ["phi", "abs_phi_sq"],
                     [(p, float(abs(v) ** 2)) for p, v in
                      zip(field.uniform_phi(args.grid[1]), field.angular_profile(mode, field.uniform_phi(args.grid[1])))])
        io.write_json(_out(cfg, "density.json"), _header(cfg, "density", extra, **meta))
        print("PT-broken mode: wrote angular profile and weights only")
        return EXIT_OK
    geom = radial.Geometry(float(cfg["a_ratio"]), 1.0)
    dens = field.density(mode, geom, args.q, args.grid[0], args.grid[1])
    io.write_csv(_out(cfg, "density.csv"), ["rho", "phi", "density"], dens.rows())
    meta.update({k: v for k, v in dens.meta.items() if k not in meta})
    meta["integral"] = dens.integral()
    status = EXIT_OK
    if args.check_convergence:
        _, mode2, _ = _density_mode(args, cfg, 2 * M)
        diff = abs(mode2.alpha_sq - mode.alpha_sq)
        meta["convergence"] = {"cutoff_M_2": 2 * M, "alpha_sq_abs_diff": diff, "tolerance": SPECTRUM_TOL}
        status = EXIT_OK if diff <= SPECTRUM_TOL else EXIT_CONVERGENCE
    io.write_json(_out(cfg, "density.json"), _header(cfg, "density", extra, **meta))
    print(f"alpha_sq {mode.alpha_sq.real!r} integral {meta['integral']!r}")
    return status


def cmd_radial(args, cfg):
    if args.q < 1:
        raise UsageError("--q must be >= 1")
    ratio = float(cfg["a_ratio"])
    geom = radial.Geometry(ratio, 1.0)
    modes = radial.energies(args.alpha, args.q, geom)
    io.write_csv(_out(cfg, "radial.csv"), ["alpha", "q", "kappa", "energy"], radial.mode_rows(modes))
    public = {"command": "radial", "alpha": list(args.alpha), "q": args.q, "a_ratio": ratio}
    io.write_json(_out(cfg, "radial.json"), {"config": public, "config_hash": io.config_hash(public),
                                             "geometry": geom.to_dict(), "count": len(modes)})
    print("kappa " + " ".join(repr(m.kappa) for m in modes))
    return EXIT_OK


COMMANDS = {"spectrum": cmd_spectrum, "threshold": cmd_threshold, "flow": cmd_flow,
            "phasemap": cmd_phasemap, "density": cmd_density, "radial": cmd_radial}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args)
        Path(cfg["output_dir"]).mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args, cfg)
    except (UsageError, SpecError, radial.RangeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (EigenConvergenceError, threshold.NoThresholdError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
