"""Command line entry point: ``dwaspt {ground,scan,oracle,transition}``.

Exit codes: 0 success, 2 scan finished with failed points, 1 fatal error.
The only environment variable read is ``DWASPT_THREADS`` (BLAS threads).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .analysis import FitError, transition_from_curves
from .lattice import SizeGuardError
from .mps import DMRGNotConverged

log = logging.getLogger("dwaspt")

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2
REFERENCE_PC = 0.297


def _config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON config file; flags below override it")
    p.add_argument("--L", type=int, nargs="+", help="system sizes (unit cells)")
    p.add_argument("--J-zz", dest="J_zz", type=float)
    p.add_argument("--p-grid", dest="p_grid", type=float, nargs="+", help="explicit p_zz values")
    p.add_argument("--p-range", type=float, nargs=3, metavar=("START", "STOP", "STEP"),
                   help="p_zz grid start..stop inclusive")
    p.add_argument("--mode", choices=["paired", "simplified"])
    p.add_argument("--boundary", choices=["periodic", "open"])
    p.add_argument("--max-bond", dest="max_bond", type=int)
    p.add_argument("--svd-floor", dest="svd_floor", type=float)
    p.add_argument("--error-budget", dest="error_budget", type=float)
    p.add_argument("--dmrg-tol", dest="dmrg_tol", type=float)
    p.add_argument("--max-sweeps", dest="max_sweeps", type=int)
    p.add_argument("--observables", nargs="+", choices=["correlators", "strings", "entanglement"])
    p.add_argument("--k", type=int, help="string length (default L//2 - 1)")
    p.add_argument("--es-levels", dest="es_levels", type=int)
    p.add_argument("--region-sites", dest="region_sites", type=int)
    p.add_argument("--degeneracy-tol", dest="degeneracy_tol", type=float)
    p.add_argument("--ed-check-max-L", dest="ed_check_max_L", type=int)
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--checkpoint-dir", dest="checkpoint_dir")
    p.add_argument("--workers", type=int)


_CONFIG_KEYS = ("L", "J_zz", "p_grid", "mode", "boundary", "max_bond", "svd_floor", "error_budget",
                "dmrg_tol", "max_sweeps", "observables", "k", "es_levels", "region_sites",
                "degeneracy_tol", "ed_check_max_L", "output_dir", "checkpoint_dir", "workers")


def config_from_args(args):
    from .scan import ScanConfig

    base = {}
    if args.config is not None:
        with open(args.config) as fh:
            base = json.load(fh)
    for key in _CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            base[key] = val
    if getattr(args, "p_range", None):
        a, b, step = args.p_range
        n = int(round((b - a) / step))
        base["p_grid"] = [round(a + i * step, 10) for i in range(n + 1)]
    return ScanConfig.from_dict(base)


def cmd_ground(args) -> int:
    from .scan import ground_checkpoint_path, ground_state

    config = config_from_args(args)
    summary = {}
    for L in config.L:
        _, info = ground_state(config, L, rebuild=args.rebuild)
        summary[L] = {k: info[k] for k in ("energy", "energy_ed", "energy_error", "energy_exact",
                                            "energy_exact_error", "sweeps", "bond_dims",
                                            "max_truncation") if k in info}
        summary[L]["checkpoint"] = str(ground_checkpoint_path(config, L))
    print(json.dumps(summary, indent=1))
    return EXIT_OK


def cmd_scan(args) -> int:
    from .scan import run_scan

    config = config_from_args(args)
    rec = run_scan(config)
    n_bad = len(rec.failed)
    print(f"{len(rec.rows)} rows written to {config.output_dir} (config {rec.config_hash[:12]}); "
          f"{n_bad} failed")
    for r in rec.failed:
        print(f"  L={r['L']} p_zz={r['p_zz']}: {r['error']}")
    return EXIT_PARTIAL if n_bad else EXIT_OK


def cmd_oracle(args) -> int:
    from .golden import DEFAULT_P_GRID, diff_golden, dump_golden, generate_golden, golden_path, validate_golden

    p_grid = args.p_grid or list(DEFAULT_P_GRID)
    report = []
    changed = False
    for L in args.L:
        doc = generate_golden(L, args.J_zz, p_grid, args.mode)
        validate_golden(doc)
        gap = abs(doc["energy"] - doc["energy_lanczos"])
        if gap > 1e-10:
            report.append(f"L={L}: dense and Lanczos energies differ by {gap:.2e}")
            changed = True
        path = golden_path(L, args.J_zz, args.mode, args.golden_dir)
        if path.exists():
            with open(path) as fh:
                diffs = diff_golden(json.load(fh), doc, args.tol)
        else:
            diffs = ["new file"]
        report.append(f"{path}: " + ("no changes" if not diffs else f"{len(diffs)} differences"))
        report += ["  " + d for d in diffs]
        if diffs:
            changed = True
            if not args.check:
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(dump_golden(doc))
    print("\n".join(report))
    return EXIT_FATAL if (args.check and changed) else EXIT_OK


def cmd_transition(args) -> int:
    from .scan import load_scan

    curves: dict = {}
    for path in args.scans:
        doc = load_scan(path)
        for L, s in doc["series"].items():
            if args.observable not in s:
                raise ValueError(f"{path} has no {args.observable} series for L={L}")
            curves[int(L)] = (s["p_zz"], s[args.observable])
    if args.L:
        curves = {L: c for L, c in curves.items() if L in args.L}
    window = tuple(args.window) if args.window else None
    res = transition_from_curves(curves, window, args.degree, args.min_points)
    ext = res["extrapolation"]
    pc, err = ext["params"]["p_c"], ext["stderr"]["p_c"]
    res.update({"observable": args.observable, "window": window, "reference_p_c": args.reference,
                "deviation": pc - args.reference})
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "transition.json").write_text(json.dumps(res, indent=1, sort_keys=True) + "\n")
    lines = ["# Transition estimate", "", f"observable: `{args.observable}`, window: {window}", "",
             "| L | p_peak | residual |", "|---|---|---|"]
    for L, f in sorted(res["peaks"].items()):
        lines.append(f"| {L} | {f['params']['p_peak']:.4f} | {f['residual_norm']:.2e} |")
    lines += ["", f"p_c = {pc:.4f} +/- {err:.4f} (a = {ext['params']['a']:.4f})",
              f"reference p_c = {args.reference}, deviation {pc - args.reference:+.4f}", ""]
    (out / "transition.md").write_text("\n".join(lines))
    print("\n".join(lines))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dwaspt", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("ground", help="DMRG ground state checkpoints")
    _config_args(g)
    g.add_argument("--rebuild", action="store_true", help="ignore existing checkpoints")
    g.set_defaults(func=cmd_ground)

    s = sub.add_parser("scan", help="filter and measure over the p_zz grid")
    _config_args(s)
    s.set_defaults(func=cmd_scan)

    o = sub.add_parser("oracle", help="regenerate exact golden files and report differences")
    o.add_argument("--L", type=int, nargs="+", default=[3, 4, 5])
    o.add_argument("--J-zz", dest="J_zz", type=float, default=0.6)
    o.add_argument("--p-grid", dest="p_grid", type=float, nargs="+")
    o.add_argument("--mode", choices=["paired", "simplified"], default="paired")
    o.add_argument("--golden-dir", dest="golden_dir", type=Path, default=None)
    o.add_argument("--tol", type=float, default=1e-10)
    o.add_argument("--check", action="store_true", help="report only; exit 1 on differences")
    o.set_defaults(func=cmd_oracle)

    t = sub.add_parser("transition", help="peak fits and finite-size extrapolation")
    t.add_argument("scans", nargs="+", type=Path, help="scan.json files")
    t.add_argument("--observable", default="ee_half")
    t.add_argument("--L", type=int, nargs="+")
    t.add_argument("--window", type=float, nargs=2)
    t.add_argument("--degree", type=int, default=6)
    t.add_argument("--min-points", dest="min_points", type=int, default=8)
    t.add_argument("--reference", type=float, default=REFERENCE_PC)
    t.add_argument("--output-dir", dest="output_dir", default=".")
    t.set_defaults(func=cmd_transition)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (FitError, SizeGuardError, DMRGNotConverged, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
