"""Command-line front end: outage/rate sweeps to CSV and the validation report.

Exit codes: 0 success, 1 validation failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

from . import analytics as an
from .channel import ParameterError
from .config import RunConfig, parse_config, with_overrides
from .montecarlo import mc_ergodic_rates, mc_outage
from .system_model import ConfigError, Duplex, SnrPoint
from .validation import failed, run_validation

OP_COLUMNS = ["mode", "k", "thr_f", "thr_n", "snr_db", "user", "op_series", "op_quadrature",
              "op_asymptotic", "op_mc", "mc_se", "series_converged"]
SURFACE_COLUMNS = ["kappa", "epsilon", "user", "op_quadrature", "op_mc", "mc_se"]
ER_COLUMNS = ["mode", "snr_db", "er_far_mc", "er_far_se", "er_near_mc", "er_near_se", "esr_mc",
              "er_far_high", "er_near_high", "esr_high"]


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _map_ordered(fn, items, workers):
    # rows are emitted in grid order whatever the completion order
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _write_csv(path, columns, rows, comments=()):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def sweep_op_rows(run: RunConfig):
    sw, s = run.sweep, run.series
    mc_inner = replace(run.mc, workers=1)
    grid = [(mode, k, thr, db) for mode in sw.modes for k in sw.k_factors
            for thr in sw.threshold_pairs for db in sw.snr_grid()]

    def point(item):
        mode, k, (thf, thn), db = item
        cfg = replace(run.network, duplex=mode, k_factor=k, gamma_thf=thf, gamma_thn=thn)
        snr = SnrPoint.from_db(db, sw.relay_offset_db)
        far_mc, near_mc = mc_outage(cfg, snr, mc_inner)
        out = []
        for user, est, series, quad, asym in (
                ("far", far_mc, an.op_far_series(cfg, snr, s), an.op_far_quadrature(cfg, snr, s),
                 an.op_far_asymptotic(cfg, snr, s)),
                ("near", near_mc, an.op_near_series(cfg, snr, s, sw.near_variant),
                 an.op_near_quadrature(cfg, snr, s), an.op_near_asymptotic(cfg, snr, s))):
            out.append([mode.value, float(k), thf, thn, float(db), user, series.value, quad.value,
                        asym.value, est.value, est.std_error, series.converged])
        return out

    return [row for rows in _map_ordered(point, grid, run.mc.workers) for row in rows]


def cmd_sweep_op(run: RunConfig, out_path):
    _write_csv(out_path, OP_COLUMNS, sweep_op_rows(run))


def surface_op_rows(run: RunConfig):
    sw, s = run.sweep, run.series
    mc_inner = replace(run.mc, workers=1)
    snr = SnrPoint.from_db(sw.surface_snr_db, sw.relay_offset_db)
    axis = sw.surface_grid()
    grid = [(kap, eps) for kap in axis for eps in axis]

    def point(item):
        kap, eps = item
        cfg = replace(run.network, duplex=Duplex.FD, kappa_sr=kap, kappa_rdf=kap,
                      kappa_rdn=kap, epsilon=eps)
        far_mc, near_mc = mc_outage(cfg, snr, mc_inner)
        return [[kap, eps, "far", an.op_far_quadrature(cfg, snr, s).value, far_mc.value,
                 far_mc.std_error],
                [kap, eps, "near", an.op_near_quadrature(cfg, snr, s).value, near_mc.value,
                 near_mc.std_error]]

    return [row for rows in _map_ordered(point, grid, run.mc.workers) for row in rows]


def cmd_surface_op(run: RunConfig, out_path):
    sw = run.sweep
    note = (f"FD, snr_db={sw.surface_snr_db:g}, k={run.network.k_factor:g}; kappa (SR, RDf, RDn "
            f"jointly) and epsilon on [0, {sw.surface_max:g}] step {sw.surface_step:g}")
    _write_csv(out_path, SURFACE_COLUMNS, surface_op_rows(run), comments=[note])


def sweep_er_rows(run: RunConfig):
    sw, s, mc = run.sweep, run.series, run.mc
    mc_inner = replace(mc, workers=1)
    grid = [(mode, db) for mode in sw.modes for db in sw.snr_grid()]
    high = {}
    for mode in sw.modes:
        cfg = replace(run.network, duplex=mode, k_factor=sw.er_k_factor)
        high[mode] = (an.er_far_high_snr(cfg, s, hd_prelog_half=mc.hd_prelog_half),
                      an.er_near_high_snr(cfg, s, hd_prelog_half=mc.hd_prelog_half))

    def point(item):
        mode, db = item
        cfg = replace(run.network, duplex=mode, k_factor=sw.er_k_factor)
        far, near, total = mc_ergodic_rates(cfg, SnrPoint.from_db(db, sw.relay_offset_db), mc_inner)
        hf, hn = high[mode]
        return [mode.value, float(db), far.value, far.std_error, near.value, near.std_error,
                total.value, hf, hn, hf + hn]

    return _map_ordered(point, grid, mc.workers)


def cmd_sweep_er(run: RunConfig, out_path):
    _write_csv(out_path, ER_COLUMNS, sweep_er_rows(run))


def cmd_validate(run: RunConfig, quiet=False, out=None):
    out = out or sys.stdout
    checks = run_validation(run, log=None if quiet else (lambda line: print(line, file=out)))
    bad = failed(checks)
    n_gated = sum(c.status != "INFO" for c in checks)
    print(f"{n_gated - len(bad)}/{n_gated} checks passed", file=out)
    for c in bad:
        print(f"failed: {c.name}", file=out)
    return 1 if bad else 0


def build_parser():
    parser = argparse.ArgumentParser(prog="fdnoma", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_out in (("sweep-op", True), ("surface-op", True), ("sweep-er", True),
                            ("validate", False)):
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value config file (defaults if omitted)")
        p.add_argument("--out", required=needs_out, help="output CSV path")
        p.add_argument("--trials", type=int, help="Monte Carlo trials per point")
        p.add_argument("--seed", type=int, help="unsigned 64-bit seed")
        p.add_argument("--workers", type=int, help="worker threads")
        p.add_argument("--quiet", action="store_true")
        if name == "validate":
            p.add_argument("--inject-series-fault", type=float, default=0.0, help=argparse.SUPPRESS)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        run = with_overrides(parse_config(args.config), trials=args.trials, seed=args.seed,
                             workers=args.workers)
        if args.command == "validate" and args.inject_series_fault:
            run = run._replace(series=replace(run.series, term_fault=args.inject_series_fault))
    except (ConfigError, ParameterError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    commands = {"sweep-op": cmd_sweep_op, "surface-op": cmd_surface_op, "sweep-er": cmd_sweep_er}
    if args.command == "validate":
        return cmd_validate(run, quiet=args.quiet)
    try:
        commands[args.command](run, args.out)
    except OSError as exc:
        print(f"cannot write {args.out}: {exc}", file=sys.stderr)
        return 2
    if not args.quiet:
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
