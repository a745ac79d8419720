"""Command line: ``mhdcert run | constants | datum | modes``."""

from __future__ import annotations

import argparse
import json
import sys

from .constants import ConstantsError, ConstantsPolicy, constants_table, estimate_constants
from .data import parse_datum, save_datum
from .pipeline import RunConfig, emit_mode_cube, run_pipeline
from .spectral import pair_norm


def _cmd_run(args) -> int:
    cfg = RunConfig.load(args.config).with_overrides(mu=args.mu, t_final=args.tf, out=args.out)
    if args.plots:
        cfg.plots = True
    report = run_pipeline(cfg)
    s = report.summary
    cert = s["certificate"]
    if cert["kind"] == "global":
        msg = f"global existence: t1={cert['t1']:.6g}, (D+R)(t1)={cert['value']:.6g}"
    else:
        msg = f"existence on [0, {cert['T_c']:.6g})" + (" (R_n blew up)" if s["blew_up"] else " (whole horizon)")
    print(f"mu={s['mu']:g}: {msg}")
    print(f"outputs in {report.out}")
    return 0


def _cmd_constants(args) -> int:
    if args.policy == "tabulated":
        policy = ConstantsPolicy("tabulated")
    else:
        policy = ConstantsPolicy("computed", args.R, args.k_scan)
    bundle = estimate_constants(args.p, args.n, args.d, policy)
    print(json.dumps(constants_table(bundle, args.p, args.n), indent=1))
    return 0


def _cmd_datum(args) -> int:
    state = parse_datum(args.datum)
    if args.emit:
        save_datum(state, args.emit)
    norms = {_key(p): pair_norm(state, p) for p in args.orders}
    print(json.dumps({"dim": state.dim, "norms": norms}, indent=1))
    return 0


def _key(p) -> str:
    p = float(p)
    return str(int(p)) if p.is_integer() else str(p)


def _cmd_modes(args) -> int:
    G = emit_mode_cube(args.radius, args.dim)
    text = json.dumps([list(map(int, k)) for k in G.reps])
    if args.emit:
        with open(args.emit, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    print(f"{len(G)} modes ({G.n_pairs} pairs)", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mhdcert", description="Galerkin MHD runs with a-posteriori existence certificates")
    sub = ap.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="run integrate -> estimators -> control -> certificate")
    r.add_argument("--config", required=True, help="JSON run configuration")
    r.add_argument("--mu", type=float, help="override: sets nu = eta = MU")
    r.add_argument("--tf", type=float, help="override final time")
    r.add_argument("--out", help="override output directory")
    r.add_argument("--plots", action="store_true", help="also write SVG plots (matplotlib)")
    r.set_defaults(func=_cmd_run)

    c = sub.add_parser("constants", help="print inequality constants as JSON")
    c.add_argument("--p", type=float, default=3)
    c.add_argument("--n", type=float, default=3)
    c.add_argument("--d", type=int, default=3)
    c.add_argument("--policy", choices=["tabulated", "computed"], default="tabulated")
    c.add_argument("--R", type=float, default=40.0, help="truncation radius (computed)")
    c.add_argument("--k-scan", type=float, default=6.0, help="scan radius for k (computed)")
    c.set_defaults(func=_cmd_constants)

    d = sub.add_parser("datum", help="build initial data, print norms, optionally save")
    d.add_argument("--datum", required=True, help="abc:A,B,C,D | ot:beta | file:PATH")
    d.add_argument("--emit", help="write the datum as JSON")
    d.add_argument("--orders", type=float, nargs="+", default=[0, 3])
    d.set_defaults(func=_cmd_datum)

    m = sub.add_parser("modes", help="emit a cube mode set")
    m.add_argument("--radius", type=int, default=2)
    m.add_argument("--dim", type=int, default=3)
    m.add_argument("--emit")
    m.set_defaults(func=_cmd_modes)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, ConstantsError, OSError) as exc:
        print(f"mhdcert: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
