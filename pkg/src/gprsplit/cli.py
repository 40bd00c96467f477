"""Command line entry point: ``gprsplit run|table1|list-cases``."""

import argparse
import logging
import os
import sys

from .driver import CASES, apply_overrides, convergence_harness, get_case, run_case
from .exceptions import GPRError
from .io import read_config


def _build_parser():
    ap = argparse.ArgumentParser(prog="gprsplit", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a benchmark case")
    r.add_argument("--case", required=True, choices=sorted(CASES))
    r.add_argument("--config", help="file with 'key = value' overrides")
    r.add_argument("--nx", type=int)
    r.add_argument("--ny", type=int)
    r.add_argument("--t-end", type=float)
    r.add_argument("--cfl", type=float)
    r.add_argument("--out", default="out")
    r.add_argument("--deterministic", action="store_true",
                   help="fixed-order reductions in the Krylov solvers")

    t = sub.add_parser("table1", help="Taylor-Green Mach-number sweep")
    t.add_argument("--out", default="out")
    t.add_argument("--nx", type=int, default=128)
    t.add_argument("--p0", type=float, nargs="+",
                   default=[1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9, 1e10, 1e11])

    sub.add_parser("list-cases", help="print the available case names")
    return ap


def main(argv=None):
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "list-cases":
            for name in CASES:
                print(name)
            return 0
        if args.command == "table1":
            rows = convergence_harness(args.p0, nx=args.nx,
                                       out_csv=os.path.join(args.out, "table1.csv"))
            for r in rows:
                print(f"{r['p0']:.2e} {r['Ma']:.3e} {r['L2_rho']:.4e} {r['Linf_rho']:.4e} "
                      f"{r['Linf_divv']:.4e}")
            return 0
        spec = get_case(args.case)
        overrides = read_config(args.config) if args.config else {}
        for key in ("nx", "ny", "t_end", "cfl"):
            val = getattr(args, key)
            if val is not None:
                overrides[key] = val
        if args.deterministic:
            overrides["deterministic"] = True
        spec = apply_overrides(spec, overrides)
        rep = run_case(spec, args.out)
        print(f"{spec.name}: {len(rep.dts)} steps to t={rep.final.t:.6g} "
              f"in {rep.wall_time:.1f}s, output in {args.out}")
        return 0
    except GPRError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
