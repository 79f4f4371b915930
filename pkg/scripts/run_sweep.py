"""Epsilon sweep on an epigraph model: kernel obstruction and extremal solves.

Writes ``sweep.csv``, ``sweep.json`` and one JSON state per eps into
``--out`` and prints the fitted exponents and constants.

    python3 scripts/run_sweep.py --h 0.02 --lmax 128 --out runs/sweep
"""

import argparse
import json
from dataclasses import replace
from pathlib import Path

from extremal_domains.cli import DEFAULT_MODEL
from extremal_domains.continuation import SolverConfig, epsilon_sweep, solve_extremal
from extremal_domains.geometry import EuclideanEpigraph


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--wall", default=DEFAULT_MODEL["h"], help="h(x1) for the wall x0 = h(x1)")
    ap.add_argument("--eps", type=float, nargs="+", default=[0.2, 0.14, 0.1, 0.07, 0.05])
    ap.add_argument("--p-fixed", type=float, default=0.0)
    ap.add_argument("--h", type=float, default=0.02)
    ap.add_argument("--lmax", type=int, default=128)
    ap.add_argument("--states", action="store_true", help="also dump the converged state per eps")
    ap.add_argument("--out", default="runs/sweep")
    args = ap.parse_args()

    model = EuclideanEpigraph(args.wall, 1, name="sweep")
    cfg = replace(SolverConfig(), h=args.h, lmax=args.lmax)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rep = epsilon_sweep(model, args.eps, args.p_fixed, None, cfg)
    (out / "sweep.csv").write_text(rep.to_csv())
    (out / "sweep.json").write_text(rep.to_json() + "\n")
    if args.states:
        p = rep.p0
        for eps in args.eps:
            st = solve_extremal(model, eps, p, cfg)
            p = st.p
            (out / f"state_eps{eps:g}.json").write_text(st.to_json() + "\n")
    print(json.dumps({"fits": rep.fits, "constants": rep.constants}, indent=2))


if __name__ == "__main__":
    main()
