"""Pairwise solver deviations over a (gamma, chi) grid at fixed N and t.

    python scripts/cross_solver_sweep.py --dim 12 --t 1.0 --steps-per-unit 10000
"""

import argparse
import csv
import sys

from kerrcavity import ChannelParams, Coherent, IntegratorConfig, Truncation, make_state, solver_compare
from kerrcavity.solvers import stability_rate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=12)
    ap.add_argument("--alpha", type=float, default=1.5)
    ap.add_argument("--t", type=float, default=1.0)
    ap.add_argument("--steps-per-unit", type=int, default=10000)
    ap.add_argument("--gammas", type=float, nargs="+", default=[0.0, 0.1, 0.2, 0.5, 1.0])
    ap.add_argument("--chis", type=float, nargs="+", default=[0.0, 0.1, 0.3, 0.5])
    args = ap.parse_args()

    trunc = Truncation(args.dim)
    rho0 = make_state(Coherent(args.alpha), trunc)
    cfg = IntegratorConfig.per_unit_time(args.steps_per_unit, args.t)
    out = csv.writer(sys.stdout)
    out.writerow(["gamma", "chi", "kraus_rk4", "kraus_liouville", "rk4_liouville", "rk4_seconds", "liouville_seconds"])
    for g in args.gammas:
        for c in args.chis:
            params = ChannelParams(c, g, args.t)
            if args.t / cfg.steps * stability_rate(args.dim, params) >= 0.1:
                print(f"# skip gamma={g} chi={c}: rk4 step too large", file=sys.stderr)
                continue
            r = solver_compare(rho0, params, cfg)
            d = r.deviations
            out.writerow([g, c, f"{d['kraus', 'rk4']:.3e}", f"{d['kraus', 'liouville']:.3e}",
                          f"{d['rk4', 'liouville']:.3e}", f"{r.wall_time['rk4']:.3f}", f"{r.wall_time['liouville']:.3f}"])


if __name__ == "__main__":
    main()
