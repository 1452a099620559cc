"""RK4 error against the closed form as the step shrinks; prints error and successive ratios."""

import argparse

from kerrcavity import ChannelParams, Coherent, IntegratorConfig, Truncation, evolve_kraus, make_state, rk4_evolve
from kerrcavity.fock import max_abs


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, default=12)
    ap.add_argument("--chi", type=float, default=0.5)
    ap.add_argument("--gamma", type=float, default=0.5)
    ap.add_argument("--t", type=float, default=1.0)
    ap.add_argument("--steps", type=int, nargs="+", default=[1000, 2000, 4000, 8000])
    args = ap.parse_args()

    rho0 = make_state(Coherent(1.5), Truncation(args.dim))
    params = ChannelParams(args.chi, args.gamma, args.t)
    exact = evolve_kraus(rho0, params).elements
    prev = None
    print(f"{'steps':>8} {'h':>10} {'max error':>12} {'ratio':>8}")
    for n in sorted(args.steps):
        err = max_abs(rk4_evolve(rho0, params, IntegratorConfig(n)).elements - exact)
        ratio = f"{prev / err:8.2f}" if prev else f"{'':>8}"
        print(f"{n:>8} {args.t / n:>10.2e} {err:>12.3e} {ratio}")
        prev = err


if __name__ == "__main__":
    main()
