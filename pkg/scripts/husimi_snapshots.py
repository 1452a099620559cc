"""Husimi Q snapshots of a coherent state under Kerr evolution with optional loss.

With gamma=0 the state splits into a two-component cat at chi*t = pi/2 and
revives at chi*t = 2*pi. Writes a PNG grid of panels.
"""

import argparse
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from kerrcavity import ChannelParams, Coherent, QGrid, Truncation, evolve_kraus, husimi_q, make_state  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=30)
    ap.add_argument("--alpha", type=float, default=2.0)
    ap.add_argument("--chi", type=float, default=1.0)
    ap.add_argument("--gamma", type=float, default=0.0)
    ap.add_argument("--resolution", type=int, default=81)
    ap.add_argument("--out", default="husimi_snapshots.png")
    args = ap.parse_args()

    rho0 = make_state(Coherent(args.alpha), Truncation(args.dim))
    fractions = (0.0, 1 / 8, 1 / 4, 1 / 3, 1 / 2, 1.0)
    span = args.alpha + 2.5
    grid = QGrid(-span, span, -span, span, args.resolution)
    fig, axes = plt.subplots(2, 3, figsize=(10, 6.8))
    for ax, frac in zip(axes.flat, fractions):
        t = 2 * math.pi * frac / args.chi
        q = husimi_q(evolve_kraus(rho0, ChannelParams(args.chi, args.gamma, t)), grid)
        ax.imshow(q.values, origin="lower", extent=(-span, span, -span, span), cmap="viridis")
        ax.set_title(f"chi t = {2 * frac:.3g} pi")
        ax.set_xlabel("Re alpha")
        ax.set_ylabel("Im alpha")
    fig.tight_layout()
    fig.savefig(args.out, dpi=120)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
