"""Q-learning under n-swap rewards: write the Q-value series and print a summary."""

import argparse

from avoidlab.qbaseline import q_bounds, sign_changes, simulate_fig3


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=800)
    ap.add_argument("--alpha", type=float, default=0.25)
    ap.add_argument("--gamma", type=float, default=0.5)
    ap.add_argument("--steps", type=int, default=40000)
    ap.add_argument("-o", "--out", default="fig3_q.csv")
    args = ap.parse_args()

    series = simulate_fig3(args.n, args.alpha, args.gamma, args.steps)
    with open(args.out, "w", newline="") as fh:
        series.write_csv(fh)
    lo, hi = q_bounds(args.gamma)
    print(f"wrote {len(series)} rows to {args.out}")
    print(f"Q(1,b) sign changes: {sign_changes(series.q_1b)}")
    print(f"Q(1,b) range: [{min(series.q_1b):.3f}, {max(series.q_1b):.3f}]")
    print(f"Q(1,a) range: [{min(series.q_1a):.3f}, {max(series.q_1a):.3f}] (envelope [{lo}, {hi}])")


if __name__ == "__main__":
    main()
