"""Grid navigation: check the hand-written policy, then learn one from scratch."""

import argparse
import time

from avoidlab.grid import GridProblem, build_task, prop2_policy
from avoidlab.learning import LearnerSession, RunConfig, run_until_settled
from avoidlab.oracle import is_strategy, maximal_policy


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=8)
    ap.add_argument("--tau", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--budget", type=int, default=20_000_000)
    args = ap.parse_args()

    n = args.size
    cells = [(x, y) for x in range(n + 1) for y in range(n + 1)]
    targets = [(1, 1), (min(6, n), 2), (3, min(7, n))]
    problem = GridProblem.make(n, n, cells, targets, args.tau)

    t0 = time.perf_counter()
    task = build_task(problem)
    print(f"{len(task.states)} states, {len(task.features)} features ({time.perf_counter() - t0:.1f}s)")

    pol = prop2_policy(problem)
    ok = sum(is_strategy(task, pol, s0).holds for s0 in task.starts)
    print(f"hand-written policy is a strategy for {ok}/{len(task.starts)} starts")
    mp = maximal_policy(task).policy.pairs()
    print(f"maximal policy: {len(mp)} pairs, contains hand-written one: {pol.pairs() <= mp}")

    t0 = time.perf_counter()
    s = LearnerSession(task, RunConfig(seed=args.seed, max_steps=args.budget), record=False)
    settle = run_until_settled(s, check_every=100_000)
    print(f"learner settled at step {settle} ({time.perf_counter() - t0:.1f}s), "
          f"final P = maximal: {s.allowed_pairs() == mp}, signals: {s.signal_count}")


if __name__ == "__main__":
    main()
