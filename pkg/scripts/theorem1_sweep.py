"""Random-task sweep: does a fair learner keep every maximal-policy pair?

For each task and seed the learner runs until its policy is settled, then
for a further stretch of steps that must contain no removals and no signals.
"""

import argparse
import statistics
import time

from avoidlab.learning import LearnerSession, Removal, RunConfig, Step
from avoidlab.oracle import maximal_policy
from avoidlab.randtask import gen_random_task, sample_params
from avoidlab.task import CompiledTask


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tasks", type=int, default=200)
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--budget", type=int, default=5000)
    ap.add_argument("--tail", type=int, default=1000)
    ap.add_argument("--restart-every", type=int, default=20)
    args = ap.parse_args()

    t0 = time.perf_counter()
    kept = clean = total = 0
    settle_steps = []
    for task_seed in range(args.tasks):
        task = gen_random_task(sample_params(task_seed))
        ct = CompiledTask(task)
        keep = maximal_policy(task).policy.pairs()
        for seed in range(args.runs):
            cfg = RunConfig(seed=seed, max_steps=args.budget + args.tail,
                            external_restart_every=args.restart_every)
            s = LearnerSession(task, cfg, compiled=ct)
            while s.step_count < args.budget and not s.finished and not s.is_settled():
                s.run(25)
            total += 1
            if s.is_settled():
                settle_steps.append(s.last_removal_step or 0)
                mark = len(s.trace.events)
                if not s.finished:
                    s.run(args.tail)
                clean += not any(
                    isinstance(e, Removal) or (isinstance(e, Step) and e.signal)
                    for e in s.trace.events[mark:]
                )
            kept += keep <= s.allowed_pairs()
    print(f"runs: {total}  preserved: {kept}  settled: {len(settle_steps)}  clean tail: {clean}")
    if settle_steps:
        print(f"settle step: mean {statistics.mean(settle_steps):.1f}, max {max(settle_steps)}")
    print(f"elapsed {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
