"""Command-line front end.

Exit codes: 0 success, 1 domain failure, 2 parse failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import io as tio
from .grid import GridError, GridProblem, build_task
from .learning import LearnerSession, RunConfig, Step, run_until_settled
from .oracle import has_strategy, maximal_policy
from .qbaseline import simulate_fig3
from .randtask import RandomTaskParams, gen_random_task
from .task import TaskDomainError, TaskSpec, validate_task
from .worked import BUILTINS, builtin_task, fig5_preset

EXIT_OK, EXIT_DOMAIN, EXIT_PARSE, EXIT_IO = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def default_seed() -> int:
    return int(os.environ.get("AVOIDLAB_SEED", "0"))


def load_task_source(source: str) -> TaskSpec:
    """A builtin name, a task file, or ``grid:<problem file>``."""
    if source in BUILTINS:
        return builtin_task(source)
    if source.startswith("grid:"):
        return _grid_task(source[5:])
    try:
        text = Path(source).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {source}: {exc}", EXIT_IO) from None
    try:
        return tio.loads_task(text)
    except tio.TaskFileError as exc:
        raise CliError(f"{source}: {exc}", EXIT_PARSE) from None


def _grid_task(path: str) -> TaskSpec:
    try:
        problem = GridProblem.load(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from None
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE) from None
    try:
        return build_task(problem)
    except GridError as exc:
        raise CliError(str(exc), EXIT_DOMAIN) from None


# --- validate / oracle -------------------------------------------------------


def cmd_validate(args) -> int:
    task = load_task_source(args.file)
    violations = validate_task(task)
    for v in violations:
        print(v)
    print(f"{len(violations)} violation(s)")
    return EXIT_OK if not violations else EXIT_DOMAIN


def cmd_oracle(args) -> int:
    task = load_task_source(args.file)
    violations = validate_task(task)
    if violations:
        for v in violations:
            print(v)
        return EXIT_DOMAIN
    starts = sorted(task.starts)
    if args.start is not None:
        if args.start not in task.starts:
            print(f"unknown start state {args.start!r}", file=sys.stderr)
            return EXIT_DOMAIN
        starts = [args.start]
    mp = maximal_policy(task)
    print("maximal policy:")
    for f in sorted(mp.policy.mapping):
        print(f"  {f} -> {{{', '.join(sorted(mp.policy.mapping[f]))}}}")
    print(f"pruned pairs ({len(mp.pruned)}):")
    for p in mp.pruned:
        print(f"  {p}")
    for s in starts:
        verdict = "strategy exists" if has_strategy(task, s, mp) else "NO strategy"
        print(f"start {s}: {verdict}")
    return EXIT_OK


# --- learn -------------------------------------------------------------------


@dataclass
class ExperimentSpec:
    task: str
    config: RunConfig = field(default_factory=RunConfig)
    repetitions: int = 1
    out: str = "runs"
    trace: bool = True
    resume: str | None = None


def _read_spec(source: str) -> ExperimentSpec:
    """Experiment JSON, or a bare task source with default settings."""
    base = fig5_preset() if source == "fig5-reconstruction" else RunConfig()
    if source in BUILTINS or source.startswith("grid:"):
        return ExperimentSpec(task=source, config=base)
    try:
        doc = json.loads(Path(source).read_text())
    except OSError as exc:
        raise CliError(f"cannot read {source}: {exc}", EXIT_IO) from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}", EXIT_PARSE) from None
    if not isinstance(doc, dict) or "task" not in doc:
        return ExperimentSpec(task=source)
    unknown = set(doc) - {"task", "config", "repetitions", "out", "trace", "resume"}
    if unknown:
        raise CliError(f"unknown experiment keys {sorted(unknown)}", EXIT_PARSE)
    task = doc["task"]
    if isinstance(task, dict):
        if "file" in task:
            task = task["file"]
        elif "grid" in task:
            task = "grid:" + task["grid"]
        else:
            raise CliError("task must name a builtin, {file: ...} or {grid: ...}", EXIT_PARSE)
    base = fig5_preset() if task == "fig5-reconstruction" else RunConfig()
    try:
        config = RunConfig.from_dict({**base.to_dict(), **doc.get("config", {})})
    except (TypeError, ValueError) as exc:
        raise CliError(f"bad config: {exc}", EXIT_PARSE) from None
    return ExperimentSpec(
        task=task,
        config=config,
        repetitions=int(doc.get("repetitions", 1)),
        out=doc.get("out", "runs"),
        trace=bool(doc.get("trace", True)),
        resume=doc.get("resume"),
    )


def _one_run(task: TaskSpec, config: RunConfig, out: Path, trace: bool, removed) -> dict:
    session = LearnerSession(task, config, removed=removed, record=trace)
    session.run()
    settled = session.is_settled()
    settle_step = None
    if settled:
        settle_step = session.last_removal_step or 0
    post_signals = None
    if session.trace is not None:
        if settle_step is not None:
            post_signals = sum(
                1 for e in session.trace.events if isinstance(e, Step) and e.signal and e.step > settle_step
            )
        with open(out / f"trace_seed{config.seed}.csv", "w", newline="") as fh:
            tio.write_trace_csv(session.trace, fh)
    (out / f"removed_seed{config.seed}.tsv").write_text(tio.dumps_snapshot(session.memory.removed))
    return {
        "seed": config.seed,
        "steps": session.step_count,
        "final_p": sorted(list(p) for p in session.allowed_pairs()),
        "final_p_size": session.p_size,
        "removal_events": session.removal_count,
        "removed_pairs": len(session.memory.removed),
        "signals": session.signal_count,
        "settled": settled,
        "settle_step": settle_step,
        "post_settle_signals": post_signals,
        "halted": session.halted,
    }


def cmd_learn(args) -> int:
    spec = _read_spec(args.spec)
    cfg = spec.config
    overrides = {}
    seed = args.seed if args.seed is not None else (
        default_seed() if "AVOIDLAB_SEED" in os.environ else None
    )
    if seed is not None:
        overrides["seed"] = seed
    if args.max_steps is not None:
        overrides["max_steps"] = args.max_steps
    if args.signal_oracle is not None:
        overrides["signal_oracle"] = args.signal_oracle
    if args.restart_delay is not None:
        overrides["restart_delay"] = args.restart_delay
    try:
        cfg = replace(cfg, **overrides)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_DOMAIN) from None
    reps = args.repetitions if args.repetitions is not None else spec.repetitions
    out = Path(args.out or spec.out)
    task = load_task_source(spec.task)
    violations = validate_task(task)
    if violations:
        for v in violations:
            print(v)
        return EXIT_DOMAIN
    removed = set()
    resume = args.resume or spec.resume
    try:
        if resume:
            removed = tio.loads_snapshot(Path(resume).read_text())
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(str(exc), EXIT_IO) from None
    trace = spec.trace and not args.no_trace
    configs = [replace(cfg, seed=cfg.seed + i) for i in range(reps)]
    try:
        if args.workers > 1:
            with ProcessPoolExecutor(args.workers) as pool:
                futures = [pool.submit(_one_run, task, c, out, trace, removed) for c in configs]
                runs = [f.result() for f in futures]
        else:
            runs = [_one_run(task, c, out, trace, removed) for c in configs]
        summary = {"task": spec.task, "config": cfg.to_dict(), "repetitions": reps, "runs": runs}
        (out / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    except OSError as exc:
        raise CliError(str(exc), EXIT_IO) from None
    for r in runs:
        pairs = "{" + ", ".join(f"({f},{a})" for f, a in r["final_p"][:12]) + (
            ", ..." if len(r["final_p"]) > 12 else ""
        ) + "}"
        line = (
            f"seed {r['seed']}: |P|={r['final_p_size']} P={pairs} removals={r['removal_events']}"
            f" settled={'step ' + str(r['settle_step']) if r['settled'] else 'no'}"
        )
        if r["post_settle_signals"] is not None:
            line += f" post-settle-signals={r['post_settle_signals']}"
        if r["halted"]:
            line += f" halted: {r['halted']}"
        print(line)
    return EXIT_OK


# --- grid / qsim / gen / export ---------------------------------------------


def cmd_grid(args) -> int:
    task = _grid_task(args.problem)
    try:
        tio.save_task(task, args.output)
    except OSError as exc:
        raise CliError(str(exc), EXIT_IO) from None
    print(f"wrote {len(task.states)} states, {len(task.features)} features to {args.output}")
    return EXIT_OK


def _write_text(text_writer, output: str | None) -> None:
    if output in (None, "-"):
        text_writer(sys.stdout)
        return
    try:
        with open(output, "w", newline="") as fh:
            text_writer(fh)
    except OSError as exc:
        raise CliError(str(exc), EXIT_IO) from None


def cmd_qsim(args) -> int:
    try:
        series = simulate_fig3(args.n, args.alpha, args.gamma, args.steps, args.pattern, args.seed)
    except ValueError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    _write_text(series.write_csv, args.output)
    return EXIT_OK


def cmd_gen(args) -> int:
    seed = args.seed if args.seed is not None else default_seed()
    try:
        params = RandomTaskParams(
            seed=seed,
            states=args.states,
            actions=args.actions,
            features=args.features,
            max_successors=args.max_successors,
            aversive_density=args.aversive_density,
            empty_density=args.empty_density,
            starts=args.starts,
        )
    except ValueError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    text = tio.dumps_task(gen_random_task(params))
    _write_text(lambda fh: fh.write(text), args.output)
    return EXIT_OK


def cmd_export(args) -> int:
    text = tio.dumps_task(load_task_source(args.name))
    _write_text(lambda fh: fh.write(text), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="avoidlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a task file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("oracle", help="maximal policy and per-start strategy verdicts")
    p.add_argument("file")
    p.add_argument("--start")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("learn", help="seeded A-learning runs")
    p.add_argument("spec", help="experiment JSON, task file, builtin name or grid:<problem>")
    p.add_argument("--seed", type=int)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--signal-oracle")
    p.add_argument("--restart-delay", type=int)
    p.add_argument("--repetitions", type=int)
    p.add_argument("--out")
    p.add_argument("--resume", help="removed-pair snapshot to start from")
    p.add_argument("--no-trace", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("grid", help="compile a grid problem to a task file")
    p.add_argument("problem")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("qsim", help="Q-learning under n-swap rewards")
    p.add_argument("--n", type=int, default=800)
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--steps", type=int, default=40000)
    p.add_argument("--pattern", choices=("alternating", "seeded-random"), default="alternating")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_qsim)

    p = sub.add_parser("gen", help="random tiny task")
    p.add_argument("--seed", type=int)
    p.add_argument("--states", type=int, default=5)
    p.add_argument("--actions", type=int, default=2)
    p.add_argument("--features", type=int, default=3)
    p.add_argument("--max-successors", type=int, default=2)
    p.add_argument("--aversive-density", type=float, default=0.2)
    p.add_argument("--empty-density", type=float, default=0.1)
    p.add_argument("--starts", type=int, default=2)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("export", help="write a builtin task as a task file")
    p.add_argument("name", choices=sorted(BUILTINS))
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except TaskDomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
