"""Online avoidance learning (A-learning) with pluggable schedulers.

The learner keeps a set P of allowed (feature, action) pairs, stored as its
complement (the removed pairs). At a state it only ever picks actions that
P proposes for the state's features. When the applied pair is aversive and
the signal is emitted, or the successor proposes nothing, all pairs
``features(s) x {a}`` are removed and the task is restarted.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

from .task import CompiledTask, Pair, TaskSpec

CHOOSERS = ("uniform-random", "round-robin", "scripted")


class TraceParseError(ValueError):
    pass


# --- events -----------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class TrialStart:
    step: int
    trial: int
    state: str
    p_size: int


@dataclass(frozen=True, slots=True)
class Step:
    step: int
    trial: int
    state: str
    action: str
    successor: str | None
    signal: bool
    p_size: int


@dataclass(frozen=True, slots=True)
class Removal:
    step: int
    trial: int
    pairs: tuple[Pair, ...]
    cause: str  # "aversive" | "blocked-successor"
    p_size: int


@dataclass(frozen=True, slots=True)
class RestartRequested:
    step: int
    trial: int
    kind: str  # "internal" | "external"
    p_size: int


@dataclass(frozen=True, slots=True)
class StartBlocked:
    step: int
    trial: int
    state: str
    p_size: int


Event = Union[TrialStart, Step, Removal, RestartRequested, StartBlocked]


@dataclass
class RunTrace:
    events: list[Event] = field(default_factory=list)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    def of_type(self, kind: type) -> list:
        return [e for e in self.events if isinstance(e, kind)]


# --- memory -----------------------------------------------------------------


class LearnerMemory:
    """The removed pairs; P is their complement in features x actions."""

    def __init__(self, task: TaskSpec, removed: Iterable[Pair] = ()):
        self.features = task.features
        self.actions = task.actions
        self.removed: set[Pair] = set()
        self.remove(removed)

    def remove(self, pairs: Iterable[Pair]) -> None:
        for f, a in pairs:
            if f not in self.features or a not in self.actions:
                raise ValueError(f"pair ({f}, {a}) outside features x actions")
            self.removed.add((f, a))

    def allowed(self) -> set[Pair]:
        return {
            (f, a) for f in self.features for a in self.actions if (f, a) not in self.removed
        }

    def __contains__(self, pair: Pair) -> bool:
        f, a = pair
        return f in self.features and a in self.actions and pair not in self.removed

    def __len__(self) -> int:
        return len(self.features) * len(self.actions) - len(self.removed)


# --- configuration ----------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    """Scheduling and feedback choices for one seeded run.

    Scripts map a step index to the name of the state or action to pick at
    that step (step 0 is initialisation). Steps without a usable entry fall
    back to seeded uniform-random choice.
    """

    seed: int = 0
    max_steps: int = 1000
    start_chooser: str = "uniform-random"
    action_chooser: str = "uniform-random"
    successor_chooser: str = "uniform-random"
    signal_oracle: str = "always"
    external_restart_every: int | None = 100
    restart_delay: int = 0
    start_script: Mapping[int, str] = field(default_factory=dict)
    action_script: Mapping[int, str] = field(default_factory=dict)
    successor_script: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")
        for name in (self.start_chooser, self.action_chooser, self.successor_chooser):
            if name not in CHOOSERS:
                raise ValueError(f"unknown chooser {name!r}")
        parse_signal_oracle(self.signal_oracle)
        if self.external_restart_every is not None and self.external_restart_every <= 0:
            raise ValueError("external_restart_every must be positive")
        if self.restart_delay < 0:
            raise ValueError("restart_delay must be nonnegative")

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        for k in ("start_script", "action_script", "successor_script"):
            d[k] = {str(i): v for i, v in sorted(d[k].items())}
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "RunConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown RunConfig keys: {sorted(unknown)}")
        kw = dict(d)
        for k in ("start_script", "action_script", "successor_script"):
            if k in kw:
                kw[k] = {int(i): v for i, v in kw[k].items()}
        return cls(**kw)


def parse_signal_oracle(spec: str) -> tuple[str, float]:
    """``always`` | ``nswap:N`` | ``bernoulli:P`` -> (kind, parameter)."""
    if spec == "always":
        return "always", 1.0
    kind, _, arg = spec.partition(":")
    if kind == "nswap":
        n = int(arg)
        if n <= 0:
            raise ValueError("n-swap period must be positive")
        return kind, n
    if kind == "bernoulli":
        p = float(arg)
        if not 0.0 < p <= 1.0:
            raise ValueError("bernoulli p must lie in (0, 1]")
        return kind, p
    raise ValueError(f"unknown signal oracle {spec!r}")


class SignalOracle:
    """Decides whether an aversive application actually emits its signal.

    Counters are kept per (state, action) and advance once per consultation,
    i.e. once per application of an aversive pair. Under n-swap the first n
    applications are silent, the next n emit, and so on.
    """

    def __init__(self, spec: str, rng: random.Random):
        self.kind, self.param = parse_signal_oracle(spec)
        self.rng = rng
        self.counts: dict[tuple[int, int], int] = {}

    def emit(self, state: int, action: int) -> bool:
        key = (state, action)
        k = self.counts.get(key, 0)
        self.counts[key] = k + 1
        if self.kind == "always":
            return True
        if self.kind == "nswap":
            return (k // self.param) % 2 == 1
        return self.rng.random() < self.param


class Chooser:
    def __init__(self, kind: str, rng: random.Random, names: list[str], script: Mapping[int, str]):
        self.kind = kind
        self.rng = rng
        self.script = {i: names.index(v) for i, v in script.items() if v in names}
        self.counters: dict = {}

    def choose(self, step: int, options: tuple[int, ...], key=None) -> int:
        if self.kind == "scripted":
            pick = self.script.get(step)
            if pick is not None and pick in options:
                return pick
        elif self.kind == "round-robin":
            k = self.counters.get(key, 0)
            self.counters[key] = k + 1
            return options[k % len(options)]
        return options[self.rng.randrange(len(options))]


# --- the learner ------------------------------------------------------------


class LearnerSession:
    """Single-owner mutable state of one A-learning run."""

    def __init__(
        self,
        task: TaskSpec,
        config: RunConfig | None = None,
        removed: Iterable[Pair] = (),
        record: bool = True,
        compiled: CompiledTask | None = None,
    ):
        self.task = task
        self.config = config = config or RunConfig()
        self.ct = ct = compiled or CompiledTask(task)
        self.memory = LearnerMemory(task, removed)
        self.allowed = ct.masks_from_pairs(self.memory.allowed())
        self.p_size = len(self.memory)
        seed = config.seed
        self.start_chooser = Chooser(
            config.start_chooser, random.Random(f"{seed}/start"), ct.states, config.start_script
        )
        self.action_chooser = Chooser(
            config.action_chooser, random.Random(f"{seed}/action"), ct.actions, config.action_script
        )
        self.successor_chooser = Chooser(
            config.successor_chooser,
            random.Random(f"{seed}/successor"),
            ct.states,
            config.successor_script,
        )
        self.oracle = SignalOracle(config.signal_oracle, random.Random(f"{seed}/signal"))
        self.trace = RunTrace() if record else None
        self.step_count = 0
        self.trial = 0
        self.removal_count = 0
        self.signal_count = 0
        self.last_removal_step: int | None = None
        self.halted: str | None = None
        self.state = -1
        self.restart_countdown: int | None = None
        self._buf: list[Event] = []
        self._restart()
        self._flush()

    # internal helpers

    def _emit(self, event: Event) -> None:
        self._buf.append(event)

    def _flush(self) -> list[Event]:
        out, self._buf = self._buf, []
        if self.trace is not None:
            self.trace.events.extend(out)
        return out

    def _request_restart(self, kind: str, delay: int) -> None:
        self._emit(RestartRequested(self.step_count, self.trial, kind, self.p_size))
        if self.restart_countdown is None or delay < self.restart_countdown:
            self.restart_countdown = delay

    def _restart(self) -> None:
        ct = self.ct
        self.trial += 1
        self.restart_countdown = None
        s = self.start_chooser.choose(self.step_count, tuple(ct.starts))
        self.state = s
        self._emit(TrialStart(self.step_count, self.trial, ct.states[s], self.p_size))
        if ct.prop_mask(self.allowed, s) == 0:
            self._emit(StartBlocked(self.step_count, self.trial, ct.states[s], self.p_size))
            if all(ct.prop_mask(self.allowed, b) == 0 for b in ct.starts):
                self.halted = "all start states are permanently blocked"
                return
            self._request_restart("internal", 0)

    def _remove(self, s: int, a: int, cause: str) -> None:
        ct = self.ct
        bit = 1 << a
        pairs = []
        for f in ct.state_features[s]:
            if self.allowed[f] & bit:
                self.allowed[f] &= ~bit
                pairs.append((ct.features[f], ct.actions[a]))
        pairs.sort()
        self.memory.remove(pairs)
        self.p_size -= len(pairs)
        self.removal_count += 1
        self.last_removal_step = self.step_count
        self._emit(Removal(self.step_count, self.trial, tuple(pairs), cause, self.p_size))
        self._request_restart("internal", self.config.restart_delay)

    # public API

    @property
    def finished(self) -> bool:
        return self.halted is not None or self.step_count >= self.config.max_steps

    @property
    def current_state(self) -> str:
        return self.ct.states[self.state]

    def allowed_pairs(self) -> set[Pair]:
        return self.memory.allowed()

    def step(self) -> list[Event]:
        """Execute one iteration of the learning loop; return its events."""
        if self.finished:
            raise RuntimeError("session finished: " + (self.halted or "step budget exhausted"))
        ct = self.ct
        self.step_count += 1
        t = self.step_count
        every = self.config.external_restart_every
        if every and t % every == 0:
            self._request_restart("external", 0)
        s = self.state
        mask = ct.prop_mask(self.allowed, s)
        if self.restart_countdown is not None:
            if self.restart_countdown == 0 or mask == 0:
                self._restart()
                return self._flush()
            self.restart_countdown -= 1
        assert mask, f"non-start state {ct.states[s]} blocked without pending restart"
        a = self.action_chooser.choose(t, ct.bits(mask), s)
        succ = ct.succ[s][a]
        if not succ:
            self._emit(Step(t, self.trial, ct.states[s], ct.actions[a], None, False, self.p_size))
            self._remove(s, a, "blocked-successor")
            return self._flush()
        s2 = self.successor_chooser.choose(t, succ, (s, a))
        signal = bool(ct.aversive_mask[s] >> a & 1) and self.oracle.emit(s, a)
        if signal:
            self.signal_count += 1
        self._emit(Step(t, self.trial, ct.states[s], ct.actions[a], ct.states[s2], signal, self.p_size))
        if signal:
            self._remove(s, a, "aversive")
        elif ct.prop_mask(self.allowed, s2) == 0:
            self._remove(s, a, "blocked-successor")
        self.state = s2
        return self._flush()

    def run(self, steps: int | None = None) -> None:
        """Advance until the budget (or ``steps`` more iterations) is used."""
        limit = self.config.max_steps if steps is None else min(
            self.config.max_steps, self.step_count + steps
        )
        while self.halted is None and self.step_count < limit:
            self.step()

    def is_settled(self) -> bool:
        return settled_masks(self.ct, self.allowed)


# --- whole runs -------------------------------------------------------------


@dataclass
class RunResult:
    trace: RunTrace | None
    final_p: set[Pair]
    steps: int
    removal_count: int
    signal_count: int
    settled: bool
    settle_step: int | None
    halted: str | None

    def __iter__(self):
        yield self.trace
        yield self.final_p


def _result(session: LearnerSession) -> RunResult:
    settled = session.is_settled()
    settle_step = None
    if settled:
        settle_step = session.last_removal_step if session.last_removal_step is not None else 0
    return RunResult(
        trace=session.trace,
        final_p=session.allowed_pairs(),
        steps=session.step_count,
        removal_count=session.removal_count,
        signal_count=session.signal_count,
        settled=settled,
        settle_step=settle_step,
        halted=session.halted,
    )


def run(
    task: TaskSpec,
    config: RunConfig | None = None,
    removed: Iterable[Pair] = (),
    record: bool = True,
) -> RunResult:
    """Run until the step budget is exhausted (or every start is blocked).

    Since settledness only depends on P, the settle step is the step of the
    last removal whenever the final P is settled.
    """
    session = LearnerSession(task, config, removed=removed, record=record)
    session.run()
    return _result(session)


def run_until_settled(session: LearnerSession, check_every: int = 1000) -> int | None:
    """Step until P is settled or the budget runs out; return the settle step.

    The settle test is only re-run when a removal happened since the last
    check.
    """
    checked = None
    while True:
        if session.removal_count != checked:
            checked = session.removal_count
            if session.is_settled():
                return session.last_removal_step if session.last_removal_step is not None else 0
        if session.finished:
            return None
        session.run(check_every)


# --- settle test ------------------------------------------------------------


def settled_masks(ct: CompiledTask, allowed: list[int]) -> bool:
    blocked = [ct.prop_mask(allowed, s) == 0 for s in range(len(ct.states))]
    seen = [False] * len(ct.states)
    queue = deque()
    for b in ct.starts:
        if not blocked[b] and not seen[b]:
            seen[b] = True
            queue.append(b)
    while queue:
        s = queue.popleft()
        mask = ct.prop_mask(allowed, s)
        if mask & ct.aversive_mask[s]:
            return False
        for a in ct.bits(mask):
            succ = ct.succ[s][a]
            if not succ:
                return False
            for t in succ:
                if blocked[t]:
                    return False
                if not seen[t]:
                    seen[t] = True
                    queue.append(t)
    return True


def is_settled(task: TaskSpec, p: Iterable[Pair], compiled: CompiledTask | None = None) -> bool:
    """True iff no removal can ever be triggered again under allowed set ``p``.

    Explores every state reachable from the unblocked starts through actions
    proposed by ``p`` and every successor, and looks for an aversive pair, an
    action without successors or a blocked successor.
    """
    ct = compiled or CompiledTask(task)
    return settled_masks(ct, ct.masks_from_pairs(p))


# --- trials -----------------------------------------------------------------


@dataclass
class Trial:
    start: str
    events: list[Event] = field(default_factory=list)

    @property
    def steps(self) -> list[Step]:
        return [e for e in self.events if isinstance(e, Step)]

    @property
    def removals(self) -> list[Removal]:
        return [e for e in self.events if isinstance(e, Removal)]

    @property
    def sequence(self) -> list[str | None]:
        """s0, a0, s1, a1, ..., s_n."""
        seq: list[str | None] = [self.start]
        for st in self.steps:
            seq += [st.action, st.successor if st.successor is not None else st.state]
        return seq

    @property
    def last_pair(self) -> Pair | None:
        steps = self.steps
        return (steps[-1].state, steps[-1].action) if steps else None


def segment_trials(trace: RunTrace | Iterable[Event]) -> list[Trial]:
    """Split a trace at every TrialStart and check each trial is a chain."""
    trials: list[Trial] = []
    current: str | None = None
    for e in trace:
        if isinstance(e, TrialStart):
            trials.append(Trial(e.state, [e]))
            current = e.state
            continue
        if not trials:
            raise TraceParseError(f"event before first TrialStart: {e!r}")
        if isinstance(e, Step):
            if e.state != current:
                raise TraceParseError(
                    f"step {e.step} starts at {e.state}, trial is at {current}"
                )
            if e.successor is not None:
                current = e.successor
        trials[-1].events.append(e)
    return trials
