"""Simple grid navigation with relocating targets and a time limit.

Coordinates are integer points in [0, width] x [0, height]; positive y
points downward. States are (agent, target, time) triples and the agent
only observes the offset to its target together with the remaining time.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .task import Policy, TaskSpec

Point = tuple[int, int]

ACTIONS = (
    "left",
    "right",
    "up",
    "down",
    "left-up",
    "left-down",
    "right-up",
    "right-down",
    "wait",
)

_STEP = {"left": (-1, 0), "right": (1, 0), "up": (0, -1), "down": (0, 1), "wait": (0, 0)}
_DIAGONAL = {
    "left-up": (-1, -1),
    "left-down": (-1, 1),
    "right-up": (1, -1),
    "right-down": (1, 1),
}


class GridError(ValueError):
    pass


def l1(p: Point, q: Point) -> int:
    return abs(q[0] - p[0]) + abs(q[1] - p[1])


def move(x: int, y: int, action: str) -> frozenset[Point]:
    """Candidate positions after ``action``; diagonals may land on either axis."""
    if action in _STEP:
        dx, dy = _STEP[action]
        return frozenset({(x + dx, y + dy)})
    if action in _DIAGONAL:
        dx, dy = _DIAGONAL[action]
        return frozenset({(x + dx, y + dy), (x + dx, y), (x, y + dy)})
    raise GridError(f"unknown grid action {action!r}")


@dataclass(frozen=True, order=True)
class GridState:
    agent: Point
    target: Point
    time: int

    @property
    def id(self) -> str:
        return f"{self.agent[0]},{self.agent[1]};{self.target[0]},{self.target[1]};{self.time}"

    @classmethod
    def parse(cls, ident: str) -> "GridState":
        agent, target, time = ident.split(";")
        ax, ay = map(int, agent.split(","))
        tx, ty = map(int, target.split(","))
        return cls((ax, ay), (tx, ty), int(time))


@dataclass(frozen=True, order=True)
class GridFeature:
    offset: Point
    time: int

    @property
    def id(self) -> str:
        return f"{self.offset[0]},{self.offset[1]};{self.time}"

    @classmethod
    def parse(cls, ident: str) -> "GridFeature":
        offset, time = ident.split(";")
        dx, dy = map(int, offset.split(","))
        return cls((dx, dy), int(time))


@dataclass(frozen=True)
class GridProblem:
    width: int
    height: int
    starts: frozenset[Point]
    targets: frozenset[Point]
    tau: int

    @classmethod
    def make(
        cls, width: int, height: int, starts: Iterable[Point], targets: Iterable[Point], tau: int
    ) -> "GridProblem":
        return cls(
            width,
            height,
            frozenset(tuple(p) for p in starts),
            frozenset(tuple(p) for p in targets),
            tau,
        )

    def inside(self, p: Point) -> bool:
        return 0 <= p[0] <= self.width and 0 <= p[1] <= self.height

    def violations(self) -> list[str]:
        out = []
        if self.width < 0 or self.height < 0:
            out.append("terrain dimensions must be nonnegative")
        if self.tau <= 0:
            out.append("tau must be positive")
        if not self.starts:
            out.append("no start locations")
        if not self.targets:
            out.append("no target locations")
        for p in sorted(self.starts | self.targets):
            if not self.inside(p):
                out.append(f"point {p} outside terrain")
        for p in sorted(self.targets):
            for q in sorted(self.targets):
                if l1(p, q) >= self.tau:
                    out.append(f"targets {p}, {q}: distance {l1(p, q)} >= tau {self.tau}")
        for p in sorted(self.starts):
            for q in sorted(self.targets):
                if l1(p, q) >= self.tau:
                    out.append(f"start {p}, target {q}: distance {l1(p, q)} >= tau {self.tau}")
        return out

    def check(self) -> None:
        bad = self.violations()
        if bad:
            raise GridError("; ".join(bad))

    def to_json(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "starts": [list(p) for p in sorted(self.starts)],
            "targets": [list(p) for p in sorted(self.targets)],
            "tau": self.tau,
        }

    @classmethod
    def from_json(cls, d: dict) -> "GridProblem":
        keys = {"width", "height", "starts", "targets", "tau"}
        if set(d) != keys:
            raise GridError(f"grid problem keys must be exactly {sorted(keys)}")
        return cls.make(
            int(d["width"]),
            int(d["height"]),
            [tuple(map(int, p)) for p in d["starts"]],
            [tuple(map(int, p)) for p in d["targets"]],
            int(d["tau"]),
        )

    @classmethod
    def load(cls, path: str | Path) -> "GridProblem":
        return cls.from_json(json.loads(Path(path).read_text()))


def grid_transition(problem: GridProblem, s: GridState, action: str) -> frozenset[GridState]:
    """Every state the action-application procedure can return."""
    out = set()
    for cand in move(*s.agent, action):
        agent = cand if problem.inside(cand) else s.agent
        if agent == s.target:
            for q in problem.targets:
                out.add(GridState(agent, q, problem.tau))
        else:
            out.add(GridState(agent, s.target, max(0, s.time - 1)))
    return frozenset(out)


def grid_feature(s: GridState) -> GridFeature:
    return GridFeature((s.target[0] - s.agent[0], s.target[1] - s.agent[1]), s.time)


def grid_aversive(s: GridState, action: str) -> bool:
    return s.time == 0


def start_states(problem: GridProblem) -> list[GridState]:
    return sorted(GridState(p, q, problem.tau) for p in problem.starts for q in problem.targets)


def all_features(problem: GridProblem) -> list[GridFeature]:
    return [
        GridFeature((dx, dy), t)
        for dx in range(-problem.width, problem.width + 1)
        for dy in range(-problem.height, problem.height + 1)
        for t in range(problem.tau + 1)
    ]


def build_task(problem: GridProblem) -> TaskSpec:
    """Explicit task over the states reachable from the start states."""
    problem.check()
    starts = start_states(problem)
    seen = set(starts)
    queue = deque(starts)
    transition: dict[tuple[str, str], frozenset[str]] = {}
    while queue:
        s = queue.popleft()
        for a in ACTIONS:
            succ = grid_transition(problem, s, a)
            transition[(s.id, a)] = frozenset(t.id for t in succ)
            for t in sorted(succ):
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
    return TaskSpec(
        states=frozenset(s.id for s in seen),
        starts=frozenset(s.id for s in starts),
        actions=frozenset(ACTIONS),
        features=frozenset(f.id for f in all_features(problem)),
        transition=transition,
        feature_map={s.id: frozenset({grid_feature(s).id}) for s in seen},
        aversive=frozenset((s.id, a) for s in seen for a in ACTIONS if grid_aversive(s, a)),
    )


def in_bridgeable_set(f: GridFeature) -> bool:
    """The target is reachable with straight moves in the remaining time."""
    return abs(f.offset[0]) + abs(f.offset[1]) < f.time


def prop2_action(f: GridFeature) -> str | None:
    if not in_bridgeable_set(f):
        return None
    x, y = f.offset
    if x < 0:
        return "left"
    if x > 0:
        return "right"
    if y < 0:
        return "up"
    if y > 0:
        return "down"
    return "wait"


def prop2_policy(problem: GridProblem) -> Policy:
    """Walk straight toward the target while it is still reachable in time."""
    mapping = {}
    for f in all_features(problem):
        a = prop2_action(f)
        mapping[f.id] = frozenset({a}) if a else frozenset()
    return Policy(mapping)
