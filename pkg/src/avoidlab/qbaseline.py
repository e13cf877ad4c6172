"""Constant step-size Q-learning on a one-state task under n-swap rewards.

Action ``a`` always pays +1. Action ``b`` pays +5 for n applications, then
-10 for n applications, and so on; the schedule counts applications of
``b`` only. With a constant step size the estimate for ``b`` keeps
flipping sign no matter how long the simulation runs.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field
from typing import Literal, Mapping, TextIO

from .task import TaskSpec

QTable = Mapping[tuple[str, str], float]

CSV_HEADER = ("step", "q_1a", "q_1b", "reward", "action", "phase")
REWARD_A = 1.0
REWARD_HIGH = 5.0
REWARD_LOW = -10.0


def q_update(
    q: QTable, s: str, a: str, r: float, s2: str, alpha: float, gamma: float
) -> dict[tuple[str, str], float]:
    """One Q-learning update; returns a new table."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    nxt = max((v for (st, _), v in q.items() if st == s2), default=0.0)
    out = dict(q)
    old = out.get((s, a), 0.0)
    out[(s, a)] = old + alpha * (r + gamma * nxt - old)
    return out


@dataclass
class SwapSchedule:
    n: int
    applications: int = 0

    def __post_init__(self) -> None:
        if self.n <= 0:
            raise ValueError("n must be positive")

    @property
    def phase(self) -> int:
        return self.applications // self.n


def n_swap_reward(schedule: SwapSchedule) -> float:
    """Reward for the next application of ``b``; advances the schedule."""
    r = REWARD_HIGH if schedule.phase % 2 == 0 else REWARD_LOW
    schedule.applications += 1
    return r


@dataclass
class QSeries:
    q_1a: list[float] = field(default_factory=list)
    q_1b: list[float] = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)
    actions: list[str] = field(default_factory=list)
    phases: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.q_1a)

    def write_csv(self, fh: TextIO) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for i in range(len(self)):
            w.writerow(
                (i + 1, repr(self.q_1a[i]), repr(self.q_1b[i]), self.rewards[i], self.actions[i], self.phases[i])
            )


def simulate_fig3(
    n: int = 800,
    alpha: float = 0.25,
    gamma: float = 0.5,
    steps: int = 40000,
    pattern: Literal["alternating", "seeded-random"] = "alternating",
    seed: int = 0,
) -> QSeries:
    """Run the one-state task, logging both Q-values after every step.

    ``alternating`` plays a, b, a, b, ...; ``seeded-random`` picks each
    action with probability 1/2.
    """
    if steps <= 0:
        raise ValueError("steps must be positive")
    if pattern not in ("alternating", "seeded-random"):
        raise ValueError(f"unknown action pattern {pattern!r}")
    rng = random.Random(seed)
    schedule = SwapSchedule(n)
    q: dict[tuple[str, str], float] = {("1", "a"): 0.0, ("1", "b"): 0.0}
    out = QSeries()
    for t in range(steps):
        if pattern == "alternating":
            action = "a" if t % 2 == 0 else "b"
        else:
            action = rng.choice("ab")
        phase = schedule.phase
        r = REWARD_A if action == "a" else n_swap_reward(schedule)
        q = q_update(q, "1", action, r, "1", alpha, gamma)
        out.q_1a.append(q[("1", "a")])
        out.q_1b.append(q[("1", "b")])
        out.rewards.append(r)
        out.actions.append(action)
        out.phases.append(phase)
    return out


def sign_changes(values) -> int:
    """Sign flips in a series, skipping exact zeros."""
    count, prev = 0, 0
    for v in values:
        sgn = (v > 0) - (v < 0)
        if sgn == 0:
            continue
        if prev and sgn != prev:
            count += 1
        prev = sgn
    return count


def q_bounds(gamma: float) -> tuple[float, float]:
    """Loose envelope for Q-values with rewards in [-10, +5]."""
    return REWARD_LOW / (1 - gamma), REWARD_HIGH * (1 + gamma) / (1 - gamma)


def fig2b_task() -> TaskSpec:
    """The same one-state task with a boolean aversive signal on ``b``."""
    return TaskSpec.build(
        states={"1"},
        starts={"1"},
        actions={"a", "b"},
        features={"f1"},
        transition={("1", "a"): {"1"}, ("1", "b"): {"1"}},
        feature_map={"1": {"f1"}},
        aversive={("1", "b")},
    )
