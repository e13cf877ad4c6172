"""Seeded generator of tiny random tasks for the property suites."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .task import TaskSpec, reachable_states


@dataclass(frozen=True)
class RandomTaskParams:
    seed: int = 0
    states: int = 5
    actions: int = 2
    features: int = 3
    max_successors: int = 2
    aversive_density: float = 0.2
    empty_density: float = 0.1
    max_features_per_state: int | None = None
    starts: int = 2

    def __post_init__(self) -> None:
        if not 1 <= self.states <= 8:
            raise ValueError("state count must lie in [1, 8]")
        if not 1 <= self.actions <= 3:
            raise ValueError("action count must lie in [1, 3]")
        if not 1 <= self.features <= 4:
            raise ValueError("feature count must lie in [1, 4]")
        if not 1 <= self.max_successors <= 2:
            raise ValueError("max_successors must lie in [1, 2]")
        for name in ("aversive_density", "empty_density"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        per_state = self.max_features_per_state
        if per_state is not None and not 1 <= per_state <= self.features:
            raise ValueError("max_features_per_state must lie in [1, features]")
        if self.starts < 1:
            raise ValueError("need at least one start")


def gen_random_task(params: RandomTaskParams) -> TaskSpec:
    """Deterministic in ``params``; unreachable states are pruned afterwards."""
    rng = random.Random(params.seed)
    states = [f"s{i}" for i in range(params.states)]
    actions = [f"a{i}" for i in range(params.actions)]
    features = [f"f{i}" for i in range(params.features)]
    per_state = params.max_features_per_state or params.features
    starts = rng.sample(states, min(params.starts, len(states)))
    feature_map = {
        s: set(rng.sample(features, rng.randint(1, per_state))) for s in states
    }
    transition = {}
    aversive = set()
    for s in states:
        for a in actions:
            if rng.random() < params.empty_density:
                transition[(s, a)] = set()
            else:
                k = rng.randint(1, params.max_successors)
                transition[(s, a)] = set(rng.sample(states, min(k, len(states))))
            if rng.random() < params.aversive_density:
                aversive.add((s, a))
    draft = TaskSpec.build(states, starts, actions, features, transition, feature_map, aversive)
    keep = reachable_states(draft)
    return TaskSpec.build(
        states=keep,
        starts=starts,
        actions=actions,
        features=features,
        transition={k: v for k, v in transition.items() if k[0] in keep},
        feature_map={s: fs for s, fs in feature_map.items() if s in keep},
        aversive={p for p in aversive if p[0] in keep},
    )


def sample_params(
    seed: int,
    max_states: int = 6,
    max_actions: int = 3,
    max_features: int = 4,
    max_successors: int = 2,
    max_pairs: int | None = None,
    empty_density: float = 0.1,
) -> RandomTaskParams:
    """Draw task dimensions and densities from ``seed``.

    ``max_pairs`` bounds features * actions, which keeps brute-force
    enumeration of all policies affordable.
    """
    rng = random.Random(f"params/{seed}")
    while True:
        n_actions = rng.randint(1, max_actions)
        n_features = rng.randint(1, max_features)
        if max_pairs is None or n_actions * n_features <= max_pairs:
            break
    n_states = rng.randint(1, max_states)
    return RandomTaskParams(
        seed=seed,
        states=n_states,
        actions=n_actions,
        features=n_features,
        max_successors=rng.randint(1, max_successors),
        aversive_density=rng.choice([0.0, 0.1, 0.2, 0.35, 0.5]),
        empty_density=empty_density,
        starts=rng.randint(1, min(3, n_states)),
    )
