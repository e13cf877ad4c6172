"""Finite tasks, feature-based policies and the observation contract.

A task is the tuple (states, starts, actions, features, transition,
feature map, aversive pairs). Identifiers are opaque strings; every
iteration in this package goes through ``sorted`` so seeded runs are
reproducible.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

Pair = tuple[str, str]


class TaskDomainError(ValueError):
    """An identifier outside the task or policy domain was used."""


class TaskConstructionError(ValueError):
    """A derived task could not be built from its inputs."""


@dataclass(frozen=True)
class TaskSpec:
    states: frozenset[str]
    starts: frozenset[str]
    actions: frozenset[str]
    features: frozenset[str]
    transition: Mapping[Pair, frozenset[str]]
    feature_map: Mapping[str, frozenset[str]]
    aversive: frozenset[Pair]

    @classmethod
    def build(
        cls,
        states: Iterable[str],
        starts: Iterable[str],
        actions: Iterable[str],
        features: Iterable[str],
        transition: Mapping[Pair, Iterable[str]],
        feature_map: Mapping[str, Iterable[str]],
        aversive: Iterable[Pair] = (),
    ) -> "TaskSpec":
        """Freeze plain collections into a task.

        Missing ``(state, action)`` entries of the transition map are filled
        with the empty successor set so that the map is total.
        """
        states = frozenset(states)
        actions = frozenset(actions)
        trans = {key: frozenset(succ) for key, succ in transition.items()}
        for s in states:
            for a in actions:
                trans.setdefault((s, a), frozenset())
        return cls(
            states=states,
            starts=frozenset(starts),
            actions=actions,
            features=frozenset(features),
            transition=trans,
            feature_map={s: frozenset(fs) for s, fs in feature_map.items()},
            aversive=frozenset((s, a) for s, a in aversive),
        )

    def successors(self, state: str, action: str) -> frozenset[str]:
        return self.transition.get((state, action), frozenset())

    def features_of(self, state: str) -> frozenset[str]:
        return self.feature_map.get(state, frozenset())

    def observe(self, state: str) -> "Observation":
        return Observation(self.features_of(state), state)


@dataclass(frozen=True)
class Observation:
    """What the learner perceives of a state.

    ``state_token`` is carried for logging and adjudication only; the
    learner's decision rule reads ``feature_set`` exclusively.
    """

    feature_set: frozenset[str]
    state_token: str


@dataclass(frozen=True)
class Policy:
    """Total map from features to (possibly empty) action sets."""

    mapping: Mapping[str, frozenset[str]] = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Iterable[str]]) -> "Policy":
        return cls({f: frozenset(acts) for f, acts in mapping.items()})

    @classmethod
    def from_pairs(cls, features: Iterable[str], pairs: Iterable[Pair]) -> "Policy":
        mapping: dict[str, set[str]] = {f: set() for f in features}
        for f, a in pairs:
            if f not in mapping:
                raise TaskDomainError(f"pair references unknown feature {f!r}")
            mapping[f].add(a)
        return cls.from_mapping(mapping)

    @classmethod
    def full(cls, task: TaskSpec) -> "Policy":
        return cls({f: task.actions for f in task.features})

    @classmethod
    def empty(cls, task: TaskSpec) -> "Policy":
        return cls({f: frozenset() for f in task.features})

    @property
    def domain(self) -> frozenset[str]:
        return frozenset(self.mapping)

    def pairs(self) -> frozenset[Pair]:
        return frozenset((f, a) for f, acts in self.mapping.items() for a in acts)

    def __getitem__(self, feature: str) -> frozenset[str]:
        return self.mapping[feature]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Policy):
            return NotImplemented
        return dict(self.mapping) == dict(other.mapping)

    def __hash__(self) -> int:
        return hash(frozenset(self.mapping.items()))

    def __str__(self) -> str:
        items = ", ".join(
            f"{f}->{{{', '.join(sorted(self.mapping[f]))}}}" for f in sorted(self.mapping)
        )
        return "{" + items + "}"


def prop(policy: Policy, feature_set: Iterable[str]) -> frozenset[str]:
    """Union of the actions the policy proposes for the given features."""
    proposed: set[str] = set()
    for f in feature_set:
        try:
            proposed |= policy.mapping[f]
        except KeyError:
            raise TaskDomainError(f"feature {f!r} not in policy domain") from None
    return frozenset(proposed)


def is_blocked(policy: Policy, feature_set: Iterable[str]) -> bool:
    return not prop(policy, feature_set)


def check_policy(task: TaskSpec, policy: Policy) -> None:
    """Raise TaskDomainError unless ``policy`` is well formed for ``task``."""
    if policy.domain != task.features:
        missing = sorted(task.features - policy.domain)
        extra = sorted(policy.domain - task.features)
        raise TaskDomainError(
            f"policy domain mismatch (missing={missing}, extra={extra})"
        )
    for f in sorted(policy.mapping):
        unknown = policy.mapping[f] - task.actions
        if unknown:
            raise TaskDomainError(f"policy maps {f!r} to unknown actions {sorted(unknown)}")


@dataclass(frozen=True)
class Violation:
    kind: str
    element: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.element}"


def reachable_states(task: TaskSpec) -> set[str]:
    """States reachable from the starts through any transition chain."""
    seen = {s for s in task.starts if s in task.states}
    queue = deque(sorted(seen))
    actions = sorted(task.actions)
    while queue:
        s = queue.popleft()
        for a in actions:
            for t in sorted(task.successors(s, a)):
                if t in task.states and t not in seen:
                    seen.add(t)
                    queue.append(t)
    return seen


def validate_task(task: TaskSpec) -> list[Violation]:
    """Every broken task invariant, one record per offending element."""
    out: list[Violation] = []
    if not task.states:
        out.append(Violation("empty-states", "states"))
    if not task.starts:
        out.append(Violation("empty-starts", "starts"))
    if not task.actions:
        out.append(Violation("empty-actions", "actions"))
    if not task.features:
        out.append(Violation("empty-features", "features"))
    for s in sorted(task.starts - task.states):
        out.append(Violation("unknown-start", s))
    for s, a in sorted(task.aversive):
        if s not in task.states:
            out.append(Violation("dangling-aversive-state", f"({s}, {a})"))
        if a not in task.actions:
            out.append(Violation("dangling-aversive-action", f"({s}, {a})"))
    for (s, a) in sorted(task.transition):
        if s not in task.states or a not in task.actions:
            out.append(Violation("dangling-transition-key", f"({s}, {a})"))
        for t in sorted(task.transition[(s, a)] - task.states):
            out.append(Violation("dangling-successor", f"({s}, {a}) -> {t}"))
    for s in sorted(task.states):
        for a in sorted(task.actions):
            if (s, a) not in task.transition:
                out.append(Violation("missing-transition", f"({s}, {a})"))
    for s in sorted(task.states - set(task.feature_map)):
        out.append(Violation("missing-feature-map", s))
    for s in sorted(task.feature_map):
        if s not in task.states:
            out.append(Violation("dangling-feature-map-state", s))
        for f in sorted(task.feature_map[s] - task.features):
            out.append(Violation("dangling-feature", f"{s} -> {f}"))
    for s in sorted(task.states - reachable_states(task)):
        out.append(Violation("unreachable", s))
    return out


def extend_features(
    task: TaskSpec,
    new_features: Iterable[str],
    augmented_feature_map: Mapping[str, Iterable[str]],
) -> TaskSpec:
    """Add disjoint features without changing how the old ones are used."""
    new_features = frozenset(new_features)
    clash = new_features & task.features
    if clash:
        raise TaskConstructionError(f"new features overlap old ones: {sorted(clash)}")
    fmap = {s: frozenset(fs) for s, fs in augmented_feature_map.items()}
    all_features = task.features | new_features
    for s in sorted(task.states):
        fs = fmap.get(s, frozenset())
        if fs & task.features != task.features_of(s):
            raise TaskConstructionError(f"augmented map changes old features of state {s!r}")
        if not fs <= all_features:
            raise TaskConstructionError(f"state {s!r} mapped to unknown features")
    return TaskSpec(
        states=task.states,
        starts=task.starts,
        actions=task.actions,
        features=all_features,
        transition=task.transition,
        feature_map=fmap,
        aversive=task.aversive,
    )


class CompiledTask:
    """Index-based view of a task used by the hot loops.

    States, actions and features are numbered in sorted order. Action sets
    are int bitmasks (bit i = i-th sorted action).
    """

    def __init__(self, task: TaskSpec):
        self.task = task
        self.states = sorted(task.states)
        self.actions = sorted(task.actions)
        self.features = sorted(task.features)
        self.state_index = {s: i for i, s in enumerate(self.states)}
        self.action_index = {a: i for i, a in enumerate(self.actions)}
        self.feature_index = {f: i for i, f in enumerate(self.features)}
        self.starts = [self.state_index[s] for s in sorted(task.starts)]
        self.full_mask = (1 << len(self.actions)) - 1
        self.state_features: list[tuple[int, ...]] = [
            tuple(self.feature_index[f] for f in sorted(task.features_of(s)))
            for s in self.states
        ]
        self.succ: list[list[tuple[int, ...]]] = [
            [
                tuple(self.state_index[t] for t in sorted(task.successors(s, a)))
                for a in self.actions
            ]
            for s in self.states
        ]
        self.aversive_mask = [0] * len(self.states)
        for s, a in task.aversive:
            self.aversive_mask[self.state_index[s]] |= 1 << self.action_index[a]
        self.feature_states: list[list[int]] = [[] for _ in self.features]
        for i, fs in enumerate(self.state_features):
            for f in fs:
                self.feature_states[f].append(i)
        self._bits: dict[int, tuple[int, ...]] = {}

    def bits(self, mask: int) -> tuple[int, ...]:
        """Action indices set in ``mask``, ascending."""
        out = self._bits.get(mask)
        if out is None:
            out = tuple(i for i in range(len(self.actions)) if mask >> i & 1)
            self._bits[mask] = out
        return out

    def prop_mask(self, allowed: list[int], state: int) -> int:
        m = 0
        for f in self.state_features[state]:
            m |= allowed[f]
        return m

    def masks_from_policy(self, policy: Policy) -> list[int]:
        masks = []
        for f in self.features:
            m = 0
            for a in policy.mapping.get(f, ()):
                m |= 1 << self.action_index[a]
            masks.append(m)
        return masks

    def policy_from_masks(self, masks: list[int]) -> Policy:
        return Policy(
            {
                f: frozenset(self.actions[i] for i in self.bits(m))
                for f, m in zip(self.features, masks)
            }
        )

    def masks_from_pairs(self, pairs: Iterable[Pair]) -> list[int]:
        masks = [0] * len(self.features)
        for f, a in pairs:
            masks[self.feature_index[f]] |= 1 << self.action_index[a]
        return masks

    def pairs_from_masks(self, masks: list[int]) -> set[Pair]:
        return {
            (self.features[f], self.actions[i])
            for f, m in enumerate(masks)
            for i in self.bits(m)
        }
