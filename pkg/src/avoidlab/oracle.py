"""Offline strategy checking, maximal-policy pruning and a brute-force oracle."""

from __future__ import annotations

from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Literal

from .task import (
    CompiledTask,
    Pair,
    Policy,
    TaskDomainError,
    TaskSpec,
    check_policy,
    prop,
)

BRUTE_FORCE_CAP = 16


@dataclass(frozen=True)
class StrategyWitness:
    """First failing condition of the strategy definition.

    ``condition`` is one of ``"1"`` (start blocked), ``"2a"`` (blocked
    successor), ``"2a-empty"`` (no successor at all) or ``"2b"`` (aversive).
    """

    condition: str
    state: str
    action: str | None = None
    successor: str | None = None

    def __str__(self) -> str:
        if self.condition == "1":
            return f"condition 1: start {self.state} is blocked"
        if self.condition == "2b":
            return f"condition 2b: ({self.state}, {self.action}) is aversive"
        if self.condition == "2a-empty":
            return f"condition 2a: ({self.state}, {self.action}) has no successor"
        return (
            f"condition 2a: ({self.state}, {self.action}) reaches blocked "
            f"successor {self.successor}"
        )


@dataclass(frozen=True)
class StrategyVerdict:
    holds: bool
    witness: StrategyWitness | None = None

    def __bool__(self) -> bool:
        return self.holds


@dataclass(frozen=True)
class PrunedPair:
    feature: str
    action: str
    reason: Literal["aversive", "blocked-successor", "empty-transition"]
    state: str
    successor: str | None = None

    def __str__(self) -> str:
        if self.reason == "aversive":
            why = f"aversive at ({self.state},{self.action})"
        elif self.reason == "empty-transition":
            why = f"no successor at ({self.state},{self.action})"
        else:
            why = f"blocked successor {self.successor} of ({self.state},{self.action})"
        return f"({self.feature}, {self.action}): {why}"


@dataclass(frozen=True)
class MaximalPolicy:
    policy: Policy
    pruned: list[PrunedPair] = field(default_factory=list)


def _violation(task: TaskSpec, policy: Policy, state: str, action: str) -> StrategyWitness | None:
    if (state, action) in task.aversive:
        return StrategyWitness("2b", state, action)
    succ = task.successors(state, action)
    if not succ:
        return StrategyWitness("2a-empty", state, action)
    for t in sorted(succ):
        if not prop(policy, task.features_of(t)):
            return StrategyWitness("2a", state, action, t)
    return None


def is_strategy(task: TaskSpec, policy: Policy, start: str) -> StrategyVerdict:
    """Check the strategy conditions for ``start`` over every task state.

    Proposing an action whose successor set is empty counts as a failure of
    the successor condition; the learner cannot apply such an action either.
    """
    if start not in task.starts:
        raise TaskDomainError(f"{start!r} is not a start state")
    check_policy(task, policy)
    if not prop(policy, task.features_of(start)):
        return StrategyVerdict(False, StrategyWitness("1", start))
    for s in sorted(task.states):
        for a in sorted(prop(policy, task.features_of(s))):
            w = _violation(task, policy, s, a)
            if w is not None:
                return StrategyVerdict(False, w)
    return StrategyVerdict(True)


def maximal_policy(
    task: TaskSpec, order: Literal["lexicographic", "reverse"] = "lexicographic"
) -> MaximalPolicy:
    """Greatest policy satisfying the successor and aversion conditions.

    Starts from the full policy and prunes (feature, action) pairs until no
    state proposes an aversive action, an action without successors, or an
    action with a blocked successor. ``order`` only changes which violations
    are found first; the fixpoint itself does not depend on it.
    """
    ct = CompiledTask(task)
    rev = order == "reverse"
    n = len(ct.states)
    allowed = [ct.full_mask] * len(ct.features)
    preds: list[set[int]] = [set() for _ in range(n)]
    for s in range(n):
        for succ in ct.succ[s]:
            for t in succ:
                preds[t].add(s)
    blocked = [ct.prop_mask(allowed, s) == 0 for s in range(n)]
    state_order = list(range(n))[::-1] if rev else list(range(n))
    queue = deque(state_order)
    queued = [True] * n
    pruned: list[PrunedPair] = []

    def enqueue(s: int) -> None:
        if not queued[s]:
            queued[s] = True
            queue.append(s)

    while queue:
        s = queue.popleft()
        queued[s] = False
        acts = ct.bits(ct.prop_mask(allowed, s))
        for a in reversed(acts) if rev else acts:
            reason, succ_name = None, None
            bit = 1 << a
            if ct.aversive_mask[s] & bit:
                reason = "aversive"
            elif not ct.succ[s][a]:
                reason = "empty-transition"
            else:
                succ = ct.succ[s][a]
                for t in reversed(succ) if rev else succ:
                    if blocked[t]:
                        reason, succ_name = "blocked-successor", ct.states[t]
                        break
            if reason is None:
                continue
            touched = []
            for f in ct.state_features[s]:
                if allowed[f] & bit:
                    allowed[f] &= ~bit
                    touched.append(f)
                    pruned.append(
                        PrunedPair(ct.features[f], ct.actions[a], reason, ct.states[s], succ_name)
                    )
            for f in touched:
                for t in ct.feature_states[f]:
                    if not blocked[t] and ct.prop_mask(allowed, t) == 0:
                        blocked[t] = True
                        for p in sorted(preds[t], reverse=rev):
                            enqueue(p)
    return MaximalPolicy(ct.policy_from_masks(allowed), pruned)


def has_strategy(task: TaskSpec, start: str, maximal: MaximalPolicy | None = None) -> bool:
    if start not in task.starts:
        raise TaskDomainError(f"{start!r} is not a start state")
    if maximal is None:
        maximal = maximal_policy(task)
    return bool(prop(maximal.policy, task.features_of(start)))


def union_policies(p1: Policy, p2: Policy) -> Policy:
    if p1.domain != p2.domain:
        raise TaskDomainError("policies have different feature domains")
    return Policy({f: p1.mapping[f] | p2.mapping[f] for f in p1.mapping})


# Brute-force oracle: enumerate every subset of features x actions.


def all_pairs(task: TaskSpec) -> list[Pair]:
    return [(f, a) for f in sorted(task.features) for a in sorted(task.actions)]


def policy_at(task: TaskSpec, index: int, pairs: list[Pair] | None = None) -> Policy:
    """The policy whose pair set is encoded by the bits of ``index``."""
    pairs = all_pairs(task) if pairs is None else pairs
    chosen = [p for i, p in enumerate(pairs) if index >> i & 1]
    return Policy.from_pairs(task.features, chosen)


def _check_cap(task: TaskSpec) -> int:
    k = len(task.features) * len(task.actions)
    if k > BRUTE_FORCE_CAP:
        raise ValueError(f"|F|*|A| = {k} exceeds brute-force cap {BRUTE_FORCE_CAP}")
    return k


def strategies_in_range(task: TaskSpec, lo: int, hi: int) -> dict[str, list[int]]:
    """Indices in [lo, hi) whose policy is a strategy, per start state."""
    pairs = all_pairs(task)
    found: dict[str, list[int]] = {s: [] for s in sorted(task.starts)}
    for idx in range(lo, hi):
        pol = policy_at(task, idx, pairs)
        for s in found:
            if is_strategy(task, pol, s).holds:
                found[s].append(idx)
    return found


def enumerate_strategies(task: TaskSpec, workers: int = 1) -> dict[str, list[Policy]]:
    """All strategies per start, by exhaustive enumeration of 2^(|F||A|) policies."""
    k = _check_cap(task)
    total = 1 << k
    if workers <= 1:
        found = strategies_in_range(task, 0, total)
    else:
        bounds = [(total * i // workers, total * (i + 1) // workers) for i in range(workers)]
        found = {s: [] for s in sorted(task.starts)}
        with ProcessPoolExecutor(workers) as pool:
            futures = [pool.submit(strategies_in_range, task, lo, hi) for lo, hi in bounds]
            for fut in futures:
                for s, idxs in fut.result().items():
                    found[s].extend(idxs)
    pairs = all_pairs(task)
    return {s: [policy_at(task, i, pairs) for i in idxs] for s, idxs in found.items()}


def iter_policies(task: TaskSpec) -> Iterator[Policy]:
    k = _check_cap(task)
    pairs = all_pairs(task)
    for idx in range(1 << k):
        yield policy_at(task, idx, pairs)
