import pytest
from hypothesis import given, strategies as st

from avoidlab.grid import GridProblem, build_task, prop2_policy
from avoidlab.oracle import is_strategy
from avoidlab.randtask import gen_random_task, sample_params
from avoidlab.task import (
    Policy,
    TaskConstructionError,
    TaskDomainError,
    TaskSpec,
    extend_features,
    is_blocked,
    prop,
    validate_task,
)

EX2 = Policy.from_mapping({"f": [], "g": ["a"]})


def test_prop_examples():
    assert prop(EX2, {"g"}) == {"a"}
    assert prop(EX2, {"f"}) == frozenset()
    assert prop(EX2, set()) == frozenset()
    assert prop(EX2, {"f", "g"}) == {"a"}


def test_prop_unknown_feature():
    with pytest.raises(TaskDomainError):
        prop(EX2, {"h"})


def test_is_blocked_examples(example1):
    assert is_blocked(EX2, {"f"})
    assert not is_blocked(EX2, {"g"})
    full = Policy.full(example1)
    assert not is_blocked(full, {"f"})
    assert not is_blocked(full, {"f", "g"})


def test_observation_carries_features_only(example1):
    obs = example1.observe("2")
    assert obs.feature_set == {"g"}
    assert obs.state_token == "2"


def test_validate_example1(example1):
    assert validate_task(example1) == []


def test_validate_unreachable(example1):
    task = TaskSpec.build(
        example1.states, {"1"}, example1.actions, example1.features,
        example1.transition, example1.feature_map, example1.aversive,
    )
    v = validate_task(task)
    assert [(x.kind, x.element) for x in v] == [("unreachable", "2")]


def test_validate_dangling_aversive_action(example1):
    task = TaskSpec.build(
        example1.states, example1.starts, example1.actions, example1.features,
        example1.transition, example1.feature_map, {("1", "a"), ("2", "zz")},
    )
    kinds = [x.kind for x in validate_task(task)]
    assert kinds == ["dangling-aversive-action"]


def test_validate_dangling_successor_and_feature():
    task = TaskSpec.build(
        {"1"}, {"1"}, {"a"}, {"f"}, {("1", "a"): {"9"}}, {"1": {"f", "q"}}, set()
    )
    kinds = sorted(x.kind for x in validate_task(task))
    assert kinds == ["dangling-feature", "dangling-successor"]


def test_extend_features_direct(example1):
    ext = extend_features(example1, {"h"}, {"1": {"f"}, "2": {"g", "h"}})
    assert ext.feature_map["2"] == {"g", "h"}
    assert ext.features == {"f", "g", "h"}
    assert ext.transition == example1.transition
    assert validate_task(ext) == []


def test_extend_features_overlap_rejected(example1):
    with pytest.raises(TaskConstructionError):
        extend_features(example1, {"g"}, {"1": {"f"}, "2": {"g"}})


def test_extend_features_must_keep_old_features(example1):
    with pytest.raises(TaskConstructionError):
        extend_features(example1, {"h"}, {"1": {"h"}, "2": {"g"}})


def test_extended_grid_keeps_prop2_strategy():
    problem = GridProblem.make(2, 2, [(0, 0)], [(2, 2), (1, 1)], 5)
    task = build_task(problem)
    deco = {f"deco{i}" for i in range(3)}
    fmap = {
        s: task.feature_map[s] | {f"deco{i}" for i in range(3) if (len(s) + i) % 2}
        for s in task.states
    }
    ext = extend_features(task, deco, fmap)
    assert validate_task(ext) == []
    pol = prop2_policy(problem)
    pol2 = Policy({**pol.mapping, **{d: frozenset() for d in deco}})
    for s0 in sorted(ext.starts):
        assert is_strategy(ext, pol2, s0).holds


actions = st.sampled_from(["a", "b", "c"])
features = st.sampled_from(["f", "g", "h", "k"])
policies = st.dictionaries(features, st.frozensets(actions), min_size=4, max_size=4).filter(
    lambda d: set(d) == {"f", "g", "h", "k"}
)


@given(policies, policies, st.frozensets(features))
def test_prop_monotone(p1, p2, fs):
    small = Policy(p1)
    big = Policy({f: p1[f] | p2[f] for f in p1})
    assert prop(small, fs) <= prop(big, fs)


@given(st.integers(0, 10_000), st.data())
def test_extension_preserves_prop(seed, data):
    task = gen_random_task(sample_params(seed))
    new = {"n0", "n1"}
    fmap = {
        s: task.feature_map[s] | data.draw(st.frozensets(st.sampled_from(sorted(new))))
        for s in sorted(task.states)
    }
    ext = extend_features(task, new, fmap)
    masks = data.draw(st.lists(st.frozensets(st.sampled_from(sorted(task.actions))),
                               min_size=len(task.features), max_size=len(task.features)))
    pol1 = Policy(dict(zip(sorted(task.features), masks)))
    pol2 = Policy({**pol1.mapping, "n0": frozenset(), "n1": frozenset()})
    for s in task.states:
        assert prop(pol1, task.feature_map[s]) == prop(pol2, ext.feature_map[s])


@given(st.integers(0, 100_000))
def test_random_tasks_validate(seed):
    assert validate_task(gen_random_task(sample_params(seed))) == []
