import random

import pytest
from hypothesis import given, settings, strategies as st

from avoidlab.learning import (
    LearnerMemory,
    LearnerSession,
    Removal,
    RestartRequested,
    RunConfig,
    RunTrace,
    SignalOracle,
    StartBlocked,
    Step,
    TraceParseError,
    TrialStart,
    is_settled,
    run,
    run_until_settled,
    segment_trials,
)
from avoidlab.oracle import maximal_policy
from avoidlab.randtask import gen_random_task, sample_params
from avoidlab.task import TaskSpec
from avoidlab.worked import fig5_preset


def test_init_full_memory(example1, fig2b):
    s = LearnerSession(example1, RunConfig())
    assert s.allowed_pairs() == {("f", "a"), ("g", "a")}
    assert s.current_state in example1.starts
    assert isinstance(s.trace.events[0], TrialStart)
    s2 = LearnerSession(fig2b, RunConfig())
    assert s2.allowed_pairs() == {("f1", "a"), ("f1", "b")}
    assert not s2.trace.of_type(StartBlocked)


def test_start_without_features_is_flagged():
    task = TaskSpec.build({"1", "2"}, {"1", "2"}, {"a"}, {"f"},
                          {("1", "a"): {"1"}, ("2", "a"): {"2"}}, {"1": set(), "2": {"f"}})
    cfg = RunConfig(start_chooser="scripted", start_script={0: "1"})
    s = LearnerSession(task, cfg)
    assert [type(e) for e in s.trace.events] == [TrialStart, StartBlocked, RestartRequested]


def test_fig2b_first_b_removes_pair(fig2b):
    cfg = RunConfig(action_chooser="scripted", action_script={1: "b"})
    s = LearnerSession(fig2b, cfg)
    events = s.step()
    step, removal, restart = events
    assert step.action == "b" and step.signal
    assert removal.pairs == (("f1", "b"),) and removal.cause == "aversive"
    assert isinstance(restart, RestartRequested) and restart.kind == "internal"


def test_example1_state2_never_removes(example1):
    cfg = RunConfig(start_chooser="scripted", start_script={0: "2"}, external_restart_every=None)
    s = LearnerSession(example1, cfg)
    for _ in range(50):
        (ev,) = s.step()
        assert (ev.state, ev.action, ev.successor, ev.signal) == ("2", "a", "2", False)
    assert s.removal_count == 0


def test_multi_feature_state_removes_all_in_one_event():
    task = TaskSpec.build({"1"}, {"1"}, {"a", "b"}, {"f", "g"},
                          {("1", "a"): {"1"}, ("1", "b"): {"1"}}, {"1": {"f", "g"}}, {("1", "a")})
    cfg = RunConfig(action_chooser="scripted", action_script={1: "a"})
    s = LearnerSession(task, cfg)
    removal = [e for e in s.step() if isinstance(e, Removal)]
    assert removal[0].pairs == (("f", "a"), ("g", "a"))
    assert s.allowed_pairs() == {("f", "b"), ("g", "b")}


@pytest.mark.parametrize("seed", range(25))
def test_example1_fair_runs(example1, seed):
    res = run(example1, RunConfig(seed=seed, max_steps=1000))
    assert res.final_p == {("g", "a")}


def test_fig2b_always_signal_one_removal(fig2b):
    res = run(fig2b, RunConfig(seed=4, max_steps=500))
    assert res.final_p == {("f1", "a")}
    assert len(res.trace.of_type(Removal)) == 1


def test_fig2b_nswap_removes_at_application_n_plus_1(fig2b):
    n = 7
    cfg = RunConfig(action_chooser="scripted", action_script={t: "b" for t in range(1, 50)},
                    signal_oracle=f"nswap:{n}", external_restart_every=None)
    res = run(fig2b, cfg)
    b_steps = [e for e in res.trace.of_type(Step) if e.action == "b"]
    assert [e.signal for e in b_steps] == [False] * n + [True]
    assert res.trace.of_type(Removal)[0].step == b_steps[n].step


def test_fig5_scripted_preserves_pair(fig5):
    res = run(fig5, fig5_preset())
    assert ("f", "a") in res.final_p
    assert res.halted is None


def test_fig5_delayed_restart_loses_pair(fig5):
    res = run(fig5, fig5_preset(restart_delay=2))
    assert ("f", "a") not in res.final_p
    assert res.halted is not None


def test_is_settled_examples(example1):
    assert is_settled(example1, {("g", "a")})
    assert not is_settled(example1, {("f", "a"), ("g", "a")})
    assert is_settled(example1, set())


def test_segment_trials():
    ev = [
        TrialStart(0, 1, "1", 2), Step(1, 1, "1", "a", "1", True, 2),
        Removal(1, 1, (("f", "a"),), "aversive", 1), RestartRequested(1, 1, "internal", 1),
        TrialStart(2, 2, "2", 1), Step(3, 2, "2", "a", "2", False, 1),
        TrialStart(4, 3, "2", 1),
    ]
    trials = segment_trials(RunTrace(ev))
    assert len(trials) == 3
    assert trials[0].last_pair == ("1", "a")
    assert trials[0].removals
    assert trials[1].sequence == ["2", "a", "2"]


def test_segment_trials_malformed():
    with pytest.raises(TraceParseError):
        segment_trials([Step(1, 1, "1", "a", "1", False, 2)])
    with pytest.raises(TraceParseError):
        segment_trials([TrialStart(0, 1, "1", 2), Step(1, 1, "2", "a", "2", False, 2)])


def test_example1_post_settle_trials_clean(example1):
    s = LearnerSession(example1, RunConfig(seed=9, max_steps=3000))
    settle = run_until_settled(s, check_every=10)
    assert settle is not None
    s.run()
    for trial in segment_trials(s.trace):
        if trial.events[0].step > settle and trial.start == "2":
            assert not trial.removals
            assert not any(e.signal for e in trial.steps)


def test_memory_monotone():
    task = gen_random_task(sample_params(3))
    mem = LearnerMemory(task)
    assert len(mem) == len(task.features) * len(task.actions)
    with pytest.raises(ValueError):
        mem.remove([("nope", "a0")])


def test_signal_oracles():
    o = SignalOracle("nswap:2", random.Random(0))
    assert [o.emit(0, 0) for _ in range(6)] == [False, False, True, True, False, False]
    assert [o.emit(1, 0) for _ in range(2)] == [False, False]
    b = SignalOracle("bernoulli:1.0", random.Random(0))
    assert all(b.emit(0, 0) for _ in range(10))
    with pytest.raises(ValueError):
        RunConfig(signal_oracle="bernoulli:0")
    with pytest.raises(ValueError):
        RunConfig(signal_oracle="sometimes")


def test_round_robin_cycles_actions(fig2b):
    cfg = RunConfig(action_chooser="round-robin", signal_oracle="nswap:100",
                    external_restart_every=None, max_steps=6)
    res = run(fig2b, cfg)
    assert [e.action for e in res.trace.of_type(Step)] == ["a", "b"] * 3


def test_scripted_falls_back_to_random(fig2b):
    cfg = RunConfig(action_chooser="scripted", action_script={1: "zzz"}, max_steps=20)
    res = run(fig2b, cfg)
    assert len(res.trace.of_type(Step)) >= 1


def test_same_seed_same_trace():
    task = gen_random_task(sample_params(11))
    a = run(task, RunConfig(seed=5, max_steps=400))
    b = run(task, RunConfig(seed=5, max_steps=400))
    assert a.trace.events == b.trace.events


def test_resume_from_removed(example1):
    res = run(example1, RunConfig(max_steps=10), removed={("f", "a")})
    assert res.final_p == {("g", "a")}
    assert res.removal_count == 0


def fair_config(seed, steps=3000):
    return RunConfig(seed=seed, max_steps=steps, external_restart_every=25)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 1_000_000), st.integers(0, 1000), st.sampled_from(["always", "nswap:3", "bernoulli:0.5"]),
       st.integers(0, 3))
def test_run_invariants(task_seed, run_seed, oracle, delay):
    task = gen_random_task(sample_params(task_seed))
    cfg = RunConfig(seed=run_seed, max_steps=600, signal_oracle=oracle, restart_delay=delay,
                    external_restart_every=30)
    res = run(task, cfg)
    events = res.trace.events
    removals = [e for e in events if isinstance(e, Removal)]
    assert len(removals) <= len(task.features) * len(task.actions)
    sizes = [e.p_size for e in events]
    assert sizes == sorted(sizes, reverse=True)
    # greedy: every applied action was proposed by the P in force at that step
    allowed = {(f, a) for f in task.features for a in task.actions}
    for e in events:
        if isinstance(e, Step):
            proposed = {a for f, a in allowed if f in task.feature_map[e.state]}
            assert e.action in proposed
            if e.successor is not None:
                assert e.successor in task.transition[(e.state, e.action)]
        elif isinstance(e, Removal):
            allowed -= set(e.pairs)
        elif isinstance(e, StartBlocked):
            assert not {a for f, a in allowed if f in task.feature_map[e.state]}
    segment_trials(res.trace)
    # preservation of every strategy pair, fair or not
    assert maximal_policy(task).policy.pairs() <= res.final_p
