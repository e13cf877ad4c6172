"""Small hand-built tasks and the run presets that go with them."""

from __future__ import annotations

from .learning import RunConfig
from .qbaseline import fig2b_task
from .task import TaskSpec


def example1_task() -> TaskSpec:
    """Two self-looping states; only state 1's action is aversive."""
    return TaskSpec.build(
        states={"1", "2"},
        starts={"1", "2"},
        actions={"a"},
        features={"f", "g"},
        transition={("1", "a"): {"1"}, ("2", "a"): {"2"}},
        feature_map={"1": {"f"}, "2": {"g"}},
        aversive={("1", "a")},
    )


def fig5_task() -> TaskSpec:
    """No strategy for start 1, yet some runs keep (f, a).

    State 1 loops on ``a``; ``b`` is aversive and moves to state 2, which
    carries the same feature f and where every action is aversive. A run
    that restarts right after the signal on (1, b) never sees state 2 again.
    """
    return TaskSpec.build(
        states={"1", "2"},
        starts={"1"},
        actions={"a", "b"},
        features={"f"},
        transition={
            ("1", "a"): {"1"},
            ("1", "b"): {"2"},
            ("2", "a"): {"2"},
            ("2", "b"): {"2"},
        },
        feature_map={"1": {"f"}, "2": {"f"}},
        aversive={("1", "b"), ("2", "a"), ("2", "b")},
    )


def fig5_preset(seed: int = 0, max_steps: int = 200, restart_delay: int = 0) -> RunConfig:
    """Apply ``b`` first; afterwards only ``a`` is ever proposed at state 1."""
    return RunConfig(
        seed=seed,
        max_steps=max_steps,
        action_chooser="scripted",
        action_script={1: "b"},
        restart_delay=restart_delay,
    )


BUILTINS = {
    "example1": example1_task,
    "fig2b": fig2b_task,
    "fig5-reconstruction": fig5_task,
}


def builtin_task(name: str) -> TaskSpec:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown builtin task {name!r}; choose from {sorted(BUILTINS)}") from None
