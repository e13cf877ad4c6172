"""File formats: task JSON, trace CSV and removed-pair snapshots."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, TextIO

from .learning import Removal, RestartRequested, RunTrace, StartBlocked, Step, TrialStart
from .task import Pair, TaskSpec

TASK_KEYS = ("actions", "aversive", "featureMap", "features", "starts", "states", "transition")
TRACE_HEADER = (
    "step",
    "trial",
    "event",
    "state",
    "action",
    "successor",
    "signal",
    "removed_pairs",
    "P_size",
)


class TaskFileError(ValueError):
    """The document is not a well-formed task file."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.column = column


def _strings(value, what: str) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise TaskFileError(f"{what} must be an array of strings")
    return value


def task_from_json(doc) -> TaskSpec:
    if not isinstance(doc, dict):
        raise TaskFileError("task document must be a JSON object")
    unknown = sorted(set(doc) - set(TASK_KEYS))
    if unknown:
        raise TaskFileError(f"unknown keys {unknown}")
    missing = sorted(set(TASK_KEYS) - set(doc))
    if missing:
        raise TaskFileError(f"missing keys {missing}")
    fmap = doc["featureMap"]
    if not isinstance(fmap, dict):
        raise TaskFileError("featureMap must be an object")
    transition: dict[Pair, frozenset[str]] = {}
    if not isinstance(doc["transition"], list):
        raise TaskFileError("transition must be an array")
    for entry in doc["transition"]:
        if not isinstance(entry, dict) or set(entry) != {"state", "action", "successors"}:
            raise TaskFileError("transition entries need exactly state, action, successors")
        if not isinstance(entry["state"], str) or not isinstance(entry["action"], str):
            raise TaskFileError("transition state/action must be strings")
        key = (entry["state"], entry["action"])
        transition[key] = transition.get(key, frozenset()) | frozenset(
            _strings(entry["successors"], "successors")
        )
    aversive = []
    if not isinstance(doc["aversive"], list):
        raise TaskFileError("aversive must be an array")
    for pair in doc["aversive"]:
        if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(x, str) for x in pair)):
            raise TaskFileError("aversive entries must be [state, action] pairs")
        aversive.append((pair[0], pair[1]))
    states = frozenset(_strings(doc["states"], "states"))
    actions = frozenset(_strings(doc["actions"], "actions"))
    # Absent transition entries mean "no successor".
    for s in states:
        for a in actions:
            transition.setdefault((s, a), frozenset())
    return TaskSpec(
        states=states,
        starts=frozenset(_strings(doc["starts"], "starts")),
        actions=actions,
        features=frozenset(_strings(doc["features"], "features")),
        transition=transition,
        feature_map={s: frozenset(_strings(v, f"featureMap[{s}]")) for s, v in fmap.items()},
        aversive=frozenset(aversive),
    )


def task_to_json(task: TaskSpec) -> dict:
    return {
        "actions": sorted(task.actions),
        "aversive": [list(p) for p in sorted(task.aversive)],
        "featureMap": {s: sorted(task.feature_map[s]) for s in sorted(task.feature_map)},
        "features": sorted(task.features),
        "starts": sorted(task.starts),
        "states": sorted(task.states),
        "transition": [
            {"action": a, "state": s, "successors": sorted(task.transition[(s, a)])}
            for s, a in sorted(task.transition)
        ],
    }


def dumps_task(task: TaskSpec) -> str:
    return json.dumps(task_to_json(task), sort_keys=True, indent=1) + "\n"


def loads_task(text: str) -> TaskSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TaskFileError(exc.msg, exc.lineno, exc.colno) from None
    return task_from_json(doc)


def load_task(path: str | Path) -> TaskSpec:
    return loads_task(Path(path).read_text())


def save_task(task: TaskSpec, path: str | Path) -> None:
    Path(path).write_text(dumps_task(task))


# --- traces -----------------------------------------------------------------


def trace_rows(trace: RunTrace | Iterable) -> Iterable[tuple]:
    for e in trace:
        if isinstance(e, TrialStart):
            yield (e.step, e.trial, "TrialStart", e.state, "", "", "", "", e.p_size)
        elif isinstance(e, Step):
            yield (
                e.step,
                e.trial,
                "Step",
                e.state,
                e.action,
                "" if e.successor is None else e.successor,
                int(e.signal),
                "",
                e.p_size,
            )
        elif isinstance(e, Removal):
            pairs = json.dumps([list(p) for p in e.pairs], separators=(",", ":"))
            yield (e.step, e.trial, f"Removal:{e.cause}", "", "", "", "", pairs, e.p_size)
        elif isinstance(e, RestartRequested):
            yield (e.step, e.trial, f"RestartRequested:{e.kind}", "", "", "", "", "", e.p_size)
        elif isinstance(e, StartBlocked):
            yield (e.step, e.trial, "StartBlocked", e.state, "", "", "", "", e.p_size)


def write_trace_csv(trace: RunTrace | Iterable, fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    w.writerows(trace_rows(trace))


# --- snapshots of the removed set ---------------------------------------------


def dumps_snapshot(removed: Iterable[Pair]) -> str:
    return "".join(f"{f}\t{a}\n" for f, a in sorted(removed))


def loads_snapshot(text: str) -> set[Pair]:
    out = set()
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"snapshot line {n}: expected feature<TAB>action")
        out.add((parts[0], parts[1]))
    return out
