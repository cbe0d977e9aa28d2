"""Deterministic program execution over scenes.

Evaluation walks the program tree post-order, applying one module per node.
Runtime faults — a module receiving a value of the wrong type, or ``unique``
applied to a set whose size is not one — raise the error flag.  In strict
mode a faulted execution answers with the ERROR sentinel; in permissive mode
an answer-typed program instead answers with a uniform sample over its root
type's domain (the attribute's vocabulary for entries, 0..count_max for
numbers, both booleans) and marks ``fallback_used``.  Identical
(program, scene, mode, seed) always produce identical outcomes, traces
included.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import ExecutionError
from .profiles import DomainProfile, ordered_taxonomy_leaves
from .programs import (
    ANSWER_KINDS,
    FAMILY_FILTER,
    FAMILY_QUERY,
    FAMILY_RELATE,
    FAMILY_SAME,
    KIND_BOOLEAN,
    KIND_ENTRY,
    KIND_NUMBER,
    KIND_OBJECT,
    KIND_SCENE,
    Program,
    TokenSpec,
    ValueType,
)
from .scenes import Scene, relation_set


class ErrorSentinel:
    """Singleton answer for failed executions; equal only to itself."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ERROR"


ERROR = ErrorSentinel()


@dataclass(frozen=True)
class SceneVal:
    """An object subset in scene order (ids ascending)."""

    ids: tuple[int, ...]


@dataclass(frozen=True)
class ObjectVal:
    id: int


@dataclass(frozen=True)
class EntryVal:
    attribute: str
    value: str


@dataclass(frozen=True)
class NumberVal:
    value: int


@dataclass(frozen=True)
class BoolVal:
    value: bool


Value = SceneVal | ObjectVal | EntryVal | NumberVal | BoolVal


@dataclass(frozen=True)
class StepRecord:
    """One executed node: its token, argument values, and output (or ERROR)."""

    token: str
    inputs: tuple[Value, ...]
    output: Value | ErrorSentinel


@dataclass(frozen=True)
class Outcome:
    answer: Value | ErrorSentinel
    error: bool
    fallback_used: bool
    trace: tuple[StepRecord, ...]
    seed: int | None = None


def runtime_type(value: Value) -> ValueType:
    if isinstance(value, SceneVal):
        return ValueType(KIND_SCENE)
    if isinstance(value, ObjectVal):
        return ValueType(KIND_OBJECT)
    if isinstance(value, EntryVal):
        return ValueType(KIND_ENTRY, value.attribute)
    if isinstance(value, NumberVal):
        return ValueType(KIND_NUMBER)
    if isinstance(value, BoolVal):
        return ValueType(KIND_BOOLEAN)
    raise ExecutionError(f"not a runtime value: {value!r}")


def apply_module(spec: TokenSpec, args: tuple[Value, ...], scene: Scene, profile: DomainProfile) -> Value:
    """Apply one module to already-evaluated arguments.

    Raises ExecutionError on an argument of the wrong type (entry refinements
    included) and on ``unique`` over a set whose size is not exactly one.
    """
    if len(args) != spec.arity:
        raise ExecutionError(f"'{spec.name}' takes {spec.arity} argument(s), got {len(args)}")
    for expected, value in zip(spec.input_types, args):
        found = runtime_type(value)
        if not expected.matches(found):
            raise ExecutionError(f"type mismatch at '{spec.name}': expected {expected}, found {found}")

    name = spec.name
    if name == "scene":
        return SceneVal(tuple(obj.id for obj in scene.objects))
    if name == "unique":
        ids = args[0].ids
        if len(ids) != 1:
            raise ExecutionError(f"unique: set has {len(ids)} members, expected exactly 1")
        return ObjectVal(ids[0])
    if name == "union":
        return SceneVal(tuple(sorted(set(args[0].ids) | set(args[1].ids))))
    if name == "intersect":
        return SceneVal(tuple(sorted(set(args[0].ids) & set(args[1].ids))))
    if name == "count":
        return NumberVal(len(args[0].ids))
    if name == "exist":
        return BoolVal(len(args[0].ids) > 0)
    if name == "equal_integer":
        return BoolVal(args[0].value == args[1].value)
    if name == "greater_than":
        return BoolVal(args[0].value > args[1].value)
    if name == "less_than":
        return BoolVal(args[0].value < args[1].value)
    if spec.family == FAMILY_QUERY:
        obj = scene.objects[args[0].id]
        return EntryVal(spec.attribute, obj.entries[spec.attribute])
    if spec.family == FAMILY_RELATE:
        members = relation_set(scene, args[0].id, spec.relation, profile)
        return SceneVal(tuple(sorted(members)))
    if spec.family == FAMILY_SAME:
        anchor = scene.objects[args[0].id]
        wanted = anchor.entries[spec.attribute]
        ids = tuple(
            obj.id for obj in scene.objects if obj.id != anchor.id and obj.entries[spec.attribute] == wanted
        )
        return SceneVal(ids)
    if spec.family == FAMILY_FILTER:
        allowed = ordered_taxonomy_leaves(profile, spec.parameter)
        allowed_set = set(allowed)
        ids = tuple(i for i in args[0].ids if scene.objects[i].entries[spec.attribute] in allowed_set)
        return SceneVal(ids)
    if name.startswith("equal_"):
        return BoolVal(args[0].value == args[1].value)
    raise ExecutionError(f"no implementation for token '{name}'")


def fallback_answer(return_type: ValueType, profile: DomainProfile, rng: random.Random) -> Value:
    """Uniform sample over an answer type's domain.

    Entries draw from the refined attribute's vocabulary, numbers from
    0..count_max inclusive, booleans from both truth values.
    """
    if return_type.kind == KIND_ENTRY:
        if return_type.attribute is not None:
            vocab = profile.attributes[return_type.attribute]
            return EntryVal(return_type.attribute, rng.choice(vocab))
        pool = [(attr, entry) for attr, vocab in profile.attributes.items() for entry in vocab]
        attr, entry = rng.choice(pool)
        return EntryVal(attr, entry)
    if return_type.kind == KIND_NUMBER:
        return NumberVal(rng.randint(0, profile.count_max))
    if return_type.kind == KIND_BOOLEAN:
        return BoolVal(rng.choice((False, True)))
    raise ExecutionError(f"non-answer root type '{return_type}' has no fallback domain")


def execute(
    program: Program,
    scene: Scene,
    profile: DomainProfile,
    mode: str = "strict",
    seed: int | None = None,
    record_trace: bool = True,
) -> Outcome:
    """Evaluate a program on a scene.

    ``mode`` is ``strict`` (faults answer ERROR) or ``permissive`` (faults on
    answer-typed programs answer a seeded uniform fallback sample; ``seed`` is
    required).  The trace holds one record per executed node in post-order;
    on a fault the faulting node is the last record and carries ERROR.
    """
    if mode not in ("strict", "permissive"):
        raise ExecutionError(f"unknown mode '{mode}'")
    if mode == "permissive" and seed is None:
        raise ExecutionError("permissive mode requires a seed")
    steps: list[StepRecord] = []

    def evaluate(node) -> Value:
        args = tuple(evaluate(child) for child in node.children)
        try:
            value = apply_module(node.spec, args, scene, profile)
        except ExecutionError:
            if record_trace:
                steps.append(StepRecord(node.spec.name, args, ERROR))
            raise
        if record_trace:
            steps.append(StepRecord(node.spec.name, args, value))
        return value

    try:
        answer = evaluate(program.root)
    except ExecutionError:
        root_type = program.root.spec.output_type
        if mode == "permissive" and root_type.kind in ANSWER_KINDS:
            rng = random.Random(seed)
            sample = fallback_answer(root_type, profile, rng)
            return Outcome(sample, True, True, tuple(steps), seed)
        return Outcome(ERROR, True, False, tuple(steps), seed)
    return Outcome(answer, False, False, tuple(steps), seed)


def answer_reward(predicted: Value | ErrorSentinel, truth: Value) -> int:
    """1 on exact answer equality, else 0; ERROR never earns reward."""
    if isinstance(predicted, ErrorSentinel):
        return 0
    return int(predicted == truth)


def update_baseline(baseline: float, reward: float) -> float:
    """Exponentially decayed reward baseline: 0.9 * baseline + 0.1 * reward."""
    if not 0.0 <= baseline <= 1.0:
        raise ValueError(f"baseline must lie in [0, 1], got {baseline}")
    if not 0.0 <= reward <= 1.0:
        raise ValueError(f"reward must lie in [0, 1], got {reward}")
    return 0.9 * baseline + 0.1 * reward


# ----------------------------------------------------------------------
# JSON forms for values, traces, and outcomes


def value_to_json(value: Value | ErrorSentinel):
    if isinstance(value, ErrorSentinel):
        return "ERROR"
    if isinstance(value, SceneVal):
        return {"type": "scene", "ids": list(value.ids)}
    if isinstance(value, ObjectVal):
        return {"type": "object", "id": value.id}
    if isinstance(value, EntryVal):
        return {"type": "entry", "attribute": value.attribute, "value": value.value}
    if isinstance(value, NumberVal):
        return {"type": "number", "value": value.value}
    if isinstance(value, BoolVal):
        return {"type": "boolean", "value": value.value}
    raise ExecutionError(f"not a runtime value: {value!r}")


def value_from_json(doc) -> Value | ErrorSentinel:
    if doc == "ERROR":
        return ERROR
    kind = doc.get("type")
    if kind == "scene":
        return SceneVal(tuple(doc["ids"]))
    if kind == "object":
        return ObjectVal(doc["id"])
    if kind == "entry":
        return EntryVal(doc["attribute"], doc["value"])
    if kind == "number":
        return NumberVal(int(doc["value"]))
    if kind == "boolean":
        return BoolVal(bool(doc["value"]))
    raise ExecutionError(f"unknown value document: {doc!r}")


def outcome_to_json(outcome: Outcome) -> dict:
    return {
        "steps": [
            {
                "token": step.token,
                "inputs": [value_to_json(v) for v in step.inputs],
                "output": value_to_json(step.output),
            }
            for step in outcome.trace
        ],
        "answer": value_to_json(outcome.answer),
        "error": outcome.error,
        "fallback_used": outcome.fallback_used,
        "seed": outcome.seed,
    }
