"""Typed functional program IR: token catalog, postfix text form, type checker.

Programs are trees of typed modules evaluated over a scene.  The value types
are scene (an ordered object set), object (a single object), entry (an
attribute value, refined by its attribute name), number, and boolean.  The
text form is postfix: writing a program left to right, each source token
pushes a subtree, each unary token wraps the top of the stack, and each
binary token consumes the two most recent subtrees (the earlier one becomes
the first argument).
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

from .errors import ProgramError
from .profiles import DomainProfile

KIND_SCENE = "scene"
KIND_OBJECT = "object"
KIND_ENTRY = "entry"
KIND_NUMBER = "number"
KIND_BOOLEAN = "boolean"

ANSWER_KINDS = (KIND_ENTRY, KIND_NUMBER, KIND_BOOLEAN)

FAMILY_SOURCE = "source"
FAMILY_SET = "set"
FAMILY_BOOLEAN = "boolean"
FAMILY_QUERY = "query"
FAMILY_RELATE = "relate"
FAMILY_SAME = "same"
FAMILY_FILTER = "filter"

_TOKEN_RE = re.compile(r"^([a-z_]+)(?:\[([^\[\]]+)\])?$")


@dataclass(frozen=True)
class ValueType:
    """A value kind, with an optional attribute refinement for entries."""

    kind: str
    attribute: str | None = None

    def __str__(self) -> str:
        if self.attribute is not None:
            return f"{self.kind}({self.attribute})"
        return self.kind

    def matches(self, other: ValueType, coarse: bool = False) -> bool:
        """Whether a value of type ``other`` is acceptable where ``self`` is expected."""
        if self.kind != other.kind:
            return False
        if coarse or self.attribute is None or other.attribute is None:
            return True
        return self.attribute == other.attribute


T_SCENE = ValueType(KIND_SCENE)
T_OBJECT = ValueType(KIND_OBJECT)
T_NUMBER = ValueType(KIND_NUMBER)
T_BOOLEAN = ValueType(KIND_BOOLEAN)


def entry_type(attribute: str) -> ValueType:
    return ValueType(KIND_ENTRY, attribute)


@dataclass(frozen=True)
class TokenSpec:
    """One catalog row: a token's name, family, and type signature.

    ``attribute`` is set for filter/query/same/equal-attribute tokens,
    ``parameter`` for filters (the entry in brackets), and ``relation`` for
    relate tokens.
    """

    name: str
    family: str
    arity: int
    input_types: tuple[ValueType, ...]
    output_type: ValueType
    attribute: str | None = None
    parameter: str | None = None
    relation: str | None = None


@dataclass(frozen=True)
class Node:
    spec: TokenSpec
    children: tuple[Node, ...] = ()


@dataclass(frozen=True)
class Program:
    """An immutable program tree; equality is structural."""

    root: Node

    def depth(self) -> int:
        def node_depth(node: Node) -> int:
            if not node.children:
                return 1
            return 1 + max(node_depth(child) for child in node.children)

        return node_depth(self.root)

    def walk_postorder(self) -> Iterator[Node]:
        def walk(node: Node) -> Iterator[Node]:
            for child in node.children:
                yield from walk(child)
            yield node

        return walk(self.root)

    def tokens(self) -> list[str]:
        return linearize(self)


class Catalog:
    """The instantiated token catalog for one profile.

    The catalog is the set-operation, boolean, query, relate, same, and
    filter modules, parameterized by the profile: one query/equal/same token
    per attribute, one filter token per entry of each attribute's extended
    vocabulary (taxonomy groupings included), and one relate token per
    spatial relation.
    """

    def __init__(self, profile: DomainProfile):
        self.profile = profile
        self.tokens: dict[str, TokenSpec] = {}
        self._build()

    def _add(self, spec: TokenSpec) -> None:
        self.tokens[spec.name] = spec

    def _build(self) -> None:
        profile = self.profile
        self._add(TokenSpec("scene", FAMILY_SOURCE, 0, (), T_SCENE))
        self._add(TokenSpec("unique", FAMILY_SET, 1, (T_SCENE,), T_OBJECT))
        self._add(TokenSpec("union", FAMILY_SET, 2, (T_SCENE, T_SCENE), T_SCENE))
        self._add(TokenSpec("intersect", FAMILY_SET, 2, (T_SCENE, T_SCENE), T_SCENE))
        self._add(TokenSpec("count", FAMILY_SET, 1, (T_SCENE,), T_NUMBER))
        self._add(TokenSpec("exist", FAMILY_BOOLEAN, 1, (T_SCENE,), T_BOOLEAN))
        for attr in profile.attributes:
            sig = (entry_type(attr), entry_type(attr))
            self._add(TokenSpec(f"equal_{attr}", FAMILY_BOOLEAN, 2, sig, T_BOOLEAN, attribute=attr))
        for name in ("equal_integer", "greater_than", "less_than"):
            self._add(TokenSpec(name, FAMILY_BOOLEAN, 2, (T_NUMBER, T_NUMBER), T_BOOLEAN))
        for attr in profile.attributes:
            self._add(TokenSpec(f"query_{attr}", FAMILY_QUERY, 1, (T_OBJECT,), entry_type(attr), attribute=attr))
        for rel in profile.spatial:
            self._add(TokenSpec(f"relate_{rel}", FAMILY_RELATE, 1, (T_OBJECT,), T_SCENE, relation=rel))
        for attr in profile.attributes:
            self._add(TokenSpec(f"same_{attr}", FAMILY_SAME, 1, (T_OBJECT,), T_SCENE, attribute=attr))
        for attr in profile.attributes:
            for entry in profile.extended_vocabulary(attr):
                self._add(
                    TokenSpec(
                        f"filter_{attr}[{entry}]",
                        FAMILY_FILTER,
                        1,
                        (T_SCENE,),
                        T_SCENE,
                        attribute=attr,
                        parameter=entry,
                    )
                )

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, name: str) -> bool:
        return name in self.tokens

    def get(self, name: str) -> TokenSpec:
        try:
            return self.tokens[name]
        except KeyError:
            raise ProgramError(f"unknown token '{name}'") from None

    def by_family(self, family: str) -> list[TokenSpec]:
        return [spec for spec in self.tokens.values() if spec.family == family]

    def min_depths(self) -> dict[str, int]:
        """Minimum tree depth at which each value kind becomes constructible."""
        depths: dict[str, int] = {}
        changed = True
        while changed:
            changed = False
            for spec in self.tokens.values():
                if spec.arity == 0:
                    need = 1
                elif all(t.kind in depths for t in spec.input_types):
                    need = 1 + max(depths[t.kind] for t in spec.input_types)
                else:
                    continue
                kind = spec.output_type.kind
                if kind not in depths or need < depths[kind]:
                    depths[kind] = need
                    changed = True
        return depths


@lru_cache(maxsize=16)
def build_catalog(profile: DomainProfile) -> Catalog:
    return Catalog(profile)


def tokenize(text: str, catalog: Catalog) -> list[TokenSpec]:
    """Split postfix program text into catalog tokens.

    Tokens are whitespace separated; filter parameters ride in brackets
    (``filter_color[red]``).  Unknown or malformed tokens are reported with
    their 0-based position.
    """
    specs = []
    for index, word in enumerate(text.split()):
        if _TOKEN_RE.match(word) is None:
            raise ProgramError(f"malformed token '{word}' at position {index}")
        if word not in catalog.tokens:
            raise ProgramError(f"unknown token '{word}' at position {index}")
        specs.append(catalog.tokens[word])
    return specs


def build_tree(tokens: Sequence[TokenSpec]) -> Program:
    """Fold a postfix token sequence into a program tree.

    Each token pops ``arity`` subtrees (the earlier subtree becomes the first
    argument) and pushes one; a well-formed program leaves exactly one tree.
    """
    if not tokens:
        raise ProgramError("empty program")
    stack: list[Node] = []
    for index, spec in enumerate(tokens):
        if len(stack) < spec.arity:
            raise ProgramError(
                f"stack underflow at position {index}: '{spec.name}' needs {spec.arity} "
                f"argument(s), {len(stack)} available"
            )
        if spec.arity:
            children = tuple(stack[-spec.arity :])
            del stack[-spec.arity :]
        else:
            children = ()
        stack.append(Node(spec, children))
    if len(stack) != 1:
        raise ProgramError(f"leftover subtrees: {len(stack)} remain after the last token")
    return Program(stack[0])


def linearize(program: Program) -> list[str]:
    """Post-order token names; the exact inverse of :func:`build_tree`."""
    return [node.spec.name for node in program.walk_postorder()]


def program_from_text(text: str, catalog: Catalog, notation: str = "postfix") -> Program:
    """Parse program text; ``notation='prefix'`` reverses the tokens first.

    The prefix form exists for compatibility with corpora that serialize
    programs root-first; reversal maps unary chains exactly, and for binary
    tokens the argument order follows the reversed reading.
    """
    tokens = tokenize(text, catalog)
    if notation == "prefix":
        tokens = list(reversed(tokens))
    elif notation != "postfix":
        raise ProgramError(f"unknown notation '{notation}'")
    return build_tree(tokens)


def program_to_text(program: Program) -> str:
    return " ".join(linearize(program))


def program_from_dict(doc: dict, catalog: Catalog) -> Program:
    if "tokens" not in doc:
        raise ProgramError("program document missing 'tokens'")
    text = " ".join(doc["tokens"])
    return program_from_text(text, catalog, doc.get("notation", "postfix"))


def program_to_dict(program: Program) -> dict:
    return {"tokens": linearize(program), "notation": "postfix"}


@dataclass
class TypeReport:
    """Result of static type checking; ``ok`` iff ``mismatches`` is empty."""

    ok: bool
    result_type: ValueType | None
    mismatches: list[tuple[str, ValueType, ValueType]] = field(default_factory=list)

    def describe(self) -> str:
        if self.ok:
            return f"ok: {self.result_type}"
        lines = [
            f"at {path}: expected {expected}, found {found}" for path, expected, found in self.mismatches
        ]
        return "type mismatches:\n" + "\n".join(lines)


def type_check(program: Program, profile: DomainProfile | None = None, *, coarse: bool = False) -> TypeReport:
    """Check every module application in the tree against its signature.

    By default entry refinements must line up (``equal_color`` rejects a
    shape entry); ``coarse=True`` relaxes matching to the bare five kinds.
    Node paths in mismatches are child-index chains from the root
    (``root``, ``root.0``, ``root.0.1`` ...).
    """
    if profile is not None:
        catalog = build_catalog(profile)
        for node in program.walk_postorder():
            if node.spec.name not in catalog.tokens:
                raise ProgramError(f"token '{node.spec.name}' is not in profile '{profile.name}' catalog")
    mismatches: list[tuple[str, ValueType, ValueType]] = []

    def check(node: Node, path: str) -> ValueType:
        child_types = [check(child, f"{path}.{i}") for i, child in enumerate(node.children)]
        for i, (expected, found) in enumerate(zip(node.spec.input_types, child_types)):
            if not expected.matches(found, coarse=coarse):
                mismatches.append((f"{path}.{i}", expected, found))
        return node.spec.output_type

    result = check(program.root, "root")
    return TypeReport(ok=not mismatches, result_type=result, mismatches=mismatches)


def random_program(profile: DomainProfile, max_depth: int, rng: random.Random) -> Program:
    """Sample a well-typed program of depth at most ``max_depth``.

    The root kind is drawn uniformly from the kinds constructible within the
    depth budget, then tokens are drawn uniformly among those whose inputs
    stay feasible; ``max_depth=1`` always yields the bare scene program.
    """
    if max_depth < 1:
        raise ProgramError(f"max_depth must be >= 1, got {max_depth}")
    catalog = build_catalog(profile)
    min_depths = catalog.min_depths()
    feasible_kinds = sorted(kind for kind, need in min_depths.items() if need <= max_depth)
    if not feasible_kinds:
        raise ProgramError(f"no value kind constructible within depth {max_depth}")
    target = ValueType(rng.choice(feasible_kinds))
    specs = list(catalog.tokens.values())

    def grow(want: ValueType, budget: int) -> Node:
        candidates = []
        for spec in specs:
            if not want.matches(spec.output_type):
                continue
            if spec.arity == 0:
                candidates.append(spec)
            elif budget >= 2 and all(min_depths[t.kind] <= budget - 1 for t in spec.input_types):
                candidates.append(spec)
        pick = rng.choice(candidates)
        children = tuple(grow(t, budget - 1) for t in pick.input_types)
        return Node(pick, children)

    return Program(grow(target, max_depth))
