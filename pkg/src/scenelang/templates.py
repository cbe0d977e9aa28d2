"""Question templates: program skeletons paired with invertible surface text.

A template couples a postfix program skeleton containing typed slots with one
or more text patterns over the same slots.  Instantiation samples slot values
under the template's constraints, executes the bound program on a scene in
strict mode, and accepts only non-degenerate items: every filter step must
keep a non-empty set and comparisons must not pit a selection against itself.
Parsing inverts rendering by exact template-pattern match over normalized
text (case folded, punctuation stripped), longest literal match first.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import IO, Iterator

from .errors import TemplateError, QuestionParseError
from .executor import ObjectVal, Outcome, SceneVal, Value, execute
from .profiles import DomainProfile, builtin_profile
from .programs import (
    ANSWER_KINDS,
    FAMILY_FILTER,
    KIND_BOOLEAN,
    Catalog,
    Program,
    build_catalog,
    build_tree,
    linearize,
    tokenize,
    type_check,
)
from .scenes import ObjectRecord, Scene, validate_scene

FAMILIES = ("count", "exist", "compare_number", "compare_attribute", "query_attribute")

BUILTIN_TEMPLATE_PACKS = ("clevr", "minecraft")

# Surface phrases for relation slots; entries render as themselves.
RELATION_PHRASES = {
    "front": "in front of",
    "behind": "behind",
    "left": "to the left of",
    "right": "to the right of",
}

_SLOT_RE = re.compile(r"\{([a-z][a-z0-9_]*)\}")
_PUNCTUATION = str.maketrans("", "", "?.!,;:")


def _normalize(text: str) -> str:
    return " ".join(text.lower().translate(_PUNCTUATION).split())


@dataclass(frozen=True)
class SlotSpec:
    """One template slot: an attribute entry (optionally taxonomy-extended) or a relation."""

    name: str
    kind: str
    attribute: str | None = None
    extended: bool = False

    def domain(self, profile: DomainProfile) -> tuple[str, ...]:
        if self.kind == "relation":
            return tuple(profile.spatial)
        if self.extended:
            return profile.extended_vocabulary(self.attribute)
        return profile.vocabulary(self.attribute)

    def surface(self, value: str) -> str:
        if self.kind == "relation":
            try:
                return RELATION_PHRASES[value]
            except KeyError:
                raise TemplateError(f"relation '{value}' has no surface phrase") from None
        return value


@dataclass(frozen=True)
class Constraint:
    """A slot co-occurrence rule: 'distinct' values, or distinct value tuples."""

    kind: str
    groups: tuple[tuple[str, ...], ...]

    def satisfied(self, binding: dict[str, str]) -> bool:
        if self.kind == "distinct":
            values = [binding[name] for name in self.groups[0]]
            return len(set(values)) == len(values)
        if self.kind == "distinct_tuple":
            left, right = self.groups
            return tuple(binding[n] for n in left) != tuple(binding[n] for n in right)
        raise TemplateError(f"unknown constraint kind '{self.kind}'")


@dataclass
class Template:
    template_id: str
    family: str
    skeleton_tokens: tuple[str, ...]
    slots: dict[str, SlotSpec]
    text_patterns: tuple[str, ...]
    constraints: tuple[Constraint, ...] = ()
    _compiled: list[tuple[re.Pattern, int, int]] | None = field(default=None, repr=False, compare=False)

    def slot_names(self) -> tuple[str, ...]:
        return tuple(self.slots)

    def bind(self, binding: dict[str, str], catalog: Catalog) -> Program:
        """Substitute slot values into the skeleton and parse the result."""
        if set(binding) != set(self.slots):
            missing = set(self.slots) - set(binding)
            unused = set(binding) - set(self.slots)
            parts = []
            if missing:
                parts.append(f"missing slots {sorted(missing)}")
            if unused:
                parts.append(f"unused slots {sorted(unused)}")
            raise TemplateError(f"binding does not fit template '{self.template_id}': {'; '.join(parts)}")
        text = " ".join(token.format(**binding) for token in self.skeleton_tokens)
        return build_tree(tokenize(text, catalog))

    def compiled_patterns(self, profile: DomainProfile) -> list[tuple[re.Pattern, int, int]]:
        """(regex, literal length, pattern index) per text pattern, cached."""
        if self._compiled is None:
            compiled = []
            for index, pattern in enumerate(self.text_patterns):
                regex, literal_len = self._compile_pattern(pattern, profile)
                compiled.append((regex, literal_len, index))
            self._compiled = compiled
        return self._compiled

    def _compile_pattern(self, pattern: str, profile: DomainProfile) -> tuple[re.Pattern, int]:
        normalized = _normalize(pattern)
        pieces = _SLOT_RE.split(normalized)
        regex_parts = ["^"]
        literal_len = 0
        for i, piece in enumerate(pieces):
            if i % 2 == 0:
                literal_len += len(piece.strip())
                regex_parts.append(re.escape(piece))
            else:
                slot = self.slots[piece]
                surfaces = sorted(
                    (_normalize(slot.surface(v)) for v in slot.domain(profile)), key=len, reverse=True
                )
                regex_parts.append(f"(?P<{piece}>" + "|".join(re.escape(s) for s in surfaces) + ")")
        regex_parts.append("$")
        return re.compile("".join(regex_parts)), literal_len

    def surface_to_value(self, slot_name: str, surface: str, profile: DomainProfile) -> str | None:
        slot = self.slots[slot_name]
        for value in slot.domain(profile):
            if _normalize(slot.surface(value)) == surface:
                return value
        return None


@dataclass(frozen=True)
class QAItem:
    question_text: str
    program: Program
    answer: Value
    family: str
    scene_id: str
    template_id: str


# ----------------------------------------------------------------------
# template pack loading


def _slot_from_dict(name: str, doc: dict) -> SlotSpec:
    kind = doc.get("kind")
    if kind == "relation":
        return SlotSpec(name=name, kind="relation")
    if kind == "entry":
        if "attribute" not in doc:
            raise TemplateError(f"entry slot '{name}' needs an 'attribute'")
        return SlotSpec(name=name, kind="entry", attribute=doc["attribute"], extended=bool(doc.get("extended")))
    raise TemplateError(f"slot '{name}' has unknown kind '{kind}'")


def _constraint_from_dict(doc: dict, slot_names: set[str]) -> Constraint:
    kind = doc.get("kind")
    if kind == "distinct":
        names = tuple(doc["slots"])
        groups: tuple[tuple[str, ...], ...] = (names,)
    elif kind == "distinct_tuple":
        groups = (tuple(doc["left"]), tuple(doc["right"]))
    else:
        raise TemplateError(f"unknown constraint kind '{kind}'")
    for group in groups:
        for name in group:
            if name not in slot_names:
                raise TemplateError(f"constraint references unknown slot '{name}'")
    return Constraint(kind=kind, groups=groups)


def template_from_dict(doc: dict, profile: DomainProfile) -> Template:
    try:
        template_id = doc["template_id"]
        family = doc["family"]
        skeleton = tuple(doc["skeleton"]["tokens"])
        slots_doc = doc["slots"]
        patterns = tuple(doc["text_patterns"])
    except KeyError as missing:
        raise TemplateError(f"template document missing key {missing}") from None
    if family not in FAMILIES:
        raise TemplateError(f"template '{template_id}' has unknown family '{family}'")
    if not patterns:
        raise TemplateError(f"template '{template_id}' needs at least one text pattern")
    slots = {name: _slot_from_dict(name, slot_doc) for name, slot_doc in slots_doc.items()}
    constraints = tuple(_constraint_from_dict(c, set(slots)) for c in doc.get("constraints", ()))
    template = Template(
        template_id=template_id,
        family=family,
        skeleton_tokens=skeleton,
        slots=slots,
        text_patterns=patterns,
        constraints=constraints,
    )
    _validate_template(template, profile)
    return template


def _validate_template(template: Template, profile: DomainProfile) -> None:
    declared = set(template.slots)
    in_skeleton = {name for token in template.skeleton_tokens for name in _SLOT_RE.findall(token)}
    if in_skeleton != declared:
        raise TemplateError(
            f"template '{template.template_id}': skeleton slots {sorted(in_skeleton)} "
            f"differ from declared {sorted(declared)}"
        )
    for pattern in template.text_patterns:
        in_pattern = set(_SLOT_RE.findall(pattern))
        if in_pattern != declared:
            raise TemplateError(
                f"template '{template.template_id}': pattern slots {sorted(in_pattern)} "
                f"differ from declared {sorted(declared)}"
            )
    for slot in template.slots.values():
        if not slot.domain(profile):
            raise TemplateError(f"template '{template.template_id}': slot '{slot.name}' has an empty domain")
    catalog = build_catalog(profile)
    probe = {name: slot.domain(profile)[0] for name, slot in template.slots.items()}
    program = template.bind(probe, catalog)
    report = type_check(program, profile)
    if not report.ok:
        raise TemplateError(f"template '{template.template_id}' skeleton does not type check: {report.describe()}")
    if report.result_type.kind not in ANSWER_KINDS:
        raise TemplateError(
            f"template '{template.template_id}' must answer an entry, number, or boolean, "
            f"got {report.result_type}"
        )


def load_template_pack(source: str | IO[str], profile: DomainProfile) -> list[Template]:
    """Load and validate a template pack JSON document against a profile."""
    text = source.read() if hasattr(source, "read") else source
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TemplateError(f"template pack is not valid JSON: {exc}") from exc
    if "templates" not in doc:
        raise TemplateError("template pack document missing 'templates'")
    templates = [template_from_dict(t, profile) for t in doc["templates"]]
    ids = [t.template_id for t in templates]
    if len(set(ids)) != len(ids):
        raise TemplateError("template ids must be unique within a pack")
    return templates


def template_to_dict(template: Template) -> dict:
    slots = {}
    for name, slot in template.slots.items():
        if slot.kind == "relation":
            slots[name] = {"kind": "relation"}
        else:
            slot_doc = {"kind": "entry", "attribute": slot.attribute}
            if slot.extended:
                slot_doc["extended"] = True
            slots[name] = slot_doc
    constraints = []
    for constraint in template.constraints:
        if constraint.kind == "distinct":
            constraints.append({"kind": "distinct", "slots": list(constraint.groups[0])})
        else:
            constraints.append(
                {"kind": "distinct_tuple", "left": list(constraint.groups[0]), "right": list(constraint.groups[1])}
            )
    return {
        "template_id": template.template_id,
        "family": template.family,
        "skeleton": {"tokens": list(template.skeleton_tokens)},
        "slots": slots,
        "text_patterns": list(template.text_patterns),
        "constraints": constraints,
    }


def template_pack_to_dict(templates: list[Template], profile: DomainProfile) -> dict:
    return {"profile": profile.name, "templates": [template_to_dict(t) for t in templates]}


def builtin_template_pack(name: str, profile: DomainProfile | None = None) -> list[Template]:
    if name not in BUILTIN_TEMPLATE_PACKS:
        raise TemplateError(
            f"unknown builtin template pack '{name}' (have: {', '.join(BUILTIN_TEMPLATE_PACKS)})"
        )
    text = resources.files("scenelang.data").joinpath(f"templates_{name}.json").read_text("utf-8")
    if profile is None:
        profile = builtin_profile(json.loads(text)["profile"])
    return load_template_pack(text, profile)


# ----------------------------------------------------------------------
# rendering and parsing


def render_text(template: Template, binding: dict[str, str], rng: random.Random | None = None) -> str:
    """Render a bound template to a question string.

    The surface pattern is chosen by seeded index when an rng is given (the
    first pattern otherwise), so identical binding and seed give an identical
    string.  Bindings must cover the template's slots exactly.
    """
    if set(binding) != set(template.slots):
        missing = set(template.slots) - set(binding)
        unused = set(binding) - set(template.slots)
        parts = []
        if missing:
            parts.append(f"missing slots {sorted(missing)}")
        if unused:
            parts.append(f"unused slots {sorted(unused)}")
        raise TemplateError(f"binding does not fit template '{template.template_id}': {'; '.join(parts)}")
    index = rng.randrange(len(template.text_patterns)) if rng is not None else 0
    surfaces = {name: template.slots[name].surface(value) for name, value in binding.items()}
    return template.text_patterns[index].format(**surfaces)


def parse_question(text: str, templates: list[Template], profile: DomainProfile) -> Program:
    """Recover the program of a templated question.

    Matching is exact over normalized text; when several templates match, the
    one with the most literal (non-slot) characters wins, and an exact tie
    between different templates is reported as ambiguous.
    """
    normalized = _normalize(text)
    catalog = build_catalog(profile)
    candidates: dict[str, tuple[int, Template, dict[str, str]]] = {}
    for template in templates:
        for regex, literal_len, _index in template.compiled_patterns(profile):
            match = regex.fullmatch(normalized)
            if match is None:
                continue
            binding = {}
            for slot_name, surface in match.groupdict().items():
                value = template.surface_to_value(slot_name, surface, profile)
                if value is None:
                    binding = None
                    break
                binding[slot_name] = value
            if binding is None:
                continue
            if not all(c.satisfied(binding) for c in template.constraints):
                continue
            known = candidates.get(template.template_id)
            if known is None or literal_len > known[0]:
                candidates[template.template_id] = (literal_len, template, binding)
    if not candidates:
        raise QuestionParseError(f"no template matches: {text!r}")
    ranked = sorted(candidates.values(), key=lambda entry: -entry[0])
    if len(ranked) > 1 and ranked[0][0] == ranked[1][0]:
        tied = tuple(t.template_id for score, t, _ in ranked if score == ranked[0][0])
        raise QuestionParseError(f"ambiguous question {text!r}: matches {', '.join(tied)}", candidates=tied)
    _, template, binding = ranked[0]
    return template.bind(binding, catalog)


# ----------------------------------------------------------------------
# scene sampling and instantiation


def sample_scene(
    profile: DomainProfile,
    rng: random.Random,
    min_objects: int = 3,
    max_objects: int | None = None,
    scene_id: str = "sample",
) -> Scene:
    """Sample a valid scene: uniform attributes, uniform in-bounds positions.

    Positions keep a minimum pairwise separation of 1% of the widest axis
    bound, retried within a budget; overcrowded bounds raise TemplateError.
    """
    if max_objects is None:
        max_objects = profile.count_max
    if not 1 <= min_objects <= max_objects <= profile.count_max:
        raise TemplateError(
            f"need 1 <= min_objects <= max_objects <= {profile.count_max}, "
            f"got [{min_objects}, {max_objects}]"
        )
    n = rng.randint(min_objects, max_objects)
    separation = 0.01 * max(profile.axis_width(axis) for axis in range(profile.coordinate_dims))
    objects = []
    positions: list[tuple[float, ...]] = []
    for index in range(n):
        entries = {attr: rng.choice(vocab) for attr, vocab in profile.attributes.items()}
        for _attempt in range(100):
            candidate = tuple(rng.uniform(lo, hi) for lo, hi in profile.bounds)
            if all(
                sum((a - b) ** 2 for a, b in zip(candidate, other)) >= separation * separation
                for other in positions
            ):
                break
        else:
            raise TemplateError("rejection budget exhausted (overcrowded bounds)")
        positions.append(candidate)
        objects.append(ObjectRecord(id=index, entries=entries, position=candidate))
    scene = Scene(scene_id=scene_id, profile_name=profile.name, objects=tuple(objects))
    assert not validate_scene(scene, profile)
    return scene


def _degenerate(program: Program, outcome: Outcome) -> bool:
    """Apply the acceptance rules to a successful execution trace.

    Rejects when any filter step keeps nothing, or when both sides of a
    binary comparison resolve to the same non-empty objects (a set compared
    with itself, an object's attribute with its own).  Each subtree is
    represented by the object ids at its topmost set- or object-valued step.
    """
    steps = iter(outcome.trace)
    degenerate = False

    def analyze(node) -> frozenset[int]:
        nonlocal degenerate
        child_ids = [analyze(child) for child in node.children]
        step = next(steps)
        if node.spec.family == FAMILY_FILTER and not step.output.ids:
            degenerate = True
        if node.spec.arity == 2 and node.spec.output_type.kind == KIND_BOOLEAN:
            left, right = child_ids
            if left and left == right:
                degenerate = True
        output = step.output
        if isinstance(output, SceneVal):
            return frozenset(output.ids)
        if isinstance(output, ObjectVal):
            return frozenset((output.id,))
        return frozenset().union(*child_ids) if child_ids else frozenset()

    analyze(program.root)
    return degenerate


def instantiate(
    template: Template,
    scene: Scene,
    profile: DomainProfile,
    rng: random.Random,
    max_tries: int = 32,
) -> QAItem | None:
    """Try to build one QA item from a template on a scene.

    Slot values are drawn uniformly and re-drawn on constraint failure,
    execution error, or a degenerate answer; returns None when the budget
    runs out (the scene simply cannot host this template).
    """
    catalog = build_catalog(profile)
    domains = {name: slot.domain(profile) for name, slot in template.slots.items()}
    for _attempt in range(max_tries):
        binding = {name: rng.choice(domain) for name, domain in domains.items()}
        if not all(c.satisfied(binding) for c in template.constraints):
            continue
        program = template.bind(binding, catalog)
        outcome = execute(program, scene, profile, mode="strict")
        if outcome.error:
            continue
        if _degenerate(program, outcome):
            continue
        question = render_text(template, binding, rng)
        return QAItem(
            question_text=question,
            program=program,
            answer=outcome.answer,
            family=template.family,
            scene_id=scene.scene_id,
            template_id=template.template_id,
        )
    return None


def generate_dataset(
    profile: DomainProfile,
    templates: list[Template],
    n_scenes: int,
    q_per_scene: int,
    seed: int,
    min_objects: int = 3,
    max_objects: int | None = None,
    question_budget: int = 64,
) -> Iterator[tuple[Scene, list[QAItem]]]:
    """Yield ``n_scenes`` sampled scenes, each with ``q_per_scene`` QA items.

    Question families are drawn uniformly per item, then a template uniformly
    within the family; rejected instantiations retry within the same family
    so the family mix stays uniform.  A scene can make a whole family
    infeasible (for example when no attribute combination singles out an
    object, selector-based comparisons cannot bind), so once a family's
    budget is spent the remaining families are tried in random order, and
    only a scene that fits no family at all raises.  The stream is a pure
    function of the arguments (per-scene generators are seeded as
    ``seed:index``), so a fixed seed reproduces files byte for byte.
    """
    if not templates:
        raise TemplateError("no templates to draw from")
    by_family: dict[str, list[Template]] = {}
    for template in templates:
        by_family.setdefault(template.family, []).append(template)
    families = list(by_family)
    for index in range(n_scenes):
        rng = random.Random(f"{seed}:{index}")
        scene = sample_scene(
            profile, rng, min_objects=min_objects, max_objects=max_objects, scene_id=f"scene-{index:05d}"
        )
        items = []
        for _q in range(q_per_scene):
            item = None
            for family in rng.sample(families, len(families)):
                for _try in range(question_budget):
                    template = rng.choice(by_family[family])
                    item = instantiate(template, scene, profile, rng)
                    if item is not None:
                        break
                if item is not None:
                    break
            if item is None:
                raise TemplateError(
                    f"rejection budget exhausted on {scene.scene_id}: no family fits"
                )
            items.append(item)
        yield scene, items
