"""Domain profiles: attribute vocabularies, taxonomy, and spatial conventions.

A profile pins down one world (for example the CLEVR blocks world): which
discrete attributes objects carry, the legal entry vocabulary of each
attribute, an optional hierarchy over one attribute ("wolf" is an "animal"),
the named spatial relations with their direction vectors, coordinate bounds,
and the maximum object count per scene.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import IO, Iterable

from .errors import ProfileError

BUILTIN_PROFILES = ("clevr", "minecraft")

# Attribute holding per-object view direction; it is packed separately by the
# compact codec and is otherwise an ordinary attribute.
FACING_ATTRIBUTE = "facing"


@dataclass(frozen=True, eq=False)
class DomainProfile:
    """One world's vocabularies and conventions.

    ``attributes`` maps attribute name to its ordered entry vocabulary; the
    vocabulary lists the entries objects may take (taxonomy leaves, for the
    hierarchical attribute).  Entries are unique across the whole profile, so
    an entry string always identifies its attribute.  ``taxonomy`` is an
    ordered sequence of (parent, child) edges over the ``hierarchy``
    attribute; parents are virtual groupings usable in filters but never
    assigned to objects.  ``spatial`` maps relation names to direction
    vectors; relations come in exact-negation pairs (left/right,
    front/behind).  ``bounds`` gives an inclusive [lo, hi] interval per
    coordinate axis.
    """

    name: str
    attributes: dict[str, tuple[str, ...]]
    taxonomy: tuple[tuple[str, str], ...] = ()
    hierarchy: str | None = None
    spatial: dict[str, tuple[float, ...]] = field(default_factory=dict)
    coordinate_dims: int = 3
    count_max: int = 10
    bounds: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        self._validate()
        # Derived lookup tables; the instance is treated as immutable after
        # construction, so these are plain caches.
        children: dict[str, list[str]] = {}
        for parent, child in self.taxonomy:
            children.setdefault(parent, []).append(child)
        object.__setattr__(self, "_children", children)
        entry_attr: dict[str, str] = {}
        for attr, vocab in self.attributes.items():
            for entry in vocab:
                entry_attr[entry] = attr
        for node in self._taxonomy_nodes():
            entry_attr.setdefault(node, self.hierarchy or "")
        object.__setattr__(self, "_entry_attr", entry_attr)
        leaves: dict[str, tuple[str, ...]] = {}
        for entry in entry_attr:
            leaves[entry] = tuple(self._collect_leaves(entry))
        object.__setattr__(self, "_leaves", leaves)
        opposite: dict[str, str] = {}
        for rel, vec in self.spatial.items():
            for other, other_vec in self.spatial.items():
                if other != rel and all(a == -b for a, b in zip(vec, other_vec)):
                    opposite[rel] = other
        object.__setattr__(self, "_opposite", opposite)

    # ------------------------------------------------------------------
    # validation

    def _validate(self) -> None:
        if not self.name:
            raise ProfileError("profile 'name' must be a non-empty string")
        if not self.attributes:
            raise ProfileError("profile 'attributes' must name at least one attribute")
        seen: set[str] = set()
        for attr, vocab in self.attributes.items():
            if not vocab:
                raise ProfileError(f"attribute '{attr}' has an empty vocabulary")
            for entry in vocab:
                if not isinstance(entry, str) or not entry:
                    raise ProfileError(f"attribute '{attr}' has a non-string entry")
                if entry in seen:
                    raise ProfileError(f"duplicate entry '{entry}' (entries are unique across attributes)")
                seen.add(entry)
        self._validate_taxonomy(seen)
        if self.coordinate_dims not in (2, 3):
            raise ProfileError(f"coordinate_dims must be 2 or 3, got {self.coordinate_dims}")
        if len(self.bounds) != self.coordinate_dims:
            raise ProfileError(
                f"bounds lists {len(self.bounds)} axes but coordinate_dims is {self.coordinate_dims}"
            )
        for axis, (lo, hi) in enumerate(self.bounds):
            if not lo < hi:
                raise ProfileError(f"bounds axis {axis} must satisfy lo < hi, got [{lo}, {hi}]")
        if self.count_max < 1:
            raise ProfileError(f"count_max must be >= 1, got {self.count_max}")
        if not self.spatial:
            raise ProfileError("profile 'spatial' must name at least one relation")
        for rel, vec in self.spatial.items():
            if len(vec) != self.coordinate_dims:
                raise ProfileError(
                    f"relation '{rel}' vector has {len(vec)} components, expected {self.coordinate_dims}"
                )
            if all(c == 0 for c in vec):
                raise ProfileError(f"relation '{rel}' has a zero direction vector")
        for rel, vec in self.spatial.items():
            negations = [
                other
                for other, other_vec in self.spatial.items()
                if other != rel and all(a == -b for a, b in zip(vec, other_vec))
            ]
            if len(negations) != 1:
                raise ProfileError(f"unpaired relation '{rel}': needs exactly one exact-negation partner")

    def _validate_taxonomy(self, entries: set[str]) -> None:
        if not self.taxonomy:
            if self.hierarchy is not None:
                raise ProfileError(f"hierarchy '{self.hierarchy}' declared but taxonomy is empty")
            return
        children: dict[str, list[str]] = {}
        for edge in self.taxonomy:
            if len(edge) != 2:
                raise ProfileError(f"taxonomy edge {edge!r} is not a (parent, child) pair")
            parent, child = edge
            children.setdefault(parent, []).append(child)
        # Acyclicity, self-loops included.
        state: dict[str, int] = {}

        def visit(node: str) -> None:
            state[node] = 1
            for nxt in children.get(node, ()):
                mark = state.get(nxt, 0)
                if mark == 1:
                    raise ProfileError(f"cyclic taxonomy at '{nxt}'")
                if mark == 0:
                    visit(nxt)
            state[node] = 2

        for parent, child in self.taxonomy:
            if parent == child:
                raise ProfileError(f"cyclic taxonomy at '{parent}'")
        for node in children:
            if state.get(node, 0) == 0:
                visit(node)
        nodes = {n for edge in self.taxonomy for n in edge}
        internal = set(children)
        sinks = nodes - internal
        for node in internal:
            if node in entries:
                raise ProfileError(f"taxonomy node '{node}' duplicates a vocabulary entry")
        sink_attrs = set()
        for node in sinks:
            attr = self._attr_of(node, entries)
            if attr is None:
                raise ProfileError(f"taxonomy leaf '{node}' is not a vocabulary entry of any attribute")
            sink_attrs.add(attr)
        if len(sink_attrs) != 1:
            raise ProfileError(f"taxonomy leaves span multiple attributes: {sorted(sink_attrs)}")
        inferred = sink_attrs.pop()
        if self.hierarchy is None:
            object.__setattr__(self, "hierarchy", inferred)
        elif self.hierarchy != inferred:
            raise ProfileError(
                f"hierarchy declares '{self.hierarchy}' but taxonomy leaves belong to '{inferred}'"
            )

    def _attr_of(self, entry: str, _entries: set[str] | None = None) -> str | None:
        for attr, vocab in self.attributes.items():
            if entry in vocab:
                return attr
        return None

    # ------------------------------------------------------------------
    # taxonomy

    def _taxonomy_nodes(self) -> list[str]:
        nodes: list[str] = []
        for edge in self.taxonomy:
            for node in edge:
                if node not in nodes:
                    nodes.append(node)
        return nodes

    def _collect_leaves(self, entry: str) -> list[str]:
        children = getattr(self, "_children")
        kids = children.get(entry, ())
        if not kids:
            return [entry]
        leaves: list[str] = []
        for kid in kids:
            for leaf in self._collect_leaves(kid):
                if leaf not in leaves:
                    leaves.append(leaf)
        return leaves

    def children(self, entry: str) -> tuple[str, ...]:
        return tuple(getattr(self, "_children").get(entry, ()))

    def is_leaf_entry(self, entry: str) -> bool:
        """True when objects may carry this entry (no taxonomy children)."""
        return entry in getattr(self, "_entry_attr") and not getattr(self, "_children").get(entry)

    def entry_attribute(self, entry: str) -> str:
        """Name of the attribute an entry (or taxonomy node) belongs to."""
        try:
            return getattr(self, "_entry_attr")[entry]
        except KeyError:
            raise ProfileError(f"unknown entry '{entry}'") from None

    def extended_vocabulary(self, attr: str) -> tuple[str, ...]:
        """Vocabulary of ``attr`` plus, for the hierarchy attribute, taxonomy nodes."""
        vocab = list(self.vocabulary(attr))
        if attr == self.hierarchy:
            for node in self._taxonomy_nodes():
                if node not in vocab:
                    vocab.append(node)
        return tuple(vocab)

    def vocabulary(self, attr: str) -> tuple[str, ...]:
        try:
            return self.attributes[attr]
        except KeyError:
            raise ProfileError(f"unknown attribute '{attr}'") from None

    # ------------------------------------------------------------------
    # spatial

    def direction(self, relation: str) -> tuple[float, ...]:
        try:
            return self.spatial[relation]
        except KeyError:
            raise ProfileError(f"unknown relation '{relation}'") from None

    def opposite(self, relation: str) -> str:
        try:
            return getattr(self, "_opposite")[relation]
        except KeyError:
            raise ProfileError(f"unknown relation '{relation}'") from None

    def axis_width(self, axis: int) -> float:
        lo, hi = self.bounds[axis]
        return hi - lo


def taxonomy_leaves(profile: DomainProfile, entry: str) -> frozenset[str]:
    """Leaf entries reachable from ``entry`` through the taxonomy.

    A leaf entry (no taxonomy children) maps to the singleton of itself, so
    profiles without a taxonomy behave as the identity on vocabulary entries.
    """
    leaves = getattr(profile, "_leaves").get(entry)
    if leaves is None:
        raise ProfileError(f"unknown entry '{entry}'")
    return frozenset(leaves)


def ordered_taxonomy_leaves(profile: DomainProfile, entry: str) -> tuple[str, ...]:
    """Same set as :func:`taxonomy_leaves` in deterministic first-seen order."""
    leaves = getattr(profile, "_leaves").get(entry)
    if leaves is None:
        raise ProfileError(f"unknown entry '{entry}'")
    return leaves


def profile_from_dict(doc: dict) -> DomainProfile:
    """Build and validate a profile from a parsed profile JSON document."""
    if not isinstance(doc, dict):
        raise ProfileError("profile document must be a JSON object")
    try:
        name = doc["name"]
        attributes = doc["attributes"]
    except KeyError as missing:
        raise ProfileError(f"profile document missing key {missing}") from None
    if not isinstance(attributes, dict):
        raise ProfileError("'attributes' must map attribute names to entry lists")
    attrs = {str(k): tuple(v) for k, v in attributes.items()}
    taxonomy = tuple((str(p), str(c)) for p, c in doc.get("taxonomy", ()))
    bounds_doc = doc.get("bounds", ())
    bounds = tuple((float(lo), float(hi)) for lo, hi in bounds_doc)
    spatial_doc = doc.get("spatial", {})
    if not isinstance(spatial_doc, dict):
        raise ProfileError("'spatial' must map relation names to vectors")
    spatial = {str(k): tuple(float(c) for c in v) for k, v in spatial_doc.items()}
    dims = int(doc.get("coordinate_dims", len(bounds) or 3))
    return DomainProfile(
        name=str(name),
        attributes=attrs,
        taxonomy=taxonomy,
        hierarchy=doc.get("hierarchy"),
        spatial=spatial,
        coordinate_dims=dims,
        count_max=int(doc.get("count_max", 10)),
        bounds=bounds,
    )


def profile_to_dict(profile: DomainProfile) -> dict:
    doc: dict = {
        "name": profile.name,
        "attributes": {attr: list(vocab) for attr, vocab in profile.attributes.items()},
    }
    if profile.taxonomy:
        doc["taxonomy"] = [list(edge) for edge in profile.taxonomy]
        doc["hierarchy"] = profile.hierarchy
    doc["spatial"] = {rel: list(vec) for rel, vec in profile.spatial.items()}
    doc["coordinate_dims"] = profile.coordinate_dims
    doc["count_max"] = profile.count_max
    doc["bounds"] = [list(b) for b in profile.bounds]
    return doc


def load_profile(source: str | IO[str]) -> DomainProfile:
    """Load a profile from JSON text or a readable file object."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = source
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileError(f"profile is not valid JSON: {exc}") from exc
    return profile_from_dict(doc)


def builtin_profile(name: str) -> DomainProfile:
    """Load one of the profiles shipped with the package (``clevr``, ``minecraft``)."""
    if name not in BUILTIN_PROFILES:
        raise ProfileError(f"unknown builtin profile '{name}' (have: {', '.join(BUILTIN_PROFILES)})")
    text = resources.files("scenelang.data").joinpath(f"{name}.json").read_text("utf-8")
    return load_profile(text)


def iter_builtin_profiles() -> Iterable[DomainProfile]:
    for name in BUILTIN_PROFILES:
        yield builtin_profile(name)
