"""Scene records, validation, and coordinate-derived spatial relations."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SceneError
from .profiles import DomainProfile


@dataclass(frozen=True)
class ObjectRecord:
    """One object: contiguous id, attribute entries, coordinates, optional pose.

    ``pose`` is an optional rotation scalar in [0, 2*pi); it is carried through
    serialization but no reasoning module reads it.
    """

    id: int
    entries: dict[str, str]
    position: tuple[float, ...]
    pose: float | None = None


@dataclass(frozen=True)
class Scene:
    """An ordered collection of objects under one profile.

    ``directions`` optionally overrides the profile's relation vectors for
    this scene (for example camera-skewed data); when absent the profile's
    ``spatial`` map applies.
    """

    scene_id: str
    profile_name: str
    objects: tuple[ObjectRecord, ...]
    directions: dict[str, tuple[float, ...]] | None = None


@dataclass(frozen=True)
class Violation:
    """One failed validation rule; ``object_id`` is None for scene-level rules."""

    object_id: int | None
    rule: str
    message: str

    def __str__(self) -> str:
        where = "scene" if self.object_id is None else f"object {self.object_id}"
        return f"[{self.rule}] {where}: {self.message}"


def validate_scene(scene: Scene, profile: DomainProfile) -> list[Violation]:
    """Check a scene against its profile; an empty list means valid.

    Rules: object count within ``count_max``; ids contiguous from 0 in order;
    every profile attribute present with a leaf entry from its vocabulary; no
    unknown attributes; positions of profile dimension, inside bounds, and
    pairwise distinct.
    """
    violations: list[Violation] = []
    if scene.profile_name != profile.name:
        violations.append(
            Violation(None, "profile", f"scene names profile '{scene.profile_name}', expected '{profile.name}'")
        )
    if len(scene.objects) > profile.count_max:
        violations.append(
            Violation(None, "count", f"{len(scene.objects)} objects exceed count_max {profile.count_max}")
        )
    for index, obj in enumerate(scene.objects):
        if obj.id != index:
            violations.append(Violation(obj.id, "object-ids", f"id {obj.id} at position {index} (ids must be 0..n-1 in order)"))
        for attr in profile.attributes:
            entry = obj.entries.get(attr)
            if entry is None:
                violations.append(Violation(obj.id, f"attribute:{attr}", "missing attribute"))
            elif entry not in profile.attributes[attr]:
                violations.append(Violation(obj.id, f"attribute:{attr}", f"unknown entry '{entry}'"))
            elif not profile.is_leaf_entry(entry):
                violations.append(Violation(obj.id, f"attribute:{attr}", f"entry '{entry}' is not a taxonomy leaf"))
        for attr in obj.entries:
            if attr not in profile.attributes:
                violations.append(Violation(obj.id, f"attribute:{attr}", "attribute not in profile"))
        if len(obj.position) != profile.coordinate_dims:
            violations.append(
                Violation(
                    obj.id,
                    "position-dims",
                    f"position has {len(obj.position)} coordinates, expected {profile.coordinate_dims}",
                )
            )
        else:
            for axis, value in enumerate(obj.position):
                lo, hi = profile.bounds[axis]
                if not lo <= value <= hi:
                    violations.append(
                        Violation(obj.id, "position-bounds", f"axis {axis} value {value} outside [{lo}, {hi}]")
                    )
    seen_positions: dict[tuple[float, ...], int] = {}
    for obj in scene.objects:
        if obj.position in seen_positions:
            violations.append(
                Violation(
                    obj.id,
                    "position-distinct",
                    f"position {obj.position} duplicates object {seen_positions[obj.position]}",
                )
            )
        else:
            seen_positions[obj.position] = obj.id
    if scene.directions is not None:
        for rel, vec in scene.directions.items():
            if rel not in profile.spatial:
                violations.append(Violation(None, "directions", f"override for unknown relation '{rel}'"))
            elif len(vec) != profile.coordinate_dims:
                violations.append(
                    Violation(None, "directions", f"override for '{rel}' has {len(vec)} components")
                )
    return violations


def relation_set(scene: Scene, anchor_id: int, relation: str, profile: DomainProfile) -> set[int]:
    """Objects strictly on the ``relation`` side of the anchor object.

    Membership is sign-of-dot-product: object o is related to the anchor a
    when dot(position(o) - position(a), direction(relation)) > 0, so ties sit
    on the dividing plane and are related in neither direction.  The anchor is
    never a member.  Scene-level direction overrides take precedence over the
    profile vectors.
    """
    if scene.directions:
        vectors = dict(profile.spatial)
        vectors.update(scene.directions)
    else:
        vectors = profile.spatial
    if relation not in vectors:
        raise SceneError(f"unknown relation '{relation}'")
    direction = vectors[relation]
    anchor = None
    for obj in scene.objects:
        if obj.id == anchor_id:
            anchor = obj
            break
    if anchor is None:
        raise SceneError(f"missing anchor object {anchor_id}")
    members: set[int] = set()
    for obj in scene.objects:
        if obj.id == anchor_id:
            continue
        dot = sum((o - a) * d for o, a, d in zip(obj.position, anchor.position, direction))
        if dot > 0:
            members.add(obj.id)
    return members


def scene_to_dict(scene: Scene, profile: DomainProfile) -> dict:
    """Render a scene as its JSON document form (attributes as flat keys)."""
    objects = []
    for obj in scene.objects:
        doc: dict = {"id": obj.id}
        for attr in profile.attributes:
            if attr in obj.entries:
                doc[attr] = obj.entries[attr]
        doc["position"] = list(obj.position)
        if obj.pose is not None:
            doc["pose"] = obj.pose
        objects.append(doc)
    out: dict = {"scene_id": scene.scene_id, "profile": scene.profile_name, "objects": objects}
    if scene.directions is not None:
        out["directions"] = {rel: list(vec) for rel, vec in scene.directions.items()}
    return out


def scene_from_dict(doc: dict, profile: DomainProfile) -> Scene:
    """Parse a scene JSON document; structural errors raise SceneError.

    Semantic problems (bad entries, out-of-bounds coordinates) are left to
    :func:`validate_scene` so callers can collect every violation at once.
    """
    if not isinstance(doc, dict):
        raise SceneError("scene document must be a JSON object")
    try:
        scene_id = doc["scene_id"]
        objects_doc = doc["objects"]
    except KeyError as missing:
        raise SceneError(f"scene document missing key {missing}") from None
    profile_name = doc.get("profile", profile.name)
    known = set(profile.attributes) | {"id", "position", "pose"}
    objects = []
    for obj_doc in objects_doc:
        extra = set(obj_doc) - known
        if extra:
            raise SceneError(f"object {obj_doc.get('id')} has unknown keys: {sorted(extra)}")
        if "id" not in obj_doc or "position" not in obj_doc:
            raise SceneError("every object needs 'id' and 'position'")
        entries = {attr: obj_doc[attr] for attr in profile.attributes if attr in obj_doc}
        pose = obj_doc.get("pose")
        objects.append(
            ObjectRecord(
                id=int(obj_doc["id"]),
                entries=entries,
                position=tuple(float(c) for c in obj_doc["position"]),
                pose=float(pose) if pose is not None else None,
            )
        )
    directions = None
    if "directions" in doc:
        directions = {str(rel): tuple(float(c) for c in vec) for rel, vec in doc["directions"].items()}
    return Scene(
        scene_id=str(scene_id),
        profile_name=str(profile_name),
        objects=tuple(objects),
        directions=directions,
    )
