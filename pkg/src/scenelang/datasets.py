"""Dataset directory layout: QA items as JSONL plus sidecar scene files.

A dataset directory is self-contained:

  profile.json    the domain profile
  templates.json  the template pack used to generate and parse questions
  scenes.json     scene documents, a JSON list
  scenes.bin      the same scenes compactly encoded, concatenated
  items.jsonl     one QA item per line

Items reference scenes by scene_id; answers and programs use the same JSON
forms as the executor and program modules.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .codec import encode_compact, encode_scenes
from .errors import SceneLangError
from .executor import Value, value_from_json, value_to_json
from .profiles import DomainProfile, load_profile, profile_to_dict
from .programs import Program, build_catalog, linearize, program_from_dict
from .scenes import Scene, scene_from_dict, scene_to_dict
from .templates import QAItem, Template, load_template_pack, template_pack_to_dict


@dataclass(frozen=True)
class ItemRecord:
    """One stored QA item; ``program`` is the ground-truth postfix tree."""

    id: int
    scene_id: str
    family: str
    template_id: str
    question: str
    program: Program
    answer: Value


@dataclass
class Dataset:
    profile: DomainProfile
    templates: list[Template]
    scenes: dict[str, Scene]
    items: list[ItemRecord]


def item_to_dict(record: ItemRecord) -> dict:
    return {
        "id": record.id,
        "scene_id": record.scene_id,
        "family": record.family,
        "template_id": record.template_id,
        "question": record.question,
        "program": {"tokens": linearize(record.program), "notation": "postfix"},
        "answer": value_to_json(record.answer),
    }


def item_from_dict(doc: dict, profile: DomainProfile) -> ItemRecord:
    catalog = build_catalog(profile)
    return ItemRecord(
        id=int(doc["id"]),
        scene_id=doc["scene_id"],
        family=doc["family"],
        template_id=doc.get("template_id", ""),
        question=doc["question"],
        program=program_from_dict(doc["program"], catalog),
        answer=value_from_json(doc["answer"]),
    )


def records_from_items(items: list[QAItem], start_id: int = 0) -> list[ItemRecord]:
    return [
        ItemRecord(
            id=start_id + offset,
            scene_id=item.scene_id,
            family=item.family,
            template_id=item.template_id,
            question=item.question_text,
            program=item.program,
            answer=item.answer,
        )
        for offset, item in enumerate(items)
    ]


def write_dataset(
    out_dir: str | Path,
    profile: DomainProfile,
    templates: list[Template],
    scenes: list[Scene],
    items: list[ItemRecord],
) -> dict:
    """Write a dataset directory; returns summary counts."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "profile.json").write_text(json.dumps(profile_to_dict(profile), indent=2) + "\n", "utf-8")
    (out / "templates.json").write_text(
        json.dumps(template_pack_to_dict(templates, profile), indent=2) + "\n", "utf-8"
    )
    scene_docs = [scene_to_dict(scene, profile) for scene in scenes]
    (out / "scenes.json").write_text(json.dumps(scene_docs, indent=2) + "\n", "utf-8")
    (out / "scenes.bin").write_bytes(encode_scenes(scenes, profile))
    with (out / "items.jsonl").open("w", encoding="utf-8") as handle:
        for record in items:
            handle.write(json.dumps(item_to_dict(record), separators=(",", ":")) + "\n")
    return {
        "scenes": len(scenes),
        "items": len(items),
        "bytes_compact": sum(len(encode_compact(s, profile)) for s in scenes),
    }


def load_dataset(path: str | Path) -> Dataset:
    """Load a dataset directory written by :func:`write_dataset`."""
    root = Path(path)
    if not root.is_dir():
        raise SceneLangError(f"dataset directory not found: {root}")
    profile = load_profile((root / "profile.json").read_text("utf-8"))
    templates = load_template_pack((root / "templates.json").read_text("utf-8"), profile)
    scenes_path = root / "scenes.json"
    if scenes_path.exists():
        scene_docs = json.loads(scenes_path.read_text("utf-8"))
        scenes = [scene_from_dict(doc, profile) for doc in scene_docs]
    else:
        from .codec import decode_scenes

        scenes = decode_scenes((root / "scenes.bin").read_bytes(), profile)
    items = []
    items_path = root / "items.jsonl"
    if items_path.exists():
        with items_path.open("r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    items.append(item_from_dict(json.loads(line), profile))
    return Dataset(
        profile=profile,
        templates=templates,
        scenes={scene.scene_id: scene for scene in scenes},
        items=items,
    )
