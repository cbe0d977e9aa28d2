"""Evaluation: run programs over a dataset and aggregate rewards.

For each item the question is parsed back to a program with the dataset's
templates; the parsed program (or the stored ground-truth program when
``use_stored_programs`` is set) is executed on the item's scene and the
answer is scored by exact match.  Aggregation is order-independent, and
permissive-mode fallback seeds derive from the item id (global seed XOR id)
so splitting or reordering a dataset never changes any per-item result.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .codec import encode_compact
from .datasets import Dataset
from .errors import QuestionParseError, SceneLangError
from .executor import ERROR, answer_reward, execute, value_to_json
from .templates import parse_question


@dataclass
class Metrics:
    """Aggregate evaluation results.

    ``overall`` is the item-weighted mean reward, identical to the weighted
    mean of ``per_family`` accuracies; ``program_accuracy`` is the fraction
    of items whose parsed program equals the stored tree exactly.
    """

    per_family: dict[str, float] = field(default_factory=dict)
    family_counts: dict[str, int] = field(default_factory=dict)
    overall: float = 0.0
    program_accuracy: float = 0.0
    error_rate: float = 0.0
    fallback_rate: float = 0.0
    mean_scene_bytes: float = 0.0
    n_items: int = 0
    n_scenes: int = 0

    def to_dict(self) -> dict:
        return {
            "per_family": dict(sorted(self.per_family.items())),
            "family_counts": dict(sorted(self.family_counts.items())),
            "overall": self.overall,
            "program_accuracy": self.program_accuracy,
            "error_rate": self.error_rate,
            "fallback_rate": self.fallback_rate,
            "mean_scene_bytes": self.mean_scene_bytes,
            "n_items": self.n_items,
            "n_scenes": self.n_scenes,
        }


def evaluate(
    dataset: Dataset,
    mode: str = "strict",
    seed: int = 0,
    use_stored_programs: bool = False,
) -> tuple[Metrics, list[dict]]:
    """Score a dataset; returns (metrics, per-item report records)."""
    rewards_by_family: dict[str, list[int]] = {}
    records: list[dict] = []
    program_matches = 0
    errors = 0
    fallbacks = 0
    for item in dataset.items:
        scene = dataset.scenes.get(item.scene_id)
        if scene is None:
            raise SceneLangError(f"item {item.id} references unknown scene '{item.scene_id}'")
        try:
            parsed = parse_question(item.question, dataset.templates, dataset.profile)
        except QuestionParseError:
            parsed = None
        matched = parsed is not None and parsed == item.program
        program_matches += matched
        program = item.program if use_stored_programs else parsed
        if program is None:
            predicted = ERROR
            error = True
            fallback = False
        else:
            item_seed = seed ^ item.id if mode == "permissive" else None
            outcome = execute(program, scene, dataset.profile, mode=mode, seed=item_seed)
            predicted = outcome.answer
            error = outcome.error
            fallback = outcome.fallback_used
        reward = answer_reward(predicted, item.answer)
        rewards_by_family.setdefault(item.family, []).append(reward)
        errors += error
        fallbacks += fallback
        records.append(
            {
                "id": item.id,
                "family": item.family,
                "answer": value_to_json(item.answer),
                "predicted": value_to_json(predicted),
                "reward": reward,
                "error": bool(error),
                "fallback": bool(fallback),
                "program_match": bool(matched),
            }
        )
    n = len(dataset.items)
    scene_sizes = [len(encode_compact(scene, dataset.profile)) for scene in dataset.scenes.values()]
    metrics = Metrics(
        per_family={fam: sum(r) / len(r) for fam, r in rewards_by_family.items()},
        family_counts={fam: len(r) for fam, r in rewards_by_family.items()},
        overall=sum(sum(r) for r in rewards_by_family.values()) / n if n else 0.0,
        program_accuracy=program_matches / n if n else 0.0,
        error_rate=errors / n if n else 0.0,
        fallback_rate=fallbacks / n if n else 0.0,
        mean_scene_bytes=sum(scene_sizes) / len(scene_sizes) if scene_sizes else 0.0,
        n_items=n,
        n_scenes=len(scene_sizes),
    )
    return metrics, records


def dataset_stats(datasets: list[Dataset]) -> dict:
    """Per-profile size and composition statistics for one or more datasets.

    Each profile section reports scene counts, compact encoding sizes (mean
    and max bytes per scene), the question family histogram, and whether the
    sub-100-byte size contract holds for profiles capped at 10 objects.
    """
    sections: dict[str, dict] = {}
    for dataset in datasets:
        name = dataset.profile.name
        section = sections.setdefault(
            name,
            {"scenes": 0, "items": 0, "scene_bytes": [], "families": {}},
        )
        section["scenes"] += len(dataset.scenes)
        section["items"] += len(dataset.items)
        for scene in dataset.scenes.values():
            section["scene_bytes"].append(len(encode_compact(scene, dataset.profile)))
        for item in dataset.items:
            section["families"][item.family] = section["families"].get(item.family, 0) + 1
    out: dict = {"profiles": {}}
    for name, section in sections.items():
        sizes = section["scene_bytes"]
        out["profiles"][name] = {
            "scenes": section["scenes"],
            "items": section["items"],
            "mean_scene_bytes": sum(sizes) / len(sizes) if sizes else 0.0,
            "max_scene_bytes": max(sizes) if sizes else 0,
            "family_histogram": dict(sorted(section["families"].items())),
            "under_100_bytes": all(size < 100 for size in sizes),
        }
    return out
