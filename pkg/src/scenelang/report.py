"""Figure rendering for evaluation and stats reports.

Uses the Agg backend so figures render headlessly; files are written next
to the JSON report they accompany.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  backend must be set first

from .metrics import Metrics

_BAR_COLOR = "#4878a8"
_ACCENT_COLOR = "#b85450"


def _sibling(report_path: str, suffix: str) -> str:
    base, _ = os.path.splitext(report_path)
    return f"{base}_{suffix}.png"


def write_eval_figures(report_path: str, metrics: Metrics) -> list[str]:
    """Render accuracy and rate charts beside an evaluation report."""
    written = []

    families = sorted(metrics.per_family)
    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(families) + 1), 3.2))
    ax.bar(families, [metrics.per_family[f] for f in families], color=_BAR_COLOR)
    ax.axhline(metrics.overall, color=_ACCENT_COLOR, linestyle="--", linewidth=1,
               label=f"overall {metrics.overall:.3f}")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("answer accuracy")
    ax.set_title("Accuracy by question family")
    ax.legend(loc="lower right")
    ax.tick_params(axis="x", rotation=20)
    fig.tight_layout()
    path = _sibling(report_path, "accuracy")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    labels = ["program match", "error", "fallback"]
    values = [metrics.program_accuracy, metrics.error_rate, metrics.fallback_rate]
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    ax.bar(labels, values, color=[_BAR_COLOR, _ACCENT_COLOR, "#8a7aa8"])
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("rate")
    ax.set_title("Parse and execution rates")
    fig.tight_layout()
    path = _sibling(report_path, "rates")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    return written


def write_stats_figures(report_path: str, stats: dict) -> list[str]:
    """Render scene-size and family-composition charts beside a stats report."""
    written = []
    profiles = stats.get("profiles", {})
    if not profiles:
        return written

    fig, ax = plt.subplots(figsize=(4.6, 3.2))
    names = sorted(profiles)
    means = [profiles[n]["mean_scene_bytes"] for n in names]
    maxes = [profiles[n]["max_scene_bytes"] for n in names]
    x = range(len(names))
    ax.bar([i - 0.18 for i in x], means, width=0.36, label="mean", color=_BAR_COLOR)
    ax.bar([i + 0.18 for i in x], maxes, width=0.36, label="max", color=_ACCENT_COLOR)
    ax.axhline(100, color="gray", linestyle=":", linewidth=1, label="100-byte line")
    ax.set_xticks(list(x))
    ax.set_xticklabels(names)
    ax.set_ylabel("bytes per scene")
    ax.set_title("Compact scene encoding size")
    ax.legend()
    fig.tight_layout()
    path = _sibling(report_path, "scene_bytes")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    families = sorted({fam for p in profiles.values() for fam in p["family_histogram"]})
    if families:
        fig, ax = plt.subplots(figsize=(max(4.6, 1.1 * len(families) + 1), 3.2))
        width = 0.8 / len(names)
        for j, name in enumerate(names):
            hist = profiles[name]["family_histogram"]
            offset = (j - (len(names) - 1) / 2) * width
            ax.bar([i + offset for i in range(len(families))],
                   [hist.get(f, 0) for f in families], width=width, label=name)
        ax.set_xticks(range(len(families)))
        ax.set_xticklabels(families, rotation=20)
        ax.set_ylabel("items")
        ax.set_title("Question family composition")
        ax.legend()
        fig.tight_layout()
        path = _sibling(report_path, "families")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    return written
