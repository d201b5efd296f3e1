"""Score classifier predictions against a dataset file.

Predictions are hard binary labels. The report carries F1 for the positive
class and for all negatives pooled, recall for each fine-grained negative
category (precision is undefined there under binary prediction), macro
averages over the rule-based and generation-based blocks, and a per-group
consistency histogram: the fraction of each group's instances classified
correctly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .dataset import (
    CATEGORY_ORDER,
    GENERATION_LABELS,
    POSITIVE_CATEGORY,
    RULE_LABELS,
    Label,
    NLIInstance,
    read_instances,
)
from .errors import MissingPrediction, SchemaViolation, UnknownId

CONSISTENCY_BINS = 10


def read_predictions(path: str | Path) -> dict[str, Label]:
    """Load a line-delimited ``{id, label}`` prediction file."""
    out: dict[str, Label] = {}
    with Path(path).open("r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                pred_id = record["id"]
                label = Label(record["label"])
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise SchemaViolation(line_no, f"bad prediction record: {exc}") from exc
            if pred_id in out and out[pred_id] is not label:
                raise SchemaViolation(line_no, f"conflicting duplicate prediction {pred_id!r}")
            out[pred_id] = label
    return out


def _f1(tp: int, fp: int, fn: int) -> float:
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def _mean(values: Iterable[float]) -> float:
    values = list(values)
    return sum(values) / len(values) if values else 0.0


@dataclass
class EvalReport:
    positive_f1: float
    negative_f1: float
    category_recall: dict[str, float]
    rule_based_macro: float
    generation_macro: float
    macro_f1: float
    consistency: dict[str, float] = field(default_factory=dict)  # group -> fraction

    def consistency_histogram(self, bins: int = CONSISTENCY_BINS) -> dict[str, float]:
        """Fraction of groups per correct-share bin, upper edge inclusive."""
        if not self.consistency:
            return {}
        counts = [0] * bins
        for share in self.consistency.values():
            slot = min(int(share * bins), bins - 1)
            counts[slot] += 1
        total = len(self.consistency)
        return {
            f"[{i / bins:.1f},{(i + 1) / bins:.1f}{']' if i == bins - 1 else ')'}": c / total
            for i, c in enumerate(counts)
        }

    def consistency_at_least(self, threshold: float) -> float:
        """Fraction of groups with at least ``threshold`` of instances correct."""
        if not self.consistency:
            return 0.0
        hits = sum(1 for share in self.consistency.values() if share >= threshold)
        return hits / len(self.consistency)

    def to_dict(self) -> dict:
        return {
            "positive_f1": self.positive_f1,
            "all_negative_f1": self.negative_f1,
            "category_recall": dict(sorted(self.category_recall.items())),
            "rule_based_macro_recall": self.rule_based_macro,
            "generation_macro_recall": self.generation_macro,
            "macro_f1": self.macro_f1,
            "consistency_histogram": self.consistency_histogram(),
            "consistency_at_0.7": self.consistency_at_least(0.7),
        }

    def render_table(self) -> str:
        lines = [f"{'positive F1':<24}{self.positive_f1:>8.2f}"]
        for category in CATEGORY_ORDER:
            if category in self.category_recall:
                lines.append(
                    f"{category + ' recall':<24}{self.category_recall[category]:>8.2f}"
                )
        lines.append(f"{'rule-based macro':<24}{self.rule_based_macro:>8.2f}")
        lines.append(f"{'generation macro':<24}{self.generation_macro:>8.2f}")
        lines.append(f"{'all-negative F1':<24}{self.negative_f1:>8.2f}")
        lines.append(f"{'macro F1':<24}{self.macro_f1:>8.2f}")
        lines.append(f"{'consistency >= 0.7':<24}{self.consistency_at_least(0.7):>8.2f}")
        histogram = self.consistency_histogram()
        if histogram:
            lines.append("consistency histogram (share of groups by correct fraction):")
            for bucket, share in histogram.items():
                lines.append(f"  {bucket:<12}{share:>8.2f}")
        return "\n".join(lines)


def _pair(
    instances: list[NLIInstance], predictions: Mapping[str, Label]
) -> list[tuple[NLIInstance, Label]]:
    known = {inst.id for inst in instances}
    for pred_id in predictions:
        if pred_id not in known:
            raise UnknownId(f"prediction for unknown instance {pred_id!r}")
    paired = []
    for inst in instances:
        if inst.id not in predictions:
            raise MissingPrediction(f"no prediction for instance {inst.id!r}")
        paired.append((inst, predictions[inst.id]))
    return paired


def evaluate_instances(
    instances: list[NLIInstance], predictions: Mapping[str, Label]
) -> EvalReport:
    paired = _pair(instances, predictions)

    def class_f1(target: Label) -> float:
        tp = sum(1 for inst, pred in paired if inst.label is target and pred is target)
        fp = sum(1 for inst, pred in paired if inst.label is not target and pred is target)
        fn = sum(1 for inst, pred in paired if inst.label is target and pred is not target)
        return _f1(tp, fp, fn)

    recalls: dict[str, float] = {}
    categories = sorted({inst.category for inst, _ in paired if inst.category != POSITIVE_CATEGORY})
    for category in categories:
        members = [(inst, pred) for inst, pred in paired if inst.category == category]
        correct = sum(1 for _, pred in members if pred is Label.NOT_ENTAILED)
        recalls[category] = correct / len(members)

    positive_f1 = class_f1(Label.ENTAILED)
    negative_f1 = class_f1(Label.NOT_ENTAILED)

    consistency: dict[str, float] = {}
    group_sizes: dict[str, int] = {}
    group_hits: dict[str, int] = {}
    for inst, pred in paired:
        group_sizes[inst.group_id] = group_sizes.get(inst.group_id, 0) + 1
        if pred is inst.label:
            group_hits[inst.group_id] = group_hits.get(inst.group_id, 0) + 1
    for group_id, size in group_sizes.items():
        consistency[group_id] = group_hits.get(group_id, 0) / size

    return EvalReport(
        positive_f1=positive_f1,
        negative_f1=negative_f1,
        category_recall=recalls,
        rule_based_macro=_mean(recalls[c] for c in recalls if c in RULE_LABELS),
        generation_macro=_mean(recalls[c] for c in recalls if c in GENERATION_LABELS),
        macro_f1=(positive_f1 + negative_f1) / 2,
        consistency=consistency,
    )


def evaluate(dataset_path: str | Path, predictions_path: str | Path) -> EvalReport:
    """Score a prediction file against a dataset file."""
    instances = read_instances(dataset_path)
    predictions = read_predictions(predictions_path)
    return evaluate_instances(instances, predictions)


def consistency(dataset_path: str | Path, predictions_path: str | Path) -> dict[str, float]:
    """Per-group fraction of correctly classified instances."""
    return evaluate(dataset_path, predictions_path).consistency


def write_histogram_svg(histogram: Mapping[str, float], path: str | Path) -> None:
    """Render the consistency histogram as a small standalone SVG bar chart."""
    bars = list(histogram.items())
    width, height, gutter = 640, 240, 40
    bar_zone = width - 2 * gutter
    bar_width = bar_zone / max(len(bars), 1)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<line x1="{gutter}" y1="{height - gutter}" x2="{width - gutter}" '
        f'y2="{height - gutter}" stroke="black"/>',
    ]
    for i, (label, value) in enumerate(bars):
        bar_height = value * (height - 2 * gutter)
        x = gutter + i * bar_width
        y = height - gutter - bar_height
        parts.append(
            f'<rect x="{x:.1f}" y="{y:.1f}" width="{bar_width * 0.8:.1f}" '
            f'height="{bar_height:.1f}" fill="steelblue"/>'
        )
        parts.append(
            f'<text x="{x + bar_width * 0.4:.1f}" y="{height - gutter + 14}" '
            f'font-size="9" text-anchor="middle">{label}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts), encoding="utf-8")
