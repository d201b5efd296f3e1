"""Assemble instance groups into full or balanced dataset splits.

Each group carries one positive (the original conclusion as hypothesis)
and the negatives produced for it. Train groups emit the positive, one
seeded-uniform rule-based negative, and every accepted generation
negative; dev/test groups emit the positive and all negatives. The
balanced policy additionally caps each rule-based category in train by
seeded down-sampling. Assembly is deterministic per seed: per-group RNG
streams make the emission independent of iteration order.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import EmptyGroup, SchemaViolation
from .perturb import GENERATION_KINDS, RULE_BASED_KINDS, PerturbationKind, kind_from_label

POSITIVE_CATEGORY = "Positive"
SPLITS = ("train", "dev", "test")

RULE_LABELS = tuple(sorted(k.value for k in RULE_BASED_KINDS))
GENERATION_LABELS = tuple(sorted(k.value for k in GENERATION_KINDS))
CATEGORY_ORDER = (
    "SEN", "SEP", "SRE", "SREO", "VNeg", "SN", "LPR", "GEN-ND", "GEN",
)


class Label(Enum):
    ENTAILED = "entailed"
    NOT_ENTAILED = "not_entailed"


@dataclass(frozen=True)
class NLIInstance:
    id: str
    group_id: str
    premise: str
    hypothesis: str
    label: Label
    category: str
    source_abstract_id: str = ""

    def __post_init__(self):
        positive = self.category == POSITIVE_CATEGORY
        entailed = self.label is Label.ENTAILED
        if positive != entailed:
            raise ValueError("Positive category and Entailed label must coincide")
        if not positive:
            kind_from_label(self.category)

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "group_id": self.group_id,
            "premise": self.premise,
            "hypothesis": self.hypothesis,
            "label": self.label.value,
            "category": self.category,
            "source_abstract_id": self.source_abstract_id,
        }

    @classmethod
    def from_record(cls, record: dict, line: int = 0) -> "NLIInstance":
        try:
            return cls(
                id=record["id"],
                group_id=record["group_id"],
                premise=record["premise"],
                hypothesis=record["hypothesis"],
                label=Label(record["label"]),
                category=record["category"],
                source_abstract_id=record.get("source_abstract_id", ""),
            )
        except (KeyError, ValueError) as exc:
            raise SchemaViolation(line, f"bad instance record: {exc}") from exc


@dataclass(frozen=True)
class InstanceGroup:
    """All hypotheses derived from one source conclusion."""

    group_id: str
    premise: str
    positive_hypothesis: str
    negatives: tuple[tuple[str, str], ...] = ()  # (category label, hypothesis)
    applicable: tuple[str, ...] = ()
    source_abstract_id: str = ""

    def __post_init__(self):
        if not self.positive_hypothesis:
            raise EmptyGroup(f"group {self.group_id!r} has no positive hypothesis")
        for category, _ in self.negatives:
            kind_from_label(category)

    def applicable_kinds(self) -> tuple[str, ...]:
        if self.applicable:
            return self.applicable
        seen = {"SEN", "SEP"}
        seen.update(category for category, _ in self.negatives)
        return tuple(sorted(seen))


@dataclass(frozen=True)
class SplitPolicy:
    """Per-group split assignment plus the train emission rules."""

    assignment: Mapping[str, str]
    balanced_cap: int | None = None

    def __post_init__(self):
        for group_id, split in self.assignment.items():
            if split not in SPLITS:
                raise ValueError(f"group {group_id!r} assigned to unknown split {split!r}")

    @staticmethod
    def hash_assignment(
        group_ids: Iterable[str],
        ratios: tuple[float, float, float] = (0.7, 0.15, 0.15),
        seed: int | str = 0,
    ) -> dict[str, str]:
        """Stable pseudo-random split assignment from a group-id hash."""
        if abs(sum(ratios) - 1.0) > 1e-9:
            raise ValueError("split ratios must sum to 1")
        out = {}
        for group_id in group_ids:
            digest = hashlib.sha256(f"{seed}:{group_id}".encode("utf-8")).digest()
            point = int.from_bytes(digest[:8], "big") / 2**64
            if point < ratios[0]:
                out[group_id] = "train"
            elif point < ratios[0] + ratios[1]:
                out[group_id] = "dev"
            else:
                out[group_id] = "test"
        return out


@dataclass
class DatasetStats:
    """Per-split category counts, unique group counts, and the
    applicability histogram over groups."""

    counts: dict[str, dict[str, int]] = field(
        default_factory=lambda: {s: {} for s in SPLITS}
    )
    unique_groups: dict[str, int] = field(default_factory=lambda: dict.fromkeys(SPLITS, 0))
    applicability: dict[int, float] = field(default_factory=dict)

    def total(self, split: str) -> int:
        return sum(self.counts[split].values())

    def negatives_total(self, split: str) -> int:
        return sum(n for c, n in self.counts[split].items() if c != POSITIVE_CATEGORY)

    def to_dict(self) -> dict:
        return {
            "counts": {s: dict(sorted(self.counts[s].items())) for s in SPLITS},
            "totals": {s: self.total(s) for s in SPLITS},
            "negative_totals": {s: self.negatives_total(s) for s in SPLITS},
            "unique_groups": dict(self.unique_groups),
            "applicability_histogram": {
                str(k): v for k, v in sorted(self.applicability.items())
            },
        }

    def render_table(self) -> str:
        rows = [POSITIVE_CATEGORY, *CATEGORY_ORDER]
        header = f"{'category':<12}" + "".join(f"{s:>8}" for s in SPLITS)
        lines = [header]
        for category in rows:
            cells = [self.counts[s].get(category, 0) for s in SPLITS]
            if category != POSITIVE_CATEGORY and not any(cells):
                continue
            lines.append(f"{category:<12}" + "".join(f"{c:>8}" for c in cells))
        lines.append(
            f"{'total':<12}" + "".join(f"{self.total(s):>8}" for s in SPLITS)
        )
        lines.append(
            f"{'unique':<12}"
            + "".join(f"{self.unique_groups.get(s, 0):>8}" for s in SPLITS)
        )
        return "\n".join(lines)


def applicability_histogram(groups: Sequence[InstanceGroup]) -> dict[int, float]:
    """Fractions of groups by number of applicable perturbation kinds."""
    if not groups:
        return {}
    buckets: dict[int, int] = {}
    for group in groups:
        n = len(group.applicable_kinds())
        buckets[n] = buckets.get(n, 0) + 1
    total = len(groups)
    return {n: count / total for n, count in sorted(buckets.items())}


def _group_rng(seed: int | str, group_id: str, purpose: str) -> random.Random:
    return random.Random(f"{seed}:{purpose}:{group_id}")


def assemble(
    groups: Sequence[InstanceGroup],
    policy: SplitPolicy,
    seed: int | str = 0,
) -> tuple[list[NLIInstance], DatasetStats]:
    """Emit instances for every group under the policy, plus statistics.

    Output order is a stable sort by (group id, category, id). Negatives
    string-equal to their group's positive are never emitted.
    """
    instances: list[NLIInstance] = []
    stats = DatasetStats()
    groups_by_split: dict[str, list[InstanceGroup]] = {s: [] for s in SPLITS}

    for group in sorted(groups, key=lambda g: g.group_id):
        split = policy.assignment.get(group.group_id)
        if split is None:
            raise SchemaViolation(0, f"group {group.group_id!r} has no split assignment")
        groups_by_split[split].append(group)
        emitted: list[tuple[str, str]] = []
        negatives = [
            (category, hypothesis)
            for category, hypothesis in group.negatives
            if hypothesis != group.positive_hypothesis
        ]
        if split == "train":
            rule_negs = [n for n in negatives if n[0] in RULE_LABELS]
            gen_negs = [n for n in negatives if n[0] in GENERATION_LABELS]
            if rule_negs:
                pick = _group_rng(seed, group.group_id, "train-pick").choice(rule_negs)
                emitted.append(pick)
            emitted.extend(gen_negs)
        else:
            emitted.extend(negatives)

        instances.append(
            NLIInstance(
                id=f"{group.group_id}:pos",
                group_id=group.group_id,
                premise=group.premise,
                hypothesis=group.positive_hypothesis,
                label=Label.ENTAILED,
                category=POSITIVE_CATEGORY,
                source_abstract_id=group.source_abstract_id,
            )
        )
        per_category_counter: dict[str, int] = {}
        for category, hypothesis in emitted:
            n = per_category_counter.get(category, 0)
            per_category_counter[category] = n + 1
            suffix = f":{n}" if n else ""
            instances.append(
                NLIInstance(
                    id=f"{group.group_id}:{category}{suffix}",
                    group_id=group.group_id,
                    premise=group.premise,
                    hypothesis=hypothesis,
                    label=Label.NOT_ENTAILED,
                    category=category,
                    source_abstract_id=group.source_abstract_id,
                )
            )

    if policy.balanced_cap is not None:
        instances = _apply_train_cap(instances, policy, seed)

    split_of = policy.assignment
    instances.sort(key=lambda inst: (inst.group_id, inst.category, inst.id))
    for inst in instances:
        split = split_of[inst.group_id]
        bucket = stats.counts[split]
        bucket[inst.category] = bucket.get(inst.category, 0) + 1
    for split in SPLITS:
        stats.unique_groups[split] = len(groups_by_split[split])
    stats.applicability = applicability_histogram(list(groups))
    return instances, stats


def _apply_train_cap(
    instances: list[NLIInstance], policy: SplitPolicy, seed: int | str
) -> list[NLIInstance]:
    cap = policy.balanced_cap
    assert cap is not None
    by_category: dict[str, list[NLIInstance]] = {}
    for inst in instances:
        if policy.assignment[inst.group_id] == "train" and inst.category in RULE_LABELS:
            by_category.setdefault(inst.category, []).append(inst)
    dropped: set[str] = set()
    for category, bucket in sorted(by_category.items()):
        if len(bucket) <= cap:
            continue
        rng = random.Random(f"{seed}:cap:{category}")
        keep = set(rng.sample(range(len(bucket)), cap))
        dropped.update(
            inst.id for i, inst in enumerate(bucket) if i not in keep
        )
    return [inst for inst in instances if inst.id not in dropped]


# --- line-delimited instance files ------------------------------------------


def write_instances(instances: Iterable[NLIInstance], path: str | Path) -> int:
    count = 0
    with Path(path).open("w", encoding="utf-8") as handle:
        for inst in instances:
            handle.write(json.dumps(inst.to_record(), sort_keys=True) + "\n")
            count += 1
    return count


def read_instances(path: str | Path) -> list[NLIInstance]:
    out = []
    with Path(path).open("r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaViolation(line_no, f"invalid JSON: {exc.msg}") from exc
            out.append(NLIInstance.from_record(record, line_no))
    return out
