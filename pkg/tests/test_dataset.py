from __future__ import annotations

import json
import random

import pytest

from mechnli.dataset import (
    POSITIVE_CATEGORY,
    DatasetStats,
    InstanceGroup,
    Label,
    NLIInstance,
    SplitPolicy,
    applicability_histogram,
    assemble,
    read_instances,
    write_instances,
)
from mechnli.errors import EmptyGroup, SchemaViolation


def make_group(
    group_id: str,
    categories: tuple[str, ...] = ("SEN", "SEP"),
    premise: str = "Premise text here.",
) -> InstanceGroup:
    negatives = tuple(
        (category, f"neg {category} hypothesis for {group_id}")
        for category in categories
    )
    return InstanceGroup(
        group_id=group_id,
        premise=premise,
        positive_hypothesis=f"positive hypothesis for {group_id}",
        negatives=negatives,
        source_abstract_id=group_id,
    )


def _serialize(instances) -> bytes:
    return "\n".join(
        json.dumps(i.to_record(), sort_keys=True) for i in instances
    ).encode()


def test_train_group_emits_exactly_one_rule_negative():
    group = make_group("g1", ("SEN", "SEP", "VNeg"))
    policy = SplitPolicy(assignment={"g1": "train"})
    instances, _ = assemble([group], policy, seed=3)
    assert len(instances) == 2
    labels = {i.category for i in instances}
    assert POSITIVE_CATEGORY in labels
    assert len(labels - {POSITIVE_CATEGORY}) == 1


def test_dev_group_emits_all_negatives():
    group = make_group("g1", ("SEN", "SEP", "VNeg"))
    policy = SplitPolicy(assignment={"g1": "dev"})
    instances, _ = assemble([group], policy, seed=3)
    assert len(instances) == 4
    assert {i.category for i in instances} == {POSITIVE_CATEGORY, "SEN", "SEP", "VNeg"}


def test_train_group_keeps_all_generation_negatives():
    group = make_group("g1", ("SEN", "SEP", "GEN", "GEN-ND"))
    policy = SplitPolicy(assignment={"g1": "train"})
    instances, _ = assemble([group], policy, seed=3)
    categories = sorted(i.category for i in instances)
    assert categories.count("GEN") == 1 and categories.count("GEN-ND") == 1
    rule_based = [c for c in categories if c in ("SEN", "SEP")]
    assert len(rule_based) == 1


def test_every_group_has_exactly_one_positive():
    groups = [make_group(f"g{i}", ("SEN", "SEP", "SN")) for i in range(20)]
    assignment = {g.group_id: ("train" if i % 2 else "dev") for i, g in enumerate(groups)}
    instances, _ = assemble(groups, SplitPolicy(assignment=assignment), seed=0)
    by_group: dict[str, list[NLIInstance]] = {}
    for inst in instances:
        by_group.setdefault(inst.group_id, []).append(inst)
    for members in by_group.values():
        positives = [m for m in members if m.category == POSITIVE_CATEGORY]
        assert len(positives) == 1
        assert positives[0].label is Label.ENTAILED
        for m in members:
            if m.category != POSITIVE_CATEGORY:
                assert m.label is Label.NOT_ENTAILED


def test_negative_equal_to_positive_never_emitted():
    group = InstanceGroup(
        group_id="g1",
        premise="p",
        positive_hypothesis="same text",
        negatives=(("SEN", "same text"), ("SEP", "different text")),
    )
    instances, _ = assemble([group], SplitPolicy(assignment={"g1": "dev"}), seed=0)
    hypotheses = [i.hypothesis for i in instances if i.label is Label.NOT_ENTAILED]
    assert hypotheses == ["different text"]


def test_balanced_cap_applies_to_rule_categories_only():
    groups = [make_group(f"g{i:04d}", ("SEN", "GEN")) for i in range(40)]
    assignment = {g.group_id: "train" for g in groups}
    policy = SplitPolicy(assignment=assignment, balanced_cap=10)
    instances, stats = assemble(groups, policy, seed=1)
    assert stats.counts["train"]["SEN"] == 10
    assert stats.counts["train"]["GEN"] == 40  # generation kinds are exempt
    assert stats.counts["train"][POSITIVE_CATEGORY] == 40


def test_balanced_cap_noop_when_under_cap():
    groups = [make_group(f"g{i}", ("SEN",)) for i in range(5)]
    assignment = {g.group_id: "train" for g in groups}
    capped, _ = assemble(groups, SplitPolicy(assignment=assignment, balanced_cap=500), seed=1)
    uncapped, _ = assemble(groups, SplitPolicy(assignment=assignment), seed=1)
    assert _serialize(capped) == _serialize(uncapped)


def test_assembly_reproducible_and_order_independent():
    groups = [make_group(f"g{i}", ("SEN", "SEP", "VNeg", "LPR")) for i in range(30)]
    assignment = SplitPolicy.hash_assignment([g.group_id for g in groups], seed=5)
    policy = SplitPolicy(assignment=assignment, balanced_cap=8)
    first, _ = assemble(groups, policy, seed=7)
    second, _ = assemble(groups, policy, seed=7)
    assert _serialize(first) == _serialize(second)
    shuffled = list(groups)
    random.Random(0).shuffle(shuffled)
    third, _ = assemble(shuffled, policy, seed=7)
    assert _serialize(first) == _serialize(third)
    different, _ = assemble(groups, policy, seed=8)
    assert _serialize(first) != _serialize(different)


def test_output_sorted_by_group_and_category():
    groups = [make_group(f"g{i}", ("SEP", "SEN")) for i in range(5)]
    assignment = {g.group_id: "dev" for g in groups}
    instances, _ = assemble(groups, SplitPolicy(assignment=assignment), seed=0)
    keys = [(i.group_id, i.category, i.id) for i in instances]
    assert keys == sorted(keys)


def test_missing_assignment_is_schema_violation():
    group = make_group("g1")
    with pytest.raises(SchemaViolation):
        assemble([group], SplitPolicy(assignment={}), seed=0)


def test_group_requires_positive():
    with pytest.raises(EmptyGroup):
        InstanceGroup(group_id="g", premise="p", positive_hypothesis="")


def test_instance_label_category_coupling():
    with pytest.raises(ValueError):
        NLIInstance(
            id="x",
            group_id="g",
            premise="p",
            hypothesis="h",
            label=Label.ENTAILED,
            category="SEN",
        )
    with pytest.raises(ValueError):
        NLIInstance(
            id="x",
            group_id="g",
            premise="p",
            hypothesis="h",
            label=Label.NOT_ENTAILED,
            category=POSITIVE_CATEGORY,
        )


def test_split_policy_validation_and_hash_assignment():
    with pytest.raises(ValueError):
        SplitPolicy(assignment={"g": "validation"})
    ids = [f"g{i}" for i in range(2000)]
    assignment = SplitPolicy.hash_assignment(ids, ratios=(0.7, 0.15, 0.15), seed=1)
    assert assignment == SplitPolicy.hash_assignment(ids, ratios=(0.7, 0.15, 0.15), seed=1)
    counts = {s: 0 for s in ("train", "dev", "test")}
    for split in assignment.values():
        counts[split] += 1
    assert 0.6 < counts["train"] / 2000 < 0.8
    assert 0.1 < counts["dev"] / 2000 < 0.2
    with pytest.raises(ValueError):
        SplitPolicy.hash_assignment(ids, ratios=(0.5, 0.2, 0.2))


def test_stats_mimic_published_positive_totals():
    # 8489 / 3000 / 2000 groups -> 13489 positives across the three splits.
    sizes = {"train": 8489, "dev": 3000, "test": 2000}
    groups = []
    assignment = {}
    n = 0
    for split, size in sizes.items():
        for _ in range(size):
            group_id = f"g{n:05d}"
            groups.append(make_group(group_id))
            assignment[group_id] = split
            n += 1
    instances, stats = assemble(groups, SplitPolicy(assignment=assignment), seed=0)
    positives = sum(stats.counts[s][POSITIVE_CATEGORY] for s in sizes)
    assert positives == 13489
    assert stats.unique_groups == {"train": 8489, "dev": 3000, "test": 2000}
    for split in sizes:
        assert stats.total(split) == sum(stats.counts[split].values())


def test_applicability_histogram_sen_sep_only():
    groups = [make_group(f"g{i}", ("SEN", "SEP")) for i in range(10)]
    assert applicability_histogram(groups) == {2: 1.0}


def test_applicability_histogram_tuned_fractions():
    # 1000 groups tuned to the observed dev-set distribution: 5.7% with only
    # the two universal kinds, 35.1% with three, 39% with four, a 0.1% tail
    # at eight, and nothing at nine.
    spec = {2: 57, 3: 351, 4: 390, 5: 150, 6: 40, 7: 11, 8: 1}
    all_kinds = ("SEN", "SEP", "SREO", "VNeg", "SN", "LPR", "SRE", "GEN-ND", "GEN")
    groups = []
    n = 0
    for size, count in spec.items():
        for _ in range(count):
            groups.append(make_group(f"g{n:04d}", all_kinds[:size]))
            n += 1
    histogram = applicability_histogram(groups)
    assert histogram[2] == pytest.approx(0.057)
    assert histogram[3] == pytest.approx(0.351)
    assert histogram[4] == pytest.approx(0.390)
    assert histogram[8] == pytest.approx(0.001)
    assert 9 not in histogram
    assert sum(histogram.values()) == pytest.approx(1.0)


def test_stats_render_table_lists_categories():
    groups = [make_group("g1", ("SEN", "SEP"))]
    _, stats = assemble([groups[0]], SplitPolicy(assignment={"g1": "dev"}), seed=0)
    table = stats.render_table()
    assert "SEN" in table and "Positive" in table and "unique" in table


def test_instance_file_roundtrip(tmp_path):
    groups = [make_group(f"g{i}", ("SEN", "SN")) for i in range(4)]
    assignment = {g.group_id: "test" for g in groups}
    instances, _ = assemble(groups, SplitPolicy(assignment=assignment), seed=0)
    path = tmp_path / "instances.jsonl"
    count = write_instances(instances, path)
    assert count == len(instances)
    loaded = read_instances(path)
    assert loaded == instances


def test_read_instances_rejects_bad_records(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id": "x"}\n', encoding="utf-8")
    with pytest.raises(SchemaViolation):
        read_instances(path)
