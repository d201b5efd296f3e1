"""Shared fixtures: two fully worked abstracts and synthetic corpus builders.

The "yeast" example is a nucleotide-export study (uracil regulated by a
proton gradient); the "hormone" example is a plant signaling study (ABA
and intracellular pH). Both mirror the structure of real entity-annotated
abstracts: pre-segmented sentences, typed mentions, and one regulator plus
one regulated mention on the final (conclusion) sentence.
"""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from mechnli.corpus import (
    Abstract,
    EntityMention,
    MarkedConclusion,
    Role,
    Sentence,
    SupportingSet,
    parse_marked,
)

YEAST_SUPPORT = (
    "The outflow of uracil from the yeast Saccharomyces cerevisiae is known to be "
    "relatively fast in certain circumstances, to be retarded by proton conductors "
    "and to occur in strains lacking a uracil proton symport.",
    "In the present work, it was shown that uracil exit from washed yeast cells is "
    "an active process, creating a uracil gradient of the order of -80 mV relative "
    "to the surrounding medium.",
    "Glucose accelerated uracil exit, while retarding its entry.",
    "DNP or sodium azide each lowered the gradient to about -30 mV, simultaneously "
    "increasing the rate of uracil entry.",
    "They also lowered cellular ATP content.",
    "Manipulation of the external ionic conditions governing delta mu H+ at the "
    "plasma membrane had no detectable effect on uracil transport in yeast "
    "preparations thoroughly depleted of ATP.",
)

YEAST_CONCLUSION_MARKED = (
    "It was concluded that <re> uracil <er> exit is probably not driven by the s "
    "<el> proton <le> gradient but may utilize ATP directly."
)

HORMONE_SUPPORT = (
    "We investigated whether intracellular pH (pH(i)) is a causal mediator in "
    "abscisic acid (ABA)-induced gene expression.",
    'We measured the change in pH(i) by a "null-point" method during stimulation of '
    "barley (Hordeum vulgare cv Himalaya) aleurone protoplasts with ABA and found "
    "that ABA induces an increase in pH(i) from 7.11 to 7.30 within 45 min after "
    "stimulation.",
    "This increase is inhibited by plasma membrane H(+)-ATPase inhibitors, which "
    "induce a decrease in pH(i), both in the presence and absence of ABA.",
    "This ABA-induced pH(i) increase precedes the expression of RAB-16 mRNA, as "
    "measured by northern analysis.",
    "ABA-induced pH(i) changes can be bypassed or clamped by addition of either the "
    "weak acids 5,5-dimethyl-2,4-oxazolidinedione and propionic acid, which decrease "
    "the pH(i), or the weak bases methylamine and ammonia, which increase the pH(i).",
    "Artificial pH(i) increases or decreases induced by weak bases or weak acids, "
    "respectively, do not induce RAB-16 mRNA expression.",
    "Clamping of the pH(i) at a high value with methylamine or ammonia treatment "
    "affected the ABA-induced increase of RAB-16 mRNA only slightly.",
    "However, inhibition of the ABA-induced pH(i) increase with weak acid or proton "
    "pump inhibitor treatments strongly inhibited the ABA-induced RAB-16 mRNA "
    "expression.",
)

HORMONE_CONCLUSION_MARKED = (
    "We conclude that, although the <el> ABA <le>-induced the <re> pH <er>(i) "
    "increase is correlated with and even precedes the induction of RAB-16 mRNA "
    "expression and is an essential component of the transduction pathway leading "
    "from the hormone to gene expression, it is not sufficient to cause such "
    "expression."
)


def span_of(text: str, surface: str, occurrence: int = 1) -> tuple[int, int]:
    start = -1
    for _ in range(occurrence):
        start = text.index(surface, start + 1)
    return start, start + len(surface)


def mention(
    sentences: tuple[str, ...],
    sentence_index: int,
    surface: str,
    type_label: str = "",
    role: Role = Role.NONE,
    occurrence: int = 1,
) -> EntityMention:
    start, end = span_of(sentences[sentence_index], surface, occurrence)
    return EntityMention(
        surface=surface,
        type_label=type_label,
        role=role,
        sentence_index=sentence_index,
        start=start,
        end=end,
    )


def supporting_set(
    texts: tuple[str, ...], mentions: tuple[EntityMention, ...] = ()
) -> SupportingSet:
    return SupportingSet(
        sentences=tuple(Sentence(i, t) for i, t in enumerate(texts)),
        mentions=mentions,
    )


def yeast_supporting() -> SupportingSet:
    specs = [
        (0, "uracil", "chemical", 1),
        (0, "proton", "chemical", 1),
        (1, "uracil", "chemical", 1),
        (2, "Glucose", "chemical", 1),
        (3, "DNP", "chemical", 1),
        (3, "sodium azide", "chemical", 1),
        (4, "ATP", "chemical", 1),
    ]
    mentions = tuple(
        mention(YEAST_SUPPORT, idx, surface, label, occurrence=occ)
        for idx, surface, label, occ in specs
    )
    return supporting_set(YEAST_SUPPORT, mentions)


def hormone_supporting() -> SupportingSet:
    specs = [
        (0, "abscisic acid", "chemical", 1),
        (1, "ABA", "chemical", 1),
        (4, "propionic acid", "chemical", 1),
        (4, "methylamine", "chemical", 1),
        (4, "ammonia", "chemical", 1),
        (3, "RAB-16 mRNA", "gene_product", 1),
    ]
    mentions = tuple(
        mention(HORMONE_SUPPORT, idx, surface, label, occurrence=occ)
        for idx, surface, label, occ in specs
    )
    return supporting_set(HORMONE_SUPPORT, mentions)


@pytest.fixture
def yeast_conclusion() -> MarkedConclusion:
    return parse_marked(YEAST_CONCLUSION_MARKED)


@pytest.fixture
def hormone_conclusion() -> MarkedConclusion:
    return parse_marked(HORMONE_CONCLUSION_MARKED)


def abstract_record(
    doc_id: str,
    sentences: list[str],
    entities: list[dict],
) -> dict:
    return {"id": doc_id, "sentences": sentences, "entities": entities}


def entity_field(
    sentences: list[str],
    sentence_index: int,
    surface: str,
    type_label: str = "",
    role: str | None = None,
    occurrence: int = 1,
) -> dict:
    start, end = span_of(sentences[sentence_index], surface, occurrence)
    return {
        "sentence": sentence_index,
        "start": start,
        "end": end,
        "type": type_label,
        "role": role,
    }


def synthetic_corpus_records(n_with_phrase: int = 91, n_without: int = 9) -> list[dict]:
    """A corpus where exactly ``n_with_phrase`` abstracts end in a cue phrase.

    Every phrase-bearing abstract also carries a valid regulator/regulated
    pair and a supporting set inside the default premise bounds, so the
    extraction count equals the phrase count.
    """
    from mechnli.extract import DEFAULT_PHRASES

    records = []
    for i in range(n_with_phrase):
        phrase = DEFAULT_PHRASES[i % len(DEFAULT_PHRASES)]
        support = [
            f"Compound A{i} was applied to cultured cells in assay {i}.",
            f"Measurements showed a shift of {10 + (i % 5)} units in marker B{i}.",
            f"Control samples with compound C{i} showed no shift.",
        ]
        conclusion = f"In summary, {phrase} alpha{i} increases beta{i} in this system."
        sentences = support + [conclusion]
        entities = [
            entity_field(sentences, 0, f"A{i}", "chemical"),
            entity_field(sentences, 1, f"B{i}", "gene_product"),
            entity_field(sentences, 2, f"C{i}", "chemical"),
            entity_field(sentences, 3, f"alpha{i}", "chemical", role="regulator"),
            entity_field(sentences, 3, f"beta{i}", "gene_product", role="regulated"),
        ]
        records.append(abstract_record(f"doc-{i:03d}", sentences, entities))
    for i in range(n_without):
        sentences = [
            f"Sample S{i} was incubated overnight at 37 degrees.",
            f"Gene G{i} expression was quantified by qPCR.",
            f"Levels of G{i} rose after treatment.",
            f"These observations describe the behaviour of G{i}.",
        ]
        records.append(abstract_record(f"doc-x{i:02d}", sentences, []))
    return records


def write_corpus(path: Path, records: list[dict]) -> Path:
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, sort_keys=True) + "\n")
    return path


@pytest.fixture
def corpus_100(tmp_path: Path) -> Path:
    return write_corpus(tmp_path / "corpus.jsonl", synthetic_corpus_records())
