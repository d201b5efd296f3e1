from __future__ import annotations

import pytest

from mechnli.corpus import Abstract, Role, abstract_from_record, read_corpus
from mechnli.extract import (
    DEFAULT_PHRASES,
    ExtractionResult,
    PhraseTable,
    find_conclusion,
    split_abstract,
)

from conftest import (
    HORMONE_CONCLUSION_MARKED,
    HORMONE_SUPPORT,
    abstract_record,
    entity_field,
    synthetic_corpus_records,
)


def _abstract_with_final(final: str, n_support: int = 3) -> Abstract:
    sentences = [f"Observation number {i} was recorded." for i in range(n_support)]
    sentences.append(final)
    return abstract_from_record({"id": "t", "sentences": sentences, "entities": []})


def test_default_table_has_13_phrases():
    assert len(DEFAULT_PHRASES) == 13
    assert PhraseTable().phrases == DEFAULT_PHRASES


@pytest.mark.parametrize("phrase", DEFAULT_PHRASES)
def test_every_default_phrase_matches(phrase):
    abstract = _abstract_with_final(f"Overall, {phrase} X binds Y here.")
    hit = find_conclusion(abstract)
    assert hit is not None
    index, matched = hit
    assert index == len(abstract.sentences) - 1
    assert matched in DEFAULT_PHRASES


def test_yeast_style_final_sentence_matches():
    abstract = _abstract_with_final("It was concluded that uracil exit is active.")
    assert find_conclusion(abstract) == (3, "it was concluded that")


def test_no_phrase_returns_none():
    abstract = _abstract_with_final("We measured pH.")
    assert find_conclusion(abstract) is None


def test_match_is_case_insensitive():
    abstract = _abstract_with_final("WE CONCLUDE X drives Y.")
    assert find_conclusion(abstract) == (3, "we conclude")
    # With "that" present, the earlier table entry wins.
    abstract = _abstract_with_final("WE CONCLUDE that X drives Y.")
    assert find_conclusion(abstract) == (3, "we conclude that")


def test_only_final_sentence_is_tested():
    sentences = [
        "We conclude that A acts on B in this assay.",
        "More measurements were taken afterwards.",
        "Even more measurements were taken afterwards.",
        "The data were archived.",
    ]
    abstract = abstract_from_record({"id": "t", "sentences": sentences, "entities": []})
    assert find_conclusion(abstract) is None


def test_first_phrase_in_table_order_wins():
    table = PhraseTable(phrases=("we conclude", "we conclude that"))
    abstract = _abstract_with_final("Here we conclude that A binds B.")
    assert find_conclusion(abstract, table) == (3, "we conclude")


def test_phrase_table_validation():
    with pytest.raises(ValueError):
        PhraseTable(phrases=())
    with pytest.raises(ValueError):
        PhraseTable(phrases=("We Conclude",))
    with pytest.raises(ValueError):
        PhraseTable(phrases=("we conclude", "we conclude"))


def test_phrase_table_from_file(tmp_path):
    path = tmp_path / "phrases.txt"
    path.write_text("We Conclude That\n\nin summary\n", encoding="utf-8")
    table = PhraseTable.from_file(path)
    assert table.phrases == ("we conclude that", "in summary")


# --- split_abstract -----------------------------------------------------------


def _hormone_abstract() -> Abstract:
    from mechnli.corpus import parse_marked

    conclusion = parse_marked(HORMONE_CONCLUSION_MARKED)
    sentences = list(HORMONE_SUPPORT) + [conclusion.plain_text]
    entities = [
        entity_field(sentences, 0, "abscisic acid", "chemical"),
        entity_field(sentences, 1, "ABA", "chemical"),
        entity_field(sentences, 4, "methylamine", "chemical"),
        entity_field(sentences, 8, "pH", "chemical", role="regulator"),
        entity_field(sentences, 8, "ABA", "chemical", role="regulated"),
    ]
    return abstract_from_record(abstract_record("hormone", sentences, entities))


def test_split_hormone_abstract():
    abstract = _hormone_abstract()
    result = split_abstract(abstract)
    assert result is not None
    assert result.matched_phrase == "we conclude that"
    assert len(result.supporting.sentences) == len(HORMONE_SUPPORT)
    assert result.conclusion.plain_text == abstract.sentences[-1].text
    assert result.conclusion.regulator.surface == "pH"
    assert result.conclusion.regulated.surface == "ABA"


def test_split_partitions_sentences():
    abstract = _hormone_abstract()
    result = split_abstract(abstract)
    supporting_texts = [s.text for s in result.supporting.sentences]
    assert supporting_texts + [result.conclusion.plain_text] == [
        s.text for s in abstract.sentences
    ]


def test_split_below_min_bound_returns_none():
    sentences = ["One observation only.", "We conclude that A drives B."]
    entities = [
        entity_field(sentences, 1, "A", "chemical", role="regulator"),
        entity_field(sentences, 1, "B", "chemical", role="regulated"),
    ]
    abstract = abstract_from_record(abstract_record("small", sentences, entities))
    assert split_abstract(abstract, premise_bounds=(3, 15)) is None
    assert split_abstract(abstract, premise_bounds=(1, 15)) is not None


def test_split_requires_exactly_one_role_pair():
    sentences = [f"Filler sentence {i} here." for i in range(3)]
    sentences.append("We conclude that A drives B.")
    entities = [entity_field(sentences, 3, "A", "chemical", role="regulator")]
    abstract = abstract_from_record(abstract_record("noroles", sentences, entities))
    assert split_abstract(abstract) is None


def test_split_is_deterministic():
    abstract = _hormone_abstract()
    assert split_abstract(abstract) == split_abstract(abstract)


def test_synthetic_corpus_yields_91_extractions(corpus_100):
    abstracts, violations = read_corpus(corpus_100)
    assert not violations and len(abstracts) == 100
    results = [split_abstract(a) for a in abstracts]
    extracted = [r for r in results if r is not None]
    assert len(extracted) == 91
    for result in extracted:
        assert isinstance(result, ExtractionResult)
        assert result.conclusion.regulator.role is Role.REGULATOR
        assert all(m.role is Role.NONE for m in result.supporting.mentions)
