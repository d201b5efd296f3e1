from __future__ import annotations

import itertools
import random

import numpy as np
import pytest

from mechnli.corpus import parse_marked
from mechnli.decoding import (
    Clause,
    ConstraintSet,
    DecodeResult,
    DecoderConfig,
    Literal,
    Polarity,
    build_ng_constraints,
    build_sen_constraints,
    build_sre_constraints,
    decode,
)
from mechnli.corpus import Role
from mechnli.errors import DegenerateReplacement, NoHypothesis


class TableScorer:
    """Deterministic first-order toy scorer: a fixed row per last token."""

    def __init__(self, tokens: tuple[str, ...], rng: random.Random):
        self.eos = "</s>"
        self._vocab = tokens + (self.eos,)
        self._rows: dict[str | None, np.ndarray] = {}
        for key in (None, *self._vocab):
            weights = np.array([rng.uniform(0.05, 1.0) for _ in self._vocab])
            self._rows[key] = np.log(weights / weights.sum())

    def vocab(self) -> tuple[str, ...]:
        return self._vocab

    def logprobs(self, prefix) -> np.ndarray:
        key = prefix[-1] if len(prefix) else None
        return self._rows[key if key in self._rows else None]


def oracle_best(
    scorer, constraints: ConstraintSet, min_len: int, max_len: int, prompt=()
) -> tuple[float, tuple[str, ...]] | None:
    """Exhaustive argmax over constraint-satisfying sequences.

    Enumerates every sequence of non-eos tokens with length in
    [min_len, max_len], scores it step by step including the final eos,
    and keeps the best fully satisfying one (ties broken toward the
    earlier token-id sequence, matching the decoder's tie rule).
    """
    vocab = scorer.vocab()
    non_eos = [t for t in vocab if t != scorer.eos]
    eos_index = vocab.index(scorer.eos)
    index = {t: i for i, t in enumerate(vocab)}
    prompt = tuple(prompt)
    best: tuple[float, tuple[int, ...], tuple[str, ...]] | None = None

    def visit(tokens: tuple[str, ...], ids: tuple[int, ...], score: float):
        nonlocal best
        if min_len <= len(tokens) <= max_len:
            _, fully = constraints.check(tokens)
            if fully:
                total = score + float(scorer.logprobs(prompt + tokens)[eos_index])
                key = (total, ids)
                if best is None or total > best[0] + 1e-12 or (
                    abs(total - best[0]) <= 1e-12 and ids < best[1]
                ):
                    best = (total, ids, tokens)
        if len(tokens) == max_len:
            return
        row = scorer.logprobs(prompt + tokens)
        for t in non_eos:
            visit(tokens + (t,), ids + (index[t],), score + float(row[index[t]]))

    visit((), (), 0.0)
    if best is None:
        return None
    return best[0], best[2]


def exhaustive_config(constraints: ConstraintSet, max_len: int) -> DecoderConfig:
    # Wide enough that nothing is ever pruned: the search is exhaustive and
    # must therefore match the oracle exactly.
    return DecoderConfig(
        beam_size=10**6,
        prune_factor=10**6,
        sat_tolerance=len(constraints.clauses) + 1,
        ngram_block=max_len + 1,
        min_len=0,
        max_len=max_len,
    )


def random_case(rng: random.Random):
    n_tokens = rng.randint(2, 5)  # plus eos: |V| <= 6
    tokens = tuple(f"t{i}" for i in range(n_tokens))
    scorer = TableScorer(tokens, rng)
    max_len = rng.randint(3, 5)
    min_len = rng.randint(0, 2)
    clauses = []
    for _ in range(rng.randint(1, 3)):
        literals = []
        for _ in range(rng.randint(1, 2)):
            phrase = tuple(rng.choices(tokens, k=rng.randint(1, 2)))
            polarity = (
                Polarity.MUST_NOT_APPEAR if rng.random() < 0.3 else Polarity.MUST_APPEAR
            )
            literals.append(Literal(phrase=phrase, polarity=polarity))
        clauses.append(Clause(literals=tuple(literals)))
    constraints = ConstraintSet(clauses=tuple(clauses))
    return scorer, constraints, min_len, max_len


def run_equivalence_cases(n_cases: int, seed: int = 2024) -> tuple[int, int]:
    """Compare decode against the oracle on random cases.

    Returns (checked, satisfiable) counts; raises on any mismatch or any
    forbidden-phrase violation in any emitted hypothesis.
    """
    rng = random.Random(seed)
    satisfiable = 0
    for case in range(n_cases):
        scorer, constraints, min_len, max_len = random_case(rng)
        config = DecoderConfig(
            beam_size=10**6,
            prune_factor=10**6,
            sat_tolerance=len(constraints.clauses) + 1,
            ngram_block=max_len + 1,
            min_len=min_len,
            max_len=max_len,
        )
        expected = oracle_best(scorer, constraints, min_len, max_len)
        try:
            results = decode(scorer, constraints, config)
        except NoHypothesis:
            results = []
        forbidden = constraints.negative_phrases()
        for result in results:
            for phrase in forbidden:
                n = len(phrase)
                present = any(
                    result.tokens[i : i + n] == phrase
                    for i in range(len(result.tokens) - n + 1)
                )
                assert not present, f"case {case}: forbidden phrase emitted"
        top_satisfied = next((r for r in results if r.fully_satisfied), None)
        if expected is None:
            assert top_satisfied is None, f"case {case}: oracle found none, decoder did"
        else:
            satisfiable += 1
            assert top_satisfied is not None, f"case {case}: decoder missed a solution"
            assert top_satisfied.model_score == pytest.approx(expected[0], abs=1e-9), (
                f"case {case}: score mismatch"
            )
            assert results[0] is top_satisfied, f"case {case}: satisfied not ranked first"
    return n_cases, satisfiable


def test_oracle_equivalence_sample():
    checked, satisfiable = run_equivalence_cases(60)
    assert checked == 60
    assert satisfiable >= 10  # the generator must exercise the satisfiable path


def test_empty_constraints_equal_unconstrained_argmax():
    rng = random.Random(7)
    for _ in range(10):
        scorer, _, _, max_len = random_case(rng)
        empty = ConstraintSet()
        expected = oracle_best(scorer, empty, 0, max_len)
        results = decode(scorer, empty, exhaustive_config(empty, max_len))
        assert results[0].fully_satisfied
        assert results[0].model_score == pytest.approx(expected[0], abs=1e-9)


def test_forbidding_low_probability_token_keeps_argmax():
    rng = random.Random(13)
    scorer, _, _, _ = random_case(rng)
    empty = ConstraintSet()
    unconstrained = decode(scorer, empty, exhaustive_config(empty, 4))
    absent = tuple(t for t in scorer.vocab() if t not in unconstrained[0].tokens)[:1]
    assert absent
    constraints = ConstraintSet(
        clauses=(
            Clause(literals=(Literal(phrase=absent, polarity=Polarity.MUST_NOT_APPEAR),)),
        )
    )
    constrained = decode(scorer, constraints, exhaustive_config(constraints, 4))
    assert constrained[0].tokens == unconstrained[0].tokens
    assert constrained[0].model_score == pytest.approx(unconstrained[0].model_score)


def test_beam_results_never_violate_negative_constraints():
    # Same hard guarantee as the oracle check, but under tight, lossy beams.
    rng = random.Random(99)
    for _ in range(100):
        scorer, constraints, min_len, max_len = random_case(rng)
        config = DecoderConfig(
            beam_size=2,
            prune_factor=3,
            sat_tolerance=len(constraints.clauses) + 1,
            ngram_block=max_len + 1,
            min_len=min_len,
            max_len=max_len,
        )
        try:
            results = decode(scorer, constraints, config)
        except NoHypothesis:
            continue
        forbidden = constraints.negative_phrases()
        for result in results:
            for phrase in forbidden:
                n = len(phrase)
                assert not any(
                    result.tokens[i : i + n] == phrase
                    for i in range(len(result.tokens) - n + 1)
                )


def test_ngram_block_prevents_repeats():
    rng = random.Random(5)
    scorer = TableScorer(("a", "b", "c"), rng)
    config = DecoderConfig(
        beam_size=16, prune_factor=48, sat_tolerance=1, ngram_block=2, min_len=6, max_len=8
    )
    results = decode(scorer, ConstraintSet(), config)
    for result in results:
        grams = [result.tokens[i : i + 2] for i in range(len(result.tokens) - 1)]
        assert len(grams) == len(set(grams)), result.tokens


def test_widening_search_never_lowers_top_result():
    rng = random.Random(31)
    for _ in range(8):
        scorer, constraints, min_len, max_len = random_case(rng)
        previous = None
        for width in (2, 4, 16, 256):
            config = DecoderConfig(
                beam_size=width,
                prune_factor=width,
                sat_tolerance=len(constraints.clauses) + 1,
                ngram_block=max_len + 1,
                min_len=min_len,
                max_len=max_len,
            )
            try:
                top = decode(scorer, constraints, config)[0]
                key = (int(top.fully_satisfied), top.model_score)
            except NoHypothesis:
                key = (-1, float("-inf"))
            if previous is not None:
                assert key >= (previous[0], previous[1] - 1e-9)
            previous = key


def test_no_hypothesis_when_everything_is_forbidden():
    rng = random.Random(3)
    scorer = TableScorer(("a", "b"), rng)
    constraints = ConstraintSet(
        clauses=(
            Clause(literals=(Literal(phrase=("a",), polarity=Polarity.MUST_NOT_APPEAR),)),
            Clause(literals=(Literal(phrase=("b",), polarity=Polarity.MUST_NOT_APPEAR),)),
        )
    )
    config = DecoderConfig(
        beam_size=8, prune_factor=8, sat_tolerance=3, ngram_block=10, min_len=2, max_len=4
    )
    with pytest.raises(NoHypothesis):
        decode(scorer, constraints, config)


def test_min_len_respected():
    rng = random.Random(17)
    scorer = TableScorer(("a", "b", "c"), rng)
    config = DecoderConfig(
        beam_size=8, prune_factor=16, sat_tolerance=1, ngram_block=9, min_len=3, max_len=6
    )
    results = decode(scorer, ConstraintSet(), config)
    assert all(3 <= len(r.tokens) <= 6 for r in results)


def test_signature_grouping_keeps_satisfied_candidate_alive():
    # With beam_size 1 and a rare required phrase, grouping by satisfaction
    # signature must still surface a fully satisfied hypothesis because the
    # satisfied group's best survives selection.
    rng = random.Random(23)
    scorer = TableScorer(("a", "b", "c"), rng)
    constraints = ConstraintSet(
        clauses=(Clause(literals=(Literal(phrase=("c", "c")),)),)
    )
    config = DecoderConfig(
        beam_size=2, prune_factor=64, sat_tolerance=2, ngram_block=9, min_len=2, max_len=5
    )
    results = decode(scorer, constraints, config)
    assert any(r.fully_satisfied for r in results)


# --- satisfaction checking ----------------------------------------------------


def test_check_counts_and_full_satisfaction():
    constraints = ConstraintSet(
        clauses=(
            Clause(literals=(Literal(phrase=("a", "b")),)),
            Clause(
                literals=(
                    Literal(phrase=("z",)),
                    Literal(phrase=("q",), polarity=Polarity.MUST_NOT_APPEAR),
                )
            ),
        )
    )
    assert constraints.check(("a", "b", "c")) == (2, True)
    assert constraints.check(("a", "c", "b")) == (1, False)
    assert constraints.check(("a", "b", "q")) == (1, False)  # q violates
    assert constraints.check(("a", "b", "z", "q")) == (2, False)  # satisfied but violated


def test_decoder_config_validation():
    with pytest.raises(ValueError):
        DecoderConfig(beam_size=0)
    with pytest.raises(ValueError):
        DecoderConfig(min_len=10, max_len=5)
    with pytest.raises(ValueError):
        DecoderConfig(sat_tolerance=-1)


# --- constraint builders ------------------------------------------------------


def test_build_sen_constraints_swaps_roles(hormone_conclusion):
    constraints = build_sen_constraints(hormone_conclusion)
    phrases = [c.literals[0].phrase for c in constraints.clauses]
    assert ("<re>", "aba", "<er>") in phrases
    assert ("<el>", "ph", "<le>") in phrases
    assert all(
        lit.polarity is Polarity.MUST_APPEAR
        for c in constraints.clauses
        for lit in c.literals
    )
    satisfied, fully = constraints.check(
        tuple("we saw <re> aba <er> rise with <el> ph <le> today".split())
    )
    assert fully and satisfied == 2


def test_build_sen_constraints_mirrored():
    c = parse_marked("<re> alpha <er> binds <el> beta <le>")
    constraints = build_sen_constraints(c)
    phrases = {cl.literals[0].phrase for cl in constraints.clauses}
    assert phrases == {("<re>", "beta", "<er>"), ("<el>", "alpha", "<le>")}


def test_build_sre_constraints_replaces_one_role(hormone_conclusion):
    constraints = build_sre_constraints(hormone_conclusion, "ATP", Role.REGULATOR)
    phrases = {cl.literals[0].phrase for cl in constraints.clauses}
    assert phrases == {("<re>", "atp", "<er>"), ("<el>", "aba", "<le>")}
    satisfied, fully = constraints.check(
        tuple("<re> atp <er> grows and <el> aba <le> follows".split())
    )
    assert fully
    _, not_fully = constraints.check(tuple("<re> ph <er> and <el> aba <le>".split()))
    assert not not_fully


def test_build_sre_degenerate_replacement(hormone_conclusion):
    with pytest.raises(DegenerateReplacement):
        build_sre_constraints(hormone_conclusion, "pH", Role.REGULATOR)
    with pytest.raises(DegenerateReplacement):
        build_sre_constraints(hormone_conclusion, "aba", Role.REGULATED)


def test_build_ng_constraints_forbids_original_roles(hormone_conclusion):
    constraints = build_ng_constraints(hormone_conclusion)
    assert set(constraints.negative_phrases()) == {
        ("<re>", "ph", "<er>"),
        ("<el>", "aba", "<le>"),
    }
    _, fully = constraints.check(tuple("nothing marked here".split()))
    assert fully
    _, fully = constraints.check(tuple("<re> ph <er> appears".split()))
    assert not fully


def test_constraint_serialization_roundtrip(hormone_conclusion):
    for constraints in (
        build_sen_constraints(hormone_conclusion),
        build_ng_constraints(hormone_conclusion),
    ):
        assert ConstraintSet.from_json(constraints.to_json()) == constraints
