"""Beam search under CNF lexical constraints.

A constraint set is a conjunction of clauses, each a disjunction of phrase
literals that must (or must not) occur contiguously in the generated token
sequence. The decoder enforces forbidden phrases as hard constraints,
rewards newly completed required clauses, keeps the best candidate of each
satisfaction signature so partially satisfied states survive pruning, and
drops candidates that fall too far behind the most-satisfied one.

Builders at the bottom construct the three constraint schemes used for
generation-based negatives: swapped entity roles, a replaced entity, and
forbidden original entities.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

from .corpus import MarkedConclusion, Role
from .errors import DegenerateReplacement, NoHypothesis
from .lm import SequenceScorer
from .tokenization import (
    REGULATED_CLOSE,
    REGULATED_OPEN,
    REGULATOR_CLOSE,
    REGULATOR_OPEN,
    tokenize,
)


class Polarity(Enum):
    MUST_APPEAR = "must_appear"
    MUST_NOT_APPEAR = "must_not_appear"


@dataclass(frozen=True)
class Literal:
    phrase: tuple[str, ...]
    polarity: Polarity = Polarity.MUST_APPEAR

    def __post_init__(self):
        if not self.phrase:
            raise ValueError("literal phrase is empty")

    @classmethod
    def from_text(cls, text: str, polarity: Polarity = Polarity.MUST_APPEAR) -> "Literal":
        return cls(phrase=tuple(tokenize(text)), polarity=polarity)


@dataclass(frozen=True)
class Clause:
    literals: tuple[Literal, ...]

    def __post_init__(self):
        if not self.literals:
            raise ValueError("clause has no literals")


@dataclass(frozen=True)
class ConstraintSet:
    clauses: tuple[Clause, ...] = ()

    def positive_phrases(self) -> list[tuple[str, ...]]:
        return [
            lit.phrase
            for clause in self.clauses
            for lit in clause.literals
            if lit.polarity is Polarity.MUST_APPEAR
        ]

    def negative_phrases(self) -> list[tuple[str, ...]]:
        return [
            lit.phrase
            for clause in self.clauses
            for lit in clause.literals
            if lit.polarity is Polarity.MUST_NOT_APPEAR
        ]

    def check(self, tokens: Sequence[str]) -> tuple[int, bool]:
        """(number of satisfied clauses, fully satisfied) for a finished text.

        A clause is satisfied when any required phrase occurs contiguously or
        any forbidden phrase is absent; full satisfaction additionally rules
        out every forbidden phrase across the whole set.
        """
        tokens = tuple(tokens)
        satisfied = 0
        for clause in self.clauses:
            ok = False
            for lit in clause.literals:
                present = _contains(tokens, lit.phrase)
                if lit.polarity is Polarity.MUST_APPEAR and present:
                    ok = True
                if lit.polarity is Polarity.MUST_NOT_APPEAR and not present:
                    ok = True
            satisfied += ok
        violated = any(_contains(tokens, p) for p in self.negative_phrases())
        return satisfied, satisfied == len(self.clauses) and not violated

    def to_json(self) -> list:
        return [
            [{"phrase": list(l.phrase), "polarity": l.polarity.value} for l in c.literals]
            for c in self.clauses
        ]

    @classmethod
    def from_json(cls, payload: list) -> "ConstraintSet":
        clauses = tuple(
            Clause(
                literals=tuple(
                    Literal(phrase=tuple(l["phrase"]), polarity=Polarity(l["polarity"]))
                    for l in clause
                )
            )
            for clause in payload
        )
        return cls(clauses=clauses)


def _contains(tokens: tuple[str, ...], phrase: tuple[str, ...]) -> bool:
    n = len(phrase)
    return any(tokens[i : i + n] == phrase for i in range(len(tokens) - n + 1))


@dataclass(frozen=True)
class DecoderConfig:
    """Search hyperparameters; defaults are the full-scale preset."""

    beam_size: int = 50
    prune_factor: int = 50
    sat_tolerance: int = 2
    beta: float = 2.0
    length_penalty: float = 0.1
    ngram_block: int = 10
    min_len: int = 15
    max_len: int = 256

    def __post_init__(self):
        for name in ("beam_size", "prune_factor", "sat_tolerance", "ngram_block", "max_len"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.min_len < 0 or self.min_len > self.max_len:
            raise ValueError("need 0 <= min_len <= max_len")
        if self.beta < 0 or self.length_penalty < 0:
            raise ValueError("beta and length_penalty must be non-negative")


PAPER_CONFIG = DecoderConfig()
DESK_CONFIG = DecoderConfig(beam_size=8, prune_factor=8)


@dataclass(frozen=True)
class DecodeResult:
    tokens: tuple[str, ...]
    model_score: float
    satisfied_clauses: int
    fully_satisfied: bool


@dataclass(frozen=True)
class _Hyp:
    tokens: tuple[str, ...]
    ids: tuple[int, ...]
    score: float
    sat_mask: int
    ngrams: frozenset[tuple[str, ...]]

    def sat_count(self) -> int:
        return bin(self.sat_mask).count("1")


def _initial_mask(constraints: ConstraintSet) -> int:
    # Clauses containing a forbidden literal start satisfied: the phrase is
    # absent until a violation, and violations are pruned outright.
    mask = 0
    for i, clause in enumerate(constraints.clauses):
        if any(l.polarity is Polarity.MUST_NOT_APPEAR for l in clause.literals):
            mask |= 1 << i
    return mask


def _completions(tokens: tuple[str, ...], phrases: list[tuple[str, ...]]) -> bool:
    return any(
        len(tokens) >= len(p) and tokens[-len(p) :] == p for p in phrases
    )


def decode(
    scorer: SequenceScorer,
    constraints: ConstraintSet,
    config: DecoderConfig,
    prompt: Sequence[str] = (),
) -> list[DecodeResult]:
    """Run constrained beam search and return finished hypotheses.

    Results contain only generated tokens (the prompt conditions scoring but
    is not checked against the constraints) and are sorted fully-satisfied
    first, then by model score. Raises :class:`NoHypothesis` when nothing
    reaches end-of-sequence within the length window.
    """
    vocab = scorer.vocab()
    eos = scorer.eos
    prompt = tuple(prompt)
    clauses = constraints.clauses
    n_clauses = len(clauses)
    full_mask = (1 << n_clauses) - 1
    tolerance = min(config.sat_tolerance, n_clauses + 1)
    negative_phrases = constraints.negative_phrases()
    positive_by_clause = [
        [l.phrase for l in clause.literals if l.polarity is Polarity.MUST_APPEAR]
        for clause in clauses
    ]

    beams = [
        _Hyp(tokens=(), ids=(), score=0.0, sat_mask=_initial_mask(constraints), ngrams=frozenset())
    ]
    finished: list[_Hyp] = []

    for _ in range(config.max_len + 1):
        candidates: list[tuple[float, _Hyp]] = []
        for hyp in beams:
            row = scorer.logprobs(prompt + hyp.tokens)
            length = len(hyp.tokens)
            for token_id, token in enumerate(vocab):
                logp = float(row[token_id])
                if token == eos:
                    if config.min_len <= length <= config.max_len:
                        finished.append(replace(hyp, score=hyp.score + logp))
                    continue
                if length >= config.max_len:
                    continue
                new_tokens = hyp.tokens + (token,)
                if _completions(new_tokens, negative_phrases):
                    continue
                new_ngrams = hyp.ngrams
                if len(new_tokens) >= config.ngram_block:
                    gram = new_tokens[-config.ngram_block :]
                    if gram in hyp.ngrams:
                        continue
                    new_ngrams = hyp.ngrams | {gram}
                new_mask = hyp.sat_mask
                for clause_id in range(n_clauses):
                    if new_mask & (1 << clause_id):
                        continue
                    if _completions(new_tokens, positive_by_clause[clause_id]):
                        new_mask |= 1 << clause_id
                newly = bin(new_mask).count("1") - hyp.sat_count()
                new_score = hyp.score + logp
                rank = new_score / (len(new_tokens) ** config.length_penalty)
                rank += config.beta * newly
                candidates.append(
                    (
                        rank,
                        _Hyp(
                            tokens=new_tokens,
                            ids=hyp.ids + (token_id,),
                            score=new_score,
                            sat_mask=new_mask,
                            ngrams=new_ngrams,
                        ),
                    )
                )
        if not candidates:
            break
        candidates.sort(key=lambda item: (-item[0], item[1].ids))
        candidates = candidates[: config.prune_factor]

        selected: list[_Hyp] = []
        seen_masks: set[int] = set()
        rest: list[_Hyp] = []
        for _, hyp in candidates:
            if hyp.sat_mask not in seen_masks and len(selected) < config.beam_size:
                seen_masks.add(hyp.sat_mask)
                selected.append(hyp)
            else:
                rest.append(hyp)
        for hyp in rest:
            if len(selected) >= config.beam_size:
                break
            selected.append(hyp)

        max_sat = max(h.sat_count() for h in selected)
        beams = [h for h in selected if h.sat_count() >= max_sat - tolerance]

    if not finished:
        raise NoHypothesis(
            "beam search produced no hypothesis within the length window"
        )

    results = []
    for hyp in finished:
        satisfied, fully = constraints.check(hyp.tokens)
        results.append(
            DecodeResult(
                tokens=hyp.tokens,
                model_score=hyp.score,
                satisfied_clauses=satisfied,
                fully_satisfied=fully,
            )
        )
    results.sort(key=lambda r: (-int(r.fully_satisfied), -r.model_score, r.tokens))
    return results


# --- constraint builders for the generation schemes -------------------------


def _role_phrase(surface: str, role: Role) -> Literal:
    if role is Role.REGULATOR:
        text = f"{REGULATOR_OPEN} {surface} {REGULATOR_CLOSE}"
    else:
        text = f"{REGULATED_OPEN} {surface} {REGULATED_CLOSE}"
    return Literal.from_text(text)


def build_sen_constraints(conclusion: MarkedConclusion) -> ConstraintSet:
    """Require both entities, each wrapped in the other's role markers."""
    reg, red = conclusion.regulator, conclusion.regulated
    return ConstraintSet(
        clauses=(
            Clause(literals=(_role_phrase(red.surface, Role.REGULATOR),)),
            Clause(literals=(_role_phrase(reg.surface, Role.REGULATED),)),
        )
    )


def build_sre_constraints(
    conclusion: MarkedConclusion, replacement_surface: str, which: Role
) -> ConstraintSet:
    """Require both entities in their original roles, one surface replaced."""
    reg_surface = conclusion.regulator.surface
    red_surface = conclusion.regulated.surface
    lowered = replacement_surface.lower()
    if lowered in (reg_surface.lower(), red_surface.lower()):
        raise DegenerateReplacement(
            f"replacement {replacement_surface!r} equals a main entity surface"
        )
    if which is Role.REGULATOR:
        reg_surface = replacement_surface
    elif which is Role.REGULATED:
        red_surface = replacement_surface
    else:
        raise ValueError("which must be Regulator or Regulated")
    return ConstraintSet(
        clauses=(
            Clause(literals=(_role_phrase(reg_surface, Role.REGULATOR),)),
            Clause(literals=(_role_phrase(red_surface, Role.REGULATED),)),
        )
    )


def build_ng_constraints(conclusion: MarkedConclusion) -> ConstraintSet:
    """Forbid both entities in their original role-marked forms."""
    reg = _role_phrase(conclusion.regulator.surface, Role.REGULATOR)
    red = _role_phrase(conclusion.regulated.surface, Role.REGULATED)
    return ConstraintSet(
        clauses=(
            Clause(literals=(replace(reg, polarity=Polarity.MUST_NOT_APPEAR),)),
            Clause(literals=(replace(red, polarity=Polarity.MUST_NOT_APPEAR),)),
        )
    )
