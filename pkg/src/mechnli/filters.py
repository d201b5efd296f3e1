"""Acceptance filters that turn raw generations into negative examples.

A plain generation (GEN) is kept when it scores below the quality threshold
against the gold conclusion and states a different relation between the
main entities. Constrained generations (GEN-ND) are kept when their
constraint scheme is met: swapped-role constraints satisfied, replaced-
entity constraints satisfied and dissimilar enough from the gold, or both
forbidden entity phrases absent.

The bundled similarity scorer is a term-frequency cosine and the bundled
relation predictor is a keyword counter; both are stand-ins calibrated for
desk-scale runs, swappable for bridge-served neural scorers.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Protocol

from .corpus import MarkedConclusion
from .decoding import ConstraintSet, Polarity
from .errors import MissingEntities, SchemeMismatch
from .tokenization import tokenize


class SimilarityScorer(Protocol):
    def score(self, a: str, b: str) -> float: ...


class RelationPredictor(Protocol):
    def predict(self, premise: str, regulator: str, regulated: str) -> str: ...


@dataclass(frozen=True)
class TokenCosineSimilarity:
    """Term-frequency cosine over the shared tokenization; symmetric, in [0, 1]."""

    def score(self, a: str, b: str) -> float:
        ta, tb = Counter(tokenize(a)), Counter(tokenize(b))
        if not ta and not tb:
            return 1.0
        if not ta or not tb:
            return 0.0
        dot = sum(ta[t] * tb[t] for t in ta.keys() & tb.keys())
        norm = math.sqrt(sum(v * v for v in ta.values()))
        norm *= math.sqrt(sum(v * v for v in tb.values()))
        return min(1.0, dot / norm)


RELATION_ACTIVATES = "activates"
RELATION_INHIBITS = "inhibits"
RELATION_OTHER = "other"

_DEFAULT_RELATION_KEYWORDS: dict[str, tuple[str, ...]] = {
    RELATION_ACTIVATES: (
        "activate", "activates", "activated", "activation",
        "induce", "induces", "induced", "induction",
        "increase", "increases", "increased", "increasing",
        "promote", "promotes", "promoted", "promotion",
        "enhance", "enhances", "enhanced", "enhancement",
        "stimulate", "stimulates", "stimulated", "stimulation",
        "upregulate", "upregulates", "upregulated", "upregulation",
        "accelerate", "accelerates", "accelerated",
        "drive", "drives", "driven",
    ),
    RELATION_INHIBITS: (
        "inhibit", "inhibits", "inhibited", "inhibition",
        "suppress", "suppresses", "suppressed", "suppression",
        "decrease", "decreases", "decreased", "decreasing",
        "reduce", "reduces", "reduced", "reduction",
        "repress", "represses", "repressed", "repression",
        "downregulate", "downregulates", "downregulated", "downregulation",
        "block", "blocks", "blocked",
        "retard", "retards", "retarded", "retarding",
        "lower", "lowers", "lowered",
    ),
}


@dataclass(frozen=True)
class KeywordRelationPredictor:
    """Closed-set relation labels from interaction keyword counts.

    The label whose keywords dominate the text wins; ties and keyword-free
    texts fall back to the residual label.
    """

    keywords: dict[str, tuple[str, ...]] = field(
        default_factory=lambda: dict(_DEFAULT_RELATION_KEYWORDS)
    )
    fallback: str = RELATION_OTHER

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.keywords) + (self.fallback,)

    def predict(self, premise: str, regulator: str, regulated: str) -> str:
        tokens = Counter(tokenize(premise))
        scores = {
            label: sum(tokens[w] for w in words)
            for label, words in self.keywords.items()
        }
        best = max(scores.values(), default=0)
        if best == 0:
            return self.fallback
        winners = [label for label, s in scores.items() if s == best]
        if len(winners) != 1:
            return self.fallback
        return winners[0]

    @classmethod
    def from_file(cls, path: str | Path, fallback: str = RELATION_OTHER):
        keywords: dict[str, list[str]] = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            label, _, word = line.partition("\t")
            if not word:
                raise ValueError(f"bad relation line (need label<TAB>keyword): {line!r}")
            keywords.setdefault(label.strip(), []).append(word.strip().lower())
        return cls(keywords={k: tuple(v) for k, v in keywords.items()}, fallback=fallback)


@dataclass(frozen=True)
class FilterConfig:
    """Acceptance thresholds: quality (lambda) and similarity (delta)."""

    quality_threshold: float = 0.45
    similarity_threshold: float = 0.9

    def __post_init__(self):
        for name in ("quality_threshold", "similarity_threshold"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {value}")


class GndScheme(Enum):
    SEN = "sen"
    SRE = "sre"
    NG = "ng"


def _contains_surface(text: str, surface: str) -> bool:
    return surface.lower() in text.lower()


def filter_gen(
    candidate: str,
    gold_conclusion: MarkedConclusion,
    premise: str,
    quality: SimilarityScorer,
    relation: RelationPredictor,
    config: FilterConfig | None = None,
) -> bool:
    """Accept a plain generation as a negative example.

    Accepts iff the quality score against the gold conclusion is strictly
    below the threshold AND the candidate states a different relation than
    the gold conclusion does. ``premise`` is part of the call contract for
    context-aware predictors; the bundled predictor reads the texts alone.
    """
    config = config or FilterConfig()
    reg = gold_conclusion.regulator.surface
    red = gold_conclusion.regulated.surface
    if not (_contains_surface(candidate, reg) and _contains_surface(candidate, red)):
        raise MissingEntities(
            f"candidate lacks a main entity ({reg!r} / {red!r})"
        )
    score = quality.score(candidate, gold_conclusion.plain_text)
    if score >= config.quality_threshold:
        return False
    candidate_label = relation.predict(candidate, reg, red)
    gold_label = relation.predict(gold_conclusion.plain_text, reg, red)
    return candidate_label != gold_label


def _validate_scheme(scheme: GndScheme, constraints: ConstraintSet) -> None:
    polarities = {
        lit.polarity for clause in constraints.clauses for lit in clause.literals
    }
    if scheme is GndScheme.NG:
        if polarities - {Polarity.MUST_NOT_APPEAR}:
            raise SchemeMismatch("NG expects only forbidden-phrase constraints")
    else:
        if polarities - {Polarity.MUST_APPEAR}:
            raise SchemeMismatch(f"{scheme.value} expects only required-phrase constraints")
    if not constraints.clauses:
        raise SchemeMismatch("constraint set is empty")


def filter_gnd(
    candidate: str,
    gold_conclusion: str,
    scheme: GndScheme,
    constraints: ConstraintSet,
    similarity: SimilarityScorer,
    config: FilterConfig | None = None,
) -> bool:
    """Accept a constrained generation under its scheme's rule.

    SEN: all constraints satisfied. SRE: all satisfied and similarity to the
    gold strictly below the threshold. NG: neither forbidden phrase present.
    The satisfaction check is recomputed here, independent of the decoder.
    """
    config = config or FilterConfig()
    _validate_scheme(scheme, constraints)
    _, fully = constraints.check(tuple(tokenize(candidate)))
    if scheme is GndScheme.SEN or scheme is GndScheme.NG:
        return fully
    if not fully:
        return False
    return similarity.score(candidate, gold_conclusion) < config.similarity_threshold
