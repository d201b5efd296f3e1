"""Conclusion detection and abstract splitting.

The final sentence of an abstract is tested against a table of conclusion
cue phrases ("we conclude that", "it was concluded that", ...). A hit
splits the abstract into (supporting set, marked conclusion) when the
final sentence carries exactly one regulator and one regulated mention and
the supporting set length falls inside the configured premise bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .corpus import Abstract, EntityMention, MarkedConclusion, Role, SupportingSet

DEFAULT_PHRASES: tuple[str, ...] = (
    "we conclude that",
    "it is concluded that",
    "it was concluded that",
    "we concluded that",
    "we have concluded that",
    "it has been concluded that",
    "it may be concluded that",
    "it was therefore concluded that",
    "we therefore conclude that",
    "we conclude",
    "we thus conclude that",
    "it is therefore concluded that",
    "we further conclude that",
)

DEFAULT_PREMISE_BOUNDS: tuple[int, int] = (3, 15)


@dataclass(frozen=True)
class PhraseTable:
    """Ordered, lowercase conclusion cue phrases; earlier entries win."""

    phrases: tuple[str, ...] = DEFAULT_PHRASES

    def __post_init__(self):
        if not self.phrases:
            raise ValueError("phrase table is empty")
        if any(p != p.lower() for p in self.phrases):
            raise ValueError("phrases must be lowercase")
        if len(set(self.phrases)) != len(self.phrases):
            raise ValueError("duplicate phrases in table")

    @classmethod
    def from_file(cls, path: str | Path) -> "PhraseTable":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        phrases = tuple(p.strip().lower() for p in lines if p.strip())
        return cls(phrases=phrases)


@dataclass(frozen=True)
class ExtractionResult:
    supporting: SupportingSet
    conclusion: MarkedConclusion
    matched_phrase: str
    abstract_id: str = ""


def find_conclusion(
    abstract: Abstract, table: PhraseTable | None = None
) -> tuple[int, str] | None:
    """Return (index, phrase) when the final sentence contains a cue phrase.

    Matching is case-insensitive substring containment; the first phrase in
    table order is reported. Only the final sentence is tested.
    """
    table = table or PhraseTable()
    final = abstract.sentences[-1]
    lowered = final.text.lower()
    for phrase in table.phrases:
        if phrase in lowered:
            return (final.index, phrase)
    return None


def _rebase(m: EntityMention) -> EntityMention:
    return EntityMention(
        surface=m.surface,
        type_label=m.type_label,
        role=m.role,
        sentence_index=0,
        start=m.start,
        end=m.end,
    )


def split_abstract(
    abstract: Abstract,
    table: PhraseTable | None = None,
    premise_bounds: tuple[int, int] = DEFAULT_PREMISE_BOUNDS,
) -> ExtractionResult | None:
    """Split an abstract into supporting set and marked conclusion.

    Returns None when no cue phrase matches, when the final sentence does
    not carry exactly one regulator and one regulated mention, or when the
    supporting-set length is outside ``premise_bounds``.
    """
    hit = find_conclusion(abstract, table)
    if hit is None:
        return None
    conclusion_index, phrase = hit

    final_mentions = abstract.mentions_in(conclusion_index)
    regulators = [m for m in final_mentions if m.role is Role.REGULATOR]
    regulated = [m for m in final_mentions if m.role is Role.REGULATED]
    if len(regulators) != 1 or len(regulated) != 1:
        return None

    supporting_sentences = abstract.sentences[:-1]
    lo, hi = premise_bounds
    if not (lo <= len(supporting_sentences) <= hi):
        return None

    try:
        conclusion = MarkedConclusion(
            plain_text=abstract.sentences[conclusion_index].text,
            regulator=_rebase(regulators[0]),
            regulated=_rebase(regulated[0]),
        )
    except ValueError:
        return None

    supporting = SupportingSet(
        sentences=supporting_sentences,
        mentions=tuple(
            m for m in abstract.mentions if m.sentence_index != conclusion_index
        ),
    )
    return ExtractionResult(
        supporting=supporting,
        conclusion=conclusion,
        matched_phrase=phrase,
        abstract_id=abstract.id,
    )
