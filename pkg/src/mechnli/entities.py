"""Pluggable entity typing and same-type swap candidates.

Entity-swap perturbations need to know which surfaces share a type with a
conclusion entity. The bundled typer is a lexicon lookup with a default
label for unknown surfaces; a neural typer can be slotted in through the
bridge client. Candidate pools for out-of-text swaps are corpus-level
surface lists keyed by type.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Protocol

from .corpus import Abstract, EntityMention, MarkedConclusion, Role, SupportingSet
from .errors import UntypedEntity


class EntityTyper(Protocol):
    def type_of(self, surface: str, context: str) -> str | None: ...


DEFAULT_UNKNOWN_LABEL = "entity"

# Surfaces that back the bundled examples and demos; real runs load a
# corpus-derived lexicon instead.
DEFAULT_LEXICON_ENTRIES: dict[str, str] = {
    "uracil": "chemical",
    "proton": "chemical",
    "glucose": "chemical",
    "atp": "chemical",
    "dnp": "chemical",
    "sodium azide": "chemical",
    "aba": "chemical",
    "abscisic acid": "chemical",
    "integrin": "chemical",
    "methylamine": "chemical",
    "ammonia": "chemical",
    "propionic acid": "chemical",
    "rab-16": "gene_product",
    "rab-16 mrna": "gene_product",
    "h(+)-atpase": "gene_product",
}


@dataclass(frozen=True)
class LexiconTyper:
    """Case-insensitive surface lookup; unknown surfaces get the default label."""

    lexicon: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_LEXICON_ENTRIES))
    default_label: str | None = DEFAULT_UNKNOWN_LABEL

    def type_of(self, surface: str, context: str = "") -> str | None:
        return self.lexicon.get(surface.lower(), self.default_label)

    @property
    def labels(self) -> tuple[str, ...]:
        found = sorted(set(self.lexicon.values()))
        if self.default_label is not None and self.default_label not in found:
            found.append(self.default_label)
        return tuple(found)

    @classmethod
    def from_file(
        cls, path: str | Path, default_label: str | None = DEFAULT_UNKNOWN_LABEL
    ) -> "LexiconTyper":
        lexicon: dict[str, str] = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            surface, _, label = line.partition("\t")
            if not label:
                raise ValueError(f"bad lexicon line (need surface<TAB>type): {line!r}")
            lexicon[surface.strip().lower()] = label.strip()
        return cls(lexicon=lexicon, default_label=default_label)


@dataclass(frozen=True)
class EntityPool:
    """Corpus-level surfaces grouped by type, for out-of-text swaps."""

    by_type: dict[str, tuple[str, ...]]

    def __post_init__(self):
        seen: dict[str, str] = {}
        for label, surfaces in self.by_type.items():
            if not all(surfaces):
                raise ValueError("pool surfaces must be non-empty")
            for s in surfaces:
                key = s.lower()
                if seen.get(key, label) != label:
                    raise ValueError(f"surface {s!r} listed under conflicting types")
                seen[key] = label

    def surfaces(self, type_label: str) -> tuple[str, ...]:
        return self.by_type.get(type_label, ())

    @classmethod
    def from_file(cls, path: str | Path) -> "EntityPool":
        by_type: dict[str, list[str]] = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            surface, _, label = line.partition("\t")
            if not label:
                raise ValueError(f"bad pool line (need surface<TAB>type): {line!r}")
            by_type.setdefault(label.strip(), []).append(surface.strip())
        return cls(by_type={k: tuple(v) for k, v in by_type.items()})

    @classmethod
    def from_corpus(
        cls, abstracts: Iterable[Abstract], typer: EntityTyper | None = None
    ) -> "EntityPool":
        """Collect typed mention surfaces across a corpus.

        The first type seen for a surface wins; later conflicting sightings
        are dropped so the pool invariant holds.
        """
        label_of: dict[str, str] = {}
        ordered: dict[str, list[str]] = {}
        for abstract in abstracts:
            for m in abstract.mentions:
                label = m.type_label or (
                    typer.type_of(m.surface, "") if typer is not None else None
                )
                if not label:
                    continue
                key = m.surface.lower()
                if key in label_of:
                    continue
                label_of[key] = label
                ordered.setdefault(label, []).append(m.surface)
        return cls(by_type={k: tuple(v) for k, v in ordered.items()})


_FALLBACK_TYPER = LexiconTyper()


def resolve_type(
    mention: EntityMention, context: str, typer: EntityTyper | None
) -> str | None:
    """Mention's own label when present, else the typer's verdict.

    ``typer=None`` selects the bundled lexicon typer; pass a typer with no
    default label to treat unknown surfaces as untyped.
    """
    if mention.type_label:
        return mention.type_label
    return (typer or _FALLBACK_TYPER).type_of(mention.surface, context)


def _main_surfaces(conclusion: MarkedConclusion) -> set[str]:
    return {conclusion.regulator.surface.lower(), conclusion.regulated.surface.lower()}


def _target_type(
    conclusion: MarkedConclusion, target: Role, typer: EntityTyper | None
) -> str:
    mention = conclusion.mention_for(target)
    label = resolve_type(mention, conclusion.plain_text, typer)
    if not label:
        raise UntypedEntity(f"no type for target entity {mention.surface!r}")
    return label


def in_text_candidates(
    conclusion: MarkedConclusion,
    supporting: SupportingSet,
    target: Role,
    typer: EntityTyper | None = None,
) -> list[str]:
    """Supporting-set surfaces sharing the target's type, in first-occurrence
    order, excluding both main entities (case-insensitive)."""
    wanted = _target_type(conclusion, target, typer)
    excluded = _main_surfaces(conclusion)
    context = supporting.text
    out: list[str] = []
    seen: set[str] = set()
    for m in sorted(supporting.mentions, key=lambda m: (m.sentence_index, m.start)):
        key = m.surface.lower()
        if key in excluded or key in seen:
            continue
        if resolve_type(m, context, typer) != wanted:
            continue
        seen.add(key)
        out.append(m.surface)
    return out


def out_of_text_candidates(
    conclusion: MarkedConclusion,
    supporting: SupportingSet,
    pool: EntityPool,
    target: Role,
    typer: EntityTyper | None = None,
) -> list[str]:
    """Pool surfaces of the target's type that occur nowhere in the
    supporting set or conclusion."""
    wanted = _target_type(conclusion, target, typer)
    excluded = _main_surfaces(conclusion)
    haystack = [s.text.lower() for s in supporting.sentences]
    haystack.append(conclusion.plain_text.lower())
    out: list[str] = []
    seen: set[str] = set()
    for surface in pool.surfaces(wanted):
        key = surface.lower()
        if key in excluded or key in seen:
            continue
        if any(key in text for text in haystack):
            continue
        seen.add(key)
        out.append(surface)
    return out


def same_type_in_text(
    conclusion: MarkedConclusion,
    supporting: SupportingSet,
    target: Role,
    rng_seed: int,
    typer: EntityTyper | None = None,
) -> str | None:
    """Seeded-uniform same-type surface from the supporting set, or None."""
    candidates = in_text_candidates(conclusion, supporting, target, typer)
    if not candidates:
        return None
    return random.Random(rng_seed).choice(candidates)


def same_type_out_of_text(
    conclusion: MarkedConclusion,
    supporting: SupportingSet,
    pool: EntityPool,
    target: Role,
    rng_seed: int,
    typer: EntityTyper | None = None,
) -> str | None:
    """Seeded-uniform same-type surface absent from the whole context, or None."""
    candidates = out_of_text_candidates(conclusion, supporting, pool, target, typer)
    if not candidates:
        return None
    return random.Random(rng_seed).choice(candidates)
