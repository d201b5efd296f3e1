"""Data model and ingestion for entity-annotated abstracts.

An abstract is a list of pre-segmented sentences plus entity mentions with
character spans. Conclusions carry exactly two role-bearing entities, a
regulator written ``<re> entity <er>`` and a regulated entity written
``<el> entity <le>``. ``parse_marked`` / ``render_marked`` convert between
the tagged string form and the structured :class:`MarkedConclusion`.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterator

from .errors import IoFailure, MalformedMarkers, SchemaViolation
from .tokenization import (
    REGULATED_CLOSE,
    REGULATED_OPEN,
    REGULATOR_CLOSE,
    REGULATOR_OPEN,
)


class Role(Enum):
    REGULATOR = "regulator"
    REGULATED = "regulated"
    NONE = "none"


@dataclass(frozen=True)
class Sentence:
    """One pre-segmented sentence of an abstract; ``index`` is its position."""

    index: int
    text: str

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"sentence index must be non-negative, got {self.index}")
        if not self.text.strip():
            raise ValueError("sentence text is empty")


@dataclass(frozen=True)
class EntityMention:
    """An entity occurrence located by a half-open char span in its sentence."""

    surface: str
    type_label: str = ""
    role: Role = Role.NONE
    sentence_index: int = 0
    start: int = 0
    end: int = 0

    def __post_init__(self):
        if self.sentence_index < 0:
            raise ValueError("sentence_index must be non-negative")
        if not (0 <= self.start < self.end):
            raise ValueError(f"bad char span [{self.start}, {self.end})")
        if not self.surface:
            raise ValueError("mention surface is empty")
        if self.end - self.start != len(self.surface):
            raise ValueError("char span length does not match surface")

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass(frozen=True)
class Abstract:
    """A document: ordered sentences plus entity mentions.

    Role-bearing mentions (regulator/regulated) may only tag the final
    sentence, which is the only place a conclusion can live.
    """

    id: str
    sentences: tuple[Sentence, ...]
    mentions: tuple[EntityMention, ...] = ()

    def __post_init__(self):
        if not self.id:
            raise ValueError("abstract id is empty")
        if len(self.sentences) < 2:
            raise ValueError(f"abstract {self.id!r} needs at least 2 sentences")
        for pos, sent in enumerate(self.sentences):
            if sent.index != pos:
                raise ValueError(
                    f"abstract {self.id!r}: sentence indices must be contiguous from 0"
                )
        last = len(self.sentences) - 1
        for m in self.mentions:
            if m.sentence_index >= len(self.sentences):
                raise ValueError(f"abstract {self.id!r}: mention sentence out of range")
            text = self.sentences[m.sentence_index].text
            if m.end > len(text):
                raise ValueError(f"abstract {self.id!r}: mention span out of bounds")
            if text[m.start : m.end] != m.surface:
                raise ValueError(
                    f"abstract {self.id!r}: surface {m.surface!r} does not match span text"
                )
            if m.role is not Role.NONE and m.sentence_index != last:
                raise ValueError(
                    f"abstract {self.id!r}: role-bearing mention outside final sentence"
                )

    def mentions_in(self, sentence_index: int) -> list[EntityMention]:
        return [m for m in self.mentions if m.sentence_index == sentence_index]


@dataclass(frozen=True)
class SupportingSet:
    """The evidence sentences preceding a conclusion (all roles are None)."""

    sentences: tuple[Sentence, ...]
    mentions: tuple[EntityMention, ...] = ()

    def __post_init__(self):
        if not self.sentences:
            raise ValueError("supporting set is empty")
        for m in self.mentions:
            if m.role is not Role.NONE:
                raise ValueError("supporting-set mentions must not carry roles")

    @property
    def text(self) -> str:
        return " ".join(s.text for s in self.sentences)


@dataclass(frozen=True)
class MarkedConclusion:
    """A conclusion sentence with its regulator and regulated entities.

    ``plain_text`` carries no marker tags; the two mentions locate the
    entities inside it (sentence-local, so ``sentence_index`` is 0). The
    rendered tag form round-trips exactly through ``parse_marked``.
    """

    plain_text: str
    regulator: EntityMention
    regulated: EntityMention

    def __post_init__(self):
        if self.regulator.role is not Role.REGULATOR:
            raise ValueError("regulator mention must carry the Regulator role")
        if self.regulated.role is not Role.REGULATED:
            raise ValueError("regulated mention must carry the Regulated role")
        for m in (self.regulator, self.regulated):
            if m.sentence_index != 0:
                raise ValueError("conclusion mentions are sentence-local (index 0)")
            if m.end > len(self.plain_text):
                raise ValueError("conclusion mention span out of bounds")
            if self.plain_text[m.start : m.end] != m.surface:
                raise ValueError(
                    f"conclusion surface {m.surface!r} does not match span text"
                )
        a, b = self.regulator, self.regulated
        if a.start < b.end and b.start < a.end:
            raise ValueError("regulator and regulated spans overlap")
        if a.surface.lower() == b.surface.lower():
            raise ValueError("regulator and regulated surfaces must be distinct")

    @property
    def ordered_mentions(self) -> tuple[EntityMention, EntityMention]:
        """The two mentions in textual order."""
        pair = (self.regulator, self.regulated)
        return tuple(sorted(pair, key=lambda m: m.start))  # type: ignore[return-value]

    def mention_for(self, role: Role) -> EntityMention:
        if role is Role.REGULATOR:
            return self.regulator
        if role is Role.REGULATED:
            return self.regulated
        raise ValueError(f"no conclusion mention for role {role}")

    def with_surfaces(
        self, first_surface: str, second_surface: str, swap_roles: bool = False
    ) -> "MarkedConclusion":
        """Rebuild with new surfaces at the two (text-ordered) entity slots.

        ``swap_roles`` moves each marker pair to the other slot, as in a
        position swap; otherwise markers stay put and only surfaces change.
        """
        first, second = self.ordered_mentions
        head = self.plain_text[: first.start]
        mid = self.plain_text[first.end : second.start]
        tail = self.plain_text[second.end :]
        plain = head + first_surface + mid + second_surface + tail
        first_role = second.role if swap_roles else first.role
        second_role = first.role if swap_roles else second.role
        new_first = EntityMention(
            surface=first_surface,
            type_label=first.type_label if not swap_roles else second.type_label,
            role=first_role,
            sentence_index=0,
            start=first.start,
            end=first.start + len(first_surface),
        )
        offset = len(first_surface) - len(first.surface)
        new_second = EntityMention(
            surface=second_surface,
            type_label=second.type_label if not swap_roles else first.type_label,
            role=second_role,
            sentence_index=0,
            start=second.start + offset,
            end=second.start + offset + len(second_surface),
        )
        reg = new_first if new_first.role is Role.REGULATOR else new_second
        red = new_first if new_first.role is Role.REGULATED else new_second
        return MarkedConclusion(plain_text=plain, regulator=reg, regulated=red)

    def with_edit(self, start: int, end: int, replacement: str) -> "MarkedConclusion":
        """Replace plain_text[start:end] with ``replacement``.

        The edited region must not overlap either entity span; spans after
        the edit are shifted accordingly.
        """
        for m in (self.regulator, self.regulated):
            if start < m.end and m.start < end:
                raise ValueError("edit overlaps an entity span")
        plain = self.plain_text[:start] + replacement + self.plain_text[end:]
        shift = len(replacement) - (end - start)

        def moved(m: EntityMention) -> EntityMention:
            if m.start >= end:
                return EntityMention(
                    surface=m.surface,
                    type_label=m.type_label,
                    role=m.role,
                    sentence_index=0,
                    start=m.start + shift,
                    end=m.end + shift,
                )
            return m

        return MarkedConclusion(
            plain_text=plain,
            regulator=moved(self.regulator),
            regulated=moved(self.regulated),
        )


_TAG_RE = re.compile(r"<(re|er|el|le)>")

# The regulator closer appears in the wild both as <er> and as a repeated
# <re>; the parser accepts both, the renderer always emits <er>.
def parse_marked(text: str, strict_variant: bool = False) -> MarkedConclusion:
    """Parse a tagged conclusion string into a :class:`MarkedConclusion`.

    Raises :class:`MalformedMarkers` when tags are missing, duplicated,
    unbalanced, or interleaved.
    """
    tags = [(m.start(), m.end(), m.group(1)) for m in _TAG_RE.finditer(text)]
    counts = {name: sum(1 for t in tags if t[2] == name) for name in ("re", "er", "el", "le")}
    if counts["el"] != 1 or counts["le"] != 1:
        raise MalformedMarkers(f"need exactly one <el>…<le> pair, saw {counts}")
    legacy = counts["re"] == 2 and counts["er"] == 0
    if not (counts["re"] == 1 and counts["er"] == 1) and not (legacy and not strict_variant):
        raise MalformedMarkers(f"need exactly one <re>…<er> pair, saw {counts}")

    re_tags = [t for t in tags if t[2] == "re"]
    er_tags = [t for t in tags if t[2] == "er"]
    reg_open = re_tags[0]
    reg_close = re_tags[1] if legacy else er_tags[0]
    el_open = next(t for t in tags if t[2] == "el")
    le_close = next(t for t in tags if t[2] == "le")
    if reg_open[0] >= reg_close[0]:
        raise MalformedMarkers("regulator closer precedes its opener")
    if el_open[0] >= le_close[0]:
        raise MalformedMarkers("<le> precedes <el>")

    reg_region = (reg_open[0], reg_close[1])
    red_region = (el_open[0], le_close[1])
    if reg_region[0] < red_region[1] and red_region[0] < reg_region[1]:
        raise MalformedMarkers("regulator and regulated tag spans interleave")

    def inner(open_tag, close_tag) -> str:
        surface = text[open_tag[1] : close_tag[0]].strip()
        if not surface:
            raise MalformedMarkers("empty entity surface between tags")
        if _TAG_RE.search(surface):
            raise MalformedMarkers("nested marker tag inside an entity span")
        return surface

    reg_surface = inner(reg_open, reg_close)
    red_surface = inner(el_open, le_close)

    regions = sorted(
        [(reg_region, reg_surface, Role.REGULATOR), (red_region, red_surface, Role.REGULATED)]
    )
    (r1, s1, role1), (r2, s2, role2) = regions
    plain = text[: r1[0]] + s1 + text[r1[1] : r2[0]] + s2 + text[r2[1] :]
    start1 = r1[0]
    start2 = r1[0] + len(s1) + (r2[0] - r1[1])

    def mention(surface, start, role):
        return EntityMention(
            surface=surface, role=role, sentence_index=0, start=start, end=start + len(surface)
        )

    m1 = mention(s1, start1, role1)
    m2 = mention(s2, start2, role2)
    reg = m1 if role1 is Role.REGULATOR else m2
    red = m1 if role1 is Role.REGULATED else m2
    return MarkedConclusion(plain_text=plain, regulator=reg, regulated=red)


def render_marked(conclusion: MarkedConclusion) -> str:
    """Render the canonical tagged form: ``<re> … <er>`` / ``<el> … <le>``."""
    first, second = conclusion.ordered_mentions

    def wrap(m: EntityMention) -> str:
        if m.role is Role.REGULATOR:
            return f"{REGULATOR_OPEN} {m.surface} {REGULATOR_CLOSE}"
        return f"{REGULATED_OPEN} {m.surface} {REGULATED_CLOSE}"

    text = conclusion.plain_text
    return (
        text[: first.start]
        + wrap(first)
        + text[first.end : second.start]
        + wrap(second)
        + text[second.end :]
    )


def _require(record: dict, key: str, kind, line: int):
    if key not in record:
        raise SchemaViolation(line, f"missing field {key!r}")
    value = record[key]
    if not isinstance(value, kind):
        raise SchemaViolation(line, f"field {key!r} has wrong type")
    return value


_ROLE_NAMES = {
    "regulator": Role.REGULATOR,
    "regulated": Role.REGULATED,
    "none": Role.NONE,
    None: Role.NONE,
}


def abstract_from_record(record: dict, line: int = 0) -> Abstract:
    """Validate one corpus record (already JSON-decoded) into an Abstract."""
    doc_id = _require(record, "id", str, line)
    raw_sentences = _require(record, "sentences", list, line)
    if not all(isinstance(s, str) for s in raw_sentences):
        raise SchemaViolation(line, "sentences must be strings")
    raw_entities = record.get("entities", [])
    if not isinstance(raw_entities, list):
        raise SchemaViolation(line, "entities must be a list")
    try:
        sentences = tuple(Sentence(index=i, text=s) for i, s in enumerate(raw_sentences))
        mentions = []
        for ent in raw_entities:
            if not isinstance(ent, dict):
                raise SchemaViolation(line, "entity record must be an object")
            sent_idx = _require(ent, "sentence", int, line)
            start = _require(ent, "start", int, line)
            end = _require(ent, "end", int, line)
            role_name = ent.get("role")
            if role_name not in _ROLE_NAMES:
                raise SchemaViolation(line, f"unknown role {role_name!r}")
            if not (0 <= sent_idx < len(raw_sentences)):
                raise SchemaViolation(line, "entity sentence index out of range")
            text = raw_sentences[sent_idx]
            if not (0 <= start < end <= len(text)):
                raise SchemaViolation(line, "entity span out of bounds")
            mentions.append(
                EntityMention(
                    surface=text[start:end],
                    type_label=str(ent.get("type", "")),
                    role=_ROLE_NAMES[role_name],
                    sentence_index=sent_idx,
                    start=start,
                    end=end,
                )
            )
        return Abstract(id=doc_id, sentences=sentences, mentions=tuple(mentions))
    except SchemaViolation:
        raise
    except ValueError as exc:
        raise SchemaViolation(line, str(exc)) from exc


def load_corpus(
    path: str | Path,
    strict: bool = False,
    on_error: Callable[[SchemaViolation], None] | None = None,
) -> Iterator[Abstract]:
    """Stream validated Abstracts from a line-delimited JSON corpus file.

    In lenient mode (default) invalid records are reported through
    ``on_error`` with their line number and skipped; in strict mode the
    first violation is raised.
    """
    path = Path(path)
    try:
        handle = path.open("r", encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot open corpus file {path}: {exc}") from exc
    with handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise SchemaViolation(line_no, f"invalid JSON: {exc.msg}") from exc
                if not isinstance(record, dict):
                    raise SchemaViolation(line_no, "record must be a JSON object")
                yield abstract_from_record(record, line_no)
            except SchemaViolation as violation:
                if strict:
                    raise
                if on_error is not None:
                    on_error(violation)


def read_corpus(
    path: str | Path, strict: bool = False
) -> tuple[list[Abstract], list[SchemaViolation]]:
    """Eager variant of :func:`load_corpus`; returns (abstracts, violations)."""
    violations: list[SchemaViolation] = []
    abstracts = list(load_corpus(path, strict=strict, on_error=violations.append))
    return abstracts, violations
