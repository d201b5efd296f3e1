"""Rule-based counterfactual generators for conclusion sentences.

Seven perturbations turn an entailed conclusion into a non-entailed one:
swapping entity names (SEN) or positions (SEP), replacing one entity with
a same-type surface from inside (SRE) or outside (SREO) the context,
flipping a predicate's polarity (VNeg), swapping a number against the
supporting set (SN), and reversing an interaction term's polarity via an
antonym lexicon (LPR). Generation-based kinds (GEN, GEN-ND) are produced
by the decoding and filtering modules; they only appear here as category
labels.

All generators are deterministic given their seed, and every emitted
perturbation differs from its input and still renders as a well-formed
marked conclusion.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from . import resources as _resources
from .corpus import MarkedConclusion, Role, SupportingSet
from .entities import (
    EntityPool,
    EntityTyper,
    LexiconTyper,
    in_text_candidates,
    out_of_text_candidates,
)
from .errors import UntypedEntity

Seed = int | str


class PerturbationKind(Enum):
    SEN = "SEN"
    SEP = "SEP"
    SRE = "SRE"
    SREO = "SREO"
    VNEG = "VNeg"
    SN = "SN"
    LPR = "LPR"
    GEN = "GEN"
    GEN_ND = "GEN-ND"


RULE_BASED_KINDS = frozenset(
    {
        PerturbationKind.SEN,
        PerturbationKind.SEP,
        PerturbationKind.SRE,
        PerturbationKind.SREO,
        PerturbationKind.VNEG,
        PerturbationKind.SN,
        PerturbationKind.LPR,
    }
)
GENERATION_KINDS = frozenset({PerturbationKind.GEN, PerturbationKind.GEN_ND})


def kind_from_label(label: str) -> PerturbationKind:
    for kind in PerturbationKind:
        if kind.value == label:
            return kind
    raise ValueError(f"unknown perturbation kind {label!r}")


def _load_pairs(path: str | Path) -> list[tuple[str, str]]:
    pairs = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        term, _, replacement = line.partition("\t")
        if not replacement:
            raise ValueError(f"bad rule line (need term<TAB>replacement): {raw!r}")
        pairs.append((term.strip().lower(), replacement.strip().lower()))
    return pairs


@dataclass(frozen=True)
class AntonymLexicon:
    """Symmetric antonym map between interaction terms, lowercase keys."""

    pairs: dict[str, str]

    def __post_init__(self):
        for a, b in self.pairs.items():
            if a != a.lower():
                raise ValueError(f"antonym key {a!r} must be lowercase")
            if self.pairs.get(b) != a:
                raise ValueError(f"antonym map not symmetric at {a!r} -> {b!r}")

    @classmethod
    def from_file(cls, path: str | Path) -> "AntonymLexicon":
        pairs: dict[str, str] = {}
        for a, b in _load_pairs(path):
            for x, y in ((a, b), (b, a)):
                if pairs.get(x, y) != y:
                    raise ValueError(f"conflicting antonym for {x!r}")
                pairs[x] = y
        return cls(pairs=pairs)

    @property
    def patterns(self) -> tuple[str, ...]:
        # Longest-match priority for hit scanning.
        return tuple(sorted(self.pairs, key=lambda p: (-len(p), p)))


@dataclass(frozen=True)
class NegationRules:
    """Ordered polarity-flip rules; every rule has its inverse in the table."""

    rules: tuple[tuple[str, str], ...]

    def __post_init__(self):
        table = dict(self.rules)
        if len(table) != len(self.rules):
            raise ValueError("duplicate negation rule pattern")
        for pattern, replacement in self.rules:
            if table.get(replacement) != pattern:
                raise ValueError(f"rule {pattern!r} -> {replacement!r} has no inverse")

    @classmethod
    def from_file(cls, path: str | Path) -> "NegationRules":
        return cls(rules=tuple(_load_pairs(path)))

    @property
    def patterns(self) -> tuple[str, ...]:
        # File order is priority order; longer patterns are listed first in
        # the bundled table so "is not" wins over "is".
        return tuple(p for p, _ in self.rules)

    def replacement_for(self, pattern: str) -> str:
        return dict(self.rules)[pattern]


def _default_path(name: str) -> Path:
    return Path(_resources.__file__).parent / name


def default_antonyms() -> AntonymLexicon:
    return AntonymLexicon.from_file(_default_path("antonyms.tsv"))


def default_negation_rules() -> NegationRules:
    return NegationRules.from_file(_default_path("negation_rules.tsv"))


@dataclass
class PerturbResources:
    """Everything the perturbation pass needs besides the instance itself."""

    typer: EntityTyper = field(default_factory=LexiconTyper)
    pool: EntityPool | None = None
    antonyms: AntonymLexicon = field(default_factory=default_antonyms)
    negation_rules: NegationRules = field(default_factory=default_negation_rules)


# --- site scanning ----------------------------------------------------------


def _compile_alternation(patterns: tuple[str, ...]) -> re.Pattern:
    body = "|".join(re.escape(p) for p in patterns)
    return re.compile(rf"\b(?:{body})\b", re.IGNORECASE)


def _match_sites(
    conclusion: MarkedConclusion, patterns: tuple[str, ...]
) -> list[tuple[int, int, str]]:
    """Non-overlapping (start, end, pattern) hits outside the entity spans."""
    if not patterns:
        return []
    regex = _compile_alternation(patterns)
    spans = [m.span for m in conclusion.ordered_mentions]
    sites = []
    for m in regex.finditer(conclusion.plain_text):
        if any(m.start() < e and s < m.end() for s, e in spans):
            continue
        sites.append((m.start(), m.end(), m.group(0).lower()))
    return sites


def _preserve_case(matched: str, replacement: str) -> str:
    if matched[:1].isupper():
        return replacement[:1].upper() + replacement[1:]
    return replacement


_NUMBER_RE = re.compile(r"(?<![\w.+-])[-+]?\d+(?:\.\d+)?(?!\.?\d|\w)")


def _number_sites(conclusion: MarkedConclusion) -> list[tuple[int, int, str]]:
    spans = [m.span for m in conclusion.ordered_mentions]
    sites = []
    for m in _NUMBER_RE.finditer(conclusion.plain_text):
        if any(m.start() < e and s < m.end() for s, e in spans):
            continue
        sites.append((m.start(), m.end(), m.group(0)))
    return sites


def _supporting_numbers(supporting: SupportingSet) -> list[str]:
    tokens: list[str] = []
    seen: set[str] = set()
    for sentence in supporting.sentences:
        for m in _NUMBER_RE.finditer(sentence.text):
            tok = m.group(0)
            if tok not in seen:
                seen.add(tok)
                tokens.append(tok)
    return tokens


# --- the seven generators ---------------------------------------------------


def apply_sen(conclusion: MarkedConclusion) -> MarkedConclusion:
    """Swap the entity names; markers keep their positions, so the roles flip."""
    first, second = conclusion.ordered_mentions
    return conclusion.with_surfaces(second.surface, first.surface, swap_roles=False)


def apply_sep(conclusion: MarkedConclusion) -> MarkedConclusion:
    """Swap the entity positions; each entity moves with its own marker pair."""
    first, second = conclusion.ordered_mentions
    return conclusion.with_surfaces(second.surface, first.surface, swap_roles=True)


def _replace_role_surface(
    conclusion: MarkedConclusion, role: Role, surface: str
) -> MarkedConclusion:
    first, second = conclusion.ordered_mentions
    if first.role is role:
        return conclusion.with_surfaces(surface, second.surface)
    return conclusion.with_surfaces(first.surface, surface)


_ROLE_ORDER = (Role.REGULATOR, Role.REGULATED)


def apply_sre(
    conclusion: MarkedConclusion,
    supporting: SupportingSet,
    typer: EntityTyper | None,
    rng_seed: Seed,
) -> MarkedConclusion | None:
    """Replace one main entity with a same-type surface from the supporting set.

    The role is chosen uniformly among those with at least one candidate, so
    whether the perturbation applies does not depend on the seed.
    """
    candidates = {
        role: in_text_candidates(conclusion, supporting, role, typer)
        for role in _ROLE_ORDER
    }
    eligible = [role for role in _ROLE_ORDER if candidates[role]]
    if not eligible:
        return None
    rng = random.Random(rng_seed)
    role = rng.choice(eligible)
    surface = rng.choice(candidates[role])
    return _replace_role_surface(conclusion, role, surface)


def apply_sreo(
    conclusion: MarkedConclusion,
    supporting: SupportingSet,
    pool: EntityPool,
    typer: EntityTyper | None,
    rng_seed: Seed,
) -> MarkedConclusion | None:
    """Replace one main entity with a same-type pool surface absent from the context."""
    candidates = {
        role: out_of_text_candidates(conclusion, supporting, pool, role, typer)
        for role in _ROLE_ORDER
    }
    eligible = [role for role in _ROLE_ORDER if candidates[role]]
    if not eligible:
        return None
    rng = random.Random(rng_seed)
    role = rng.choice(eligible)
    surface = rng.choice(candidates[role])
    return _replace_role_surface(conclusion, role, surface)


def apply_vneg(
    conclusion: MarkedConclusion, rules: NegationRules, rng_seed: Seed
) -> MarkedConclusion | None:
    """Flip the polarity of one uniformly chosen predicate site."""
    sites = _match_sites(conclusion, rules.patterns)
    if not sites:
        return None
    start, end, pattern = random.Random(rng_seed).choice(sites)
    matched = conclusion.plain_text[start:end]
    replacement = _preserve_case(matched, rules.replacement_for(pattern))
    return conclusion.with_edit(start, end, replacement)


def apply_sn(
    conclusion: MarkedConclusion, supporting: SupportingSet, rng_seed: Seed
) -> MarkedConclusion | None:
    """Swap one number in the conclusion for a differing supporting-set number.

    Numbers inside entity surfaces are exempt. Only sites with at least one
    value-different replacement count, so applicability is seed-independent.
    """
    supporting_tokens = _supporting_numbers(supporting)
    if not supporting_tokens:
        return None
    usable = []
    for start, end, literal in _number_sites(conclusion):
        value = float(literal)
        pool = [tok for tok in supporting_tokens if float(tok) != value]
        if pool:
            usable.append((start, end, pool))
    if not usable:
        return None
    rng = random.Random(rng_seed)
    start, end, pool = usable[rng.randrange(len(usable))]
    replacement = rng.choice(pool)
    return conclusion.with_edit(start, end, replacement)


def apply_lpr(
    conclusion: MarkedConclusion, lexicon: AntonymLexicon, rng_seed: Seed
) -> MarkedConclusion | None:
    """Replace one uniformly chosen interaction term with its antonym."""
    sites = _match_sites(conclusion, lexicon.patterns)
    if not sites:
        return None
    start, end, pattern = random.Random(rng_seed).choice(sites)
    matched = conclusion.plain_text[start:end]
    replacement = _preserve_case(matched, lexicon.pairs[pattern])
    return conclusion.with_edit(start, end, replacement)


# --- applicability and batch application ------------------------------------


def _derived_seed(seed: Seed, kind: PerturbationKind) -> str:
    return f"{seed}:{kind.value}"


def apply_kind(
    kind: PerturbationKind,
    conclusion: MarkedConclusion,
    supporting: SupportingSet,
    resources: PerturbResources,
    rng_seed: Seed,
) -> MarkedConclusion | None:
    if kind is PerturbationKind.SEN:
        return apply_sen(conclusion)
    if kind is PerturbationKind.SEP:
        return apply_sep(conclusion)
    if kind is PerturbationKind.SRE:
        return apply_sre(conclusion, supporting, resources.typer, rng_seed)
    if kind is PerturbationKind.SREO:
        if resources.pool is None:
            return None
        return apply_sreo(conclusion, supporting, resources.pool, resources.typer, rng_seed)
    if kind is PerturbationKind.VNEG:
        return apply_vneg(conclusion, resources.negation_rules, rng_seed)
    if kind is PerturbationKind.SN:
        return apply_sn(conclusion, supporting, rng_seed)
    if kind is PerturbationKind.LPR:
        return apply_lpr(conclusion, resources.antonyms, rng_seed)
    raise ValueError(f"{kind} is not a rule-based perturbation")


def applicability(
    conclusion: MarkedConclusion,
    supporting: SupportingSet,
    resources: PerturbResources,
    accepted_generation_kinds: frozenset[PerturbationKind] | set[PerturbationKind] = frozenset(),
) -> set[PerturbationKind]:
    """Which perturbation kinds would produce an output for this instance.

    SEN and SEP always apply. Generation kinds are included only when the
    caller reports accepted generations for this instance (acceptance is
    decided by the generation filters, not here).
    """
    kinds = {PerturbationKind.SEN, PerturbationKind.SEP}
    probes = {
        PerturbationKind.SRE,
        PerturbationKind.SREO,
        PerturbationKind.VNEG,
        PerturbationKind.SN,
        PerturbationKind.LPR,
    }
    for kind in probes:
        try:
            if apply_kind(kind, conclusion, supporting, resources, rng_seed=0) is not None:
                kinds.add(kind)
        except UntypedEntity:
            pass
    kinds.update(k for k in accepted_generation_kinds if k in GENERATION_KINDS)
    return kinds


def perturb_all(
    conclusion: MarkedConclusion,
    supporting: SupportingSet,
    resources: PerturbResources,
    rng_seed: Seed,
    kinds: frozenset[PerturbationKind] | set[PerturbationKind] = RULE_BASED_KINDS,
) -> dict[PerturbationKind, MarkedConclusion]:
    """Apply every applicable rule-based kind with a per-kind derived seed."""
    out: dict[PerturbationKind, MarkedConclusion] = {}
    for kind in sorted(kinds & RULE_BASED_KINDS, key=lambda k: k.value):
        try:
            result = apply_kind(
                kind, conclusion, supporting, resources, _derived_seed(rng_seed, kind)
            )
        except UntypedEntity:
            result = None
        if result is not None:
            out[kind] = result
    return out
