"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class MechNliError(Exception):
    """Base class for all toolkit errors."""


class MalformedMarkers(MechNliError):
    """Entity marker tags are missing, duplicated, unbalanced, or interleaved."""


class SchemaViolation(MechNliError):
    """A corpus or prediction record does not conform to the input schema."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class IoFailure(MechNliError):
    """A file could not be read or decoded."""


class UntypedEntity(MechNliError):
    """The entity targeted by a swap has no resolvable type."""


class EmptyCorpus(MechNliError):
    """No training material was supplied to the language model."""


class NoHypothesis(MechNliError):
    """Constrained decoding finished without a single valid hypothesis."""


class DegenerateReplacement(MechNliError):
    """A replacement surface equals the surface it is meant to replace."""


class SchemeMismatch(MechNliError):
    """A constraint set does not match the filtering scheme it is checked under."""


class MissingEntities(MechNliError):
    """A generated candidate lacks one or both main entity surfaces."""


class EmptyGroup(MechNliError):
    """An instance group has no positive instance to anchor it."""


class MissingPrediction(MechNliError):
    """An instance in the dataset has no prediction."""


class UnknownId(MechNliError):
    """A prediction references an instance id absent from the dataset."""
