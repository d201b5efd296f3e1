"""Shared surface tokenization.

The whole toolkit agrees on one tokenizer so that lexical constraints,
language-model scoring, and similarity all see the same token stream:
lowercased, whitespace/punctuation split, with entity marker tags kept
as single tokens.
"""

from __future__ import annotations

import re

REGULATOR_OPEN = "<re>"
REGULATOR_CLOSE = "<er>"
REGULATED_OPEN = "<el>"
REGULATED_CLOSE = "<le>"

MARKER_TOKENS = (REGULATOR_OPEN, REGULATOR_CLOSE, REGULATED_OPEN, REGULATED_CLOSE)

_TOKEN_RE = re.compile(r"<(?:re|er|el|le)>|\w+|[^\w\s]")


def tokenize(text: str) -> list[str]:
    """Split ``text`` into lowercase tokens, keeping marker tags intact."""
    return [t.lower() for t in _TOKEN_RE.findall(text)]


def detokenize(tokens: list[str] | tuple[str, ...]) -> str:
    # Space-joined; adequate for generated hypotheses at desk scale.
    return " ".join(tokens)
