"""Next-token scoring: the SequenceScorer contract and a bundled n-gram LM.

A SequenceScorer exposes an ordered vocabulary and a full log-probability
vector over it for any prefix; the distribution must exponentiate to 1 and
be deterministic per prefix. The bundled model is an absolute-discount
interpolated n-gram LM, a desk-scale stand-in for an external generation
model served through the bridge.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import numpy as np

from .errors import EmptyCorpus

EOS = "</s>"
UNK = "<unk>"
_PAD = "<s>"


class SequenceScorer(Protocol):
    eos: str

    def vocab(self) -> tuple[str, ...]: ...

    def logprobs(self, prefix: Sequence[str]) -> np.ndarray: ...


class NGramLM:
    """Interpolated n-gram model with absolute discounting.

    Probability mass removed by the discount is redistributed through the
    next-lower order, bottoming out at a uniform floor over the vocabulary,
    so every token has positive probability after any prefix and each
    distribution sums to one exactly.
    """

    def __init__(self, order: int, discount: float = 0.4):
        if order < 1:
            raise ValueError(f"order must be >= 1, got {order}")
        if not (0.0 < discount < 1.0):
            raise ValueError(f"discount must be in (0, 1), got {discount}")
        self.order = order
        self.discount = discount
        self.eos = EOS
        self._vocab: tuple[str, ...] = ()
        self._index: dict[str, int] = {}
        # context tuple -> {token index -> count}; contexts of length 0..order-1.
        self._counts: dict[tuple[str, ...], dict[int, int]] = {}
        self._totals: dict[tuple[str, ...], int] = {}

    def vocab(self) -> tuple[str, ...]:
        return self._vocab

    @property
    def eos_index(self) -> int:
        return self._index[EOS]

    def _fit(self, sequences: Iterable[Sequence[str]]) -> None:
        sequences = [list(seq) for seq in sequences]
        tokens_seen = sorted({tok for seq in sequences for tok in seq})
        if not sequences or not any(sequences):
            raise EmptyCorpus("no training sequences with tokens")
        self._vocab = tuple(tokens_seen) + (EOS, UNK)
        self._index = {tok: i for i, tok in enumerate(self._vocab)}
        for seq in sequences:
            padded = [_PAD] * (self.order - 1) + list(seq) + [EOS]
            for pos in range(self.order - 1, len(padded)):
                token_id = self._index[padded[pos]]
                for ctx_len in range(self.order):
                    context = tuple(padded[pos - ctx_len : pos])
                    bucket = self._counts.setdefault(context, {})
                    bucket[token_id] = bucket.get(token_id, 0) + 1
                    self._totals[context] = self._totals.get(context, 0) + 1

    def _prob_vector(self, context: tuple[str, ...]) -> np.ndarray:
        size = len(self._vocab)
        if len(context) == 0:
            lower = np.full(size, 1.0 / size)
        else:
            lower = self._prob_vector(context[1:])
        total = self._totals.get(context, 0)
        if total == 0:
            return lower
        bucket = self._counts[context]
        probs = np.zeros(size)
        for token_id, count in bucket.items():
            probs[token_id] = (count - self.discount) / total
        backoff_mass = self.discount * len(bucket) / total
        return probs + backoff_mass * lower

    def logprobs(self, prefix: Sequence[str]) -> np.ndarray:
        mapped = [tok if tok in self._index else UNK for tok in prefix]
        padded = [_PAD] * (self.order - 1) + mapped
        context = tuple(padded[len(padded) - (self.order - 1) :]) if self.order > 1 else ()
        return np.log(self._prob_vector(context))

    # --- serialization (model files for the CLI stages) ---------------------

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "discount": self.discount,
            "vocab": list(self._vocab),
            "counts": [
                [list(ctx), {str(t): c for t, c in bucket.items()}]
                for ctx, bucket in sorted(self._counts.items())
            ],
        }

    @classmethod
    def from_json(cls, payload: dict) -> "NGramLM":
        model = cls(order=payload["order"], discount=payload["discount"])
        model._vocab = tuple(payload["vocab"])
        model._index = {tok: i for i, tok in enumerate(model._vocab)}
        for ctx, bucket in payload["counts"]:
            counts = {int(t): int(c) for t, c in bucket.items()}
            model._counts[tuple(ctx)] = counts
            model._totals[tuple(ctx)] = sum(counts.values())
        return model

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "NGramLM":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def train_ngram(
    corpus: Iterable[Sequence[str]], order: int, discount: float = 0.4
) -> NGramLM:
    """Train the bundled n-gram model on a stream of token sequences."""
    model = NGramLM(order=order, discount=discount)
    model._fit(corpus)
    return model


def score_sequence(scorer: SequenceScorer, tokens: Sequence[str]) -> float:
    """Total log-probability of ``tokens`` followed by end-of-sequence."""
    vocab = scorer.vocab()
    index = {tok: i for i, tok in enumerate(vocab)}
    unk = index.get(UNK)
    total = 0.0
    prefix: list[str] = []
    for tok in list(tokens) + [scorer.eos]:
        row = scorer.logprobs(prefix)
        tok_id = index.get(tok, unk)
        if tok_id is None:
            raise ValueError(f"token {tok!r} not in scorer vocabulary")
        total += float(row[tok_id])
        prefix.append(tok)
    return total
