"""Constrained generation: train a small LM, then decode under constraints.

Three constraint schemes turn a correct conclusion into hard negatives:
swapped entity roles (required phrases), a replaced entity (required
phrases plus a dissimilarity check downstream), and forbidden original
entities (negative phrases that must never appear).

Run with: python demos/02_constrained_decoding.py
"""

from mechnli import (
    DecoderConfig,
    build_ng_constraints,
    build_sen_constraints,
    decode,
    parse_marked,
    train_ngram,
)
from mechnli.tokenization import detokenize, tokenize

conclusion = parse_marked(
    "We conclude that <re> glucose <er> accelerates the <el> uracil <le> exit."
)

# Desk-scale stand-in for a neural generator: an n-gram model over a few
# mechanism-flavoured sentences (markers are ordinary tokens to it).
corpus = [
    "glucose accelerates the uracil exit from washed cells",
    "the uracil exit is an active process",
    "<re> glucose <er> accelerates the <el> uracil <le> exit",
    "<re> uracil <er> exit follows the <el> glucose <le> supply",
    "<el> glucose <le> levels track the <re> uracil <er> gradient",
    "the gradient was lowered by sodium azide",
]
model = train_ngram([tokenize(line) for line in corpus], order=3, discount=0.4)

config = DecoderConfig(
    beam_size=8, prune_factor=8, sat_tolerance=2, ngram_block=10, min_len=6, max_len=24
)
prompt = tuple(tokenize("the uracil exit was measured after adding glucose"))

swapped = build_sen_constraints(conclusion)
print("required phrases:", swapped.positive_phrases())
for result in decode(model, swapped, config, prompt=prompt)[:3]:
    flag = "FULL" if result.fully_satisfied else f"{result.satisfied_clauses} clauses"
    print(f"  [{flag}] {result.model_score:8.3f}  {detokenize(result.tokens)}")
print()

forbidden = build_ng_constraints(conclusion)
print("forbidden phrases:", forbidden.negative_phrases())
for result in decode(model, forbidden, config, prompt=prompt)[:3]:
    flag = "FULL" if result.fully_satisfied else "partial"
    print(f"  [{flag}] {result.model_score:8.3f}  {detokenize(result.tokens)}")
