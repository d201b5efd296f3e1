"""Walk through the marker format and every rule-based perturbation.

Run with: python demos/01_markers_and_perturbations.py
"""

from mechnli import EntityPool, LexiconTyper, parse_marked, render_marked
from mechnli.corpus import EntityMention, Sentence, SupportingSet
from mechnli.perturb import PerturbResources, applicability, perturb_all

# A conclusion sentence with its regulator (<re> ... <er>) and regulated
# (<el> ... <le>) entities marked inline.
conclusion = parse_marked(
    "We conclude that, although the <el> ABA <le>-induced the <re> pH <er>(i) "
    "increase is correlated with and even precedes the induction of RAB-16 mRNA "
    "expression and is an essential component of the transduction pathway leading "
    "from the hormone to gene expression, it is not sufficient to cause such "
    "expression."
)

print("plain text: ", conclusion.plain_text[:72], "...")
print("regulator:  ", conclusion.regulator.surface)
print("regulated:  ", conclusion.regulated.surface)
print("round trip: ", parse_marked(render_marked(conclusion)) == conclusion)
print()

# The supporting set provides swap material: typed mentions and numbers.
sentences = (
    "ABA induces an increase in pH(i) from 7.11 to 7.30 within 45 min.",
    "This increase is inhibited by plasma membrane H(+)-ATPase inhibitors.",
    "The weak bases methylamine and ammonia increase the pH(i).",
)


def typed_mention(sentence_index: int, surface: str, label: str) -> EntityMention:
    start = sentences[sentence_index].index(surface)
    return EntityMention(
        surface=surface,
        type_label=label,
        sentence_index=sentence_index,
        start=start,
        end=start + len(surface),
    )


supporting = SupportingSet(
    sentences=tuple(Sentence(i, t) for i, t in enumerate(sentences)),
    mentions=(
        typed_mention(0, "ABA", "chemical"),
        typed_mention(2, "methylamine", "chemical"),
        typed_mention(2, "ammonia", "chemical"),
    ),
)

resources = PerturbResources(
    typer=LexiconTyper(),
    pool=EntityPool(by_type={"chemical": ("integrin", "laminin")}),
)

kinds = applicability(conclusion, supporting, resources)
print("applicable kinds:", sorted(k.value for k in kinds))
print()

for kind, result in perturb_all(conclusion, supporting, resources, rng_seed=7).items():
    print(f"--- {kind.value}")
    print(render_marked(result))
    print()
