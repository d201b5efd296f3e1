"""mechnli: build adversarial NLI datasets from entity-annotated abstracts.

The pipeline runs corpus ingestion -> conclusion extraction -> rule-based
and generation-based perturbation -> filtering -> dataset assembly, and a
separate harness scores classifier predictions per perturbation category.
"""

__version__ = "0.1.0"

from .corpus import (
    Abstract,
    EntityMention,
    MarkedConclusion,
    Role,
    Sentence,
    SupportingSet,
    load_corpus,
    parse_marked,
    render_marked,
)
from .dataset import (
    DatasetStats,
    InstanceGroup,
    Label,
    NLIInstance,
    SplitPolicy,
    applicability_histogram,
    assemble,
)
from .decoding import (
    Clause,
    ConstraintSet,
    DecodeResult,
    DecoderConfig,
    Literal,
    Polarity,
    build_ng_constraints,
    build_sen_constraints,
    build_sre_constraints,
    decode,
)
from .entities import EntityPool, EntityTyper, LexiconTyper
from .evaluate import EvalReport, consistency, evaluate
from .extract import ExtractionResult, PhraseTable, find_conclusion, split_abstract
from .filters import (
    FilterConfig,
    GndScheme,
    KeywordRelationPredictor,
    TokenCosineSimilarity,
    filter_gen,
    filter_gnd,
)
from .lm import NGramLM, SequenceScorer, score_sequence, train_ngram
from .perturb import (
    AntonymLexicon,
    NegationRules,
    PerturbationKind,
    PerturbResources,
    applicability,
    apply_lpr,
    apply_sen,
    apply_sep,
    apply_sn,
    apply_sre,
    apply_sreo,
    apply_vneg,
)

__all__ = [name for name in dir() if not name.startswith("_")]
