"""subalign: align a labeled NER corpus's subword/label distribution with a
target domain's by re-tokenizing it, solved as entropic optimal transport."""

from .corpus import (
    OUTSIDE,
    BioLabel,
    FrequencyTable,
    LabeledCorpus,
    count_frequencies,
    parse_conll,
    serialize_conll,
)
from .diagnostics import (
    BenchRecord,
    KlReport,
    bench_solver,
    compare_before_after,
    kl_conditional,
    kl_joint,
    random_instance,
)
from .estimator import (
    DEFAULT_ALPHA,
    DEFAULT_GAMMA,
    UNSEEN_COST,
    TargetStats,
    TransportInstance,
    build_instance,
    enumerate_corpus_segmentations,
    estimate_target,
    load_instance,
    save_instance,
)
from .lexicon import EntityLexicon, annotate, annotate_corpus, load_lexicon
from .policy import (
    RetokenizationPolicy,
    derive_policy,
    load_policy,
    load_policy_file,
    policy_to_jsonl,
    retokenize_corpus,
    save_policy,
    subword_conditionals,
)
from .segmenter import (
    DEFAULT_SEGMENTATION_CAP,
    MAX_ENUMERATION_CHARS,
    Segmentation,
    SubwordVocab,
    enumerate_segmentations,
    load_vocab,
    reconstruct,
    subword_set,
    tokenize_default,
)
from .solver import SolverConfig, TransportPlan, plan_entropy, solve, transport_cost

__version__ = "0.1.0"

__all__ = [
    "BenchRecord",
    "BioLabel",
    "DEFAULT_ALPHA",
    "DEFAULT_GAMMA",
    "DEFAULT_SEGMENTATION_CAP",
    "EntityLexicon",
    "FrequencyTable",
    "KlReport",
    "LabeledCorpus",
    "MAX_ENUMERATION_CHARS",
    "OUTSIDE",
    "RetokenizationPolicy",
    "Segmentation",
    "SolverConfig",
    "SubwordVocab",
    "TargetStats",
    "TransportInstance",
    "TransportPlan",
    "UNSEEN_COST",
    "annotate",
    "annotate_corpus",
    "bench_solver",
    "build_instance",
    "compare_before_after",
    "count_frequencies",
    "derive_policy",
    "enumerate_corpus_segmentations",
    "enumerate_segmentations",
    "estimate_target",
    "kl_conditional",
    "kl_joint",
    "load_instance",
    "load_lexicon",
    "load_policy",
    "load_policy_file",
    "load_vocab",
    "parse_conll",
    "plan_entropy",
    "policy_to_jsonl",
    "random_instance",
    "reconstruct",
    "retokenize_corpus",
    "save_instance",
    "save_policy",
    "serialize_conll",
    "solve",
    "subword_conditionals",
    "subword_set",
    "tokenize_default",
    "transport_cost",
]
