"""Content-based recommendation of semantic predicate groups for structuring
scholarly contributions, built on text clustering of paper titles and
abstracts."""

from .cluster import (
    ClusterAssignment,
    ClusteringConfig,
    EvalAssignment,
    KMeans,
    WardAgglomerative,
    assign_eval_protocol,
    cut_linkage,
    fit_clustering,
    load_model,
    save_model,
)
from .corpus import (
    ComparisonRecord,
    ContributionRecord,
    Corpus,
    CorpusStats,
    PaperRecord,
    PredicateGroup,
    SplitSpec,
    derive_predicate_groups,
    ingest,
    split,
)
from .errors import (
    CorpusFormatError,
    DanglingReferenceError,
    DataError,
    DuplicateIdError,
    FingerprintMismatchError,
    ModelError,
    PredgroupsError,
    ProviderError,
)
from .evaluate import (
    EvalConfig,
    ScoreReport,
    ScoreRow,
    baseline_lda,
    baseline_research_field,
    evaluate_model,
    regen,
    score_instance,
    sweep,
)
from .metadata import AbstractProvider
from .recommend import Recommendation, RecommendationQuery, Recommender
from .vectorize import (
    EmbeddingMatrix,
    TfidfTextVectorizer,
    concat_title_abstract,
    load_embeddings,
    save_embeddings,
    tokenize,
)

__version__ = "0.1.0"

__all__ = [
    "AbstractProvider",
    "ClusterAssignment",
    "ClusteringConfig",
    "ComparisonRecord",
    "ContributionRecord",
    "Corpus",
    "CorpusFormatError",
    "CorpusStats",
    "DanglingReferenceError",
    "DataError",
    "DuplicateIdError",
    "EmbeddingMatrix",
    "EvalAssignment",
    "EvalConfig",
    "FingerprintMismatchError",
    "KMeans",
    "ModelError",
    "PaperRecord",
    "PredgroupsError",
    "PredicateGroup",
    "ProviderError",
    "Recommendation",
    "RecommendationQuery",
    "Recommender",
    "ScoreReport",
    "ScoreRow",
    "SplitSpec",
    "TfidfTextVectorizer",
    "WardAgglomerative",
    "assign_eval_protocol",
    "baseline_lda",
    "baseline_research_field",
    "concat_title_abstract",
    "cut_linkage",
    "derive_predicate_groups",
    "evaluate_model",
    "fit_clustering",
    "ingest",
    "load_embeddings",
    "load_model",
    "regen",
    "save_embeddings",
    "save_model",
    "score_instance",
    "split",
    "sweep",
    "tokenize",
]
