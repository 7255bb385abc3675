"""Sentiment quad linearization, recovery, and evaluation toolkit."""

from .core import (
    CategoryVocab,
    Example,
    Polarity,
    SentimentQuad,
    SentiquadError,
    Task,
    UnknownCategoryError,
    canonicalize,
)
from .linearize import (
    LinearizedTarget,
    ProjectionMode,
    SSEP,
    build_input,
    build_target,
    linearize_quad,
    project_aspect,
    project_category,
    project_polarity,
)
from .recover import (
    ParsedQuad,
    ParseFailure,
    RecoveryResult,
    parse_clause,
    recover_quads,
    split_segments,
)
from .scoring import (
    ErrorBreakdown,
    EvalReport,
    categorize_errors,
    detect_generation_error,
    score,
)
from .dataio import (
    DatasetFormatError,
    DatasetStats,
    MergeConflict,
    compute_stats,
    derive_polarity_lexicon,
    import_delimited,
    merge_annotations,
    mix_tasks,
    read_examples,
    sample_count,
    sample_fraction,
    split_train_dev,
    write_examples,
)
from .backends import (
    GenerationRequest,
    HttpBackend,
    OracleBackend,
    PerturbBackend,
    PerturbConfig,
)

__version__ = "0.1.0"

__all__ = [
    "CategoryVocab",
    "Example",
    "Polarity",
    "SentimentQuad",
    "SentiquadError",
    "Task",
    "UnknownCategoryError",
    "canonicalize",
    "LinearizedTarget",
    "ProjectionMode",
    "SSEP",
    "build_input",
    "build_target",
    "linearize_quad",
    "project_aspect",
    "project_category",
    "project_polarity",
    "ParsedQuad",
    "ParseFailure",
    "RecoveryResult",
    "parse_clause",
    "recover_quads",
    "split_segments",
    "ErrorBreakdown",
    "EvalReport",
    "categorize_errors",
    "detect_generation_error",
    "score",
    "DatasetFormatError",
    "DatasetStats",
    "MergeConflict",
    "compute_stats",
    "derive_polarity_lexicon",
    "import_delimited",
    "merge_annotations",
    "mix_tasks",
    "read_examples",
    "sample_count",
    "sample_fraction",
    "split_train_dev",
    "write_examples",
    "GenerationRequest",
    "HttpBackend",
    "OracleBackend",
    "PerturbBackend",
    "PerturbConfig",
]
