"""Gender-stereotype auditing for word embeddings, plus a planted-bias
training simulator and a Bayesian-employer comparator."""

__version__ = "0.1.0"

from .embeddings import EmbeddingTable, load_table, lookup_phrase, save_table  # noqa: E402
from .lexicon import Lexicon, coverage_check, load_lexicon  # noqa: E402
from .report import AuditOptions, AuditReport, audit, audit_paths, render  # noqa: E402
from .weat import (  # noqa: E402
    PermutationPlan,
    WeatQuery,
    WeatResult,
    WordSet,
    association,
    cosine,
    effect_size,
    permutation_test,
    run_query,
    weat_statistic,
)

__all__ = [
    "__version__",
    "EmbeddingTable", "load_table", "lookup_phrase", "save_table",
    "Lexicon", "coverage_check", "load_lexicon",
    "AuditOptions", "AuditReport", "audit", "audit_paths", "render",
    "PermutationPlan", "WeatQuery", "WeatResult", "WordSet",
    "association", "cosine", "effect_size", "permutation_test",
    "run_query", "weat_statistic",
]
