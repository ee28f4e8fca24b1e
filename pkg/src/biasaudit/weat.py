"""Word-embedding association test: statistic, effect size, permutation p.

Definitions, for target sets X, Y and attribute sets A, B over one table:

    assoc(w)        = mean_a cos(w, a) - mean_b cos(w, b)
    statistic       = sum_{x in X} assoc(x) - sum_{y in Y} assoc(y)
    effect_size d   = (mean_X assoc - mean_Y assoc) / sd(assoc over X u Y)

The statistic uses sums, the effect size means; both are reported. sd is the
sample standard deviation (ddof=1). Positive d means the X/A pairing
(stereotype-congruent direction) dominates.

The permutation test is ONE-SIDED (greater): X u Y is re-partitioned into
equal halves (X', Y') and

    p = (1 + #{partitions with statistic' >= statistic}) / (1 + #evaluated)

The +1 smoothing keeps p > 0. Exact mode enumerates all C(2n, n) partitions
when that count is <= EXACT_PARTITION_LIMIT; Monte Carlo mode samples
`count` uniform partitions. Each sampled partition derives its randomness
from (seed, partition_index) through a counter-based generator, so the
sampled set is identical regardless of how the work is scheduled or split.

Per-word associations depend only on (w, A, B), never on the partition, so
they are computed once and reused across all permutations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .embeddings import EmbeddingTable, lookup_phrase
from .errors import (
    ConfigError,
    DegenerateDispersionError,
    DimensionMismatch,
    ValidationError,
    ZeroVectorError,
)

EXACT_PARTITION_LIMIT = 100_000
DEFAULT_PERMUTATIONS = 10_000

# draws consumed per sampled partition are padded to whole 128-bit Philox
# blocks (4 x 64-bit) so per-index derivation and bulk drawing agree
_PHILOX_BLOCK = 4


def cosine(u, v) -> float:
    """Cosine similarity, clamped to [-1, 1] to absorb rounding.

    Raises ZeroVectorError when either norm is <= 1e-12, DimensionMismatch
    for unequal lengths.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionMismatch(f"dimensions {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu <= 1e-12 or nv <= 1e-12:
        raise ZeroVectorError("cosine undefined for a (near-)zero vector")
    return float(np.clip(float(np.dot(u, v)) / (nu * nv), -1.0, 1.0))


@dataclass(frozen=True)
class WordSet:
    label: str
    words: tuple[str, ...]

    def __init__(self, label: str, words):
        words = tuple(words)
        if any(not w or not w.strip() for w in words):
            raise ValidationError(f"word set {label!r} contains an empty phrase")
        if len(set(words)) != len(words):
            raise ValidationError(f"word set {label!r} contains duplicate phrases")
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "words", words)

    def __len__(self) -> int:
        return len(self.words)


@dataclass(frozen=True)
class PermutationPlan:
    """exact, or monte-carlo with (count, seed)."""

    mode: str = "monte-carlo"
    count: int = DEFAULT_PERMUTATIONS
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("exact", "monte-carlo"):
            raise ConfigError(f"unknown permutation mode {self.mode!r}")
        if self.mode == "monte-carlo" and self.count < 1:
            raise ConfigError("monte-carlo permutation count must be >= 1")


@dataclass(frozen=True)
class WeatQuery:
    X: WordSet
    Y: WordSet
    A: WordSet
    B: WordSet
    table: EmbeddingTable
    permutations: PermutationPlan = field(default_factory=PermutationPlan)
    policy: str = "underscore-then-average"

    def __post_init__(self):
        if len(self.X) != len(self.Y):
            raise ValidationError(
                f"target sets must be equal-sized: |{self.X.label}|={len(self.X)}, "
                f"|{self.Y.label}|={len(self.Y)}"
            )
        if len(self.X) < 1:
            raise ValidationError("target sets must be non-empty")
        if set(self.X.words) & set(self.Y.words):
            raise ValidationError("target sets overlap")
        if len(self.A) < 1 or len(self.B) < 1:
            raise ValidationError("attribute sets need at least 1 phrase each")
        if set(self.A.words) & set(self.B.words):
            raise ValidationError("attribute sets overlap")


@dataclass(frozen=True)
class WeatResult:
    statistic: float
    effect_size: float
    p_value: float
    permutation_mode: str
    permutation_count: int
    per_word_associations: dict[str, float]


def association(w: str, A: WordSet, B: WordSet, table: EmbeddingTable,
                policy: str = "underscore-then-average") -> float:
    """Mean cosine of w against A minus mean cosine against B."""
    wv = lookup_phrase(table, w, policy)
    mean_a = float(np.mean([cosine(wv, lookup_phrase(table, a, policy)) for a in A.words]))
    mean_b = float(np.mean([cosine(wv, lookup_phrase(table, b, policy)) for b in B.words]))
    return mean_a - mean_b


def _associations(q: WeatQuery) -> np.ndarray:
    """assoc values for X's words then Y's words, in order."""
    return np.array(
        [association(w, q.A, q.B, q.table, q.policy) for w in q.X.words + q.Y.words],
        dtype=np.float64,
    )


def weat_statistic(q: WeatQuery) -> float:
    """Sum of X associations minus sum of Y associations (sums, not means)."""
    assoc = _associations(q)
    n = len(q.X)
    return float(np.sum(assoc[:n]) - np.sum(assoc[n:]))


def effect_size(q: WeatQuery) -> float:
    """Standardized mean association gap over X u Y (sample sd, ddof=1).

    Raises DegenerateDispersionError when the pooled sd is <= 1e-12.
    """
    assoc = _associations(q)
    n = len(q.X)
    sd = float(np.std(assoc, ddof=1))
    if sd <= 1e-12:
        raise DegenerateDispersionError("zero dispersion of per-word associations")
    return float((np.mean(assoc[:n]) - np.mean(assoc[n:])) / sd)


def _partition_statistics_exact(assoc: np.ndarray, n: int) -> np.ndarray:
    """Statistics of every equal-half partition of the 2n pooled words.

    For a partition choosing index set S as X': stat = 2*sum(assoc[S]) - total.
    """
    total = float(np.sum(assoc))
    idx = np.array(list(combinations(range(2 * n), n)), dtype=np.intp)
    return 2.0 * assoc[idx].sum(axis=1) - total


def _sample_partitions(seed: int, n: int, start: int, stop: int) -> np.ndarray:
    """Uniformly sampled index sets for partitions [start, stop).

    Partition i consumes the raw 64-bit draws of Philox counter blocks
    [i*bpp, (i+1)*bpp) keyed by `seed`, so the sample for index i does not
    depend on which worker produced it or how many partitions were drawn
    before it.
    """
    m = stop - start
    bpp = -(-n // _PHILOX_BLOCK)  # ceil(n / 4) blocks per partition
    key = seed & ((1 << 128) - 1)
    bg = np.random.Philox(key=key)
    if start:
        bg.advance(start * bpp)
    raw = bg.random_raw(m * bpp * _PHILOX_BLOCK).reshape(m, bpp * _PHILOX_BLOCK)[:, :n]

    # partial Fisher-Yates: after k swaps the first n slots hold a uniform
    # random n-subset of the 2n indices
    pool = 2 * n
    idx = np.tile(np.arange(pool, dtype=np.intp), (m, 1))
    rows = np.arange(m)
    for k in range(n):
        j = k + (raw[:, k] % np.uint64(pool - k)).astype(np.intp)
        tmp = idx[rows, j].copy()
        idx[rows, j] = idx[rows, k]
        idx[rows, k] = tmp
    return idx[:, :n]


def _partition_statistics_sampled(assoc: np.ndarray, n: int, seed: int,
                                  start: int, stop: int) -> np.ndarray:
    total = float(np.sum(assoc))
    chosen = _sample_partitions(seed, n, start, stop)
    return 2.0 * assoc[chosen].sum(axis=1) - total


def exact_partition_count(n: int) -> int:
    return math.comb(2 * n, n)


def _p_value(assoc: np.ndarray, n: int, plan: PermutationPlan) -> tuple[float, int]:
    """(smoothed one-sided p, partitions evaluated) from cached associations.

    The observed statistic goes through the same cached-association route as
    the permuted ones, so ties (e.g. all-identical vectors) compare exactly.
    """
    total = float(np.sum(assoc))
    s_obs = 2.0 * float(assoc[:n].sum()) - total
    if plan.mode == "exact":
        count = exact_partition_count(n)
        if count > EXACT_PARTITION_LIMIT:
            raise ConfigError(
                f"exact enumeration needs {count} partitions "
                f"(limit {EXACT_PARTITION_LIMIT}); use monte-carlo"
            )
        stats = _partition_statistics_exact(assoc, n)
    else:
        count = plan.count
        stats = _partition_statistics_sampled(assoc, n, plan.seed, 0, count)
    greater = int(np.count_nonzero(stats >= s_obs))
    return (1 + greater) / (1 + count), count


def permutation_test(q: WeatQuery) -> float:
    """One-sided (greater) permutation p-value; see module docstring."""
    p, _ = _p_value(_associations(q), len(q.X), q.permutations)
    return p


def run_query(q: WeatQuery) -> WeatResult:
    """Statistic, effect size and p-value in one pass over the associations."""
    assoc = _associations(q)
    n = len(q.X)

    statistic = float(np.sum(assoc[:n]) - np.sum(assoc[n:]))
    sd = float(np.std(assoc, ddof=1))
    if sd <= 1e-12:
        raise DegenerateDispersionError("zero dispersion of per-word associations")
    d = float((np.mean(assoc[:n]) - np.mean(assoc[n:])) / sd)
    p, count = _p_value(assoc, n, q.permutations)

    return WeatResult(
        statistic=statistic,
        effect_size=d,
        p_value=p,
        permutation_mode=q.permutations.mode,
        permutation_count=count,
        per_word_associations={w: float(a)
                               for w, a in zip(q.X.words + q.Y.words, assoc)},
    )
