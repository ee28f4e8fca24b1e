"""Batch audits across embedding tables and a lexicon, with deterministic
JSON/CSV rendering.

A run is one (table, category) pair. Categories whose phrases do not all
resolve are skipped with the missing phrases recorded, never silently
dropped. Each entry carries an `oov_rate`: the share of the category's
phrases (targets plus attributes) with no exact token match in the table,
i.e. phrases that needed constituent averaging or were missing outright.
High rates flag tables that cannot really represent the lexicon's language.

Rendered JSON is canonical: sorted keys, compact separators, floats with 17
significant digits, non-ASCII escaped. Rendering a parsed render is
byte-identical. Worker count never appears in the report, so a run is
byte-identical whether computed on 1 or N workers.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .embeddings import EmbeddingTable, load_table
from .errors import (
    ConfigError,
    DegenerateDispersionError,
    ValidationError,
    ZeroVectorError,
)
from .lexicon import Lexicon, coverage_check
from .weat import PermutationPlan, WeatQuery, WeatResult, WordSet, run_query


@dataclass(frozen=True)
class AuditOptions:
    permutations: PermutationPlan = PermutationPlan()
    lowercase: bool = False
    policy: str = "underscore-then-average"
    workers: int = 1          # execution detail; not echoed into reports


@dataclass(frozen=True)
class AuditRun:
    table: str
    language: str
    category: str
    group: str
    result: WeatResult
    oov_rate: float


@dataclass(frozen=True)
class AuditSkip:
    table: str
    language: str
    category: str
    group: str
    reason: str
    missing: tuple[str, ...]
    oov_rate: float


@dataclass(frozen=True)
class AuditReport:
    runs: tuple[AuditRun, ...]
    skipped: tuple[AuditSkip, ...]
    lexicon_version: str
    tool_version: str
    config_echo: dict


def _norm_words(entries, lowercase: bool) -> list[str]:
    words = [e.w.lower() if lowercase else e.w for e in entries]
    # lowercasing can collapse case-variants; keep first occurrence
    seen: dict[str, None] = {}
    for w in words:
        seen.setdefault(w)
    return list(seen)


def _exact_token_miss_rate(table: EmbeddingTable, phrases: list[str]) -> float:
    missing = sum(1 for p in phrases if "_".join(p.split()) not in table)
    return missing / len(phrases) if phrases else 0.0


def _audit_one_table(table: EmbeddingTable, lex: Lexicon, opts: AuditOptions):
    lowercase = opts.lowercase
    A = WordSet("attributes:male", _norm_words(lex.attributes_male, lowercase))
    B = WordSet("attributes:female", _norm_words(lex.attributes_female, lowercase))
    coverage = coverage_check(lex, table, opts.policy, lowercase)
    cov_by_id = {c.id: c for c in coverage.categories}

    def run_category(cat):
        cov = cov_by_id[cat.id]
        x_words = _norm_words(cat.male_stereotyped, lowercase)
        y_words = _norm_words(cat.female_stereotyped, lowercase)
        phrases = x_words + y_words + list(A.words) + list(B.words)
        oov = _exact_token_miss_rate(table, phrases)
        if not cov.runnable:
            missing = cov.unresolvable + coverage.attributes_unresolvable
            return AuditSkip(table.source_label, lex.language, cat.id, cat.group,
                             reason="unresolvable phrases", missing=missing,
                             oov_rate=oov)
        try:
            query = WeatQuery(
                X=WordSet(f"{cat.id}:male_stereotyped", x_words),
                Y=WordSet(f"{cat.id}:female_stereotyped", y_words),
                A=A, B=B, table=table,
                permutations=opts.permutations, policy=opts.policy,
            )
            result = run_query(query)
        except (ValidationError, DegenerateDispersionError, ZeroVectorError) as e:
            # e.g. lowercasing collapsed case-variants into unequal target
            # sets, or zero association dispersion; config errors propagate
            return AuditSkip(table.source_label, lex.language, cat.id, cat.group,
                             reason=str(e), missing=(), oov_rate=oov)
        return AuditRun(table.source_label, lex.language, cat.id, cat.group,
                        result=result, oov_rate=oov)

    if opts.workers > 1:
        with ThreadPoolExecutor(max_workers=opts.workers) as pool:
            outcomes = list(pool.map(run_category, lex.categories))
    else:
        outcomes = [run_category(c) for c in lex.categories]
    return outcomes


def audit(tables: list[EmbeddingTable], lex: Lexicon,
          opts: AuditOptions = AuditOptions()) -> AuditReport:
    """One entry per (table, category) pair, ordered by table then category."""
    runs: list[AuditRun] = []
    skipped: list[AuditSkip] = []
    for table in tables:
        for outcome in _audit_one_table(table, lex, opts):
            if isinstance(outcome, AuditRun):
                runs.append(outcome)
            else:
                skipped.append(outcome)
    runs.sort(key=lambda r: (r.table, r.category))
    skipped.sort(key=lambda r: (r.table, r.category))
    return AuditReport(
        runs=tuple(runs),
        skipped=tuple(skipped),
        lexicon_version=lex.version_hash(),
        tool_version=__version__,
        config_echo={
            "lowercase": opts.lowercase,
            "policy": opts.policy,
            "permutations": {
                "mode": opts.permutations.mode,
                "count": opts.permutations.count,
                "seed": opts.permutations.seed,
            },
        },
    )


def audit_paths(table_paths: list[str | Path], lexicon_path: str | Path,
                opts: AuditOptions = AuditOptions(),
                allow_partial: bool = False) -> AuditReport:
    from .lexicon import load_lexicon

    tables = [load_table(p) for p in table_paths]
    lex = load_lexicon(lexicon_path, allow_partial)
    return audit(tables, lex, opts)


def report_to_dict(report: AuditReport) -> dict:
    return {
        "tool_version": report.tool_version,
        "lexicon_version": report.lexicon_version,
        "config_echo": report.config_echo,
        "runs": [
            {
                "table": r.table,
                "language": r.language,
                "category": r.category,
                "group": r.group,
                "statistic": r.result.statistic,
                "effect_size": r.result.effect_size,
                "p_value": r.result.p_value,
                "permutation_mode": r.result.permutation_mode,
                "permutation_count": r.result.permutation_count,
                "oov_rate": r.oov_rate,
                "per_word_associations": r.result.per_word_associations,
            }
            for r in report.runs
        ],
        "skipped": [
            {
                "table": s.table,
                "language": s.language,
                "category": s.category,
                "group": s.group,
                "reason": s.reason,
                "missing": list(s.missing),
                "oov_rate": s.oov_rate,
            }
            for s in report.skipped
        ],
    }


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, 17-significant-digit floats, ASCII."""
    return _canon(obj)


def _canon(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if obj != obj or obj in (float("inf"), float("-inf")):
            raise ValueError("non-finite float in report")
        return format(obj, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=True)
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_canon(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = sorted(obj.items(), key=lambda kv: kv[0])
        return "{" + ",".join(
            json.dumps(k, ensure_ascii=True) + ":" + _canon(v) for k, v in items) + "}"
    raise TypeError(f"cannot canonicalize {type(obj).__name__}")


CSV_COLUMNS = ("table", "language", "category", "group", "statistic",
               "effect_size", "p_value", "mode", "permutations", "seed")


def render(report: AuditReport, format: str = "json") -> bytes:
    """Serialize a report; JSON carries everything, CSV only the run grid."""
    if format == "json":
        return (canonical_json(report_to_dict(report)) + "\n").encode("utf-8")
    if format == "csv":
        seed = report.config_echo.get("permutations", {}).get("seed", "")
        lines = [",".join(CSV_COLUMNS)]
        for r in report.runs:
            lines.append(",".join([
                r.table, r.language, r.category, r.group,
                format_float(r.result.statistic),
                format_float(r.result.effect_size),
                format_float(r.result.p_value),
                r.result.permutation_mode,
                str(r.result.permutation_count),
                str(seed),
            ]))
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise ConfigError(f"unknown render format {format!r}")


def format_float(x: float) -> str:
    return format(float(x), ".17g")
