"""Extract one static vector per lexicon phrase from a checkpoint's input
embeddings (layer 0) and emit the word2vec text interchange format.

Pooling is fixed to input-embedding-mean-over-subwords: a phrase's vector
is the arithmetic mean of the input-embedding rows of its subword tokens,
computed in float64. Layer-0 rows are prompt-free and deterministic, so a
pinned checkpoint revision re-extracts byte-identically.

Output format (consumed by the audit toolkit): UTF-8, header line
"<count> <dimension>", then one "token v1 ... vdim" row per phrase with
spaces mapped to underscores and floats carrying 17 significant digits.
A JSON manifest sidecar records the model id, revision, dimension,
per-word subword counts, skipped phrases, and content hashes.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

POOLING_MODES = ("input-embedding-mean-over-subwords",)


class ExtractionError(Exception):
    pass


@dataclass(frozen=True)
class ExtractionSpec:
    model: str                       # hub id or local checkpoint directory
    lexicon: str | Path
    output: str | Path
    manifest: str | Path | None = None   # default: output path + ".manifest.json"
    pooling: str = "input-embedding-mean-over-subwords"
    lowercase: bool = False
    revision: str | None = None

    def __post_init__(self):
        if self.pooling not in POOLING_MODES:
            raise ExtractionError(f"unsupported pooling {self.pooling!r}")

    @property
    def manifest_path(self) -> Path:
        if self.manifest is not None:
            return Path(self.manifest)
        return Path(str(self.output) + ".manifest.json")


@dataclass(frozen=True)
class ExtractionResult:
    output: Path
    manifest: Path
    dimension: int
    n_phrases: int
    skipped: tuple[str, ...] = field(default=())


def lexicon_phrases(path: str | Path) -> list[str]:
    """All unique phrases of a lexicon file: attributes plus every category's
    target words, in file order. Follows the audit toolkit's lexicon schema
    (word entries are bare strings or {"w": ..., "provenance": ...})."""
    obj = json.loads(Path(path).read_text(encoding="utf-8"))

    def word(entry):
        return entry if isinstance(entry, str) else entry["w"]

    phrases: dict[str, None] = {}
    for side in ("male", "female"):
        for entry in obj["attributes"][side]:
            phrases.setdefault(word(entry))
    for cat in obj["categories"]:
        for side in ("male_stereotyped", "female_stereotyped"):
            for entry in cat[side]:
                phrases.setdefault(word(entry))
    return list(phrases)


def _load_model_bits(spec: ExtractionSpec):
    from transformers import AutoModel, AutoTokenizer

    kwargs = {}
    if spec.revision:
        kwargs["revision"] = spec.revision
    tokenizer = AutoTokenizer.from_pretrained(spec.model, **kwargs)
    model = AutoModel.from_pretrained(spec.model, **kwargs)
    matrix = model.get_input_embeddings().weight.detach().cpu().numpy()
    commit = getattr(model.config, "_commit_hash", None)
    return tokenizer, matrix, commit


def extract(spec: ExtractionSpec) -> ExtractionResult:
    """Emit one interchange row per lexicon phrase plus a manifest sidecar."""
    phrases = lexicon_phrases(spec.lexicon)
    if spec.lowercase:
        seen: dict[str, None] = {}
        for p in phrases:
            seen.setdefault(p.lower())
        phrases = list(seen)

    tokenizer, matrix, commit = _load_model_bits(spec)
    if not np.all(np.isfinite(matrix)):
        raise ExtractionError("checkpoint embedding matrix has non-finite values")
    dim = matrix.shape[1]

    rows: dict[str, np.ndarray] = {}
    origin: dict[str, str] = {}
    subword_counts: dict[str, int] = {}
    skipped: list[str] = []
    for phrase in phrases:
        ids = tokenizer(phrase, add_special_tokens=False)["input_ids"]
        if not ids:
            skipped.append(phrase)
            continue
        token = "_".join(phrase.split())
        if token in rows and origin[token] != phrase:
            raise ExtractionError(
                f"phrases {origin[token]!r} and {phrase!r} collide on token {token!r}")
        rows[token] = matrix[ids].astype(np.float64).mean(axis=0)
        origin[token] = phrase
        subword_counts[phrase] = len(ids)

    out_path = Path(spec.output)
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(rows)} {dim}\n")
        for token, vec in rows.items():
            fh.write(token + " " + " ".join(format(v, ".17g") for v in vec) + "\n")

    manifest = {
        "model": spec.model,
        "revision": spec.revision or commit,
        "pooling": spec.pooling,
        "lowercase": spec.lowercase,
        "dimension": int(dim),
        "vocab_rows": len(rows),
        "lexicon": str(spec.lexicon),
        "subword_counts": subword_counts,
        "skipped_phrases": skipped,
        "embedding_matrix_sha256": hashlib.sha256(
            np.ascontiguousarray(matrix).tobytes()).hexdigest(),
        "output_sha256": hashlib.sha256(out_path.read_bytes()).hexdigest(),
    }
    manifest_path = spec.manifest_path
    manifest_path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8")

    return ExtractionResult(output=out_path, manifest=manifest_path,
                            dimension=dim, n_phrases=len(rows),
                            skipped=tuple(skipped))
