"""Immutable word-embedding tables in the word2vec text interchange format.

Format (bit-exact): UTF-8; line 1 is ``"<vocab_count> <dimension>"``; every
following line is ``token v1 ... vdim``, single-space separated and
newline-terminated. Tokens contain no whitespace. Floats are serialized with
17 significant digits so a write/read round-trip is bitwise exact.

Token matching is case-sensitive. Multi-word phrases are resolved by the
lookup policy: spaces map to underscores first, constituent-mean fallback
second ("underscore-then-average"), or exact underscored token only
("strict"). A lookup never silently returns a zero vector for a missing
token; missing tokens raise.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .errors import OovError, ParseError, PolicyError

POLICIES = ("underscore-then-average", "strict")


class EmbeddingTable:
    """Immutable token -> float64 vector map with a fixed dimension."""

    def __init__(self, dimension: int, entries: dict[str, np.ndarray], source_label: str = ""):
        if dimension < 1:
            raise ParseError(f"dimension must be positive, got {dimension}")
        vectors = {}
        for token, vec in entries.items():
            if not token or any(c.isspace() for c in token):
                raise ParseError(f"invalid token {token!r}: empty or contains whitespace")
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (dimension,):
                raise ParseError(
                    f"token {token!r} has {arr.size} values, expected {dimension}"
                )
            if not np.all(np.isfinite(arr)):
                raise ParseError(f"token {token!r} has non-finite values")
            arr = arr.copy()
            arr.flags.writeable = False
            vectors[token] = arr
        self._dimension = dimension
        self._vectors = vectors
        self.source_label = source_label

    @property
    def dimension(self) -> int:
        return self._dimension

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, token: str) -> bool:
        return token in self._vectors

    def tokens(self):
        return self._vectors.keys()

    def vector(self, token: str) -> np.ndarray:
        """Exact single-token lookup (read-only view)."""
        try:
            return self._vectors[token]
        except KeyError:
            raise OovError([token]) from None


def load_table(path: str | Path, format: str = "word2vec-text") -> EmbeddingTable:
    """Parse and validate a word2vec-text file.

    Raises ParseError (with the offending line number) on a malformed header
    or row, dimension mismatch, non-finite value, or duplicate token.
    """
    if format != "word2vec-text":
        raise ParseError(f"unsupported format {format!r}")
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()  # trailing newline
    if not lines:
        raise ParseError("empty file", line=1)

    header = lines[0].split(" ")
    if len(header) != 2:
        raise ParseError(f"header must be '<count> <dim>', got {lines[0]!r}", line=1)
    try:
        count, dim = int(header[0]), int(header[1])
    except ValueError:
        raise ParseError(f"non-integer header {lines[0]!r}", line=1) from None
    if count < 0 or dim < 1:
        raise ParseError(f"invalid header values count={count} dim={dim}", line=1)

    entries: dict[str, np.ndarray] = {}
    for i, row in enumerate(lines[1:], start=2):
        fields = row.split(" ")
        if len(fields) != dim + 1:
            raise ParseError(
                f"row has {len(fields) - 1} value(s), expected {dim}", line=i
            )
        token = fields[0]
        if not token or any(c.isspace() for c in token):
            raise ParseError(f"invalid token {token!r}", line=i)
        if token in entries:
            raise ParseError(f"duplicate token {token!r}", line=i)
        try:
            values = [float(f) for f in fields[1:]]
        except ValueError:
            raise ParseError(f"non-numeric value in row for {token!r}", line=i) from None
        if not all(math.isfinite(v) for v in values):
            raise ParseError(f"non-finite value in row for {token!r}", line=i)
        entries[token] = np.array(values, dtype=np.float64)

    if len(entries) != count:
        raise ParseError(
            f"header declares {count} entries but {len(entries)} rows were parsed", line=1
        )
    return EmbeddingTable(dim, entries, source_label=path.stem)


def save_table(table: EmbeddingTable, path: str | Path) -> None:
    """Write a table back out; floats carry 17 significant digits."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(table)} {table.dimension}\n")
        for token in table.tokens():
            vec = table.vector(token)
            fh.write(token + " " + " ".join(format(v, ".17g") for v in vec) + "\n")


def lookup_phrase(
    table: EmbeddingTable, phrase: str, policy: str = "underscore-then-average"
) -> np.ndarray:
    """Resolve a (possibly multi-word) phrase to a vector.

    underscore-then-average: return the entry for the phrase with internal
    spaces replaced by "_" if present, otherwise the arithmetic mean of the
    constituent words' vectors. strict: only the exact underscored token.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    phrase = phrase.strip()
    if not phrase:
        raise ValueError("phrase is empty after trimming")

    token = "_".join(phrase.split())
    if token in table:
        return table.vector(token)
    if policy == "strict":
        raise PolicyError(f"token {token!r} not in table (strict policy)")

    words = phrase.split()
    missing = [w for w in words if w not in table]
    if missing:
        raise OovError(missing)
    return np.mean([table.vector(w) for w in words], axis=0)


def resolves(table: EmbeddingTable, phrase: str, policy: str = "underscore-then-average") -> bool:
    """True iff lookup_phrase would succeed."""
    try:
        lookup_phrase(table, phrase, policy)
        return True
    except (OovError, PolicyError):
        return False
