import numpy as np
import pytest

from biasaudit.embeddings import EmbeddingTable


def make_table(entries: dict, dimension=None, label="test") -> EmbeddingTable:
    dim = dimension or len(next(iter(entries.values())))
    return EmbeddingTable(dim, {k: np.asarray(v, float) for k, v in entries.items()},
                          source_label=label)


@pytest.fixture
def basis_table():
    """e1/e2 style table in R^2 plus a diagonal and a negated axis."""
    return make_table({
        "e1": [1.0, 0.0],
        "e2": [0.0, 1.0],
        "diag": [1.0, 1.0],
        "neg1": [-1.0, 0.0],
    })


def write_word2vec(path, rows, header=None):
    """rows: list of (token, [floats]); header defaults to actual count/dim."""
    if header is None:
        header = (len(rows), len(rows[0][1]))
    lines = [f"{header[0]} {header[1]}"]
    for token, vals in rows:
        lines.append(token + " " + " ".join(format(v, ".17g") for v in vals))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
