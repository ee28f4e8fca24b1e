"""Plain-HTTP checkpoint fetch for mirror-only environments.

Downloads the minimal file set a checkpoint needs into a local directory
that `from_pretrained` can consume. Useful where the hub client cannot
reach huggingface.co but an artifact mirror re-exposes it, e.g.
<mirror>/<model>/resolve/<revision>/<file>.
"""

from __future__ import annotations

import urllib.request
from pathlib import Path

REQUIRED_FILES = ("config.json",)
WEIGHT_CANDIDATES = ("model.safetensors", "pytorch_model.bin")
TOKENIZER_CANDIDATES = ("tokenizer.json", "vocab.txt", "tokenizer_config.json",
                        "special_tokens_map.json", "tokenizer.model")


class FetchError(Exception):
    pass


def _download(url: str, dest: Path, timeout: float) -> bool:
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            dest.write_bytes(resp.read())
        return True
    except OSError:
        return False


def fetch_checkpoint(endpoint: str, model: str, dest: str | Path,
                     revision: str = "main", timeout: float = 600.0,
                     extra_files: tuple[str, ...] = ()) -> Path:
    """Populate `dest` with config, tokenizer files, and one weight file."""
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    base = f"{endpoint.rstrip('/')}/{model}/resolve/{revision}"

    for name in REQUIRED_FILES + tuple(extra_files):
        if not _download(f"{base}/{name}", dest / name, timeout):
            raise FetchError(f"required file {name!r} not fetchable from {base}")

    got_weights = False
    for name in WEIGHT_CANDIDATES:
        if _download(f"{base}/{name}", dest / name, timeout):
            got_weights = True
            break
    if not got_weights:
        raise FetchError(f"no weight file ({WEIGHT_CANDIDATES}) fetchable from {base}")

    got_tokenizer = False
    for name in TOKENIZER_CANDIDATES:
        got_tokenizer |= _download(f"{base}/{name}", dest / name, timeout)
    if not got_tokenizer:
        raise FetchError(f"no tokenizer files fetchable from {base}")
    return dest
