"""Exception types shared across the toolkit.

Exit-code mapping used by the CLI:
  input errors (unreadable/malformed files)          -> 1
  validation/configuration errors (bad data, limits) -> 2
  anything else (internal invariant violations)      -> 3
"""


class AuditError(Exception):
    """Base class for all toolkit errors."""


class ParseError(AuditError):
    """Malformed embedding file (bad header, row, value, or duplicate token)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class OovError(AuditError):
    """Phrase could not be resolved; carries every missing constituent."""

    def __init__(self, missing: list[str]):
        self.missing = list(missing)
        super().__init__("out-of-vocabulary: " + ", ".join(repr(m) for m in self.missing))


class PolicyError(AuditError):
    """Strict lookup requested but the exact token is absent."""


class ZeroVectorError(AuditError):
    """Cosine is undefined for a (near-)zero vector."""


class DimensionMismatch(AuditError):
    """Vectors of different dimension were combined."""


class DegenerateDispersionError(AuditError):
    """Effect size is undefined: association spread is (near-)zero."""


class ConfigError(AuditError):
    """Requested configuration is outside supported limits."""


class SchemaError(AuditError):
    """Lexicon JSON does not match the schema; carries a JSON-pointer path."""

    def __init__(self, message: str, pointer: str = ""):
        self.pointer = pointer
        super().__init__(f"{pointer or '/'}: {message}")


class ValidationError(AuditError):
    """Structurally valid lexicon violates a content invariant."""


class DivergenceError(AuditError):
    """Training loss became non-finite."""
