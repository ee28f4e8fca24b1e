"""Bilingual stereotype lexicons: 14 target-word categories in 3 groups plus
shared gender attribute sets.

File schema (JSON): top-level object with "language", "version",
"attributes": {"male": [...], "female": [...]}, and "categories":
[{"id", "group", "male_stereotyped": [...], "female_stereotyped": [...]}].
Every word entry is either a bare string or
{"w": <string>, "provenance": "paper" | "toolkit-default"}; bare strings
normalize to toolkit-default. Serialization is canonical (schema field
order, normalized entries), so load -> serialize is idempotent.

Word provenance matters because the published category tables only
exemplify three words per side; the remaining words shipped here are
curated fill. Reports therefore embed the lexicon version hash.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .embeddings import EmbeddingTable, resolves
from .errors import SchemaError, ValidationError
from .weat import WordSet

GROUPS = ("career_role", "traits_performance", "econ_financial")
PROVENANCES = ("paper", "toolkit-default")
EXPECTED_CATEGORY_COUNT = 14
LEXICON_DIR = Path(__file__).parent / "lexicons"


@dataclass(frozen=True)
class LexEntry:
    w: str
    provenance: str = "toolkit-default"


@dataclass(frozen=True)
class Category:
    id: str
    group: str
    male_stereotyped: tuple[LexEntry, ...]
    female_stereotyped: tuple[LexEntry, ...]

    @property
    def X(self) -> WordSet:
        return WordSet(f"{self.id}:male_stereotyped",
                       [e.w for e in self.male_stereotyped])

    @property
    def Y(self) -> WordSet:
        return WordSet(f"{self.id}:female_stereotyped",
                       [e.w for e in self.female_stereotyped])


@dataclass(frozen=True)
class Lexicon:
    language: str
    version: str
    attributes_male: tuple[LexEntry, ...]
    attributes_female: tuple[LexEntry, ...]
    categories: tuple[Category, ...]

    @property
    def A(self) -> WordSet:
        return WordSet("attributes:male", [e.w for e in self.attributes_male])

    @property
    def B(self) -> WordSet:
        return WordSet("attributes:female", [e.w for e in self.attributes_female])

    def category(self, cid: str) -> Category:
        for c in self.categories:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def version_hash(self) -> str:
        digest = hashlib.sha256(serialize_lexicon(self).encode("utf-8")).hexdigest()
        return f"{self.version}-sha256:{digest[:16]}"


def _parse_entries(items, pointer: str) -> tuple[LexEntry, ...]:
    if not isinstance(items, list):
        raise SchemaError("expected an array of word entries", pointer)
    out = []
    for i, item in enumerate(items):
        ptr = f"{pointer}/{i}"
        if isinstance(item, str):
            entry = LexEntry(item)
        elif isinstance(item, dict):
            if set(item) != {"w", "provenance"}:
                raise SchemaError('word object must have exactly "w" and "provenance"', ptr)
            if not isinstance(item["w"], str):
                raise SchemaError('"w" must be a string', ptr)
            if item["provenance"] not in PROVENANCES:
                raise SchemaError(
                    f'provenance must be one of {PROVENANCES}, got {item["provenance"]!r}', ptr)
            entry = LexEntry(item["w"], item["provenance"])
        else:
            raise SchemaError("word entry must be a string or object", ptr)
        if not entry.w.strip():
            raise SchemaError("word is empty", ptr)
        out.append(entry)
    return tuple(out)


def lexicon_from_dict(obj, allow_partial: bool = False) -> Lexicon:
    if not isinstance(obj, dict):
        raise SchemaError("top level must be an object")
    for key in ("language", "version", "attributes", "categories"):
        if key not in obj:
            raise SchemaError(f'missing required key "{key}"')
    if not isinstance(obj["language"], str):
        raise SchemaError("language must be a string", "/language")
    if not isinstance(obj["version"], str):
        raise SchemaError("version must be a string", "/version")
    attrs = obj["attributes"]
    if not isinstance(attrs, dict) or set(attrs) != {"male", "female"}:
        raise SchemaError('attributes must be {"male": [...], "female": [...]}', "/attributes")
    attributes_male = _parse_entries(attrs["male"], "/attributes/male")
    attributes_female = _parse_entries(attrs["female"], "/attributes/female")

    if not isinstance(obj["categories"], list):
        raise SchemaError("categories must be an array", "/categories")
    categories = []
    for i, cat in enumerate(obj["categories"]):
        ptr = f"/categories/{i}"
        if not isinstance(cat, dict):
            raise SchemaError("category must be an object", ptr)
        for key in ("id", "group", "male_stereotyped", "female_stereotyped"):
            if key not in cat:
                raise SchemaError(f'missing required key "{key}"', ptr)
        if not isinstance(cat["id"], str) or not cat["id"]:
            raise SchemaError("id must be a non-empty string", f"{ptr}/id")
        if cat["group"] not in GROUPS:
            raise SchemaError(f"group must be one of {GROUPS}, got {cat['group']!r}",
                              f"{ptr}/group")
        categories.append(Category(
            id=cat["id"],
            group=cat["group"],
            male_stereotyped=_parse_entries(cat["male_stereotyped"],
                                            f"{ptr}/male_stereotyped"),
            female_stereotyped=_parse_entries(cat["female_stereotyped"],
                                              f"{ptr}/female_stereotyped"),
        ))

    lex = Lexicon(
        language=obj["language"],
        version=obj["version"],
        attributes_male=attributes_male,
        attributes_female=attributes_female,
        categories=tuple(categories),
    )
    _validate(lex, allow_partial)
    return lex


def _validate(lex: Lexicon, allow_partial: bool) -> None:
    ids = [c.id for c in lex.categories]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ValidationError(f"duplicate category ids: {dupes}")

    a = [e.w for e in lex.attributes_male]
    b = [e.w for e in lex.attributes_female]
    if len(set(a)) != len(a) or len(set(b)) != len(b):
        raise ValidationError("duplicate words within an attribute set")
    if set(a) & set(b):
        raise ValidationError(f"attribute sets overlap: {sorted(set(a) & set(b))}")
    if not a or not b:
        raise ValidationError("attribute sets must be non-empty")

    for c in lex.categories:
        x = [e.w for e in c.male_stereotyped]
        y = [e.w for e in c.female_stereotyped]
        if len(set(x)) != len(x) or len(set(y)) != len(y):
            raise ValidationError(f"category {c.id!r}: duplicate words within a target set")
        if len(x) != len(y):
            raise ValidationError(
                f"category {c.id!r}: unequal target sets ({len(x)} vs {len(y)})")
        if len(x) < 2:
            raise ValidationError(f"category {c.id!r}: target sets need >= 2 words")
        if set(x) & set(y):
            raise ValidationError(
                f"category {c.id!r}: target sets overlap: {sorted(set(x) & set(y))}")

    if not allow_partial:
        if len(lex.categories) != EXPECTED_CATEGORY_COUNT:
            raise ValidationError(
                f"expected {EXPECTED_CATEGORY_COUNT} categories, found "
                f"{len(lex.categories)} (use allow_partial to override)")
        present = {c.group for c in lex.categories}
        if present != set(GROUPS):
            raise ValidationError(
                f"missing groups: {sorted(set(GROUPS) - present)} "
                f"(use allow_partial to override)")


def load_lexicon(path: str | Path, allow_partial: bool = False) -> Lexicon:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}") from None
    return lexicon_from_dict(obj, allow_partial)


def builtin_lexicon_path(language: str) -> Path:
    p = LEXICON_DIR / f"{language}.json"
    if not p.exists():
        raise FileNotFoundError(f"no built-in lexicon for language {language!r}")
    return p


def _entry_obj(e: LexEntry) -> dict:
    return {"w": e.w, "provenance": e.provenance}


def lexicon_to_dict(lex: Lexicon) -> dict:
    return {
        "language": lex.language,
        "version": lex.version,
        "attributes": {
            "male": [_entry_obj(e) for e in lex.attributes_male],
            "female": [_entry_obj(e) for e in lex.attributes_female],
        },
        "categories": [
            {
                "id": c.id,
                "group": c.group,
                "male_stereotyped": [_entry_obj(e) for e in c.male_stereotyped],
                "female_stereotyped": [_entry_obj(e) for e in c.female_stereotyped],
            }
            for c in lex.categories
        ],
    }


def serialize_lexicon(lex: Lexicon) -> str:
    """Canonical form: schema field order, explicit provenance objects."""
    return json.dumps(lexicon_to_dict(lex), ensure_ascii=False, indent=2) + "\n"


@dataclass(frozen=True)
class CategoryCoverage:
    id: str
    resolvable: tuple[str, ...]
    unresolvable: tuple[str, ...]
    runnable: bool


@dataclass(frozen=True)
class CoverageReport:
    table_label: str
    attributes_unresolvable: tuple[str, ...]
    categories: tuple[CategoryCoverage, ...]
    oov_rate: float

    @property
    def runnable_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.categories if c.runnable)


def coverage_check(lex: Lexicon, table: EmbeddingTable,
                   policy: str = "underscore-then-average",
                   lowercase: bool = False) -> CoverageReport:
    """Which categories can run against this table.

    A category is runnable iff every phrase in its target sets and in the
    shared attribute sets resolves under the lookup policy. Missing words
    are data, not errors.
    """
    def norm(w: str) -> str:
        return w.lower() if lowercase else w

    attr_words = [e.w for e in lex.attributes_male + lex.attributes_female]
    attr_missing = tuple(w for w in attr_words if not resolves(table, norm(w), policy))
    attrs_ok = not attr_missing

    cats = []
    total = len(set(attr_words))
    missing_total = len(set(attr_missing))
    for c in lex.categories:
        words = [e.w for e in c.male_stereotyped + c.female_stereotyped]
        missing = tuple(w for w in words if not resolves(table, norm(w), policy))
        ok = tuple(w for w in words if w not in missing)
        cats.append(CategoryCoverage(
            id=c.id, resolvable=ok, unresolvable=missing,
            runnable=attrs_ok and not missing,
        ))
        total += len(set(words))
        missing_total += len(set(missing))

    return CoverageReport(
        table_label=table.source_label,
        attributes_unresolvable=attr_missing,
        categories=tuple(cats),
        oov_rate=missing_total / total if total else 0.0,
    )
