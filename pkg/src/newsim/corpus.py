"""Article-pair corpus: loading, validation, filtering, labels, and splits."""

from __future__ import annotations

import csv
import json
import math
import random
import re
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Mapping, Sequence

SUB_SCORE_NAMES = ("geography", "entities", "time", "narrative", "style", "tone")
PAIRS_HEADER = ("pair_id", "lang1", "lang2", "overall", *SUB_SCORE_NAMES)

RAW_MIN = 1.0  # most similar on the raw scale
RAW_MAX = 4.0  # least similar on the raw scale

_PUNCT = re.compile(r"[^\w\s]")


class CorpusError(Exception):
    """The input corpus cannot be used (hard failure, not a skippable row)."""


@dataclass(frozen=True)
class Document:
    id: str
    lang: str
    title: str
    body: str
    publish_date: date | None = None


@dataclass
class ArticlePair:
    """A pair of document ids with an optional raw similarity label in [1, 4]."""

    pair_id: str
    doc_a: str
    doc_b: str
    lang_pair: tuple[str, str]
    overall_raw: float | None = None
    sub_scores: dict[str, float] = field(default_factory=dict)
    split: str = "train"


@dataclass(frozen=True)
class RowError:
    path: str
    line: int
    message: str

    def __str__(self) -> str:
        return f"{self.path}:{self.line}: {self.message}"


@dataclass
class Corpus:
    pairs: list[ArticlePair]
    docs: dict[str, Document]
    errors: list[RowError]


@dataclass(frozen=True)
class SplitAssignment:
    train: frozenset[str]
    dev: frozenset[str]


def tokenize(text: str) -> list[str]:
    """Split on Unicode whitespace after stripping punctuation characters."""
    return _PUNCT.sub("", text).split()


def token_count(doc: Document) -> int:
    return len(tokenize(doc.title)) + len(tokenize(doc.body))


def _parse_score(value: str, line: int, path: str, column: str,
                 errors: list[RowError]) -> float | None:
    """Parse one optional [1, 4] score cell; record a RowError on bad input."""
    if value == "":
        return None
    try:
        score = float(value)
    except ValueError:
        errors.append(RowError(path, line, f"column {column!r}: not a number: {value!r}"))
        raise
    if not RAW_MIN <= score <= RAW_MAX:
        errors.append(RowError(path, line, f"column {column!r}: {score} outside [1, 4]"))
        raise ValueError(score)
    return score


def load_documents(path: str | Path) -> tuple[dict[str, Document], list[RowError]]:
    """Read a JSON-lines documents file; malformed lines are skipped and reported."""
    path = Path(path)
    docs: dict[str, Document] = {}
    errors: list[RowError] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                errors.append(RowError(str(path), line_no, f"invalid JSON: {exc.msg}"))
                continue
            if not isinstance(raw, dict):
                errors.append(RowError(str(path), line_no, "expected a JSON object"))
                continue
            missing = [k for k in ("id", "lang", "title", "text") if k not in raw]
            if missing:
                errors.append(RowError(str(path), line_no, f"missing keys: {missing}"))
                continue
            doc_id = str(raw["id"])
            if not doc_id:
                errors.append(RowError(str(path), line_no, "empty document id"))
                continue
            if doc_id in docs:
                errors.append(RowError(str(path), line_no, f"duplicate document id {doc_id!r}"))
                continue
            raw_date = raw.get("publish_date")
            publish_date = None
            if raw_date not in (None, ""):
                try:
                    publish_date = date.fromisoformat(str(raw_date))
                except ValueError:
                    errors.append(RowError(str(path), line_no,
                                           f"bad publish_date: {raw_date!r}"))
                    continue
            docs[doc_id] = Document(
                id=doc_id,
                lang=str(raw["lang"]),
                title=str(raw["title"]),
                body=str(raw["text"]),
                publish_date=publish_date,
            )
    return docs, errors


def load_pairs(path: str | Path) -> tuple[list[ArticlePair], list[RowError]]:
    """Read the pairs CSV.

    The two document ids are encoded in ``pair_id`` as ``<doc_a>_<doc_b>``,
    so document ids must not contain underscores.
    """
    path = Path(path)
    pairs: list[ArticlePair] = []
    errors: list[RowError] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CorpusError(f"{path}: empty pairs file") from None
        if tuple(h.strip() for h in header) != PAIRS_HEADER:
            raise CorpusError(
                f"{path}: bad header {header!r}, expected {','.join(PAIRS_HEADER)}")
        for row in reader:
            line = reader.line_num
            if len(row) != len(PAIRS_HEADER):
                errors.append(RowError(str(path), line,
                                       f"expected {len(PAIRS_HEADER)} columns, got {len(row)}"))
                continue
            pair_id, lang1, lang2 = row[0].strip(), row[1].strip(), row[2].strip()
            if not pair_id:
                errors.append(RowError(str(path), line, "empty pair_id"))
                continue
            if pair_id in seen:
                errors.append(RowError(str(path), line, f"duplicate pair_id {pair_id!r}"))
                continue
            parts = pair_id.split("_")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                errors.append(RowError(str(path), line,
                                       f"pair_id {pair_id!r} must be <doc_a>_<doc_b>"))
                continue
            doc_a, doc_b = parts
            if doc_a == doc_b:
                errors.append(RowError(str(path), line,
                                       f"pair {pair_id!r} references the same document twice"))
                continue
            if not lang1 or not lang2:
                errors.append(RowError(str(path), line, "empty language code"))
                continue
            try:
                overall = _parse_score(row[3].strip(), line, str(path), "overall", errors)
                sub_scores = {}
                for name, cell in zip(SUB_SCORE_NAMES, row[4:]):
                    score = _parse_score(cell.strip(), line, str(path), name, errors)
                    if score is not None:
                        sub_scores[name] = score
            except ValueError:
                continue
            seen.add(pair_id)
            pairs.append(ArticlePair(
                pair_id=pair_id,
                doc_a=doc_a,
                doc_b=doc_b,
                lang_pair=(lang1, lang2),
                overall_raw=overall,
                sub_scores=sub_scores,
                split="unlabeled" if overall is None else "train",
            ))
    return pairs, errors


def load_corpus(pairs_path: str | Path, docs_path: str | Path) -> Corpus:
    """Load pairs and documents; raise if any pair references an unknown document."""
    docs, doc_errors = load_documents(docs_path)
    pairs, pair_errors = load_pairs(pairs_path)
    missing = [p.pair_id for p in pairs
               if p.doc_a not in docs or p.doc_b not in docs]
    if missing:
        shown = ", ".join(missing[:20])
        more = "" if len(missing) <= 20 else f" (and {len(missing) - 20} more)"
        raise CorpusError(f"pairs reference missing documents: {shown}{more}")
    return Corpus(pairs=pairs, docs=docs, errors=doc_errors + pair_errors)


def filter_pairs(pairs: Sequence[ArticlePair], docs: Mapping[str, Document],
                 min_tokens: int = 10) -> list[ArticlePair]:
    """Drop pairs where either document has an empty body or fewer than
    ``min_tokens`` tokens in title plus body."""

    def keeps(doc: Document) -> bool:
        return bool(doc.body.strip()) and token_count(doc) >= min_tokens

    return [p for p in pairs if keeps(docs[p.doc_a]) and keeps(docs[p.doc_b])]


def normalize_label(x: float) -> float:
    """Map a raw [1, 4] label (1 = most similar) onto [0, 1] (1 = most similar)."""
    if not RAW_MIN <= x <= RAW_MAX:
        raise ValueError(f"raw label {x!r} outside [1, 4]")
    return (4.0 - x) / 3.0


def denormalize_label(v: float) -> float:
    """Inverse of :func:`normalize_label`."""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"normalized label {v!r} outside [0, 1]")
    return 4.0 - 3.0 * v


def unordered_lang_pair(pair: ArticlePair) -> tuple[str, str]:
    """Lexicographically ordered language pair, so (de,en) == (en,de)."""
    a, b = pair.lang_pair
    return (a, b) if a <= b else (b, a)


def stratified_split(pairs: Sequence[ArticlePair], ratio: float = 0.8,
                     held_out_dev_langs: frozenset[str] = frozenset({"ar"}),
                     seed: int = 0) -> SplitAssignment:
    """Split labeled pairs into train/dev per language-pair stratum.

    Any pair involving a held-out language goes entirely to dev.  Within each
    stratum, round(ratio * n) pairs go to train (half rounds up).  Unlabeled
    pairs are ignored.  Deterministic for a given seed.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"split ratio {ratio!r} outside (0, 1)")
    train: set[str] = set()
    dev: set[str] = set()
    strata: dict[tuple[str, str], list[str]] = {}
    for pair in pairs:
        if pair.overall_raw is None:
            continue
        if held_out_dev_langs & set(pair.lang_pair):
            dev.add(pair.pair_id)
        else:
            strata.setdefault(unordered_lang_pair(pair), []).append(pair.pair_id)
    rng = random.Random(seed)
    for key in sorted(strata):
        ids = sorted(strata[key])
        rng.shuffle(ids)
        n_train = math.floor(ratio * len(ids) + 0.5)
        train.update(ids[:n_train])
        dev.update(ids[n_train:])
    return SplitAssignment(train=frozenset(train), dev=frozenset(dev))


def apply_split(pairs: Iterable[ArticlePair], assignment: SplitAssignment) -> None:
    for pair in pairs:
        if pair.pair_id in assignment.train:
            pair.split = "train"
        elif pair.pair_id in assignment.dev:
            pair.split = "dev"
