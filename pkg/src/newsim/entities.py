"""Four-class entity profiles and the per-class count-vector cosine."""

from __future__ import annotations

import csv
import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import CorpusError, Document


class EntityClass(Enum):
    GEO = "geo"
    ORG = "org"
    DATE = "date"
    QTY = "qty"


# Source-tagger label -> entity class.  Labels outside this map are dropped.
_LABEL_TO_CLASS = {
    "LOC": EntityClass.GEO,
    "GPE": EntityClass.GEO,
    "ORG": EntityClass.ORG,
    "PERSON": EntityClass.ORG,
    "FAC": EntityClass.ORG,
    "EVENT": EntityClass.ORG,
    "NORP": EntityClass.ORG,
    "PRODUCT": EntityClass.ORG,
    "WORK_OF_ART": EntityClass.ORG,
    "DATE": EntityClass.DATE,
    "TIME": EntityClass.DATE,
    "QUANTITY": EntityClass.QTY,
    "ORDINAL": EntityClass.QTY,
    "CARDINAL": EntityClass.QTY,
}


@dataclass(frozen=True)
class EntityMention:
    surface: str
    ner_label: str


@dataclass
class EntityProfile:
    """Per-class multisets of lowercased entity surfaces."""

    counts: dict[EntityClass, Counter] = field(
        default_factory=lambda: {cls: Counter() for cls in EntityClass})

    def multiset(self, cls: EntityClass) -> Counter:
        return self.counts[cls]


@dataclass(frozen=True)
class EntityFeatureVector:
    geo: float
    org: float
    date: float
    qty: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.geo, self.org, self.date, self.qty)


def classify_label(ner_label: str) -> EntityClass | None:
    """Map a source-tagger label to an entity class; None means drop the mention."""
    return _LABEL_TO_CLASS.get(ner_label)


def build_profile(mentions: Iterable[EntityMention],
                  publish_date: date | None = None) -> EntityProfile:
    """Accumulate lowercased surfaces per class; the publish date (ISO form)
    counts once toward the DATE multiset."""
    profile = EntityProfile()
    for mention in mentions:
        cls = classify_label(mention.ner_label)
        if cls is None:
            continue
        profile.counts[cls][mention.surface.lower()] += 1
    if publish_date is not None:
        profile.counts[EntityClass.DATE][publish_date.isoformat()] += 1
    return profile


def entity_cosine(a: Mapping[str, int], b: Mapping[str, int]) -> float:
    """Cosine similarity of two surface-count multisets; 0.0 when either is empty."""
    if not a or not b:
        return 0.0
    dot = sum(a[key] * b[key] for key in a.keys() & b.keys())
    norm_a = sum(count * count for count in a.values())
    norm_b = sum(count * count for count in b.values())
    return min(1.0, dot / math.sqrt(norm_a * norm_b))


def feature_vector(profile_a: EntityProfile, profile_b: EntityProfile) -> EntityFeatureVector:
    """The four per-class cosines between two profiles."""
    scores = {cls: entity_cosine(profile_a.multiset(cls), profile_b.multiset(cls))
              for cls in EntityClass}
    return EntityFeatureVector(
        geo=scores[EntityClass.GEO],
        org=scores[EntityClass.ORG],
        date=scores[EntityClass.DATE],
        qty=scores[EntityClass.QTY],
    )


# --- fallback extraction (English-only; a stand-in for an external tagger) ---

_ISO_DATE = re.compile(r"\b\d{4}-\d{2}-\d{2}\b")
_SLASH_DATE = re.compile(r"\b\d{1,2}/\d{1,2}/\d{2,4}\b")
_ORDINAL_NUM = re.compile(r"\b\d+(?:st|nd|rd|th)\b", re.IGNORECASE)
_NUMBER = re.compile(r"\b\d+(?:\.\d+)?\b")
_WORD = re.compile(r"\w+")

_ORDINAL_WORDS = frozenset(
    "first second third fourth fifth sixth seventh eighth ninth tenth "
    "eleventh twelfth".split())


def _regex_mentions(text: str) -> list[tuple[int, EntityMention]]:
    """Dates, ordinals and standalone numerals with their start offsets."""
    found: list[tuple[int, EntityMention]] = []
    taken: list[tuple[int, int]] = []

    def claim(match: re.Match, label: str) -> None:
        span = match.span()
        if any(span[0] < end and start < span[1] for start, end in taken):
            return
        taken.append(span)
        found.append((span[0], EntityMention(match.group(), label)))

    for pattern in (_ISO_DATE, _SLASH_DATE):
        for match in pattern.finditer(text):
            claim(match, "DATE")
    for match in _ORDINAL_NUM.finditer(text):
        claim(match, "ORDINAL")
    for match in _NUMBER.finditer(text):
        claim(match, "CARDINAL")
    for match in _WORD.finditer(text):
        if match.group().lower() in _ORDINAL_WORDS:
            claim(match, "ORDINAL")
    return found


def fallback_extract(doc: Document,
                     gazetteer: Mapping[str, str]) -> list[EntityMention]:
    """Pattern-based extraction: date/number regexes plus longest-match
    gazetteer lookup (case-insensitive) over title and body."""
    text = f"{doc.title} {doc.body}".strip()
    if not text:
        return []
    found = _regex_mentions(text)

    gaz = {surface.lower(): label for surface, label in gazetteer.items()}
    max_words = max((len(key.split()) for key in gaz), default=0)
    words = [(m.group(), m.start()) for m in _WORD.finditer(text)]
    i = 0
    while i < len(words) and max_words:
        matched = False
        for width in range(min(max_words, len(words) - i), 0, -1):
            phrase = " ".join(w for w, _ in words[i:i + width])
            label = gaz.get(phrase.lower())
            if label is not None:
                found.append((words[i][1], EntityMention(phrase, label)))
                i += width
                matched = True
                break
        if not matched:
            i += 1
    found.sort(key=lambda item: item[0])
    return [mention for _, mention in found]


# --- file formats ---

def read_entities_file(path: str | Path) -> dict[str, list[EntityMention]]:
    """Read pre-extracted mentions (JSON-lines: {"id", "mentions": [...]})."""
    path = Path(path)
    mentions: dict[str, list[EntityMention]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                doc_id = str(raw["id"])
                parsed = [EntityMention(str(m["surface"]), str(m["label"]))
                          for m in raw["mentions"]]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorpusError(f"{path}:{line_no}: bad entities row ({exc})") from exc
            mentions[doc_id] = parsed
    return mentions


def write_entities_file(path: str | Path,
                        mentions_by_id: Mapping[str, Sequence[EntityMention]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc_id in mentions_by_id:
            record = {"id": doc_id,
                      "mentions": [{"surface": m.surface, "label": m.ner_label}
                                   for m in mentions_by_id[doc_id]]}
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_gazetteer(path: str | Path) -> dict[str, str]:
    """CSV of surface,label rows (an optional header row is skipped)."""
    gazetteer: dict[str, str] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            if not row or len(row) < 2:
                continue
            surface, label = row[0].strip(), row[1].strip()
            if (surface.lower(), label.lower()) == ("surface", "label"):
                continue
            if surface and label:
                gazetteer[surface.lower()] = label
    return gazetteer


def build_profiles(docs: Mapping[str, Document],
                   mentions_by_id: Mapping[str, Sequence[EntityMention]],
                   ) -> dict[str, EntityProfile]:
    """One profile per document, folding in each document's publish date."""
    return {doc_id: build_profile(mentions_by_id.get(doc_id, ()), doc.publish_date)
            for doc_id, doc in docs.items()}
