"""Batch entity extraction into the engine's entities JSONL format.

``pattern`` (optionally ``pattern:<lexicon.csv>``) is the offline rule-based
tagger: date/number regexes plus longest-match lexicon lookup seeded with a
small built-in country list.  Any other model string is treated as a spaCy
pipeline name and loaded lazily.
"""

from __future__ import annotations

import csv
import logging
import re
from pathlib import Path
from typing import Sequence

from .embed import ModelLoadError
from .formats import ExportDocument, read_documents, write_entities

log = logging.getLogger(__name__)

# labels the engine's class mapping understands
PUBLISHED_LABELS = frozenset({
    "GPE", "LOC", "ORG", "PERSON", "FAC", "EVENT", "NORP", "PRODUCT",
    "WORK_OF_ART", "DATE", "TIME", "QUANTITY", "ORDINAL", "CARDINAL",
})

_COUNTRIES = (
    "afghanistan albania algeria argentina australia austria azerbaijan "
    "belgium brazil bulgaria canada chile china colombia croatia cuba "
    "denmark egypt estonia finland france germany greece hungary india "
    "indonesia iran iraq ireland israel italy japan kenya latvia lebanon "
    "libya lithuania malaysia mexico morocco netherlands nigeria norway "
    "pakistan peru philippines poland portugal qatar romania russia serbia "
    "singapore slovakia slovenia spain sweden switzerland syria thailand "
    "tunisia turkey ukraine uruguay venezuela vietnam yemen"
).split()

_ISO_DATE = re.compile(r"\b\d{4}-\d{2}-\d{2}\b")
_SLASH_DATE = re.compile(r"\b\d{1,2}/\d{1,2}/\d{2,4}\b")
_ORDINAL = re.compile(r"\b\d+(?:st|nd|rd|th)\b", re.IGNORECASE)
_NUMBER = re.compile(r"\b\d+(?:\.\d+)?\b")
_WORD = re.compile(r"\w+")


class PatternTagger:
    def __init__(self, lexicon_path: str | None = None):
        self.lexicon = {name: "GPE" for name in _COUNTRIES}
        if lexicon_path:
            path = Path(lexicon_path)
            if not path.exists():
                raise ModelLoadError(f"lexicon file not found: {path}")
            with open(path, encoding="utf-8", newline="") as fh:
                for row in csv.reader(fh):
                    if len(row) < 2 or row[0].strip().lower() == "surface":
                        continue
                    label = row[1].strip()
                    if label not in PUBLISHED_LABELS:
                        raise ModelLoadError(
                            f"lexicon label {label!r} is not a recognized tagger label")
                    self.lexicon[row[0].strip().lower()] = label
        self._max_words = max(len(k.split()) for k in self.lexicon)

    def tag(self, text: str) -> list[tuple[str, str]]:
        found: list[tuple[int, str, str]] = []
        taken: list[tuple[int, int]] = []

        def claim(match: re.Match, label: str) -> None:
            span = match.span()
            if any(span[0] < end and start < span[1] for start, end in taken):
                return
            taken.append(span)
            found.append((span[0], match.group(), label))

        for pattern, label in ((_ISO_DATE, "DATE"), (_SLASH_DATE, "DATE"),
                               (_ORDINAL, "ORDINAL"), (_NUMBER, "CARDINAL")):
            for match in pattern.finditer(text):
                claim(match, label)

        words = [(m.group(), m.start()) for m in _WORD.finditer(text)]
        i = 0
        while i < len(words):
            matched = False
            for width in range(min(self._max_words, len(words) - i), 0, -1):
                phrase = " ".join(w for w, _ in words[i:i + width])
                label = self.lexicon.get(phrase.lower())
                if label is not None:
                    found.append((words[i][1], phrase, label))
                    i += width
                    matched = True
                    break
            if not matched:
                i += 1
        found.sort(key=lambda item: item[0])
        return [(surface, label) for _, surface, label in found]


class SpacyTagger:
    def __init__(self, name: str):
        try:
            import spacy
        except ImportError as exc:
            raise ModelLoadError(
                f"spacy is not installed (needed for {name!r})") from exc
        try:
            self._nlp = spacy.load(name)
        except Exception as exc:
            raise ModelLoadError(f"cannot load spacy model {name!r}: {exc}") from exc

    def tag(self, text: str) -> list[tuple[str, str]]:
        return [(ent.text, ent.label_) for ent in self._nlp(text).ents
                if ent.label_ in PUBLISHED_LABELS]


def load_tagger(model: str):
    if model == "pattern":
        return PatternTagger()
    if model.startswith("pattern:"):
        return PatternTagger(model.split(":", 1)[1])
    return SpacyTagger(model)


def export_entities(docs_path: str, model: str, out_path: str,
                    translate_first: bool = False,
                    translator=None) -> int:
    """Mentions file in the engine's format; per-document tagger failures
    yield an empty mention list with a warning."""
    tagger = load_tagger(model)
    docs = read_documents(docs_path)
    mentions: dict[str, list[tuple[str, str]]] = {}
    for doc in docs:
        text = f"{doc.title} {doc.text}".strip()
        if translate_first and translator is not None and doc.lang != "en":
            text = translator.translate(text, doc.lang, "en")
        try:
            mentions[doc.id] = tagger.tag(text) if text else []
        except Exception as exc:
            log.warning("tagger failed on document %s: %s", doc.id, exc)
            mentions[doc.id] = []
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    write_entities(out_path, mentions)
    return len(mentions)
