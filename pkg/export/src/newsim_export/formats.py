"""The engine's wire formats, written independently of the engine itself.

Embeddings: text files start with a ``dim=<d>`` header followed by one
``<doc_id>\\t<f1> <f2> ...`` line per document; binary files hold raw
little-endian float32 vectors with a ``<file>.idx`` sidecar (``dim=<d>``
header, then one doc id per line, in vector order).

Entities: JSON-lines of ``{"id", "mentions": [{"surface", "label"}]}``.

Documents: JSON-lines of ``{"id", "lang", "title", "text", "publish_date"}``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

log = logging.getLogger(__name__)


@dataclass
class ExportDocument:
    id: str
    lang: str
    title: str
    text: str
    publish_date: str | None = None

    def as_json(self) -> str:
        return json.dumps({"id": self.id, "lang": self.lang, "title": self.title,
                           "text": self.text, "publish_date": self.publish_date},
                          ensure_ascii=False)


def read_documents(path: str | Path) -> list[ExportDocument]:
    """Lenient JSONL reader; malformed lines are skipped with a warning."""
    docs: list[ExportDocument] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                docs.append(ExportDocument(
                    id=str(raw["id"]), lang=str(raw["lang"]),
                    title=str(raw["title"]), text=str(raw["text"]),
                    publish_date=raw.get("publish_date")))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                log.warning("%s:%d: skipping malformed document line (%s)",
                            path, line_no, exc)
    return docs


def write_documents(path: str | Path, docs: Iterable[ExportDocument]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(doc.as_json() + "\n")


def write_embeddings_text(path: str | Path,
                          items: Sequence[tuple[str, np.ndarray]]) -> None:
    dim = int(items[0][1].shape[0]) if items else 0
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"dim={dim}\n")
        for doc_id, vec in items:
            fh.write(doc_id + "\t" + " ".join(repr(float(v)) for v in vec) + "\n")


def write_embeddings_binary(path: str | Path,
                            items: Sequence[tuple[str, np.ndarray]]) -> None:
    path = Path(path)
    dim = int(items[0][1].shape[0]) if items else 0
    matrix = np.vstack([vec for _, vec in items]).astype("<f4") if items else \
        np.zeros((0, 0), dtype="<f4")
    matrix.tofile(path)
    with open(path.with_name(path.name + ".idx"), "w", encoding="utf-8") as fh:
        fh.write(f"dim={dim}\n")
        fh.writelines(doc_id + "\n" for doc_id, _ in items)


def write_entities(path: str | Path,
                   mentions_by_id: Mapping[str, Sequence[tuple[str, str]]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc_id in mentions_by_id:
            record = {"id": doc_id,
                      "mentions": [{"surface": surface, "label": label}
                                   for surface, label in mentions_by_id[doc_id]]}
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


@dataclass
class PlanEntry:
    source_pair_id: str
    target_lang1: str
    target_lang2: str
    status: str


def read_plan(path: str | Path) -> list[PlanEntry]:
    import csv

    entries = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        for row in reader:
            if row:
                entries.append(PlanEntry(row[0], row[1], row[2], row[3]))
    return entries


def write_plan(path: str | Path, entries: Sequence[PlanEntry]) -> None:
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("source_pair_id", "target_lang1", "target_lang2", "status"))
        for e in entries:
            writer.writerow((e.source_pair_id, e.target_lang1, e.target_lang2,
                             e.status))
