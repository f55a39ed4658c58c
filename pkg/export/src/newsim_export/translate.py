"""Fulfillment of translation plans: emit translated documents in the
standard format and flip plan entries to fulfilled.

``echo`` is the deterministic offline backend (text passes through, language
is retagged) for wiring and tests; other model strings load a seq2seq
translation model lazily.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Mapping

from .embed import ModelLoadError
from .formats import ExportDocument, PlanEntry, read_documents, read_plan, write_documents, write_plan

log = logging.getLogger(__name__)


class EchoTranslator:
    """Identity translation; the output document carries the target language."""

    def translate(self, text: str, source_lang: str, target_lang: str) -> str:
        return text


class Seq2SeqTranslator:
    def __init__(self, name: str):
        try:
            from transformers import pipeline
        except ImportError as exc:
            raise ModelLoadError(
                f"transformers is not installed (needed for {name!r})") from exc
        try:
            self._pipe = pipeline("translation", model=name)
        except Exception as exc:
            raise ModelLoadError(f"cannot load translation model {name!r}: {exc}") from exc

    def translate(self, text: str, source_lang: str, target_lang: str) -> str:
        result = self._pipe(text, src_lang=source_lang, tgt_lang=target_lang)
        return result[0]["translation_text"]


def load_translator(model: str):
    if model == "echo":
        return EchoTranslator()
    return Seq2SeqTranslator(model)


def _translated_id(doc_id: str, lang: str) -> str:
    return f"{doc_id}-{lang}"  # ids must stay underscore-free


def fulfill_translations(plan_path: str, docs_path: str, model: str,
                         out_docs_path: str, out_plan_path: str | None = None,
                         translator=None) -> dict:
    """Translate both sides of each planned pair; failures leave the entry
    planned with a warning.  Returns counts."""
    if translator is None:
        translator = load_translator(model)
    plan = read_plan(plan_path)
    docs: Mapping[str, ExportDocument] = {d.id: d for d in read_documents(docs_path)}

    translated: dict[str, ExportDocument] = {}
    fulfilled = 0
    for entry in plan:
        if entry.status == "fulfilled":
            continue
        parts = entry.source_pair_id.split("_")
        if len(parts) != 2:
            log.warning("plan entry %r: pair id does not encode two documents",
                        entry.source_pair_id)
            continue
        jobs = list(zip(parts, (entry.target_lang1, entry.target_lang2)))
        missing = [doc_id for doc_id, _ in jobs if doc_id not in docs]
        if missing:
            log.warning("plan entry %r: missing documents %s; left planned",
                        entry.source_pair_id, missing)
            continue
        try:
            for doc_id, lang in jobs:
                new_id = _translated_id(doc_id, lang)
                if new_id in translated:
                    continue
                source = docs[doc_id]
                translated[new_id] = ExportDocument(
                    id=new_id,
                    lang=lang,
                    title=translator.translate(source.title, source.lang, lang),
                    text=translator.translate(source.text, source.lang, lang),
                    publish_date=source.publish_date,
                )
        except Exception as exc:
            log.warning("plan entry %r: translation failed (%s); left planned",
                        entry.source_pair_id, exc)
            continue
        entry.status = "fulfilled"
        fulfilled += 1

    Path(out_docs_path).parent.mkdir(parents=True, exist_ok=True)
    write_documents(out_docs_path, translated.values())
    write_plan(out_plan_path or plan_path, plan)
    return {"entries": len(plan), "fulfilled": fulfilled,
            "documents": len(translated)}
