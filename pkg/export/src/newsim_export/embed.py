"""Document-embedding export.

Model identifiers are config strings: ``hash:<dim>[:<seed>]`` selects the
deterministic offline hashing encoder (plumbing and tests); anything else is
treated as a sentence-transformers model name and loaded lazily.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .formats import (
    ExportDocument,
    read_documents,
    write_embeddings_binary,
    write_embeddings_text,
)

MAX_MODEL_TOKENS = 512  # matches the engine's truncation default


class ModelLoadError(Exception):
    pass


@dataclass
class ExportJob:
    docs_path: str
    model: str
    out_path: str
    batch_size: int = 32
    max_seq_len: int = MAX_MODEL_TOKENS
    binary: bool = False


def document_text(doc: ExportDocument, max_seq_len: int = MAX_MODEL_TOKENS) -> str:
    """Title then body, truncated to the model token budget."""
    tokens = f"{doc.title} {doc.text}".split()
    return " ".join(tokens[:max_seq_len])


class HashingBackend:
    """Offline-safe feature-hashing sentence encoder (not semantically
    meaningful, but deterministic and shaped like the real thing)."""

    def __init__(self, dim: int, seed: int = 0):
        if dim < 1:
            raise ModelLoadError(f"hash backend needs a positive dim, got {dim}")
        self.dim = dim
        self.seed = seed

    def encode_batch(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for i, text in enumerate(texts):
            for token in text.lower().split():
                digest = hashlib.md5(f"{self.seed}\x00{token}".encode()).digest()
                value = int.from_bytes(digest[:8], "little")
                index = value % self.dim
                sign = 1.0 if (value >> 63) & 1 else -1.0
                out[i, index] += sign
            norm = np.linalg.norm(out[i])
            if norm > 0:
                out[i] /= norm
        return out


class SentenceTransformerBackend:
    def __init__(self, name: str):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise ModelLoadError(
                f"sentence-transformers is not installed (needed for {name!r})"
            ) from exc
        try:
            self._model = SentenceTransformer(name)
        except Exception as exc:
            raise ModelLoadError(f"cannot load model {name!r}: {exc}") from exc
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode_batch(self, texts: Sequence[str]) -> np.ndarray:
        return np.asarray(self._model.encode(list(texts), show_progress_bar=False),
                          dtype=np.float64)


def load_backend(model: str):
    if model.startswith("hash:"):
        parts = model.split(":")
        try:
            dim = int(parts[1])
            seed = int(parts[2]) if len(parts) > 2 else 0
        except (IndexError, ValueError):
            raise ModelLoadError(
                f"bad hash model spec {model!r}; expected hash:<dim>[:<seed>]"
            ) from None
        return HashingBackend(dim, seed)
    return SentenceTransformerBackend(model)


def export_embeddings(job: ExportJob) -> int:
    """One vector per document, ids preserved; returns the document count."""
    backend = load_backend(job.model)
    docs = read_documents(job.docs_path)
    items: list[tuple[str, np.ndarray]] = []
    for start in range(0, len(docs), max(job.batch_size, 1)):
        batch = docs[start:start + max(job.batch_size, 1)]
        texts = [document_text(d, job.max_seq_len) for d in batch]
        vectors = backend.encode_batch(texts)
        items.extend((doc.id, vectors[i]) for i, doc in enumerate(batch))
    Path(job.out_path).parent.mkdir(parents=True, exist_ok=True)
    if job.binary:
        write_embeddings_binary(job.out_path, items)
    else:
        write_embeddings_text(job.out_path, items)
    return len(items)
