"""Siamese document encoders: a trainable hashed n-gram encoder and a
precomputed-embedding store, both scored by embedding cosine."""

from __future__ import annotations

import hashlib
import math
import random
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Document, tokenize

DEFAULT_MAX_SEQ_LEN = 512
_CKPT_VERSION = 1


class EmbeddingLookupError(KeyError):
    """A requested document id has no stored embedding."""


def prepare_document(doc: Document, max_seq_len: int = DEFAULT_MAX_SEQ_LEN) -> list[str]:
    """Title tokens then body tokens, truncated to ``max_seq_len``.

    Long documents keep only their initial part; the title and lead usually
    carry the core narrative.
    """
    tokens = tokenize(doc.title) + tokenize(doc.body)
    return tokens[:max_seq_len]


def narrative_similarity(ea: np.ndarray, eb: np.ndarray) -> float:
    """Cosine between two embeddings; 0.0 if either is the zero vector."""
    ea = np.asarray(ea, dtype=np.float64)
    eb = np.asarray(eb, dtype=np.float64)
    if ea.shape != eb.shape:
        raise ValueError(f"dimension mismatch: {ea.shape} vs {eb.shape}")
    norm_sq = float(ea @ ea) * float(eb @ eb)
    if norm_sq == 0.0:
        return 0.0
    return float(np.clip(float(ea @ eb) / math.sqrt(norm_sq), -1.0, 1.0))


def encode(provider, doc):
    """Embed ``doc`` with any provider.

    ``doc`` is a token sequence for trainable encoders and a document id for
    precomputed stores.
    """
    return provider.encode(doc)


class PrecomputedStore:
    """Embeddings keyed by document id, loaded from an embedding file."""

    def __init__(self, vectors: Mapping[str, np.ndarray]):
        if not vectors:
            raise ValueError("empty embedding store")
        dims = {np.asarray(v).shape for v in vectors.values()}
        if len(dims) != 1:
            raise ValueError(f"inconsistent embedding dimensions: {sorted(dims)}")
        self._vectors = {k: np.asarray(v, dtype=np.float64) for k, v in vectors.items()}
        self.dim = next(iter(self._vectors.values())).shape[0]

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._vectors

    def __len__(self) -> int:
        return len(self._vectors)

    def encode(self, doc_id: str) -> np.ndarray:
        try:
            return self._vectors[doc_id]
        except KeyError:
            raise EmbeddingLookupError(
                f"no embedding stored for document id {doc_id!r}") from None

    # predict-time alias: stores embed by id
    embed = encode

    @classmethod
    def from_file(cls, path: str | Path) -> "PrecomputedStore":
        return cls(read_embeddings(path))


def read_embeddings(path: str | Path) -> dict[str, np.ndarray]:
    """Read an embedding file (text with a ``dim=`` header, or float32 binary
    with an ``.idx`` sidecar)."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == b"dim=":
        return _read_embeddings_text(path)
    return _read_embeddings_binary(path)


def _read_embeddings_text(path: Path) -> dict[str, np.ndarray]:
    vectors: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        try:
            dim = int(header.removeprefix("dim="))
        except ValueError:
            raise ValueError(f"{path}: bad embedding header {header!r}") from None
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            doc_id, _, values = line.rstrip("\n").partition("\t")
            vec = np.array([float(v) for v in values.split()], dtype=np.float64)
            if vec.shape[0] != dim:
                raise ValueError(f"{path}:{line_no}: expected {dim} values, got {vec.shape[0]}")
            vectors[doc_id] = vec
    return vectors


def _read_embeddings_binary(path: Path) -> dict[str, np.ndarray]:
    sidecar = path.with_name(path.name + ".idx")
    if not sidecar.exists():
        raise ValueError(f"{path}: binary embedding file needs sidecar {sidecar.name}")
    with open(sidecar, encoding="utf-8") as fh:
        header = fh.readline().strip()
        dim = int(header.removeprefix("dim="))
        ids = [line.strip() for line in fh if line.strip()]
    data = np.fromfile(path, dtype="<f4")
    if data.shape[0] != dim * len(ids):
        raise ValueError(f"{path}: expected {dim * len(ids)} floats, got {data.shape[0]}")
    matrix = data.reshape(len(ids), dim).astype(np.float64)
    return {doc_id: matrix[i] for i, doc_id in enumerate(ids)}


def write_embeddings_text(path: str | Path, vectors: Mapping[str, Sequence[float]]) -> None:
    vectors = dict(vectors)
    dim = len(next(iter(vectors.values()))) if vectors else 0
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"dim={dim}\n")
        for doc_id, vec in vectors.items():
            fh.write(doc_id + "\t" + " ".join(repr(float(v)) for v in vec) + "\n")


def write_embeddings_binary(path: str | Path, vectors: Mapping[str, Sequence[float]]) -> None:
    path = Path(path)
    vectors = dict(vectors)
    dim = len(next(iter(vectors.values()))) if vectors else 0
    ids = list(vectors)
    matrix = np.array([vectors[i] for i in ids], dtype="<f4")
    matrix.tofile(path)
    with open(path.with_name(path.name + ".idx"), "w", encoding="utf-8") as fh:
        fh.write(f"dim={dim}\n")
        fh.writelines(doc_id + "\n" for doc_id in ids)


@dataclass
class SiameseTrainConfig:
    epochs: int = 4
    batch_size: int = 8
    learning_rate: float = 2e-5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")


class HashedEncoder:
    """Trainable bag-of-hashed-features encoder.

    A document embeds as the mean of embedding-matrix rows indexed by hashed
    word unigrams and character trigrams of its tokens.  Both branches of a
    pair share this one matrix.
    """

    def __init__(self, buckets: int = 1 << 18, dim: int = 256, seed: int = 0,
                 char_ngram: int = 3, word_unigrams: bool = True,
                 matrix: np.ndarray | None = None):
        if buckets < 1 or dim < 1:
            raise ValueError("buckets and dim must be positive")
        if not word_unigrams and char_ngram <= 0:
            raise ValueError("at least one feature family must be enabled")
        self.buckets = buckets
        self.dim = dim
        self.seed = seed
        self.char_ngram = char_ngram
        self.word_unigrams = word_unigrams
        self._hash_key = (seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")
        self._token_cache: dict[str, np.ndarray] = {}
        if matrix is not None:
            if matrix.shape != (buckets, dim):
                raise ValueError(f"matrix shape {matrix.shape} != ({buckets}, {dim})")
            self.matrix = np.asarray(matrix, dtype=np.float64)
        else:
            rng = np.random.default_rng(seed)
            bound = 1.0 / math.sqrt(dim)
            self.matrix = rng.uniform(-bound, bound, size=(buckets, dim))

    def _bucket(self, feature: str) -> int:
        digest = hashlib.blake2b(feature.encode("utf-8"), digest_size=8,
                                 key=self._hash_key).digest()
        return int.from_bytes(digest, "little") % self.buckets

    def _token_buckets(self, token: str) -> np.ndarray:
        cached = self._token_cache.get(token)
        if cached is not None:
            return cached
        lowered = token.lower()
        buckets: list[int] = []
        if self.word_unigrams:
            buckets.append(self._bucket("w\x00" + lowered))
        if self.char_ngram > 0:
            padded = f"#{lowered}#"
            n = self.char_ngram
            for i in range(max(len(padded) - n + 1, 0)):
                buckets.append(self._bucket("c\x00" + padded[i:i + n]))
        result = np.array(buckets, dtype=np.int64)
        self._token_cache[token] = result
        return result

    def feature_indices(self, tokens: Sequence[str]) -> np.ndarray:
        """Bucket indices of all features of a token sequence (with repeats)."""
        if not tokens:
            return np.empty(0, dtype=np.int64)
        return np.concatenate([self._token_buckets(tok) for tok in tokens])

    def encode(self, tokens: Sequence[str]) -> np.ndarray:
        """Mean of the rows for all hashed features; zeros when featureless."""
        idx = tokens if isinstance(tokens, np.ndarray) else self.feature_indices(tokens)
        if idx.size == 0:
            return np.zeros(self.dim)
        return self.matrix[idx].mean(axis=0)

    def copy(self) -> "HashedEncoder":
        return HashedEncoder(self.buckets, self.dim, self.seed, self.char_ngram,
                             self.word_unigrams, matrix=self.matrix.copy())

    def save(self, path: str | Path) -> None:
        header = struct.pack("<BIIIBq", _CKPT_VERSION, self.buckets, self.dim,
                             max(self.char_ngram, 0), int(self.word_unigrams),
                             self.seed)
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(self.matrix.astype("<f8").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "HashedEncoder":
        with open(path, "rb") as fh:
            raw = fh.read(struct.calcsize("<BIIIBq"))
            version, buckets, dim, char_ngram, word_flag, seed = struct.unpack("<BIIIBq", raw)
            if version != _CKPT_VERSION:
                raise ValueError(f"{path}: unsupported checkpoint version {version}")
            matrix = np.frombuffer(fh.read(), dtype="<f8").reshape(buckets, dim).copy()
        return cls(buckets, dim, seed, char_ngram, bool(word_flag), matrix=matrix)


class TokenizedCorpusEmbedder:
    """Binds a HashedEncoder to a document collection so it can embed by id."""

    def __init__(self, encoder: HashedEncoder, docs: Mapping[str, Document],
                 max_seq_len: int = DEFAULT_MAX_SEQ_LEN):
        self.encoder = encoder
        self.docs = docs
        self.max_seq_len = max_seq_len
        self._cache: dict[str, np.ndarray] = {}

    @property
    def dim(self) -> int:
        return self.encoder.dim

    def embed(self, doc_id: str) -> np.ndarray:
        vec = self._cache.get(doc_id)
        if vec is None:
            try:
                doc = self.docs[doc_id]
            except KeyError:
                raise EmbeddingLookupError(
                    f"no document with id {doc_id!r} to encode") from None
            vec = self.encoder.encode(prepare_document(doc, self.max_seq_len))
            self._cache[doc_id] = vec
        return vec


def _pair_forward(matrix: np.ndarray, idx_a: np.ndarray, idx_b: np.ndarray):
    """Embeddings, cosine and intermediates for one pair; None when degenerate."""
    if idx_a.size == 0 or idx_b.size == 0:
        return None
    ea = matrix[idx_a].mean(axis=0)
    eb = matrix[idx_b].mean(axis=0)
    na = float(ea @ ea)
    nb = float(eb @ eb)
    if na == 0.0 or nb == 0.0:
        return None
    denom = math.sqrt(na * nb)
    cos = float(ea @ eb) / denom
    return ea, eb, na, nb, denom, cos


def _pair_gradient(matrix: np.ndarray, idx_a: np.ndarray, idx_b: np.ndarray,
                   label: float):
    """Loss and d(cos - label)^2 / dE as (rows, row-gradients); rows repeat."""
    state = _pair_forward(matrix, idx_a, idx_b)
    if state is None:
        return label * label, None, None
    ea, eb, na, nb, denom, cos = state
    residual = cos - label
    loss = residual * residual
    # d cos / d ea = eb/denom - cos * ea/na   (and symmetrically for eb)
    g_ea = eb / denom - cos * ea / na
    g_eb = ea / denom - cos * eb / nb
    coeff = 2.0 * residual
    rows = np.concatenate([idx_a, idx_b])
    grads = np.vstack([
        np.broadcast_to(coeff / idx_a.size * g_ea, (idx_a.size, matrix.shape[1])),
        np.broadcast_to(coeff / idx_b.size * g_eb, (idx_b.size, matrix.shape[1])),
    ])
    return loss, rows, grads


def train_siamese(encoder: HashedEncoder,
                  pairs: Sequence[tuple[str, str, float]],
                  docs: Mapping[str, Sequence[str]],
                  cfg: SiameseTrainConfig) -> tuple[HashedEncoder, list[float]]:
    """Fit the embedding matrix so pair cosine regresses onto the label.

    ``pairs`` holds (doc_a id, doc_b id, label in [0, 1]); ``docs`` maps ids to
    prepared token sequences.  Minimizes the batch-mean squared error between
    cosine and label with Adam; only rows touched by a batch are stepped.
    Returns the encoder and per-epoch mean losses.
    """
    if not pairs:
        raise ValueError("no training pairs")
    features = {doc_id: encoder.feature_indices(tokens)
                for doc_id, tokens in docs.items()}
    for doc_a, doc_b, label in pairs:
        if doc_a not in features or doc_b not in features:
            missing = doc_a if doc_a not in features else doc_b
            raise KeyError(f"pair references unknown document {missing!r}")
        if not 0.0 <= label <= 1.0:
            raise ValueError(f"label {label!r} outside [0, 1]")

    matrix = encoder.matrix
    m = np.zeros_like(matrix)
    v = np.zeros_like(matrix)
    step = 0
    rng = random.Random(cfg.seed)
    order = list(range(len(pairs)))
    epoch_losses: list[float] = []

    for _ in range(cfg.epochs):
        rng.shuffle(order)
        pair_losses = np.zeros(len(pairs))  # fixed-order sum, stable under shuffling
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            all_rows: list[np.ndarray] = []
            all_grads: list[np.ndarray] = []
            for i in batch:
                doc_a, doc_b, label = pairs[i]
                loss, rows, grads = _pair_gradient(
                    matrix, features[doc_a], features[doc_b], label)
                pair_losses[i] = loss
                if rows is not None:
                    all_rows.append(rows)
                    all_grads.append(grads / len(batch))
            if not all_rows:
                continue
            rows = np.concatenate(all_rows)
            grads = np.vstack(all_grads)
            touched, inverse = np.unique(rows, return_inverse=True)
            grad = np.zeros((touched.size, matrix.shape[1]))
            np.add.at(grad, inverse, grads)

            step += 1
            m[touched] = cfg.beta1 * m[touched] + (1.0 - cfg.beta1) * grad
            v[touched] = cfg.beta2 * v[touched] + (1.0 - cfg.beta2) * grad * grad
            m_hat = m[touched] / (1.0 - cfg.beta1 ** step)
            v_hat = v[touched] / (1.0 - cfg.beta2 ** step)
            matrix[touched] -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.eps)
        epoch_losses.append(float(pair_losses.sum()) / len(pairs))
    return encoder, epoch_losses


def gradient_check(encoder: HashedEncoder,
                   pair: tuple[Sequence[str], Sequence[str]],
                   label: float, h: float = 1e-5,
                   samples: int = 8, seed: int = 0) -> float:
    """Max relative error between analytic and central-difference gradients.

    Entries are sampled from rows the pair touches plus one untouched row;
    entries smaller than 1e-4 in both gradients compare against that floor.
    """
    idx_a = encoder.feature_indices(list(pair[0]))
    idx_b = encoder.feature_indices(list(pair[1]))
    matrix = encoder.matrix
    _, rows, grads = _pair_gradient(matrix, idx_a, idx_b, label)
    analytic = np.zeros_like(matrix)
    if rows is not None:
        np.add.at(analytic, rows, grads)

    rng = random.Random(seed)
    touched = sorted(set(np.concatenate([idx_a, idx_b]).tolist())) if (
        idx_a.size or idx_b.size) else []
    candidates = [(row, rng.randrange(encoder.dim))
                  for row in rng.sample(touched, min(samples, len(touched)))]
    untouched = [row for row in range(min(encoder.buckets, 64))
                 if row not in set(touched)]
    if untouched:
        candidates.append((untouched[0], 0))

    def loss_at() -> float:
        state = _pair_forward(matrix, idx_a, idx_b)
        cos = 0.0 if state is None else state[5]
        return (cos - label) ** 2

    worst = 0.0
    for row, col in candidates:
        original = matrix[row, col]
        matrix[row, col] = original + h
        up = loss_at()
        matrix[row, col] = original - h
        down = loss_at()
        matrix[row, col] = original
        numeric = (up - down) / (2.0 * h)
        exact = analytic[row, col]
        denom = max(abs(exact), abs(numeric), 1e-4)
        worst = max(worst, abs(exact - numeric) / denom)
    return worst
