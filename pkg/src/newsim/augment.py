"""Synthetic-pair generation: native BM25 title retrieval, random pairing,
translation plans, and model-based pseudo-labeling."""

from __future__ import annotations

import csv
import logging
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .corpus import ArticlePair, Document, normalize_label, tokenize

log = logging.getLogger(__name__)

PAIR_SOURCES = ("bm25_intra", "bm25_external", "translated", "random")


@dataclass(frozen=True)
class AugmentedPair:
    doc_a: str
    doc_b: str
    pseudo_label: float
    source: str


@dataclass
class TranslationPlanEntry:
    source_pair_id: str
    target_lang_pair: tuple[str, str]
    status: str = "planned"


@dataclass
class DistributionReport:
    counts: list[int]
    bins: int
    entropy: float


def canonical(doc_a: str, doc_b: str) -> tuple[str, str]:
    """Order-free key for a document pair."""
    return (doc_a, doc_b) if doc_a <= doc_b else (doc_b, doc_a)


def pair_exclusions(pairs: Iterable[ArticlePair]) -> frozenset[tuple[str, str]]:
    return frozenset(canonical(p.doc_a, p.doc_b) for p in pairs)


@dataclass
class BM25Index:
    """Inverted index with Okapi scoring over lowercased title+body tokens."""

    postings: dict[str, dict[str, int]]
    doc_len: dict[str, int]
    avgdl: float
    k1: float = 1.2
    b: float = 0.75

    @property
    def n_docs(self) -> int:
        return len(self.doc_len)

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        return math.log(1.0 + (self.n_docs - df + 0.5) / (df + 0.5))


def index_terms(doc: Document) -> list[str]:
    return [tok.lower() for tok in tokenize(f"{doc.title} {doc.body}")]


def build_index(docs: Mapping[str, Document], k1: float = 1.2, b: float = 0.75) -> BM25Index:
    if not docs:
        raise ValueError("cannot index an empty corpus")
    postings: dict[str, dict[str, int]] = {}
    doc_len: dict[str, int] = {}
    for doc_id in sorted(docs):
        terms = index_terms(docs[doc_id])
        doc_len[doc_id] = len(terms)
        for term, tf in Counter(terms).items():
            postings.setdefault(term, {})[doc_id] = tf
    avgdl = sum(doc_len.values()) / len(doc_len)
    return BM25Index(postings=postings, doc_len=doc_len, avgdl=avgdl, k1=k1, b=b)


def bm25_score(index: BM25Index, terms: Sequence[str], doc_id: str) -> float:
    """Okapi score of one document for the given query terms."""
    if doc_id not in index.doc_len:
        raise KeyError(f"document {doc_id!r} is not indexed")
    length_norm = index.k1 * (1.0 - index.b + index.b * index.doc_len[doc_id] / index.avgdl)
    score = 0.0
    for term in terms:
        tf = index.postings.get(term, {}).get(doc_id, 0)
        if tf == 0:
            continue
        score += index.idf(term) * tf * (index.k1 + 1.0) / (tf + length_norm)
    return score


def _ranked(index: BM25Index, terms: Sequence[str]) -> list[tuple[str, float]]:
    scores = dict.fromkeys(index.doc_len, 0.0)
    for term in sorted(set(terms)):  # fixed order keeps float sums reproducible
        postings = index.postings.get(term)
        if not postings:
            continue
        weight = index.idf(term) * (index.k1 + 1.0) * terms.count(term)
        for doc_id, tf in postings.items():
            length_norm = index.k1 * (1.0 - index.b
                                      + index.b * index.doc_len[doc_id] / index.avgdl)
            scores[doc_id] += weight * tf / (tf + length_norm)
    return sorted(scores.items(), key=lambda item: (-item[1], item[0]))


def sample_bm25_pairs(index: BM25Index,
                      queries: Sequence[tuple[str, Sequence[str]]],
                      k: int = 5,
                      exclusions: frozenset[tuple[str, str]] = frozenset(),
                      ) -> list[tuple[str, str]]:
    """Top-k retrieval partners per title query, never the query document
    itself and never an excluded pair; descending score, doc-id tiebreak."""
    out: list[tuple[str, str]] = []
    for query_id, terms in queries:
        taken = 0
        for doc_id, _ in _ranked(index, [t.lower() for t in terms]):
            if taken >= k:
                break
            if doc_id == query_id or canonical(query_id, doc_id) in exclusions:
                continue
            out.append((query_id, doc_id))
            taken += 1
    return out


def _pair_rank_bounds(n: int) -> int:
    return n * (n - 1) // 2


def _unrank_pair(rank: int, n: int) -> tuple[int, int]:
    """Invert the row-major enumeration of i<j index pairs."""
    lo, hi = 0, n - 2
    while lo < hi:  # largest i with i*n - i*(i+1)/2 <= rank
        mid = (lo + hi + 1) // 2
        if mid * n - mid * (mid + 1) // 2 <= rank:
            lo = mid
        else:
            hi = mid - 1
    i = lo
    j = rank - (i * n - i * (i + 1) // 2) + i + 1
    return i, j


def sample_random_pairs(doc_ids: Sequence[str], count: int, seed: int = 0,
                        exclusions: frozenset[tuple[str, str]] = frozenset(),
                        ) -> list[tuple[str, str]]:
    """Uniform distinct unordered pairs without replacement."""
    ids = sorted(doc_ids)
    if len(ids) < 2:
        raise ValueError("need at least two documents")
    position = {doc_id: i for i, doc_id in enumerate(ids)}
    total = _pair_rank_bounds(len(ids))
    excluded_ranks = set()
    for a, b in exclusions:
        if a in position and b in position:
            i, j = sorted((position[a], position[b]))
            excluded_ranks.add(i * len(ids) - i * (i + 1) // 2 + j - i - 1)
    available = total - len(excluded_ranks)
    if count > available:
        raise ValueError(f"requested {count} pairs but only {available} are available")
    rng = random.Random(seed)
    drawn = rng.sample(range(total), min(total, count + len(excluded_ranks)))
    picked = [r for r in drawn if r not in excluded_ranks][:count]
    out = []
    for rank in picked:
        i, j = _unrank_pair(rank, len(ids))
        out.append((ids[i], ids[j]))
    return out


def self_label(model: Callable[[str, str], float],
               candidates: Iterable[tuple[str, str, str]],
               exclusions: frozenset[tuple[str, str]] = frozenset(),
               ) -> list[AugmentedPair]:
    """Pseudo-label candidate (doc_a, doc_b, source) triples with a frozen model.

    Duplicates (either order) are labeled once; candidates the model cannot
    resolve are skipped with a warning; labels are clipped to [0, 1].
    """
    seen: set[tuple[str, str]] = set()
    out: list[AugmentedPair] = []
    for doc_a, doc_b, source in candidates:
        key = canonical(doc_a, doc_b)
        if key in seen or key in exclusions:
            continue
        seen.add(key)
        try:
            score = model(doc_a, doc_b)
        except LookupError as exc:
            log.warning("skipping unresolvable candidate (%s, %s): %s",
                        doc_a, doc_b, exc)
            continue
        out.append(AugmentedPair(doc_a, doc_b, min(max(float(score), 0.0), 1.0), source))
    return out


def make_translation_plan(pairs: Sequence[ArticlePair],
                          target_distribution: Mapping[tuple[str, str], float],
                          per_source: int = 5, seed: int = 0,
                          ) -> list[TranslationPlanEntry]:
    """Plan translations of high-similarity English pairs into target language
    pairs drawn proportionally to the given weights."""
    targets = sorted(target_distribution)
    weights = [target_distribution[t] for t in targets]
    if not targets or sum(weights) <= 0:
        raise ValueError("target distribution weights must sum to a positive value")
    if any(w < 0 for w in weights):
        raise ValueError("target distribution weights must be nonnegative")
    eligible = [p for p in pairs
                if p.lang_pair == ("en", "en") and p.overall_raw is not None
                and normalize_label(p.overall_raw) >= 0.5]
    if not eligible:
        log.warning("no English pairs with normalized label in [0.5, 1]; empty plan")
        return []
    rng = random.Random(seed)
    plan = []
    for pair in eligible:
        for target in rng.choices(targets, weights=weights, k=per_source):
            plan.append(TranslationPlanEntry(pair.pair_id, target))
    return plan


def distribution_report(labels: Sequence[float], bins: int = 5) -> DistributionReport:
    """Histogram of labels over [0, 1] plus its normalized entropy."""
    if bins < 2:
        raise ValueError("need at least 2 bins")
    counts = [0] * bins
    for value in labels:
        counts[min(int(value * bins), bins - 1)] += 1
    total = sum(counts)
    entropy = 0.0
    if total:
        for count in counts:
            if count:
                p = count / total
                entropy -= p * math.log(p)
        entropy /= math.log(bins)
    return DistributionReport(counts=counts, bins=bins, entropy=entropy)


# --- file formats ---

def write_augmented_pairs(path: str | Path, pairs: Sequence[AugmentedPair]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("doc_a", "doc_b", "pseudo_label", "source"))
        for p in pairs:
            writer.writerow((p.doc_a, p.doc_b, repr(p.pseudo_label), p.source))


def read_augmented_pairs(path: str | Path) -> list[AugmentedPair]:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        for row in reader:
            if not row:
                continue
            out.append(AugmentedPair(row[0], row[1], float(row[2]), row[3]))
    return out


def write_translation_plan(path: str | Path,
                           plan: Sequence[TranslationPlanEntry]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("source_pair_id", "target_lang1", "target_lang2", "status"))
        for entry in plan:
            writer.writerow((entry.source_pair_id, *entry.target_lang_pair, entry.status))


def read_translation_plan(path: str | Path) -> list[TranslationPlanEntry]:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        for row in reader:
            if not row:
                continue
            out.append(TranslationPlanEntry(row[0], (row[1], row[2]), row[3]))
    return out
