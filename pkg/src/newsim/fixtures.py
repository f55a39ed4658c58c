"""Deterministic synthetic corpus generator.

Builds article pairs whose label is a noisy monotone function of vocabulary
overlap and entity overlap, so every pipeline stage can run and be scored
without any external dataset.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

_CONSONANTS = "bdfgklmnprstvz"
_VOWELS = "aeiou"
_ORG_SUFFIXES = ("Group", "Institute", "Union", "Party", "Press")
_LANG_CHOICES = (
    (("en", "en"), 3),
    (("de", "de"), 2),
    (("es", "es"), 2),
    (("fr", "fr"), 2),
    (("de", "en"), 2),
    (("en", "fr"), 1),
    (("ar", "ar"), 1),
)


@dataclass
class FixturePaths:
    root: Path
    pairs: Path
    docs: Path
    entities: Path
    gazetteer: Path
    config: Path


@dataclass
class _Topic:
    words: list[str]
    geo: list[str]
    org: list[str]
    dates: list[str]
    qty: list[str]
    epoch: date


def _clamp01(x: float) -> float:
    return min(max(x, 0.0), 1.0)


class _WordFactory:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.used: set[str] = set()

    def word(self, syllables: int = 3) -> str:
        while True:
            candidate = "".join(self.rng.choice(_CONSONANTS) + self.rng.choice(_VOWELS)
                                for _ in range(syllables))
            if candidate not in self.used:
                self.used.add(candidate)
                return candidate


def _make_topics(rng: random.Random, factory: _WordFactory, n_topics: int,
                 words_per_topic: int) -> list[_Topic]:
    topics = []
    for t in range(n_topics):
        epoch = date(2021, 1 + t % 12, 1)
        topics.append(_Topic(
            words=[factory.word(rng.randint(2, 4)) for _ in range(words_per_topic)],
            geo=[factory.word(3).capitalize() for _ in range(8)],
            org=[f"{factory.word(3).capitalize()} {rng.choice(_ORG_SUFFIXES)}"
                 for _ in range(8)],
            dates=[(epoch + timedelta(days=rng.randrange(90))).isoformat()
                   for _ in range(6)],
            qty=[str(rng.randrange(2, 5000)) for _ in range(8)],
            epoch=epoch,
        ))
    return topics


def _sample_mentions(rng: random.Random, topic: _Topic) -> list[tuple[str, str]]:
    mentions = []
    mentions += [(rng.choice(topic.geo), "GPE") for _ in range(3)]
    mentions += [(rng.choice(topic.org), "ORG") for _ in range(3)]
    mentions += [(rng.choice(topic.dates), "DATE") for _ in range(2)]
    mentions += [(rng.choice(topic.qty), "CARDINAL") for _ in range(2)]
    return mentions


def generate_fixture(out_dir: str | Path, n_pairs: int = 2000, n_topics: int = 12,
                     body_tokens: int = 90, seed: int = 7,
                     config_overrides: dict | None = None) -> FixturePaths:
    """Write pairs.csv, docs.jsonl, entities.jsonl, gazetteer.csv and a ready
    config.ini under ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    factory = _WordFactory(rng)
    common = [factory.word(rng.randint(2, 3)) for _ in range(40)]
    topics = _make_topics(rng, factory, n_topics, words_per_topic=60)

    lang_pairs = [lp for lp, _ in _LANG_CHOICES]
    lang_weights = [w for _, w in _LANG_CHOICES]

    doc_rows = []
    pair_rows = []
    mention_rows = {}
    next_id = 10000

    for _ in range(n_pairs):
        t = rng.randrange(n_topics)
        u = (t + 1 + rng.randrange(n_topics - 1)) % n_topics
        base_sim = rng.random()
        vocab_rate = _clamp01(base_sim + rng.gauss(0.0, 0.08))
        entity_rate = _clamp01(base_sim + rng.gauss(0.0, 0.08))
        lang_a, lang_b = rng.choices(lang_pairs, weights=lang_weights, k=1)[0]

        id_a, id_b = str(next_id), str(next_id + 1)
        next_id += 2

        # document a: pure topic-t vocabulary
        title_a = [rng.choice(topics[t].words) for _ in range(6)]
        body_a = [rng.choice(topics[t].words) if rng.random() < 0.75
                  else rng.choice(common) for _ in range(body_tokens)]
        mentions_a = _sample_mentions(rng, topics[t])

        # document b: topic-t vocabulary with probability vocab_rate, else topic u
        topic_draws = 0
        kept_draws = 0

        def draw_topic_word():
            nonlocal topic_draws, kept_draws
            topic_draws += 1
            if rng.random() < vocab_rate:
                kept_draws += 1
                return rng.choice(topics[t].words)
            return rng.choice(topics[u].words)

        title_b = [draw_topic_word() for _ in range(6)]
        body_b = [draw_topic_word() if rng.random() < 0.75 else rng.choice(common)
                  for _ in range(body_tokens)]
        realized_vocab = kept_draws / topic_draws

        partner = _sample_mentions(rng, topics[u])
        mentions_b = []
        copied = 0
        for original, fallback in zip(mentions_a, partner):
            if rng.random() < entity_rate:
                mentions_b.append(original)
                copied += 1
            else:
                mentions_b.append(fallback)
        realized_entity = copied / len(mentions_a)

        label = _clamp01(0.55 * realized_vocab + 0.45 * realized_entity
                         + rng.gauss(0.0, 0.03))
        raw = 4.0 - 3.0 * label

        date_a = (topics[t].epoch + timedelta(days=rng.randrange(60))).isoformat()
        date_src = t if rng.random() < entity_rate else u
        date_b = (topics[date_src].epoch + timedelta(days=rng.randrange(60))).isoformat()

        for doc_id, lang, title, body, mentions, pub in (
                (id_a, lang_a, title_a, body_a, mentions_a, date_a),
                (id_b, lang_b, title_b, body_b, mentions_b, date_b)):
            text_entities = [s for s, lbl in mentions if lbl in ("GPE", "ORG")]
            doc_rows.append({
                "id": doc_id,
                "lang": lang,
                "title": " ".join(title),
                "text": " ".join(body + text_entities),
                "publish_date": pub,
            })
            mention_rows[doc_id] = [{"surface": s, "label": lbl}
                                    for s, lbl in mentions]

        pair_rows.append((f"{id_a}_{id_b}", lang_a, lang_b, raw,
                          4.0 - 3.0 * realized_vocab, 4.0 - 3.0 * realized_entity))

    paths = FixturePaths(
        root=out_dir,
        pairs=out_dir / "pairs.csv",
        docs=out_dir / "docs.jsonl",
        entities=out_dir / "entities.jsonl",
        gazetteer=out_dir / "gazetteer.csv",
        config=out_dir / "config.ini",
    )

    with open(paths.docs, "w", encoding="utf-8") as fh:
        for row in doc_rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")

    with open(paths.pairs, "w", encoding="utf-8") as fh:
        fh.write("pair_id,lang1,lang2,overall,geography,entities,time,"
                 "narrative,style,tone\n")
        for pair_id, lang1, lang2, raw, narr_raw, ent_raw in pair_rows:
            fh.write(f"{pair_id},{lang1},{lang2},{raw!r},,{ent_raw!r},,"
                     f"{narr_raw!r},,\n")

    with open(paths.entities, "w", encoding="utf-8") as fh:
        for doc_id in mention_rows:
            fh.write(json.dumps({"id": doc_id, "mentions": mention_rows[doc_id]},
                                ensure_ascii=False) + "\n")

    with open(paths.gazetteer, "w", encoding="utf-8") as fh:
        fh.write("surface,label\n")
        for topic in topics:
            for surface in topic.geo:
                fh.write(f"{surface},GPE\n")
            for surface in topic.org:
                fh.write(f"{surface},ORG\n")

    paths.config.write_text(render_config(out_dir, config_overrides or {}),
                            encoding="utf-8")
    return paths


def render_config(root: Path, overrides: dict | None = None) -> str:
    """A config.ini for the fixture with desk-scale training settings."""
    values = {
        ("paths", "pairs"): str(root / "pairs.csv"),
        ("paths", "docs"): str(root / "docs.jsonl"),
        ("paths", "entities"): str(root / "entities.jsonl"),
        ("paths", "gazetteer"): str(root / "gazetteer.csv"),
        ("paths", "workdir"): str(root / "work"),
        ("corpus", "seed"): "13",
        ("encoder", "buckets"): "65536",
        ("encoder", "dim"): "64",
        ("encoder", "epochs"): "6",
        ("encoder", "learning_rate"): "0.02",
        ("encoder", "seed"): "17",
        ("fusion", "epochs"): "400",
        ("fusion", "patience"): "30",
        ("fusion", "seed"): "19",
        ("augment", "random_count"): "1000",
        ("augment", "translation_targets"): "de-fr:2,es-tr:1,pl-pl:1",
        ("augment", "seed"): "23",
    }
    if overrides:
        values.update(overrides)
    sections: dict[str, list[tuple[str, str]]] = {}
    for (section, key), value in values.items():
        sections.setdefault(section, []).append((key, str(value)))
    blocks = []
    for section in ("paths", "corpus", "encoder", "fusion", "augment", "eval"):
        if section not in sections:
            continue
        lines = [f"[{section}]"]
        lines += [f"{key} = {value}" for key, value in sections[section]]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"
