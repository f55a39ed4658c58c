"""Command-line pipeline: ingest -> entities -> train-encoder -> augment ->
self-label -> train-fusion -> score -> evaluate / significance."""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import augment as aug
from . import corpus as corp
from . import evaluation as ev
from . import fusion as fus
from .config import ConfigError, PipelineConfig, load_config
from .encoder import (
    HashedEncoder,
    PrecomputedStore,
    SiameseTrainConfig,
    TokenizedCorpusEmbedder,
    prepare_document,
)
from .entities import build_profiles, fallback_extract, load_gazetteer, read_entities_file, write_entities_file
from .fixtures import generate_fixture


class PipelineOrderError(Exception):
    """An upstream artifact is missing; the message names the producing command."""


# --- small helpers ---

def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _workdir(config: PipelineConfig) -> Path:
    path = Path(config.paths.workdir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _require(path: Path, producer: str) -> Path:
    if not path.exists():
        raise PipelineOrderError(
            f"missing artifact {path}; run `newsim {producer}` first")
    return path


def _require_config_path(value: str, key: str) -> Path:
    if not value:
        raise ConfigError(f"{key}: path not set")
    path = Path(value)
    if not path.exists():
        raise ConfigError(f"{key}: file not found: {path}")
    return path


def _write_manifest(config: PipelineConfig, command: str, started: float,
                    inputs: dict[str, Path], outputs: dict[str, Path],
                    metrics: dict) -> None:
    workdir = _workdir(config)
    manifest_dir = workdir / "manifests"
    manifest_dir.mkdir(exist_ok=True)

    def hashes(paths: dict[str, Path]) -> dict:
        return {name: {"path": str(path),
                       "sha256": _sha256(path) if path.exists() else None}
                for name, path in paths.items()}

    manifest = {
        "command": command,
        "started_at": started,
        "finished_at": time.time(),
        "config": config.to_dict(),
        "inputs": hashes(inputs),
        "outputs": hashes(outputs),
        "metrics": metrics,
    }
    path = manifest_dir / f"{command}.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _map_maybe_parallel(fn, items, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


# --- shared pipeline state ---

def _load_state(config: PipelineConfig):
    """Corpus, filtered labeled pairs, and the persisted split assignment."""
    pairs_path = _require_config_path(config.paths.pairs, "paths.pairs")
    docs_path = _require_config_path(config.paths.docs, "paths.docs")
    corpus = corp.load_corpus(pairs_path, docs_path)
    filtered = corp.filter_pairs(corpus.pairs, corpus.docs, config.corpus.min_tokens)

    split_path = _workdir(config) / "split.csv"
    _require(split_path, "ingest")
    train, dev = set(), set()
    with open(split_path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        for row in reader:
            if not row:
                continue
            (train if row[1] == "train" else dev).add(row[0])
    assignment = corp.SplitAssignment(train=frozenset(train), dev=frozenset(dev))
    corp.apply_split(filtered, assignment)
    return corpus, filtered, assignment


def _split_pairs(filtered, assignment, which: str):
    if which == "train":
        return [p for p in filtered if p.pair_id in assignment.train]
    if which == "dev":
        return [p for p in filtered if p.pair_id in assignment.dev]
    if which == "all":
        labeled = assignment.train | assignment.dev
        return [p for p in filtered if p.pair_id in labeled]
    raise ValueError(f"unknown split {which!r}")


def _entities_path(config: PipelineConfig) -> Path:
    if config.paths.entities:
        return _require_config_path(config.paths.entities, "paths.entities")
    return _require(_workdir(config) / "entities.jsonl", "extract-entities")


def _load_profiles(config: PipelineConfig, docs):
    mentions = read_entities_file(_entities_path(config))
    return build_profiles(docs, mentions)


def _build_embedder(config: PipelineConfig, docs):
    if config.encoder.kind == "precomputed":
        path = _require_config_path(config.paths.embeddings, "paths.embeddings")
        return PrecomputedStore.from_file(path)
    ckpt = _require(_workdir(config) / "encoder.ckpt", "train-encoder")
    encoder = HashedEncoder.load(ckpt)
    return TokenizedCorpusEmbedder(encoder, docs, config.encoder.max_seq_len)


def _augmented_training_rows(config: PipelineConfig):
    """(doc_a, doc_b, pseudo_label) triples when augmentation is enabled."""
    if not config.augment.use_augmented:
        return []
    path = _require(_workdir(config) / "augmented_pairs.csv", "self-label")
    return [(p.doc_a, p.doc_b, p.pseudo_label)
            for p in aug.read_augmented_pairs(path)]


# --- subcommands ---

def cmd_ingest(config: PipelineConfig, args) -> dict:
    started = time.time()
    pairs_path = _require_config_path(config.paths.pairs, "paths.pairs")
    docs_path = _require_config_path(config.paths.docs, "paths.docs")
    corpus = corp.load_corpus(pairs_path, docs_path)
    filtered = corp.filter_pairs(corpus.pairs, corpus.docs, config.corpus.min_tokens)
    assignment = corp.stratified_split(
        filtered, config.corpus.split_ratio, config.dev_lang_set(),
        seed=config.corpus.seed)
    corp.apply_split(filtered, assignment)

    workdir = _workdir(config)
    filtered_path = workdir / "pairs_filtered.csv"
    with open(filtered_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(corp.PAIRS_HEADER)
        for p in filtered:
            row = [p.pair_id, *p.lang_pair,
                   "" if p.overall_raw is None else repr(p.overall_raw)]
            row += [("" if name not in p.sub_scores else repr(p.sub_scores[name]))
                    for name in corp.SUB_SCORE_NAMES]
            writer.writerow(row)
    split_path = workdir / "split.csv"
    with open(split_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("pair_id", "split"))
        for p in filtered:
            writer.writerow((p.pair_id, p.split))
    errors_path = workdir / "ingest_errors.txt"
    errors_path.write_text(
        "".join(f"{err}\n" for err in corpus.errors), encoding="utf-8")

    metrics = {
        "pairs_loaded": len(corpus.pairs),
        "pairs_filtered": len(filtered),
        "train": len(assignment.train),
        "dev": len(assignment.dev),
        "row_errors": len(corpus.errors),
    }
    _write_manifest(config, "ingest", started,
                    {"pairs": pairs_path, "docs": docs_path},
                    {"pairs_filtered": filtered_path, "split": split_path,
                     "errors": errors_path}, metrics)
    print(json.dumps(metrics))
    return metrics


def cmd_extract_entities(config: PipelineConfig, args) -> dict:
    started = time.time()
    docs_path = _require_config_path(config.paths.docs, "paths.docs")
    docs, _ = corp.load_documents(docs_path)
    gazetteer = {}
    if config.paths.gazetteer:
        gazetteer = load_gazetteer(
            _require_config_path(config.paths.gazetteer, "paths.gazetteer"))
    mentions = {doc_id: fallback_extract(docs[doc_id], gazetteer)
                for doc_id in sorted(docs)}
    out_path = _workdir(config) / "entities.jsonl"
    write_entities_file(out_path, mentions)
    metrics = {"documents": len(docs),
               "mentions": sum(len(m) for m in mentions.values())}
    _write_manifest(config, "extract-entities", started, {"docs": docs_path},
                    {"entities": out_path}, metrics)
    print(json.dumps(metrics))
    return metrics


def cmd_train_encoder(config: PipelineConfig, args) -> dict:
    started = time.time()
    if config.encoder.kind == "precomputed":
        raise ConfigError(
            "encoder.kind: 'precomputed' embeddings are fixed inputs and need no "
            "training; point paths.embeddings at the embedding file instead")
    corpus, filtered, assignment = _load_state(config)
    train_pairs = _split_pairs(filtered, assignment, "train")
    triples = [(p.doc_a, p.doc_b, corp.normalize_label(p.overall_raw))
               for p in train_pairs]
    triples += _augmented_training_rows(config)
    if not triples:
        raise PipelineOrderError("no labeled training pairs; run `newsim ingest` first")

    needed = {doc_id for a, b, _ in triples for doc_id in (a, b)}
    extra_docs = _load_external_docs(config)
    tokens = {}
    for doc_id in sorted(needed):
        doc = corpus.docs.get(doc_id) or extra_docs.get(doc_id)
        if doc is None:
            raise PipelineOrderError(
                f"augmented pair references unknown document {doc_id!r}")
        tokens[doc_id] = prepare_document(doc, config.encoder.max_seq_len)

    encoder = HashedEncoder(
        buckets=config.encoder.buckets, dim=config.encoder.dim,
        seed=config.encoder.seed, char_ngram=config.encoder.char_ngram,
        word_unigrams=config.encoder.word_unigrams)
    cfg = SiameseTrainConfig(
        epochs=config.encoder.epochs, batch_size=config.encoder.batch_size,
        learning_rate=config.encoder.learning_rate, seed=config.encoder.seed)
    from .encoder import train_siamese
    _, losses = train_siamese(encoder, triples, tokens, cfg)

    workdir = _workdir(config)
    ckpt = workdir / "encoder.ckpt"
    encoder.save(ckpt)
    from . import report
    loss_csv = report.write_loss_csv(losses, workdir / "encoder_loss.csv")
    loss_png = report.save_loss_curve(losses, workdir / "figures" / "encoder_loss.png",
                                      title="encoder training loss")
    metrics = {"pairs": len(triples), "epochs": len(losses),
               "first_epoch_loss": losses[0], "final_epoch_loss": losses[-1]}
    _write_manifest(config, "train-encoder", started,
                    {"pairs": Path(config.paths.pairs), "docs": Path(config.paths.docs)},
                    {"checkpoint": ckpt, "loss_csv": loss_csv, "loss_png": loss_png},
                    metrics)
    print(json.dumps(metrics))
    return metrics


def _load_external_docs(config: PipelineConfig):
    if not config.paths.external_docs:
        return {}
    path = _require_config_path(config.paths.external_docs, "paths.external_docs")
    docs, _ = corp.load_documents(path)
    return docs


def cmd_augment(config: PipelineConfig, args) -> dict:
    started = time.time()
    corpus, filtered, assignment = _load_state(config)
    exclusions = aug.pair_exclusions(corpus.pairs)
    corpus_docs = {doc_id: corpus.docs[doc_id]
                   for p in filtered for doc_id in (p.doc_a, p.doc_b)}

    queries = [(doc_id, [t.lower() for t in corp.tokenize(corpus_docs[doc_id].title)])
               for doc_id in sorted(corpus_docs)]
    candidates: list[tuple[str, str, str]] = []

    index = aug.build_index(corpus_docs, k1=config.augment.k1, b=config.augment.b)
    for query_id, doc_id in aug.sample_bm25_pairs(
            index, queries, k=config.augment.bm25_k, exclusions=exclusions):
        candidates.append((query_id, doc_id, "bm25_intra"))

    external_docs = _load_external_docs(config)
    if external_docs:
        ext_index = aug.build_index(external_docs, k1=config.augment.k1,
                                    b=config.augment.b)
        for query_id, doc_id in aug.sample_bm25_pairs(
                ext_index, queries, k=config.augment.bm25_k, exclusions=exclusions):
            candidates.append((query_id, doc_id, "bm25_external"))

    if config.augment.random_count > 0:
        for doc_a, doc_b in aug.sample_random_pairs(
                sorted(corpus_docs), config.augment.random_count,
                seed=config.augment.seed, exclusions=exclusions):
            candidates.append((doc_a, doc_b, "random"))

    plan = []
    distribution = config.translation_distribution()
    if distribution:
        plan = aug.make_translation_plan(
            filtered, distribution, per_source=config.augment.per_source,
            seed=config.augment.seed)

    workdir = _workdir(config)
    cand_path = workdir / "candidates.csv"
    with open(cand_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("doc_a", "doc_b", "source"))
        writer.writerows(candidates)
    plan_path = workdir / "translation_plan.csv"
    aug.write_translation_plan(plan_path, plan)

    by_source = {}
    for _, _, source in candidates:
        by_source[source] = by_source.get(source, 0) + 1
    metrics = {"candidates": len(candidates), "by_source": by_source,
               "translation_plan_entries": len(plan)}
    _write_manifest(config, "augment", started,
                    {"pairs": Path(config.paths.pairs), "docs": Path(config.paths.docs)},
                    {"candidates": cand_path, "translation_plan": plan_path}, metrics)
    print(json.dumps(metrics))
    return metrics


def cmd_self_label(config: PipelineConfig, args) -> dict:
    started = time.time()
    corpus, filtered, assignment = _load_state(config)
    cand_path = _require(_workdir(config) / "candidates.csv", "augment")

    docs = dict(corpus.docs)
    docs.update(_load_external_docs(config))
    embedder = _build_embedder(config, docs)  # checks the encoder artifact
    profiles = _load_profiles(config, docs)
    fusion_ckpt = _require(_workdir(config) / "fusion.ckpt", "train-fusion")
    mlp = fus.FusionMLP.load(fusion_ckpt)

    candidates = []
    with open(cand_path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        for row in reader:
            if row:
                candidates.append((row[0], row[1], row[2]))

    def model(doc_a: str, doc_b: str) -> float:
        row = fus.build_feature_row(embedder, profiles, doc_a, doc_b)
        return fus.forward(mlp, row)

    exclusions = aug.pair_exclusions(corpus.pairs)
    labeled = aug.self_label(model, candidates, exclusions=exclusions)

    workdir = _workdir(config)
    out_path = workdir / "augmented_pairs.csv"
    aug.write_augmented_pairs(out_path, labeled)
    dist = aug.distribution_report([p.pseudo_label for p in labeled],
                                   bins=config.eval.bins)
    from . import report
    hist_csv = report.write_histogram_csv(dist, workdir / "augmented_hist.csv")
    hist_png = report.save_histogram(dist, workdir / "figures" / "augmented_hist.png",
                                     title="pseudo-label distribution")
    metrics = {"labeled": len(labeled), "entropy": dist.entropy,
               "histogram": dist.counts}
    _write_manifest(config, "self-label", started,
                    {"candidates": cand_path, "fusion": fusion_ckpt},
                    {"augmented_pairs": out_path, "histogram_csv": hist_csv,
                     "histogram_png": hist_png}, metrics)
    print(json.dumps(metrics))
    return metrics


def cmd_train_fusion(config: PipelineConfig, args) -> dict:
    started = time.time()
    corpus, filtered, assignment = _load_state(config)
    docs = dict(corpus.docs)
    docs.update(_load_external_docs(config))
    embedder = _build_embedder(config, docs)
    profiles = _load_profiles(config, docs)

    encoder_ckpt = _workdir(config) / "encoder.ckpt"
    encoder_hash_before = _sha256(encoder_ckpt) if encoder_ckpt.exists() else None

    def feature_rows(pairs):
        rows = []
        for p in pairs:
            row = fus.build_feature_row(embedder, profiles, p.doc_a, p.doc_b)
            rows.append((p.pair_id, row, corp.normalize_label(p.overall_raw)))
        return rows

    train_rows = feature_rows(_split_pairs(filtered, assignment, "train"))
    dev_rows = feature_rows(_split_pairs(filtered, assignment, "dev"))
    for doc_a, doc_b, pseudo in _augmented_training_rows(config):
        row = fus.build_feature_row(embedder, profiles, doc_a, doc_b)
        train_rows.append((f"{doc_a}_{doc_b}", row, pseudo))

    cfg = fus.FusionTrainConfig(
        learning_rate=config.fusion.learning_rate, epochs=config.fusion.epochs,
        patience=config.fusion.patience, seed=config.fusion.seed)
    mlp, losses = fus.train_fusion(
        [(row, label) for _, row, label in train_rows], cfg,
        dev_rows=[(row, label) for _, row, label in dev_rows] or None)

    if encoder_hash_before is not None and _sha256(encoder_ckpt) != encoder_hash_before:
        raise RuntimeError("encoder checkpoint changed during fusion training")

    workdir = _workdir(config)
    ckpt = workdir / "fusion.ckpt"
    mlp.save(ckpt)
    from . import report
    loss_csv = report.write_loss_csv(losses, workdir / "fusion_loss.csv")
    loss_png = report.save_loss_curve(losses, workdir / "figures" / "fusion_loss.png",
                                      title="fusion training loss")
    dump = [(pair_id, row, label, fus.forward(mlp, row))
            for pair_id, row, label in train_rows + dev_rows]
    dump_path = workdir / "feature_dump.csv"
    fus.write_feature_dump(dump_path, dump)

    metrics = {"train_rows": len(train_rows), "dev_rows": len(dev_rows),
               "epochs": len(losses), "final_train_loss": losses[-1],
               "encoder_checkpoint_unchanged": (None if encoder_hash_before is None
                                                else True)}
    _write_manifest(config, "train-fusion", started,
                    {"encoder": encoder_ckpt, "entities": _entities_path(config)},
                    {"checkpoint": ckpt, "loss_csv": loss_csv, "loss_png": loss_png,
                     "feature_dump": dump_path}, metrics)
    print(json.dumps(metrics))
    return metrics


def cmd_score(config: PipelineConfig, args) -> dict:
    started = time.time()
    corpus, filtered, assignment = _load_state(config)
    embedder = _build_embedder(config, corpus.docs)
    pairs = _split_pairs(filtered, assignment, args.split)

    inputs: dict[str, Path] = {}
    if args.model == "encoder-only":
        # narrative cosine mapped affinely onto [0, 1]
        from .encoder import narrative_similarity

        def predict(p):
            cos = narrative_similarity(embedder.embed(p.doc_a), embedder.embed(p.doc_b))
            return (cos + 1.0) / 2.0
    else:
        fusion_ckpt = _require(_workdir(config) / "fusion.ckpt", "train-fusion")
        inputs["fusion"] = fusion_ckpt
        profiles = _load_profiles(config, corpus.docs)
        mlp = fus.FusionMLP.load(fusion_ckpt)

        def predict(p):
            return fus.predict_pair(mlp, embedder, profiles, p)

    scores = _map_maybe_parallel(predict, pairs, args.threads)
    predictions = {p.pair_id: s for p, s in zip(pairs, scores)}

    out_path = Path(args.out) if args.out else _workdir(config) / "predictions.csv"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    ev.write_predictions(out_path, predictions)
    metrics = {"split": args.split, "model": args.model,
               "predictions": len(predictions)}
    _write_manifest(config, "score", started, inputs,
                    {"predictions": out_path}, metrics)
    print(json.dumps(metrics))
    return metrics


def cmd_evaluate(config: PipelineConfig, args) -> dict:
    started = time.time()
    corpus, filtered, assignment = _load_state(config)
    pred_path = Path(args.predictions) if args.predictions else \
        _require(_workdir(config) / "predictions.csv", "score")
    if not pred_path.exists():
        raise PipelineOrderError(
            f"missing predictions file {pred_path}; run `newsim score` first")
    predictions = ev.read_predictions(pred_path)

    pairs = [p for p in _split_pairs(filtered, assignment, args.split)
             if p.overall_raw is not None]
    breakdown = ev.per_language_breakdown(pairs, predictions)
    mistakes = ev.serious_mistakes(pairs, predictions,
                                   threshold=config.eval.mistake_threshold)

    workdir = _workdir(config)
    from . import report
    outputs = report.write_eval_outputs(breakdown, workdir)
    mistakes_path = report.write_mistakes_csv(mistakes, workdir / "serious_mistakes.csv")
    figures = workdir / "figures"
    chart = report.save_per_language_chart(breakdown, figures / "per_language.png")
    labels = [corp.normalize_label(p.overall_raw) for p in pairs]
    preds = [predictions[p.pair_id] for p in pairs]
    scatter = report.save_scatter(labels, preds, figures / "scatter.png")
    dist = aug.distribution_report(preds, bins=config.eval.bins)
    hist = report.save_histogram(dist, figures / "prediction_hist.png",
                                 title="prediction distribution")

    metrics = {"split": args.split, "n": breakdown.n,
               "overall_pearson": breakdown.overall_pearson,
               "mono_avg": breakdown.mono_avg, "cross_avg": breakdown.cross_avg,
               "serious_mistakes": len(mistakes)}
    _write_manifest(config, "evaluate", started, {"predictions": pred_path},
                    {**outputs, "mistakes": mistakes_path, "chart": chart,
                     "scatter": scatter, "histogram": hist}, metrics)
    print(json.dumps(metrics))
    return metrics


def cmd_significance(config: PipelineConfig, args) -> dict:
    started = time.time()
    corpus, filtered, assignment = _load_state(config)
    preds_a = ev.read_predictions(_require_config_path(args.pred_a, "--pred-a"))
    preds_b = ev.read_predictions(_require_config_path(args.pred_b, "--pred-b"))
    pairs = [p for p in _split_pairs(filtered, assignment, args.split)
             if p.pair_id in preds_a and p.pair_id in preds_b
             and p.overall_raw is not None]
    if len(pairs) <= 3:
        raise ValueError(f"only {len(pairs)} pairs shared by both prediction files")
    labels = [corp.normalize_label(p.overall_raw) for p in pairs]
    comparison = ev.compare_models(labels,
                                   [preds_a[p.pair_id] for p in pairs],
                                   [preds_b[p.pair_id] for p in pairs])
    result = {
        "n": comparison.williams.n,
        "pearson_a": comparison.pearson_a,
        "pearson_b": comparison.pearson_b,
        "pearson_ab": comparison.pearson_ab,
        "t": comparison.williams.t,
        "df": comparison.williams.df,
        "p_value": comparison.williams.p_value,
    }
    out_path = _workdir(config) / "significance.json"
    out_path.write_text(json.dumps(result, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
    _write_manifest(config, "significance", started,
                    {"pred_a": Path(args.pred_a), "pred_b": Path(args.pred_b)},
                    {"significance": out_path}, result)
    print(json.dumps(result))
    return result


def cmd_make_fixture(args) -> dict:
    paths = generate_fixture(args.out, n_pairs=args.pairs, n_topics=args.topics,
                             seed=args.seed)
    result = {"pairs": str(paths.pairs), "docs": str(paths.docs),
              "entities": str(paths.entities), "gazetteer": str(paths.gazetteer),
              "config": str(paths.config)}
    print(json.dumps(result))
    return result


def cmd_init_config(args) -> dict:
    from .fixtures import render_config
    text = render_config(Path(args.root))
    Path(args.out).write_text(text, encoding="utf-8")
    print(json.dumps({"config": args.out}))
    return {}


# --- argument parsing ---

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="newsim",
        description="Multilingual news-article similarity pipeline.")
    parser.add_argument("--config", default="config.ini",
                        help="pipeline config file (INI)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override every section seed (offsets keep them distinct)")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker cap for batch scoring")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("ingest", help="load, filter, split, and persist the corpus")
    sub.add_parser("extract-entities",
                   help="pattern-based mention extraction into entities.jsonl")
    sub.add_parser("train-encoder", help="fit the hashed Siamese encoder")
    sub.add_parser("augment", help="generate candidate pairs and translation plan")
    sub.add_parser("self-label", help="pseudo-label candidates with the trained model")
    sub.add_parser("train-fusion", help="fit the feature-fusion MLP")

    p_score = sub.add_parser("score", help="write predictions for a split")
    p_score.add_argument("--split", choices=("train", "dev", "all"), default="dev")
    p_score.add_argument("--model", choices=("fusion", "encoder-only"),
                         default="fusion")
    p_score.add_argument("--out", default=None,
                         help="output CSV (default: workdir/predictions.csv)")

    p_eval = sub.add_parser("evaluate", help="correlation report plus figures")
    p_eval.add_argument("--split", choices=("train", "dev", "all"), default="dev")
    p_eval.add_argument("--predictions", default=None,
                        help="predictions CSV (default: workdir/predictions.csv)")

    p_sig = sub.add_parser("significance",
                           help="Williams test between two prediction files")
    p_sig.add_argument("--pred-a", required=True)
    p_sig.add_argument("--pred-b", required=True)
    p_sig.add_argument("--split", choices=("train", "dev", "all"), default="dev")

    p_fix = sub.add_parser("make-fixture", help="generate the synthetic corpus")
    p_fix.add_argument("--out", required=True)
    p_fix.add_argument("--pairs", type=int, default=2000)
    p_fix.add_argument("--topics", type=int, default=12)
    p_fix.add_argument("--seed", type=int, default=7)

    p_init = sub.add_parser("init-config", help="write a starter config file")
    p_init.add_argument("--out", default="config.ini")
    p_init.add_argument("--root", default=".")
    return parser


_COMMANDS = {
    "ingest": cmd_ingest,
    "extract-entities": cmd_extract_entities,
    "train-encoder": cmd_train_encoder,
    "augment": cmd_augment,
    "self-label": cmd_self_label,
    "train-fusion": cmd_train_fusion,
    "score": cmd_score,
    "evaluate": cmd_evaluate,
    "significance": cmd_significance,
}


def _apply_seed_override(config: PipelineConfig, seed: int) -> None:
    config.corpus.seed = seed
    config.encoder.seed = seed + 1
    config.fusion.seed = seed + 2
    config.augment.seed = seed + 3


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "make-fixture":
            cmd_make_fixture(args)
            return 0
        if args.command == "init-config":
            cmd_init_config(args)
            return 0
        config = load_config(args.config)
        if args.seed is not None:
            _apply_seed_override(config, args.seed)
        _COMMANDS[args.command](config, args)
        return 0
    except Exception as exc:  # contract: machine-parseable error on stderr
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
