"""Pipeline configuration: one INI file drives every subcommand."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields
from pathlib import Path


class ConfigError(Exception):
    """Schema violation; the message carries the offending section.key path."""


@dataclass
class PathsConfig:
    pairs: str = ""
    docs: str = ""
    entities: str = ""
    gazetteer: str = ""
    embeddings: str = ""
    external_docs: str = ""
    workdir: str = "work"


@dataclass
class CorpusConfig:
    min_tokens: int = 10
    split_ratio: float = 0.8
    dev_langs: str = "ar"
    seed: int = 13


@dataclass
class EncoderConfig:
    kind: str = "hashed"  # hashed | precomputed
    buckets: int = 1 << 18
    dim: int = 256
    char_ngram: int = 3
    word_unigrams: bool = True
    max_seq_len: int = 512
    epochs: int = 4
    batch_size: int = 8
    learning_rate: float = 2e-5
    seed: int = 17


@dataclass
class FusionConfig:
    hidden: int = 32
    learning_rate: float = 1e-3
    epochs: int = 200
    patience: int = 20
    seed: int = 19


@dataclass
class AugmentConfig:
    bm25_k: int = 5
    k1: float = 1.2
    b: float = 0.75
    random_count: int = 0
    per_source: int = 5
    translation_targets: str = ""
    use_augmented: bool = False
    seed: int = 23


@dataclass
class EvalConfig:
    mistake_threshold: float = 2.0
    bins: int = 5


@dataclass
class PipelineConfig:
    paths: PathsConfig = field(default_factory=PathsConfig)
    corpus: CorpusConfig = field(default_factory=CorpusConfig)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    augment: AugmentConfig = field(default_factory=AugmentConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)

    def dev_lang_set(self) -> frozenset[str]:
        return frozenset(lang.strip() for lang in self.corpus.dev_langs.split(",")
                         if lang.strip())

    def translation_distribution(self) -> dict[tuple[str, str], float]:
        """Parse 'de-fr:2,es-tr:1' style weight lists."""
        out: dict[tuple[str, str], float] = {}
        raw = self.augment.translation_targets.strip()
        if not raw:
            return out
        for chunk in raw.split(","):
            try:
                langs, _, weight = chunk.strip().partition(":")
                lang1, lang2 = langs.split("-")
                out[(lang1.strip(), lang2.strip())] = float(weight or 1.0)
            except ValueError:
                raise ConfigError(
                    f"augment.translation_targets: bad entry {chunk.strip()!r}"
                ) from None
        return out

    def to_dict(self) -> dict:
        return {
            section.name: {f.name: getattr(getattr(self, section.name), f.name)
                           for f in fields(getattr(self, section.name))}
            for section in fields(self)
        }


_BOOL_STRINGS = {"true": True, "false": False, "1": True, "0": False,
                 "yes": True, "no": False}


def _convert(section: str, key: str, value: str, target_type):
    try:
        if target_type is bool:
            return _BOOL_STRINGS[value.strip().lower()]
        return target_type(value.strip())
    except (ValueError, KeyError):
        raise ConfigError(
            f"{section}.{key}: expected {target_type.__name__}, got {value!r}"
        ) from None


def load_config(path: str | Path) -> PipelineConfig:
    """Parse and validate an INI config; unknown sections or keys are errors."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    config = PipelineConfig()
    known_sections = {f.name: getattr(config, f.name) for f in fields(config)}
    for section in parser.sections():
        if section not in known_sections:
            raise ConfigError(f"unknown config section [{section}]")
        target = known_sections[section]
        known_keys = {f.name: f.type for f in fields(target)}
        for key, value in parser.items(section):
            if key not in known_keys:
                raise ConfigError(f"unknown config key {section}.{key}")
            current = getattr(target, key)
            setattr(target, key, _convert(section, key, value, type(current)))
    _validate(config)
    return config


def _validate(config: PipelineConfig) -> None:
    if config.encoder.kind not in ("hashed", "precomputed"):
        raise ConfigError(
            f"encoder.kind: expected 'hashed' or 'precomputed', got {config.encoder.kind!r}")
    if not 0.0 < config.corpus.split_ratio < 1.0:
        raise ConfigError(
            f"corpus.split_ratio: {config.corpus.split_ratio} outside (0, 1)")
    if config.encoder.learning_rate < 0:
        raise ConfigError("encoder.learning_rate: must be >= 0")
    if config.fusion.learning_rate < 0:
        raise ConfigError("fusion.learning_rate: must be >= 0")
    if config.encoder.epochs < 1:
        raise ConfigError("encoder.epochs: must be >= 1")
    if config.fusion.epochs < 1:
        raise ConfigError("fusion.epochs: must be >= 1")
    if config.eval.bins < 2:
        raise ConfigError("eval.bins: must be >= 2")
    config.translation_distribution()  # raises on malformed entries
