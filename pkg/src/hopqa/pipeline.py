"""Configuration resolution and pipeline assembly from on-disk artifacts.

Precedence for every setting: explicit overrides (CLI flags) beat
``HOPQA_*`` environment variables, which beat the JSON config file.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Mapping

from .checkpoint import (
    entity_fingerprint,
    load_checkpoint,
    load_classifier,
    load_encoder,
)
from .errors import ConfigError, IncompatibleGraphError
from .gazetteer import build_gazetteer
from .kg import load_kg
from .qa import QAPipeline

logger = logging.getLogger(__name__)

_FILE_KEYS = {
    "triples", "nodes", "synonyms", "kge", "classifier", "encoders",
    "top_k", "host", "port",
}


@dataclass
class PipelineConfig:
    """Paths to artifacts plus serving knobs; unset paths stay None."""

    triples: str | None = None
    nodes: str | None = None
    synonyms: str | None = None
    kge: str | None = None
    classifier: str | None = None
    encoders: dict[int, str] = field(default_factory=dict)
    top_k: int = 10
    host: str = "127.0.0.1"
    port: int = 8080


def _as_int(value, name: str) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be an integer, got {value!r}") from None


def _encoders_from_json(raw, source: str) -> dict[int, str]:
    if not isinstance(raw, Mapping):
        raise ConfigError(f"{source}: encoders must map hop class to a path")
    out = {}
    for key, value in raw.items():
        hop = _as_int(key, f"{source}: encoder hop class")
        if hop not in (1, 2, 3):
            raise ConfigError(f"{source}: encoder hop class must be 1..3, got {hop}")
        out[hop] = str(value)
    return out


def load_config(
    config_path: str | None = None,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[str, object] | None = None,
) -> PipelineConfig:
    """Resolve configuration from file, environment, and explicit overrides."""
    env = os.environ if env is None else env
    config = PipelineConfig()

    path = config_path or env.get("HOPQA_CONFIG")
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        unknown = set(raw) - _FILE_KEYS
        if unknown:
            raise ConfigError(f"config file {path}: unknown keys {sorted(unknown)}")
        for key in ("triples", "nodes", "synonyms", "kge", "classifier", "host"):
            if key in raw and raw[key] is not None:
                setattr(config, key, str(raw[key]))
        if "encoders" in raw:
            config.encoders = _encoders_from_json(raw["encoders"], path)
        if "top_k" in raw:
            config.top_k = _as_int(raw["top_k"], f"{path}: top_k")
        if "port" in raw:
            config.port = _as_int(raw["port"], f"{path}: port")

    for key in ("triples", "nodes", "synonyms", "kge", "classifier", "host"):
        value = env.get(f"HOPQA_{key.upper()}")
        if value:
            setattr(config, key, value)
    for hop in (1, 2, 3):
        value = env.get(f"HOPQA_ENCODER_{hop}")
        if value:
            config.encoders = {**config.encoders, hop: value}
    for key in ("top_k", "port"):
        value = env.get(f"HOPQA_{key.upper()}")
        if value:
            setattr(config, key, _as_int(value, f"HOPQA_{key.upper()}"))

    if overrides:
        clean = {k: v for k, v in overrides.items() if v is not None}
        encoders = clean.pop("encoders", None)
        if encoders is not None:
            clean["encoders"] = {**config.encoders, **encoders}
        unknown = set(clean) - set(PipelineConfig.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config overrides {sorted(unknown)}")
        config = replace(config, **clean)
        config.top_k = _as_int(config.top_k, "top_k")
        config.port = _as_int(config.port, "port")

    if config.top_k < 1:
        raise ConfigError(f"top_k must be >= 1, got {config.top_k}")
    return config


def require_paths(config: PipelineConfig, *names: str) -> None:
    """Fail fast with one message naming everything missing."""
    missing = []
    for name in names:
        if name == "encoders":
            for hop in (1, 2, 3):
                if hop not in config.encoders:
                    missing.append(f"encoders.{hop}")
        elif getattr(config, name) is None:
            missing.append(name)
    if missing:
        raise ConfigError(f"missing required settings: {', '.join(missing)}")
    for name in names:
        paths = config.encoders.values() if name == "encoders" else [getattr(config, name)]
        for p in paths:
            if not os.path.exists(p):
                raise ConfigError(f"{name} file not found: {p}")


def load_pipeline(config: PipelineConfig) -> QAPipeline:
    """Load every artifact, verifying each checkpoint against the graph."""
    require_paths(config, "triples", "kge", "classifier", "encoders")
    kg = load_kg(config.triples, config.nodes)
    model = load_checkpoint(config.kge, kg)
    gazetteer = build_gazetteer(kg, config.synonyms)
    classifier = load_classifier(config.classifier)
    encoders = {}
    for hop in (1, 2, 3):
        encoder, _ = load_encoder(config.encoders[hop], kg)
        if encoder.d != model.d:
            raise IncompatibleGraphError(
                f"encoder for {hop}-hop has d={encoder.d}, model has d={model.d}"
            )
        encoders[hop] = encoder
    logger.info("pipeline loaded: %d entities, d=%d", kg.num_entities, model.d)
    return QAPipeline(
        kg=kg,
        model=model,
        gazetteer=gazetteer,
        classifier=classifier,
        encoders=encoders,
        top_k=config.top_k,
        fingerprint=entity_fingerprint(kg).hex(),
    )
