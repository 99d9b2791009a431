"""Python bindings for the spurious-word pipeline."""

from ._core import (
    DataError,
    UsageError,
    ate,
    config_hash,
    cosine,
    feature_names,
    featurize_word,
    load_config,
    load_embeddings,
    roc_auc,
    run_all,
    run_stage,
    save_embeddings,
    stages,
    tokenize,
    write_synthetic_bundle,
)

__all__ = [
    "DataError",
    "UsageError",
    "ate",
    "config_hash",
    "cosine",
    "feature_names",
    "featurize_word",
    "load_config",
    "load_embeddings",
    "roc_auc",
    "run_all",
    "run_stage",
    "save_embeddings",
    "stages",
    "tokenize",
    "write_synthetic_bundle",
]
