"""Toy-scale VAE anomaly-detection blackbox worker."""

from .data import SyntheticDataset, make_dataset
from .detect import EvaluationFailure, Evaluator, classify, f1_score, mean_f1
from .model import (
    DEFAULT_CONFIG,
    ConfigError,
    TrainingDiverged,
    VAE,
    VAEConfig,
    kl_diag_gaussian,
    reconstruction_errors,
    reparametrize,
    train_vae,
)

__all__ = [
    "DEFAULT_CONFIG",
    "SyntheticDataset",
    "make_dataset",
    "EvaluationFailure",
    "Evaluator",
    "classify",
    "f1_score",
    "mean_f1",
    "ConfigError",
    "TrainingDiverged",
    "VAE",
    "VAEConfig",
    "kl_diag_gaussian",
    "reconstruction_errors",
    "reparametrize",
    "train_vae",
]
