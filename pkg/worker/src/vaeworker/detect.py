"""Threshold classification, F1 scoring, and the blackbox objective."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import SyntheticDataset, make_dataset
from .model import (
    TrainingDiverged,
    VAEConfig,
    reconstruction_errors,
    train_vae,
)


def classify(errors: np.ndarray, alpha: float, threshold_ref: np.ndarray) -> np.ndarray:
    """1 where error exceeds the alpha-quantile of the reference errors.

    The quantile uses linear interpolation; alpha=1 flags only errors
    strictly above the reference maximum.
    """
    ref = np.asarray(threshold_ref, float)
    if ref.size == 0:
        raise ValueError("threshold reference must be non-empty")
    t = float(np.quantile(ref, alpha))
    return (np.asarray(errors, float) > t).astype(int)


def f1_score(predicted: np.ndarray, actual: np.ndarray, positive: int) -> float:
    tp = int(np.sum((predicted == positive) & (actual == positive)))
    fp = int(np.sum((predicted == positive) & (actual != positive)))
    fn = int(np.sum((predicted != positive) & (actual == positive)))
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    return 2 * p * r / (p + r) if p + r else 0.0


def mean_f1(predicted: np.ndarray, actual: np.ndarray) -> float:
    """Unweighted mean of the normal-class and anomaly-class F1 scores."""
    return 0.5 * (
        f1_score(predicted, actual, positive=0)
        + f1_score(predicted, actual, positive=1)
    )


class EvaluationFailure(Exception):
    """The evaluation cannot produce an objective (reported as a protocol fail)."""


@dataclass
class _Trained:
    key: tuple
    val_errors: np.ndarray
    test_errors: np.ndarray


class Evaluator:
    """Maps hyperparameter dicts to 1 - mean F1 on the test split.

    Training is memoized on everything except alpha, so evaluations that
    differ only in the threshold reuse the trained model's errors.
    """

    def __init__(self, dataset_seed: int, train_seed: int, epochs: int = 20):
        self.dataset_seed = dataset_seed
        self.train_seed = train_seed
        self.epochs = epochs
        self._dataset: SyntheticDataset | None = None
        self._memo: _Trained | None = None
        self.trainings = 0

    @property
    def dataset(self) -> SyntheticDataset:
        if self._dataset is None:
            self._dataset = make_dataset(self.dataset_seed)
        return self._dataset

    def _train_key(self, config: VAEConfig) -> tuple:
        return (
            config.encoding_layers, config.latent_dim, config.batch_size,
            config.activation, round(config.dropout, 12), config.optimizer,
            round(config.opt_hp1, 12), round(config.opt_hp2, 12),
            round(config.opt_hp3, 12), round(config.opt_hp4, 12),
        )

    def _errors_for(self, config: VAEConfig) -> _Trained:
        key = self._train_key(config)
        if self._memo is not None and self._memo.key == key:
            return self._memo
        data = self.dataset
        try:
            model, _ = train_vae(
                config, data.train.x, self.train_seed, self.epochs
            )
        except TrainingDiverged as exc:
            raise EvaluationFailure(str(exc)) from exc
        self.trainings += 1
        self._memo = _Trained(
            key=key,
            val_errors=reconstruction_errors(model, data.validation.x),
            test_errors=reconstruction_errors(model, data.test.x),
        )
        return self._memo

    def objective(self, x: dict) -> float:
        config = VAEConfig.from_dict(x)
        trained = self._errors_for(config)
        predicted = classify(trained.test_errors, config.alpha, trained.val_errors)
        return 1.0 - mean_f1(predicted, self.dataset.test.labels)
