"""Synthetic missing-patch telemetry dataset.

Normal samples are smooth seeded signals in R^32: sums of three sinusoids
whose frequencies are fixed per dataset while amplitude and phase vary per
sample, plus small noise.  Anomalies are normal samples with a contiguous
zeroed patch.  The training split contains normal samples only; validation
and test are stratified normal/anomaly mixes.  Everything is determined by
a single dataset seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

N_FEATURES = 32
N_NORMAL = 2000
N_ANOMALY = 300
PATCH_RANGE = (4, 12)

N_TRAIN = 1400
N_VAL_NORMAL = 300
N_VAL_ANOMALY = 150


@dataclass(frozen=True)
class Split:
    x: np.ndarray        # (n, N_FEATURES)
    labels: np.ndarray   # (n,) 1 = anomaly, 0 = normal


@dataclass(frozen=True)
class SyntheticDataset:
    train: Split         # normal only
    validation: Split
    test: Split


def _smooth_signals(rng: np.random.Generator, freqs: np.ndarray,
                    count: int) -> np.ndarray:
    # the frequencies are shared across the dataset, so the normal class
    # lies on a low-dimensional manifold (amplitude and phase per tone)
    t = np.linspace(0.0, 1.0, N_FEATURES)
    phases = rng.uniform(0.0, 2 * np.pi, size=(count, freqs.size))
    amps = rng.uniform(0.3, 1.0, size=(count, freqs.size))
    signals = np.sum(
        amps[:, :, None] * np.sin(
            2 * np.pi * freqs[None, :, None] * t[None, None, :]
            + phases[:, :, None]
        ),
        axis=1,
    )
    return signals + rng.normal(0.0, 0.05, size=(count, N_FEATURES))


def _zero_patches(rng: np.random.Generator, samples: np.ndarray) -> np.ndarray:
    out = samples.copy()
    lengths = rng.integers(PATCH_RANGE[0], PATCH_RANGE[1] + 1, size=len(out))
    for i, length in enumerate(lengths):
        start = int(rng.integers(0, N_FEATURES - length + 1))
        out[i, start:start + length] = 0.0
    return out


def make_dataset(dataset_seed: int) -> SyntheticDataset:
    rng = np.random.default_rng(dataset_seed)
    freqs = rng.uniform(0.5, 3.0, size=3)
    normal = _smooth_signals(rng, freqs, N_NORMAL)
    anomalies = _zero_patches(rng, _smooth_signals(rng, freqs, N_ANOMALY))

    order = rng.permutation(N_NORMAL)
    train_idx = order[:N_TRAIN]
    val_idx = order[N_TRAIN:N_TRAIN + N_VAL_NORMAL]
    test_idx = order[N_TRAIN + N_VAL_NORMAL:]
    a_order = rng.permutation(N_ANOMALY)
    val_a = a_order[:N_VAL_ANOMALY]
    test_a = a_order[N_VAL_ANOMALY:]

    def mix(n_idx, a_idx):
        x = np.vstack([normal[n_idx], anomalies[a_idx]])
        labels = np.concatenate([
            np.zeros(len(n_idx), dtype=int), np.ones(len(a_idx), dtype=int),
        ])
        return Split(x, labels)

    return SyntheticDataset(
        train=Split(normal[train_idx], np.zeros(N_TRAIN, dtype=int)),
        validation=mix(val_idx, val_a),
        test=mix(test_idx, test_a),
    )
