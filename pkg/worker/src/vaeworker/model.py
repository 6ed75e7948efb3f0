"""Symmetric VAE: configuration derivation, loss pieces, and training."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .data import N_FEATURES

_ACTIVATIONS = {
    "ReLU": nn.ReLU,
    "Sigmoid": nn.Sigmoid,
    "Tanh": nn.Tanh,
}

_OPTIMIZERS = ("SGD", "Adam", "Adagrad", "RMSProp")


class ConfigError(ValueError):
    """Hyperparameter values outside the advertised space."""


@dataclass(frozen=True)
class VAEConfig:
    encoding_layers: int
    latent_dim: int
    batch_size: int
    activation: str
    dropout: float
    optimizer: str
    opt_hp1: float
    opt_hp2: float
    opt_hp3: float
    opt_hp4: float
    alpha: float

    def __post_init__(self):
        if not 1 <= self.encoding_layers <= 50:
            raise ConfigError(f"encoding_layers {self.encoding_layers} outside [1, 50]")
        if not 1 <= self.latent_dim <= N_FEATURES - 1:
            raise ConfigError(f"latent_dim {self.latent_dim} outside [1, {N_FEATURES - 1}]")
        if not 10 <= self.batch_size <= 512:
            raise ConfigError(f"batch_size {self.batch_size} outside [10, 512]")
        if self.activation not in _ACTIVATIONS:
            raise ConfigError(f"unknown activation {self.activation!r}")
        if self.optimizer not in _OPTIMIZERS:
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")
        if not 0.0 <= self.dropout <= 1.0:
            raise ConfigError(f"dropout {self.dropout} outside [0, 1]")
        for name in ("opt_hp1", "opt_hp2", "opt_hp3", "opt_hp4"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} {v} outside [0, 1]")
        if not 0.5 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha {self.alpha} outside [0.5, 1]")

    @staticmethod
    def from_dict(x: dict) -> "VAEConfig":
        wanted = {
            "encoding_layers", "latent_dim", "batch_size", "activation",
            "dropout", "optimizer", "opt_hp1", "opt_hp2", "opt_hp3",
            "opt_hp4", "alpha",
        }
        missing = wanted - set(x)
        if missing:
            raise ConfigError(f"missing hyperparameters: {sorted(missing)}")
        extra = set(x) - wanted
        if extra:
            raise ConfigError(f"unknown hyperparameters: {sorted(extra)}")
        try:
            return VAEConfig(
                encoding_layers=int(x["encoding_layers"]),
                latent_dim=int(x["latent_dim"]),
                batch_size=int(x["batch_size"]),
                activation=str(x["activation"]),
                dropout=float(x["dropout"]),
                optimizer=str(x["optimizer"]),
                opt_hp1=float(x["opt_hp1"]),
                opt_hp2=float(x["opt_hp2"]),
                opt_hp3=float(x["opt_hp3"]),
                opt_hp4=float(x["opt_hp4"]),
                alpha=float(x["alpha"]),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    def layer_sizes(self) -> list[int]:
        """Encoder widths from the input size down to the latent size.

        Linear interpolation rounded to integers, forced monotone
        non-increasing; the decoder mirrors the list.
        """
        raw = np.linspace(N_FEATURES, self.latent_dim, self.encoding_layers + 1)
        sizes = np.rint(raw).astype(int)
        sizes = np.minimum.accumulate(sizes)
        sizes = np.maximum(sizes, 1)
        sizes[0], sizes[-1] = N_FEATURES, self.latent_dim
        return sizes.tolist()


DEFAULT_CONFIG = VAEConfig(
    encoding_layers=2,
    latent_dim=12,
    batch_size=64,
    activation="Tanh",
    dropout=0.0,
    optimizer="Adam",
    opt_hp1=0.85,
    opt_hp2=0.9,
    opt_hp3=0.5,
    opt_hp4=0.0,
    alpha=0.7,
)


def kl_diag_gaussian(mu, sigma) -> float:
    """KL(N(mu, diag(sigma^2)) || N(0, I)) = 1/2 sum(mu^2 + s^2 - 1 - ln s^2)."""
    mu = np.asarray(mu, float)
    sigma = np.asarray(sigma, float)
    if np.any(sigma <= 0):
        raise ValueError("sigma must be strictly positive")
    return float(0.5 * np.sum(mu**2 + sigma**2 - 1.0 - 2.0 * np.log(sigma)))


def reparametrize(mu: np.ndarray, sigma: np.ndarray, noise_seed: int) -> np.ndarray:
    """z = mu + eps * sigma with seeded standard-normal eps."""
    mu = np.asarray(mu, float)
    sigma = np.asarray(sigma, float)
    eps = np.random.default_rng(noise_seed).standard_normal(mu.shape)
    return mu + eps * sigma


class VAE(nn.Module):
    def __init__(self, config: VAEConfig):
        super().__init__()
        sizes = config.layer_sizes()
        act = _ACTIVATIONS[config.activation]
        # dropout probability 1 would zero every unit; cap just below
        drop = min(config.dropout, 0.95)

        enc: list[nn.Module] = []
        for a, b in zip(sizes[:-2], sizes[1:-1]):
            enc += [nn.Linear(a, b), act(), nn.Dropout(drop)]
        self.encoder = nn.Sequential(*enc)
        self.mu_head = nn.Linear(sizes[-2], sizes[-1])
        self.logvar_head = nn.Linear(sizes[-2], sizes[-1])

        dec: list[nn.Module] = []
        mirrored = sizes[::-1]
        for a, b in zip(mirrored[:-2], mirrored[1:-1]):
            dec += [nn.Linear(a, b), act(), nn.Dropout(drop)]
        dec += [nn.Linear(mirrored[-2], mirrored[-1])]
        self.decoder = nn.Sequential(*dec)

    def forward(self, x: torch.Tensor):
        h = self.encoder(x)
        mu = self.mu_head(h)
        logvar = self.logvar_head(h).clamp(-10.0, 10.0)
        eps = torch.randn_like(mu)
        z = mu + eps * torch.exp(0.5 * logvar)
        return self.decoder(z), mu, logvar


def loss_terms(x_hat, x, mu, logvar):
    """(reconstruction, kl), each a mean over the batch of per-sample sums.

    Keeping both terms as per-sample sums keeps their relative weight
    independent of feature and latent dimensionality.
    """
    rec = torch.mean(torch.sum((x_hat - x) ** 2, dim=1))
    kl = 0.5 * torch.mean(
        torch.sum(mu**2 + torch.exp(logvar) - 1.0 - logvar, dim=1)
    )
    return rec, kl


def _learning_rate(u: float) -> float:
    # log scale over [1e-5, 1e-1]
    return 10.0 ** (-5.0 + 4.0 * u)


def make_optimizer(config: VAEConfig, params) -> torch.optim.Optimizer:
    """Map the four raw [0, 1] hyperparameters onto the selected optimizer.

    hp1 is always a log-scale learning rate; the remaining three are used
    raw where the optimizer's domain allows, squashed where it does not.
    """
    lr = _learning_rate(config.opt_hp1)
    h2, h3, h4 = config.opt_hp2, config.opt_hp3, config.opt_hp4
    if config.optimizer == "SGD":
        return torch.optim.SGD(
            params, lr=lr, momentum=h2, dampening=h3, weight_decay=1e-2 * h4
        )
    if config.optimizer == "Adam":
        return torch.optim.Adam(
            params, lr=lr, betas=(0.999 * h2, 0.9 + 0.0999 * h3),
            weight_decay=1e-2 * h4,
        )
    if config.optimizer == "Adagrad":
        return torch.optim.Adagrad(
            params, lr=lr, lr_decay=h2, weight_decay=1e-2 * h3,
            initial_accumulator_value=h4,
        )
    return torch.optim.RMSprop(
        params, lr=lr, alpha=0.5 + 0.499 * h2, momentum=h3,
        weight_decay=1e-2 * h4,
    )


class TrainingDiverged(RuntimeError):
    pass


def train_vae(
    config: VAEConfig,
    train_x: np.ndarray,
    train_seed: int,
    epochs: int,
) -> tuple[VAE, list[float]]:
    """Train on the normal-only split; returns (model, per-epoch losses).

    Raises TrainingDiverged on a non-finite loss.
    """
    torch.manual_seed(train_seed)
    model = VAE(config)
    opt = make_optimizer(config, model.parameters())
    x = torch.from_numpy(train_x).float()
    n = x.shape[0]
    gen = torch.Generator().manual_seed(train_seed)
    history: list[float] = []
    model.train()
    for _ in range(epochs):
        perm = torch.randperm(n, generator=gen)
        total = 0.0
        batches = 0
        for lo in range(0, n, config.batch_size):
            batch = x[perm[lo:lo + config.batch_size]]
            opt.zero_grad()
            x_hat, mu, logvar = model(batch)
            rec, kl = loss_terms(x_hat, batch, mu, logvar)
            loss = rec + kl
            value = float(loss.detach())
            if not math.isfinite(value):
                raise TrainingDiverged("non-finite training loss")
            loss.backward()
            opt.step()
            total += value
            batches += 1
        history.append(total / batches)
    return model, history


def reconstruction_errors(model: VAE, x: np.ndarray) -> np.ndarray:
    """Deterministic per-sample MSE using the latent mean (no sampling)."""
    model.eval()
    with torch.no_grad():
        t = torch.from_numpy(x).float()
        h = model.encoder(t)
        mu = model.mu_head(h)
        x_hat = model.decoder(mu)
        return torch.mean((x_hat - t) ** 2, dim=1).numpy()
