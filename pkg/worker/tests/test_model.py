import dataclasses

import numpy as np
import pytest
import torch

from vaeworker.data import make_dataset
from vaeworker.model import (
    DEFAULT_CONFIG,
    ConfigError,
    VAE,
    VAEConfig,
    kl_diag_gaussian,
    loss_terms,
    make_optimizer,
    reconstruction_errors,
    reparametrize,
    train_vae,
)


def cfg(**kw):
    return dataclasses.replace(DEFAULT_CONFIG, **kw)


class TestVAEConfig:
    def test_default_is_valid(self):
        assert DEFAULT_CONFIG.latent_dim == 12

    @pytest.mark.parametrize("field,value", [
        ("encoding_layers", 0),
        ("encoding_layers", 51),
        ("latent_dim", 0),
        ("latent_dim", 32),
        ("batch_size", 9),
        ("batch_size", 513),
        ("activation", "GELU"),
        ("optimizer", "LBFGS"),
        ("dropout", -0.1),
        ("dropout", 1.1),
        ("opt_hp1", 1.5),
        ("opt_hp4", -0.2),
        ("alpha", 0.4),
        ("alpha", 1.01),
    ])
    def test_out_of_range_rejected(self, field, value):
        with pytest.raises(ConfigError):
            cfg(**{field: value})

    def test_from_dict_round_trip(self):
        d = dataclasses.asdict(DEFAULT_CONFIG)
        assert VAEConfig.from_dict(d) == DEFAULT_CONFIG

    def test_from_dict_missing_key(self):
        d = dataclasses.asdict(DEFAULT_CONFIG)
        del d["alpha"]
        with pytest.raises(ConfigError, match="missing"):
            VAEConfig.from_dict(d)

    def test_from_dict_extra_key(self):
        d = dataclasses.asdict(DEFAULT_CONFIG)
        d["learning_rate"] = 0.1
        with pytest.raises(ConfigError, match="unknown"):
            VAEConfig.from_dict(d)

    def test_from_dict_bad_type(self):
        d = dataclasses.asdict(DEFAULT_CONFIG)
        d["latent_dim"] = "wide"
        with pytest.raises(ConfigError):
            VAEConfig.from_dict(d)


class TestLayerSizes:
    def test_endpoints(self):
        sizes = cfg(encoding_layers=3, latent_dim=5).layer_sizes()
        assert sizes[0] == 32 and sizes[-1] == 5
        assert len(sizes) == 4

    def test_monotone_non_increasing(self):
        for layers in (1, 2, 7, 50):
            for latent in (1, 12, 31):
                sizes = cfg(encoding_layers=layers, latent_dim=latent).layer_sizes()
                assert all(a >= b for a, b in zip(sizes, sizes[1:]))
                assert min(sizes) >= 1

    def test_single_layer(self):
        assert cfg(encoding_layers=1, latent_dim=8).layer_sizes() == [32, 8]


class TestKL:
    def test_standard_normal_is_zero(self):
        assert kl_diag_gaussian([0.0], [1.0]) == 0.0

    def test_unit_mean_case(self):
        assert kl_diag_gaussian([1.0], [1.0]) == pytest.approx(0.5)

    def test_additive_over_dimensions(self):
        a = kl_diag_gaussian([1.0], [2.0])
        b = kl_diag_gaussian([0.5], [0.7])
        both = kl_diag_gaussian([1.0, 0.5], [2.0, 0.7])
        assert both == pytest.approx(a + b)

    def test_nonnegative_random_draws(self):
        rng = np.random.default_rng(0)
        mu = rng.normal(0, 3, size=(10_000, 4))
        sigma = rng.uniform(0.05, 5.0, size=(10_000, 4))
        values = [kl_diag_gaussian(m, s) for m, s in zip(mu, sigma)]
        assert min(values) >= 0.0

    def test_rejects_nonpositive_sigma(self):
        with pytest.raises(ValueError):
            kl_diag_gaussian([0.0], [0.0])
        with pytest.raises(ValueError):
            kl_diag_gaussian([0.0], [-1.0])


class TestReparametrize:
    def test_zero_sigma_returns_mu(self):
        mu = np.array([1.0, -2.0, 3.0])
        assert np.array_equal(reparametrize(mu, np.zeros(3), 0), mu)

    def test_seeded_determinism(self):
        mu, sigma = np.zeros(5), np.ones(5)
        a = reparametrize(mu, sigma, 42)
        b = reparametrize(mu, sigma, 42)
        c = reparametrize(mu, sigma, 43)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_empirical_mean_matches_mu(self):
        mu = np.array([0.3, -1.2])
        sigma = np.array([0.5, 2.0])
        draws = np.array([reparametrize(mu, sigma, s) for s in range(100_000)])
        tol = 3 * sigma / np.sqrt(len(draws))
        assert np.all(np.abs(draws.mean(axis=0) - mu) < tol)


class TestLossTerms:
    def test_total_at_least_reconstruction(self):
        torch.manual_seed(0)
        x = torch.randn(8, 32)
        x_hat = torch.randn(8, 32)
        mu = torch.randn(8, 4)
        logvar = torch.randn(8, 4)
        rec, kl = loss_terms(x_hat, x, mu, logvar)
        assert kl.item() >= 0.0
        assert (rec + kl).item() >= rec.item()

    def test_perfect_reconstruction_standard_prior(self):
        x = torch.randn(4, 32)
        rec, kl = loss_terms(x, x, torch.zeros(4, 2), torch.zeros(4, 2))
        assert rec.item() == 0.0
        assert kl.item() == 0.0

    def test_matches_numpy_kl(self):
        mu = torch.tensor([[1.0, 0.5]])
        sigma = np.array([2.0, 0.7])
        logvar = torch.from_numpy(np.log(sigma**2)[None, :]).float()
        _, kl = loss_terms(torch.zeros(1, 3), torch.zeros(1, 3), mu, logvar)
        assert kl.item() == pytest.approx(
            kl_diag_gaussian([1.0, 0.5], sigma), rel=1e-5
        )


class TestOptimizerMapping:
    @pytest.mark.parametrize("name,klass", [
        ("SGD", torch.optim.SGD),
        ("Adam", torch.optim.Adam),
        ("Adagrad", torch.optim.Adagrad),
        ("RMSProp", torch.optim.RMSprop),
    ])
    def test_selects_class(self, name, klass):
        model = VAE(DEFAULT_CONFIG)
        opt = make_optimizer(cfg(optimizer=name), model.parameters())
        assert isinstance(opt, klass)

    def test_learning_rate_log_scale(self):
        model = VAE(DEFAULT_CONFIG)
        lo = make_optimizer(cfg(opt_hp1=0.0), model.parameters())
        hi = make_optimizer(cfg(opt_hp1=1.0), model.parameters())
        assert lo.param_groups[0]["lr"] == pytest.approx(1e-5)
        assert hi.param_groups[0]["lr"] == pytest.approx(1e-1)

    def test_extreme_hps_construct_for_all_optimizers(self):
        model = VAE(DEFAULT_CONFIG)
        for name in ("SGD", "Adam", "Adagrad", "RMSProp"):
            for v in (0.0, 1.0):
                make_optimizer(
                    cfg(optimizer=name, opt_hp1=v, opt_hp2=v, opt_hp3=v,
                        opt_hp4=v),
                    model.parameters(),
                )


class TestTraining:
    def test_deterministic_given_seed(self):
        data = make_dataset(0)
        x = data.train.x[:256]
        _, h1 = train_vae(DEFAULT_CONFIG, x, 1, 2)
        _, h2 = train_vae(DEFAULT_CONFIG, x, 1, 2)
        assert h1 == h2

    def test_history_length_matches_epochs(self):
        data = make_dataset(0)
        _, hist = train_vae(DEFAULT_CONFIG, data.train.x[:128], 0, 3)
        assert len(hist) == 3

    def test_reconstruction_errors_deterministic_and_shaped(self):
        data = make_dataset(0)
        model, _ = train_vae(DEFAULT_CONFIG, data.train.x[:256], 0, 2)
        e1 = reconstruction_errors(model, data.test.x)
        e2 = reconstruction_errors(model, data.test.x)
        assert np.array_equal(e1, e2)
        assert e1.shape == (len(data.test.x),)
        assert np.all(e1 >= 0)

    def test_loss_decreases_for_most_seeds(self):
        data = make_dataset(0)
        decreasing = 0
        for seed in range(10):
            _, hist = train_vae(DEFAULT_CONFIG, data.train.x, seed, 5)
            decreasing += hist[4] < hist[0]
        assert decreasing >= 8
