"""Tests for the recommender models."""
import logging

import numpy as np
import pytest
from pytest_cases import parametrize_with_cases
from scipy import sparse

from trojanrec.data import InteractionDataset
from trojanrec.errors import CheckpointError, ParameterError, ShapeError
from trojanrec.models import (
    TrainConfig,
    WRMFParams,
    fit_wrmf,
    fold_in_user,
    item_ae_loss_and_grads,
    load_checkpoint,
    mult_vae_loss_and_grads,
    recommend_top_k,
    save_checkpoint,
    score_user,
    score_users,
    train_item_ae,
    train_model,
    train_mult_vae,
    wrmf_objective,
)
from trojanrec.models.item_ae import init_item_ae
from trojanrec.models.mult_vae import init_mult_vae
from trojanrec.models.optim import Adam, make_optimizer
from trojanrec.utils import Activation, ModelFamily, Optimizer

from tests.test_models_cases import AutoencoderSetups, BadConfigs, Families, Presets
from tests.test_utils import (
    brute_top_k,
    finite_difference,
    random_dataset,
    tiny_config,
)

logging.basicConfig(level=logging.INFO)
_LOGGER = logging.getLogger(__name__)


def gradient_coords(weights, n, rng):
    """Spread n coordinates over the arrays of a weight dict."""
    names = sorted(weights)
    return [
        (name, int(rng.integers(weights[name].size)))
        for name in (names[i % len(names)] for i in range(n))
    ]


def check_gradients(loss_fn, weights, grads, n=52, seed=0):
    """Compare analytic gradients with central differences at n coordinates."""
    rng = np.random.default_rng(seed)
    for name, flat in gradient_coords(weights, n, rng):

        def partial(value, name=name):
            trial = dict(weights)
            trial[name] = value
            return loss_fn(trial)

        numeric = finite_difference(partial, weights[name], [flat])[0]
        analytic = grads[name].ravel()[flat]
        np.testing.assert_allclose(analytic, numeric, rtol=1e-3, atol=1e-6)


class testModels(object):
    """Class for model tests."""

    @parametrize_with_cases("family, learning_rate, batch_size", cases=Presets)
    def test_presets(self, family, learning_rate, batch_size):
        """Test the packaged presets."""
        cfg = TrainConfig.for_family(family)
        assert cfg.learning_rate == learning_rate
        assert cfg.batch_size == batch_size
        assert cfg.latent_dim == 64
        assert cfg.c_pos == 20.0
        assert TrainConfig.from_dict(cfg.to_dict()) == cfg

    @parametrize_with_cases("overrides", cases=BadConfigs)
    def test_bad_config(self, overrides):
        """Test out of range settings."""
        with pytest.raises(ParameterError):
            TrainConfig(**overrides)

    def test_wrmf_monotone(self, toy_dataset):
        """Test every half sweep does not increase the objective."""
        history = []
        cfg = tiny_config(ModelFamily.WRMF)
        fit_wrmf(toy_dataset.matrix().csr, cfg, history=history)
        _LOGGER.warning("WRMF objective: %s", history)
        assert len(history) == 10
        steps = np.diff(history)
        assert np.all(steps <= 1e-9 * np.abs(history[:-1]))

    def test_wrmf_fold_in(self, toy_dataset):
        """Test stored user factors are the fold-in of their rows."""
        m = toy_dataset.matrix()
        params = train_model(ModelFamily.WRMF, m, tiny_config(ModelFamily.WRMF))
        for user in range(m.rows):
            row = m.dense_rows([user])[0]
            np.testing.assert_allclose(
                fold_in_user(params, row), params.user_factors[user], atol=1e-8
            )
        scores = score_users(params, m, range(m.rows))
        np.testing.assert_allclose(scores, params.user_factors @ params.item_factors.T)

    def test_wrmf_objective_dense(self):
        """Test the sparse objective against the dense formula."""
        rng = np.random.default_rng(2)
        x = (rng.random((5, 7)) < 0.4).astype(float)
        u, v = rng.normal(size=(5, 2)), rng.normal(size=(7, 2))
        conf = 1 + 19 * x
        ridge = 0.1 * (np.sum(u**2) + np.sum(v**2))
        dense = np.sum(conf * (x - u @ v.T) ** 2) + ridge
        sparse_value = wrmf_objective(u, v, sparse.csr_matrix(x), 20.0, 0.1)
        assert sparse_value == pytest.approx(dense)

    def test_wrmf_padding_inert(self, toy_dataset):
        """Test users with empty rows leave every other factor unchanged."""
        x = toy_dataset.matrix().csr
        padded = sparse.vstack([x, sparse.csr_matrix((3, x.shape[1]))]).tocsr()
        cfg = tiny_config(ModelFamily.WRMF)
        plain, extended = fit_wrmf(x, cfg), fit_wrmf(padded, cfg)
        n = x.shape[0]
        for name, value in plain.arrays().items():
            np.testing.assert_allclose(extended.arrays()[name][:n], value, atol=1e-10)
        assert np.all(extended.user_factors[n:] == 0)

    def test_wrmf_hand_solve(self):
        """Test the one dimensional fold-in solved by hand."""
        params = WRMFParams(np.zeros((1, 1)), np.ones((2, 1)), 1.0, 1.0)
        row = np.array([1.0, 0.0])
        np.testing.assert_allclose(fold_in_user(params, row), [1 / 3])
        np.testing.assert_allclose(params.score_rows(row[None, :]), [[1 / 3, 1 / 3]])

    def test_wrmf_blocks(self):
        """Test within-block scores beat cross-block scores."""
        pairs = [(u, i) for u in range(4) for i in range(4) if u // 2 == i // 2]
        ds = InteractionDataset.from_pairs(pairs, 4, 4)
        cfg = tiny_config(ModelFamily.WRMF, latent_dim=2, epochs=10)
        params = train_model(ModelFamily.WRMF, ds.matrix(), cfg)
        scores = params.user_factors @ params.item_factors.T
        within = np.kron(np.eye(2), np.ones((2, 2))).astype(bool)
        assert scores[within].min() > scores[~within].max()

    @parametrize_with_cases("family", cases=Families)
    def test_deterministic(self, toy_dataset, family):
        """Test the same seed trains the same weights."""
        m = toy_dataset.matrix()
        first = train_model(family, m, tiny_config(family))
        second = train_model(family, m, tiny_config(family))
        for name, value in first.arrays().items():
            assert np.array_equal(value, second.arrays()[name])

    @parametrize_with_cases("family", cases=Families)
    def test_score_shapes(self, toy_dataset, family):
        """Test a wrong row length is rejected."""
        params = train_model(family, toy_dataset.matrix(), tiny_config(family))
        row = score_user(params, np.zeros(toy_dataset.n_items), 0)
        assert row.scores.shape == (toy_dataset.n_items,)
        with pytest.raises(ShapeError):
            score_user(params, np.zeros(toy_dataset.n_items + 1))

    @parametrize_with_cases("activation", cases=AutoencoderSetups)
    def test_item_ae_gradients(self, activation):
        """Test the autoencoder gradients against finite differences."""
        ds = random_dataset(4, n_users=6, n_items=8)
        x = ds.matrix().csr.toarray()
        weights = init_item_ae(8, tiny_config(ModelFamily.ITEM_AE, latent_dim=3))
        weights["b_enc"] = weights["b_enc"] + 0.1
        weights["b_dec"] = weights["b_dec"] - 0.05

        def loss_fn(w):
            return item_ae_loss_and_grads(w, x, 5.0, 0.01, activation)[0]

        _, grads = item_ae_loss_and_grads(weights, x, 5.0, 0.01, activation)
        check_gradients(loss_fn, weights, grads)

    def test_mult_vae_gradients(self):
        """Test the VAE gradients for fixed noise against finite differences."""
        ds = random_dataset(5, n_users=6, n_items=8)
        x = ds.matrix().csr.toarray()
        weights = init_mult_vae(8, tiny_config(ModelFamily.MULT_VAE, latent_dim=3))
        eps = np.random.default_rng(1).standard_normal((6, 3))

        def loss_fn(w):
            return mult_vae_loss_and_grads(w, x, eps, 0.2, 0.01)[0]

        _, grads = mult_vae_loss_and_grads(weights, x, eps, 0.2, 0.01)
        check_gradients(loss_fn, weights, grads)

    def test_item_ae_learns(self, toy_dataset):
        """Test the training loss goes down."""
        history = []
        cfg = tiny_config(ModelFamily.ITEM_AE, epochs=60, learning_rate=0.02)
        train_item_ae(toy_dataset.matrix(), cfg, history)
        assert history[-1] < history[0]

    def test_item_ae_identity(self):
        """Test a linear autoencoder as wide as the items reconstructs exactly."""
        ds = InteractionDataset.from_pairs([(u, u) for u in range(4)], 4, 4)
        cfg = tiny_config(
            ModelFamily.ITEM_AE,
            activation=Activation.IDENTITY,
            c_pos=1.0,
            l2_weight=0.0,
            epochs=3000,
            learning_rate=0.01,
        )
        history = []
        params = train_item_ae(ds.matrix(), cfg, history)
        assert history[-1] < 1e-3
        np.testing.assert_allclose(params.score_rows(np.eye(4)), np.eye(4), atol=0.1)

    def test_mult_vae_one_hot(self):
        """Test a lone one-hot user ends up with almost all the mass."""
        ds = InteractionDataset.from_pairs([(0, 1)], 1, 5)
        cfg = tiny_config(
            ModelFamily.MULT_VAE,
            beta_kl=0.0,
            l2_weight=0.0,
            epochs=500,
            batch_size=1,
            learning_rate=0.01,
        )
        params = train_mult_vae(ds.matrix(), cfg)
        scores = score_users(params, ds.matrix(), [0])
        assert scores[0, 1] > 0.9

    def test_mult_vae_scores(self, toy_dataset):
        """Test scores are a distribution over items."""
        m = toy_dataset.matrix()
        params = train_mult_vae(m, tiny_config(ModelFamily.MULT_VAE))
        scores = score_users(params, m, range(m.rows))
        np.testing.assert_allclose(scores.sum(axis=1), 1.0)
        assert np.all(scores > 0)

    def test_top_k(self):
        """Test top-k against a plain python ranking."""
        rng = np.random.default_rng(0)
        for _ in range(100):
            scores = rng.integers(0, 4, size=9).astype(float)
            size = int(rng.integers(0, 5))
            consumed = rng.choice(9, size=size, replace=False).tolist()
            k = int(rng.integers(1, 10))
            expected = brute_top_k(scores, consumed, k)
            assert recommend_top_k(scores, consumed, k) == expected

    def test_top_k_invalid(self):
        """Test k below one."""
        with pytest.raises(ParameterError):
            recommend_top_k(np.zeros(3), [], 0)

    @parametrize_with_cases("family", cases=Families)
    def test_checkpoint(self, tmp_path, toy_dataset, family):
        """Test a checkpoint loads back bit for bit with its config."""
        cfg = tiny_config(family)
        params = train_model(family, toy_dataset.matrix(), cfg)
        path = save_checkpoint(params, tmp_path / "model.npz", cfg)
        loaded, loaded_cfg = load_checkpoint(path)
        assert type(loaded) is type(params)
        assert loaded.hyper() == params.hyper()
        assert loaded_cfg == cfg
        for name, value in params.arrays().items():
            assert np.array_equal(value, loaded.arrays()[name])

    def test_checkpoint_errors(self, tmp_path):
        """Test unreadable checkpoints."""
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "missing.npz")
        bad = tmp_path / "bad.npz"
        bad.write_bytes(b"not a checkpoint")
        with pytest.raises(CheckpointError):
            load_checkpoint(bad)

    def test_checkpoint_missing_array(self, tmp_path, toy_dataset):
        """Test an archive that lost one of its arrays."""
        cfg = tiny_config(ModelFamily.WRMF)
        params = train_model(ModelFamily.WRMF, toy_dataset.matrix(), cfg)
        path = save_checkpoint(params, tmp_path / "model.npz", cfg)
        with np.load(path) as archive:
            kept = {n: archive[n] for n in archive.files if n != "item_factors"}
        np.savez(tmp_path / "partial.npz", **kept)
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "partial.npz")

    def test_adam_first_step(self):
        """Test the first Adam direction is close to the gradient sign."""
        adam = make_optimizer(Optimizer.ADAM, 0.1)
        assert isinstance(adam, Adam)
        adam.tick()
        direction = adam.direction("w", np.array([2.0, -0.5, 0.0]))
        np.testing.assert_allclose(direction, [1.0, -1.0, 0.0], atol=1e-6)
