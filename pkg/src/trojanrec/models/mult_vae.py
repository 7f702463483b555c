"""Variational autoencoder with a multinomial likelihood."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, ClassVar

import numpy as np
from scipy.special import log_softmax, softmax
from sklearn.preprocessing import normalize

from ..data import InteractionMatrix
from ..errors import DivergenceError, EmptyDatasetError, ShapeError
from ..utils import ModelFamily, make_rng
from .base import RecommenderParams, TrainConfig
from .optim import make_optimizer

_LOGGER = logging.getLogger(__name__)

WEIGHT_NAMES = ("w_enc", "w_mu", "w_logvar", "w_dec")


@dataclass(frozen=True, eq=False)
class MultVAEParams(RecommenderParams):
    """Encoder, posterior heads and decoder."""

    family: ClassVar[ModelFamily] = ModelFamily.MULT_VAE
    array_names: ClassVar[tuple[str, ...]] = (
        "w_enc",
        "b_enc",
        "w_mu",
        "b_mu",
        "w_logvar",
        "b_logvar",
        "w_dec",
        "b_dec",
    )

    w_enc: np.ndarray
    b_enc: np.ndarray
    w_mu: np.ndarray
    b_mu: np.ndarray
    w_logvar: np.ndarray
    b_logvar: np.ndarray
    w_dec: np.ndarray
    b_dec: np.ndarray

    def __post_init__(self) -> None:
        """Check the layer shapes agree."""
        n_items, hidden = self.w_enc.shape
        dim = self.w_mu.shape[1]
        if self.w_mu.shape != (hidden, dim) or self.w_logvar.shape != (hidden, dim):
            raise ShapeError("Posterior heads do not match the hidden layer.")
        if self.w_dec.shape != (dim, n_items):
            raise ShapeError("Decoder does not map the latent space to items.")

    @property
    def n_items(self) -> int:
        """Return the size of the item space."""
        return int(self.w_enc.shape[0])

    @property
    def latent_dim(self) -> int:
        """Return the latent dimension."""
        return int(self.w_mu.shape[1])

    def hyper(self) -> dict[str, Any]:
        """Return the non-array fields."""
        return {}

    def score_rows(self, rows: np.ndarray) -> np.ndarray:
        """Return the softmax over items decoded from the posterior mean."""
        _, mu, _ = encode(self.arrays(), rows)
        return softmax(mu @ self.w_dec + self.b_dec, axis=1)


def encode(
    weights: dict[str, np.ndarray], x: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return hidden activations, posterior mean and log-variance."""
    hidden = np.tanh(normalize(x) @ weights["w_enc"] + weights["b_enc"])
    mu = hidden @ weights["w_mu"] + weights["b_mu"]
    logvar = hidden @ weights["w_logvar"] + weights["b_logvar"]
    return hidden, mu, logvar


def kl_divergence(mu: np.ndarray, logvar: np.ndarray) -> np.ndarray:
    """Return KL(q || N(0, I)) per row."""
    return 0.5 * np.sum(np.exp(logvar) + mu**2 - 1.0 - logvar, axis=1)


def mult_vae_loss_and_grads(
    weights: dict[str, np.ndarray],
    x: np.ndarray,
    eps: np.ndarray,
    beta_kl: float,
    l2_weight: float,
) -> tuple[float, dict[str, np.ndarray]]:
    """Negative ELBO of a batch for fixed reparameterization noise, and its gradients.

    Returns:
        The batch mean of -sum_i x_i log p_i + beta_kl * KL, plus l2_weight times
        the squared norms of the weight matrices, and the gradients by name.

    """
    batch = x.shape[0]
    x_norm = normalize(x)
    hidden, mu, logvar = encode(weights, x)
    std = np.exp(0.5 * logvar)
    z = mu + std * eps
    logits = z @ weights["w_dec"] + weights["b_dec"]
    log_p = log_softmax(logits, axis=1)
    nll = -np.sum(x * log_p, axis=1)
    kl = kl_divergence(mu, logvar)
    loss = float(np.mean(nll + beta_kl * kl)) + l2_weight * float(
        sum(np.sum(weights[name] ** 2) for name in WEIGHT_NAMES)
    )

    d_logits = (np.exp(log_p) * x.sum(axis=1, keepdims=True) - x) / batch
    d_z = d_logits @ weights["w_dec"].T
    d_mu = d_z + beta_kl * mu / batch
    d_logvar = d_z * eps * 0.5 * std + beta_kl * 0.5 * (np.exp(logvar) - 1.0) / batch
    d_hidden = (d_mu @ weights["w_mu"].T + d_logvar @ weights["w_logvar"].T) * (
        1.0 - hidden**2
    )
    grads = {
        "w_dec": z.T @ d_logits,
        "b_dec": d_logits.sum(axis=0),
        "w_mu": hidden.T @ d_mu,
        "b_mu": d_mu.sum(axis=0),
        "w_logvar": hidden.T @ d_logvar,
        "b_logvar": d_logvar.sum(axis=0),
        "w_enc": x_norm.T @ d_hidden,
        "b_enc": d_hidden.sum(axis=0),
    }
    for name in WEIGHT_NAMES:
        grads[name] = grads[name] + 2.0 * l2_weight * weights[name]
    return loss, grads


def init_mult_vae(n_items: int, cfg: TrainConfig) -> dict[str, np.ndarray]:
    """Draw Glorot-uniform weights and zero biases."""
    rng = make_rng(cfg.seed)
    dim = cfg.latent_dim

    def glorot(fan_in: int, fan_out: int) -> np.ndarray:
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=(fan_in, fan_out))

    return {
        "w_enc": glorot(n_items, dim),
        "b_enc": np.zeros(dim),
        "w_mu": glorot(dim, dim),
        "b_mu": np.zeros(dim),
        "w_logvar": glorot(dim, dim),
        "b_logvar": np.zeros(dim),
        "w_dec": glorot(dim, n_items),
        "b_dec": np.zeros(n_items),
    }


def train_mult_vae(
    m: InteractionMatrix, cfg: TrainConfig, history: list[float] | None = None
) -> MultVAEParams:
    """Train the VAE with mini-batches and seeded reparameterization noise.

    Raises:
        EmptyDatasetError: If the matrix has no rows or columns.
        DivergenceError: If a batch loss becomes non-finite.

    """
    if m.rows == 0 or m.cols == 0:
        raise EmptyDatasetError("Cannot train on an empty matrix.")
    weights = init_mult_vae(m.cols, cfg)
    optimizer = make_optimizer(cfg.optimizer, cfg.learning_rate)
    shuffle = make_rng(cfg.seed, 1)
    noise = make_rng(cfg.seed, 2)
    dense = m.csr.toarray()
    for epoch in range(cfg.epochs):
        order = shuffle.permutation(m.rows)
        total = 0.0
        for start in range(0, m.rows, cfg.batch_size):
            batch = dense[order[start : start + cfg.batch_size]]
            eps = noise.standard_normal((batch.shape[0], cfg.latent_dim))
            loss, grads = mult_vae_loss_and_grads(
                weights, batch, eps, cfg.beta_kl, cfg.l2_weight
            )
            if not np.isfinite(loss):
                raise DivergenceError(f"Mult-VAE loss is {loss} at epoch {epoch}.")
            optimizer.step(weights, grads)
            total += loss
        if history is not None:
            history.append(total)
        _LOGGER.debug("Mult-VAE epoch %d loss %.6f", epoch, total)
    params = MultVAEParams(**weights)
    params.check_finite()
    return params
