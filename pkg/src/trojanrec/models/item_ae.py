"""One hidden layer item autoencoder."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, ClassVar

import numpy as np

from ..data import InteractionMatrix
from ..errors import DivergenceError, EmptyDatasetError, ShapeError
from ..utils import Activation, ModelFamily, make_rng
from .base import RecommenderParams, TrainConfig
from .optim import make_optimizer

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ItemAEParams(RecommenderParams):
    """Encoder and decoder weights over item space."""

    family: ClassVar[ModelFamily] = ModelFamily.ITEM_AE
    array_names: ClassVar[tuple[str, ...]] = ("w_enc", "b_enc", "w_dec", "b_dec")

    w_enc: np.ndarray
    b_enc: np.ndarray
    w_dec: np.ndarray
    b_dec: np.ndarray
    activation: Activation = Activation.TANH

    def __post_init__(self) -> None:
        """Check the layer shapes agree."""
        n_items, dim = self.w_enc.shape
        if self.w_dec.shape != (dim, n_items):
            raise ShapeError("Decoder shape does not mirror the encoder.")
        if self.b_enc.shape != (dim,) or self.b_dec.shape != (n_items,):
            raise ShapeError("Bias shapes do not match the layers.")
        if not isinstance(self.activation, Activation):
            object.__setattr__(self, "activation", Activation(self.activation))

    @property
    def n_items(self) -> int:
        """Return the size of the item space."""
        return int(self.w_enc.shape[0])

    @property
    def latent_dim(self) -> int:
        """Return the hidden size."""
        return int(self.w_enc.shape[1])

    def hyper(self) -> dict[str, Any]:
        """Return the non-array fields."""
        return {"activation": self.activation.value}

    def score_rows(self, rows: np.ndarray) -> np.ndarray:
        """Reconstruct the rows."""
        return forward(self.arrays(), rows, self.activation)[1]


def _act(z: np.ndarray, activation: Activation) -> np.ndarray:
    return np.tanh(z) if activation is Activation.TANH else z


def forward(
    weights: dict[str, np.ndarray], x: np.ndarray, activation: Activation
) -> tuple[np.ndarray, np.ndarray]:
    """Return the hidden layer and the reconstruction."""
    hidden = _act(x @ weights["w_enc"] + weights["b_enc"], activation)
    return hidden, hidden @ weights["w_dec"] + weights["b_dec"]


def item_ae_loss_and_grads(
    weights: dict[str, np.ndarray],
    x: np.ndarray,
    c_pos: float,
    l2_weight: float,
    activation: Activation = Activation.TANH,
) -> tuple[float, dict[str, np.ndarray]]:
    """Weighted squared reconstruction loss of a batch and its gradients.

    The loss is the batch mean of sum_i w_i (o_i - x_i)^2 with w = 1 + (c_pos - 1) x,
    plus l2_weight times the squared norms of both weight matrices.
    """
    batch = x.shape[0]
    hidden, out = forward(weights, x, activation)
    conf = 1.0 + (c_pos - 1.0) * x
    resid = out - x
    loss = float(np.sum(conf * resid**2) / batch) + l2_weight * float(
        np.sum(weights["w_enc"] ** 2) + np.sum(weights["w_dec"] ** 2)
    )
    d_out = 2.0 * conf * resid / batch
    d_hidden = d_out @ weights["w_dec"].T
    if activation is Activation.TANH:
        d_hidden = d_hidden * (1.0 - hidden**2)
    grads = {
        "w_dec": hidden.T @ d_out + 2.0 * l2_weight * weights["w_dec"],
        "b_dec": d_out.sum(axis=0),
        "w_enc": x.T @ d_hidden + 2.0 * l2_weight * weights["w_enc"],
        "b_enc": d_hidden.sum(axis=0),
    }
    return loss, grads


def init_item_ae(n_items: int, cfg: TrainConfig) -> dict[str, np.ndarray]:
    """Draw Glorot-uniform weights and zero biases."""
    rng = make_rng(cfg.seed)
    limit = np.sqrt(6.0 / (n_items + cfg.latent_dim))
    return {
        "w_enc": rng.uniform(-limit, limit, size=(n_items, cfg.latent_dim)),
        "b_enc": np.zeros(cfg.latent_dim),
        "w_dec": rng.uniform(-limit, limit, size=(cfg.latent_dim, n_items)),
        "b_dec": np.zeros(n_items),
    }


def train_item_ae(
    m: InteractionMatrix, cfg: TrainConfig, history: list[float] | None = None
) -> ItemAEParams:
    """Train the autoencoder with mini-batches over shuffled users.

    Raises:
        EmptyDatasetError: If the matrix has no rows or columns.
        DivergenceError: If a batch loss becomes non-finite.

    """
    if m.rows == 0 or m.cols == 0:
        raise EmptyDatasetError("Cannot train on an empty matrix.")
    weights = init_item_ae(m.cols, cfg)
    optimizer = make_optimizer(cfg.optimizer, cfg.learning_rate)
    shuffle = make_rng(cfg.seed, 1)
    dense = m.csr.toarray()
    for epoch in range(cfg.epochs):
        order = shuffle.permutation(m.rows)
        total = 0.0
        for start in range(0, m.rows, cfg.batch_size):
            batch = dense[order[start : start + cfg.batch_size]]
            loss, grads = item_ae_loss_and_grads(
                weights, batch, cfg.c_pos, cfg.l2_weight, cfg.activation
            )
            if not np.isfinite(loss):
                raise DivergenceError(f"ItemAE loss is {loss} at epoch {epoch}.")
            optimizer.step(weights, grads)
            total += loss
        if history is not None:
            history.append(total)
        _LOGGER.debug("ItemAE epoch %d loss %.6f", epoch, total)
    params = ItemAEParams(activation=cfg.activation, **weights)
    params.check_finite()
    return params
