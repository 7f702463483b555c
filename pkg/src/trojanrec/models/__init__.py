"""Recommender families used as substitute and victim models."""
from __future__ import annotations

from ..data import InteractionMatrix
from ..utils import ModelFamily
from .base import (
    RecommenderParams,
    ScoreRow,
    TrainConfig,
    recommend_top_k,
    score_user,
    score_users,
)
from .checkpoint import PARAM_CLASSES, load_checkpoint, save_checkpoint
from .item_ae import ItemAEParams, item_ae_loss_and_grads, train_item_ae
from .mult_vae import MultVAEParams, mult_vae_loss_and_grads, train_mult_vae
from .wrmf import (
    WRMFParams,
    fit_wrmf,
    fold_in_user,
    solve_rows,
    train_wrmf,
    wrmf_objective,
)


def train_model(
    family: ModelFamily, m: InteractionMatrix, cfg: TrainConfig
) -> RecommenderParams:
    """Train the model of the given family from scratch."""
    if family is ModelFamily.WRMF:
        return train_wrmf(m, cfg)
    if family is ModelFamily.ITEM_AE:
        return train_item_ae(m, cfg)
    return train_mult_vae(m, cfg)
