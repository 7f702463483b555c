"""Trigger item selection."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..data import InteractionMatrix, TargetSpec
from ..errors import DivergenceError, ParameterError, SelectionError
from ..models import RecommenderParams, WRMFParams, score_users
from ..models.optim import make_optimizer
from ..utils import make_rng
from .config import AttackConfig
from .poison import pgd_step, seed_block
from .surrogate import WRMFSurrogate

_LOGGER = logging.getLogger(__name__)

SALT_BATCH = 11
SALT_BLOCK = 12


@dataclass(frozen=True)
class TriggerScore:
    """Loss reduction reached by promoting a candidate for one step."""

    item_index: int
    delta_loss: float

    def __post_init__(self) -> None:
        """Check the score is finite."""
        if not np.isfinite(self.delta_loss):
            raise DivergenceError(f"Non-finite loss reduction for item {self.item_index}.")


def candidate_pool(
    real_matrix: InteractionMatrix, targets: TargetSpec, cap: int
) -> list[int]:
    """Return the trigger candidates in ascending index order.

    All items qualify when there are at most cap of them, otherwise the cap items
    most consumed by the target users. The target and items every target user
    consumed are never candidates.
    """
    users = np.asarray(targets.target_users)
    reach = np.asarray(real_matrix.csr[users].sum(axis=0)).ravel()
    index = np.arange(real_matrix.cols)
    eligible = (reach < users.size) & (index != targets.target_item)
    if real_matrix.cols <= cap:
        return index[eligible].tolist()
    order = np.lexsort((index, -reach))
    order = order[eligible[order]]
    return sorted(order[:cap].tolist())


def _batch_users(targets: TargetSpec, cfg: AttackConfig, candidate: int) -> np.ndarray:
    users = np.asarray(targets.target_users)
    if users.size <= cfg.trigger_batch_size:
        return users
    rng = make_rng(cfg.seed, SALT_BATCH, candidate)
    return np.sort(rng.choice(users, size=cfg.trigger_batch_size, replace=False))


def trigger_delta_loss(
    params: WRMFParams,
    real_matrix: InteractionMatrix,
    candidate: int,
    targets: TargetSpec,
    cfg: AttackConfig,
    surrogate: WRMFSurrogate | None = None,
) -> TriggerScore:
    """Return the promotion loss drop after one step on a fresh candidate-only block.

    Raises:
        ParameterError: If every target user already consumed the candidate.

    """
    surrogate = surrogate or WRMFSurrogate(params, real_matrix)
    everyone = np.asarray(targets.target_users)
    if np.all(real_matrix.dense_rows(everyone)[:, candidate] > 0):
        raise ParameterError(f"Item {candidate} is consumed by every target user.")
    users = _batch_users(targets, cfg, candidate)
    block = seed_block(
        [candidate],
        cfg.n_fake(real_matrix.rows),
        cfg.resolve_budget(real_matrix, 1),
        real_matrix.col_sums,
        make_rng(cfg.seed, SALT_BLOCK, candidate),
    )
    before = surrogate.evaluate(block.rows, candidate, None, users, 1.0, cfg.k)
    optimizer = make_optimizer(cfg.step_rule, cfg.eta)
    optimizer.tick()
    step = optimizer.direction(str(candidate), surrogate.gradient(before))
    after_block = pgd_step(block, step, cfg.eta)
    after = surrogate.evaluate(after_block.rows, candidate, None, users, 1.0, cfg.k)
    return TriggerScore(candidate, before.loss - after.loss)


def score_triggers(
    params: WRMFParams,
    real_matrix: InteractionMatrix,
    targets: TargetSpec,
    cfg: AttackConfig,
    pool: list[int] | None = None,
) -> list[TriggerScore]:
    """Score every candidate of the pool, in pool order."""
    pool = candidate_pool(real_matrix, targets, cfg.candidate_cap) if pool is None else pool
    surrogate = WRMFSurrogate(params, real_matrix)

    def _score(item: int) -> TriggerScore:
        return trigger_delta_loss(params, real_matrix, item, targets, cfg, surrogate)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as executor:
            return list(executor.map(_score, pool))
    return [_score(item) for item in pool]


def best_trigger(scores: list[TriggerScore]) -> int:
    """Return the highest loss reduction, ties by ascending index.

    Raises:
        SelectionError: If there are no scores.

    """
    if not scores:
        raise SelectionError("The trigger candidate pool is empty.")
    return min(scores, key=lambda s: (-s.delta_loss, s.item_index)).item_index


def select_trigger(
    params: WRMFParams,
    real_matrix: InteractionMatrix,
    targets: TargetSpec,
    cfg: AttackConfig,
) -> int:
    """Pick the candidate whose one-step promotion reduces the loss most."""
    pool = candidate_pool(real_matrix, targets, cfg.candidate_cap)
    if not pool:
        raise SelectionError("The trigger candidate pool is empty.")
    scores = score_triggers(params, real_matrix, targets, cfg, pool)
    trigger = best_trigger(scores)
    _LOGGER.info("Selected trigger %d out of %d candidates", trigger, len(pool))
    return trigger


def popularity_trigger(
    params: RecommenderParams, real_matrix: InteractionMatrix, targets: TargetSpec
) -> int:
    """Pick the item ranked much higher by target users than by everyone else.

    Rank(i, G) is the mean 1-based position of i in the full score orderings of
    the users in G, ties by ascending index. The target item is excluded.

    Raises:
        ParameterError: If either user group is empty.

    """
    inside = np.zeros(real_matrix.rows, dtype=bool)
    inside[list(targets.target_users)] = True
    if inside.all() or not inside.any():
        raise ParameterError("Both target and non-target users are required.")
    scores = score_users(params, real_matrix, range(real_matrix.rows))
    ranks = rank_positions(scores)
    difference = ranks[inside].mean(axis=0) - ranks[~inside].mean(axis=0)
    difference[targets.target_item] = np.inf
    return int(np.argmin(difference))


def rank_positions(scores: np.ndarray) -> np.ndarray:
    """Return the 1-based position of every item in each row's descending order."""
    index = np.broadcast_to(np.arange(scores.shape[1]), scores.shape)
    order = np.lexsort((index, -scores), axis=-1)
    ranks = np.empty_like(order)
    positions = np.tile(np.arange(1, scores.shape[1] + 1), (scores.shape[0], 1))
    np.put_along_axis(ranks, order, positions, axis=1)
    return ranks
