"""Top-k promotion losses."""
from __future__ import annotations

from typing import Iterable

import numpy as np
from scipy.special import expit

from ..const import DEFAULT_TOP_K
from ..data import InteractionMatrix
from ..errors import ParameterError
from ..models import RecommenderParams, score_users


def kth_competitors(
    scores: np.ndarray, consumed: np.ndarray, item: int, k: int
) -> np.ndarray:
    """Return, per user, the item holding the k-th best unseen score other than item.

    A user with fewer than k such items gets the lowest one, a user with none gets -1.
    """
    if k < 1:
        raise ParameterError("k must be at least 1.")
    n_users, n_items = scores.shape
    index = np.arange(n_items)
    out = np.full(n_users, -1, dtype=np.int64)
    for row in range(n_users):
        free = ~consumed[row]
        free[item] = False
        candidates = index[free]
        if candidates.size == 0:
            continue
        values = scores[row, candidates]
        order = np.lexsort((candidates, -values))
        out[row] = candidates[order[min(k, candidates.size) - 1]]
    return out


def promotion_loss_and_grad(
    scores: np.ndarray,
    consumed: np.ndarray,
    item: int,
    k: int = DEFAULT_TOP_K,
    kth: np.ndarray | None = None,
) -> tuple[float, np.ndarray]:
    """Mean softplus margin of the k-th unseen score over the promoted item's score.

    Users who already consumed the item do not count. The gradient is taken with
    respect to the score matrix, the k-th item being held at its current choice.

    Arguments:
        scores -- users by items predicted scores.
        consumed -- boolean matrix of the same shape.
        item -- the promoted item.
        k -- display window.
        kth -- precomputed competitor items, see kth_competitors.

    Returns:
        The loss and its gradient with respect to scores.

    """
    grad = np.zeros_like(scores, dtype=np.float64)
    eligible = np.flatnonzero(~consumed[:, item])
    if eligible.size == 0:
        return 0.0, grad
    if kth is None:
        kth = kth_competitors(scores, consumed, item, k)
    rows = eligible[kth[eligible] >= 0]
    margins = scores[rows, kth[rows]] - scores[rows, item]
    loss = float(np.sum(np.logaddexp(0.0, margins)) / eligible.size)
    slope = expit(margins) / eligible.size
    np.add.at(grad, (rows, kth[rows]), slope)
    np.add.at(grad, (rows, np.full(rows.size, item)), -slope)
    return loss, grad


def _scores_and_consumed(
    params: RecommenderParams, real_matrix: InteractionMatrix, users: Iterable[int]
) -> tuple[np.ndarray, np.ndarray]:
    users = np.asarray(sorted(set(users)), dtype=np.int64)
    if users.size == 0:
        raise ParameterError("users must not be empty.")
    scores = score_users(params, real_matrix, users)
    return scores, real_matrix.dense_rows(users) > 0


def promotion_loss(
    params: RecommenderParams,
    real_matrix: InteractionMatrix,
    item: int,
    users: Iterable[int],
    k: int = DEFAULT_TOP_K,
) -> float:
    """Return the promotion loss of an item for a group of users."""
    if not 0 <= item < real_matrix.cols:
        raise ParameterError(f"Item {item} is out of range.")
    scores, consumed = _scores_and_consumed(params, real_matrix, users)
    return promotion_loss_and_grad(scores, consumed, item, k)[0]


def composite_loss(
    params: RecommenderParams,
    real_matrix: InteractionMatrix,
    target: int,
    trigger: int | None,
    users: Iterable[int],
    alpha: float,
    k: int = DEFAULT_TOP_K,
) -> float:
    """Blend the target and trigger promotion losses with weight alpha on the target."""
    if not 0 <= alpha <= 1:
        raise ParameterError("alpha must lie in [0, 1].")
    scores, consumed = _scores_and_consumed(params, real_matrix, users)
    target_loss = promotion_loss_and_grad(scores, consumed, target, k)[0]
    if trigger is None or alpha == 1:
        return alpha * target_loss
    trigger_loss = promotion_loss_and_grad(scores, consumed, trigger, k)[0]
    return alpha * target_loss + (1 - alpha) * trigger_loss
