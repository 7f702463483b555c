"""Hit ratio metrics."""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from ..data import InteractionDataset, InteractionMatrix
from ..errors import EvaluationError, ParameterError
from ..models import RecommenderParams, score_users


def unseen_rank(scores: np.ndarray, consumed: np.ndarray, item: int) -> np.ndarray:
    """Return the 0-based position of item among every row's unseen items.

    An item is ahead when its score is higher, or equal with a lower index.
    """
    own = scores[:, [item]]
    index = np.arange(scores.shape[1])
    ahead = (scores > own) | ((scores == own) & (index < item))
    return np.sum(ahead & ~consumed, axis=1)


def hit_rates(
    params: RecommenderParams,
    m: InteractionMatrix,
    item: int,
    users: Iterable[int],
    k_list: Sequence[int],
) -> dict[int, float]:
    """Return HR@k in percent for every k, ranking each user once.

    Users who already consumed the item are left out of both counts.

    Raises:
        ParameterError: If users is empty or a k is below 1.
        EvaluationError: If every user already consumed the item.

    """
    users = np.asarray(sorted(set(users)), dtype=np.int64)
    if users.size == 0:
        raise ParameterError("users must not be empty.")
    if any(k < 1 for k in k_list):
        raise ParameterError("Every k must be at least 1.")
    consumed = m.dense_rows(users) > 0
    eligible = ~consumed[:, item]
    if not eligible.any():
        raise EvaluationError(f"Every evaluated user already consumed item {item}.")
    scores = score_users(params, m, users[eligible])
    ranks = unseen_rank(scores, consumed[eligible], item)
    return {int(k): 100.0 * float(np.mean(ranks < k)) for k in k_list}


def hit_rate_at_k(
    params: RecommenderParams,
    m: InteractionMatrix,
    item: int,
    users: Iterable[int],
    k: int,
) -> float:
    """Return the percentage of eligible users with item in their top k."""
    return hit_rates(params, m, item, users, [k])[k]


def holdout_hit_ratio(
    params: RecommenderParams,
    train_matrix: InteractionMatrix,
    test: InteractionDataset,
    k: int,
) -> float:
    """Return the percentage of test users with a held-out item in their top k."""
    users = np.unique(test.users)
    if users.size == 0:
        raise EvaluationError("The test split has no events.")
    scores = score_users(params, train_matrix, users)
    consumed = train_matrix.dense_rows(users) > 0
    hits = 0
    for row, user in enumerate(users.tolist()):
        ranks = [
            unseen_rank(scores[[row]], consumed[[row]], int(item))[0]
            for item in test.consumed(user)
        ]
        hits += any(rank < k for rank in ranks)
    return 100.0 * hits / users.size
