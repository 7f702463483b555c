"""One-step WRMF surrogate of the poisoned retraining, with its input gradient.

Fake rows are folded in against the substitute's item factors, the item factors
are then re-solved once with real and fake users, and target users are scored
with their stored factors against the re-solved items. Every step is a closed
form ridge solve, so the gradient with respect to the fake rows follows by the
chain rule through those solves.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..const import DEFAULT_TOP_K
from ..data import InteractionMatrix
from ..errors import ParameterError, ShapeError, SolverError
from ..models import WRMFParams
from .losses import kth_competitors, promotion_loss_and_grad
from .poison import FakeUserBlock

_LOGGER = logging.getLogger(__name__)


def _batched_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(a, b[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise SolverError("Surrogate normal equations are singular.") from exc


@dataclass
class SurrogateState:
    """Intermediate values of one surrogate evaluation."""

    rows: np.ndarray
    users: np.ndarray
    target: int
    trigger: int | None
    alpha: float
    fake_factors: np.ndarray
    fake_normals: np.ndarray
    item_factors: np.ndarray
    item_normals: np.ndarray
    scores: np.ndarray
    target_loss: float
    trigger_loss: float
    kth_target: np.ndarray
    kth_trigger: np.ndarray | None
    score_grad: np.ndarray

    @property
    def loss(self) -> float:
        """Return the blended loss."""
        if self.trigger is None or self.alpha == 1:
            return self.alpha * self.target_loss
        return self.alpha * self.target_loss + (1 - self.alpha) * self.trigger_loss


class WRMFSurrogate:
    """Surrogate of a WRMF substitute trained on a real matrix."""

    def __init__(self, params: WRMFParams, real_matrix: InteractionMatrix) -> None:
        """Precompute the real-user parts of every item's normal equations."""
        if params.n_items != real_matrix.cols:
            raise ShapeError("Substitute and matrix differ in item count.")
        self.real_matrix = real_matrix
        self.c_pos = params.c_pos
        self.l2_weight = params.l2_weight
        self.user_factors = params.user_factors[: real_matrix.rows]
        self.item_factors = params.item_factors
        d = params.latent_dim
        u = self.user_factors
        csc = real_matrix.csr.tocsc()
        base = u.T @ u + self.l2_weight * np.eye(d)
        self.real_normals = np.empty((real_matrix.cols, d, d))
        self.real_rhs = np.empty((real_matrix.cols, d))
        for item in range(real_matrix.cols):
            f = u[csc.indices[csc.indptr[item] : csc.indptr[item + 1]]]
            self.real_normals[item] = base + (self.c_pos - 1.0) * f.T @ f
            self.real_rhs[item] = self.c_pos * f.sum(axis=0)
        v = self.item_factors
        self.fold_base = v.T @ v + self.l2_weight * np.eye(d)

    def fake_factors(self, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Fold the fake rows in, returning embeddings and their normal matrices."""
        v = self.item_factors
        # cell confidence 1 + (c_pos - 1) x, preference x
        cm1 = self.c_pos - 1.0
        normals = self.fold_base[None] + cm1 * np.einsum("fi,id,ie->fde", rows, v, v)
        rhs = (rows + cm1 * rows**2) @ v
        return _batched_solve(normals, rhs), normals

    def resolve_items(
        self, rows: np.ndarray, fake: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        """Re-solve the item factors with real and fake users."""
        cm1 = self.c_pos - 1.0
        normals = (
            self.real_normals
            + (fake.T @ fake)[None]
            + cm1 * np.einsum("fi,fd,fe->ide", rows, fake, fake)
        )
        rhs = self.real_rhs + (rows + cm1 * rows**2).T @ fake
        return _batched_solve(normals, rhs), normals

    def evaluate(
        self,
        rows: np.ndarray,
        target: int,
        trigger: int | None,
        users: Iterable[int],
        alpha: float,
        k: int = DEFAULT_TOP_K,
        kth_target: np.ndarray | None = None,
        kth_trigger: np.ndarray | None = None,
    ) -> SurrogateState:
        """Evaluate the blended promotion loss after poisoning with rows.

        Passing the competitor arrays of an earlier state holds the k-th items fixed.
        """
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[1] != self.real_matrix.cols:
            raise ShapeError(f"Fake rows have shape {rows.shape}.")
        if not 0 <= alpha <= 1:
            raise ParameterError("alpha must lie in [0, 1].")
        users = np.asarray(sorted(set(users)), dtype=np.int64)
        fake, fake_normals = self.fake_factors(rows)
        items, item_normals = self.resolve_items(rows, fake)
        scores = self.user_factors[users] @ items.T
        consumed = self.real_matrix.dense_rows(users) > 0
        if kth_target is None:
            kth_target = kth_competitors(scores, consumed, target, k)
        target_loss, target_grad = promotion_loss_and_grad(
            scores, consumed, target, k, kth_target
        )
        score_grad = alpha * target_grad
        trigger_loss = 0.0
        if trigger is not None and alpha < 1:
            if kth_trigger is None:
                kth_trigger = kth_competitors(scores, consumed, trigger, k)
            trigger_loss, trigger_grad = promotion_loss_and_grad(
                scores, consumed, trigger, k, kth_trigger
            )
            score_grad = score_grad + (1 - alpha) * trigger_grad
        return SurrogateState(
            rows=rows,
            users=users,
            target=target,
            trigger=trigger,
            alpha=alpha,
            fake_factors=fake,
            fake_normals=fake_normals,
            item_factors=items,
            item_normals=item_normals,
            scores=scores,
            target_loss=target_loss,
            trigger_loss=trigger_loss,
            kth_target=kth_target,
            kth_trigger=kth_trigger,
            score_grad=score_grad,
        )

    def gradient(self, state: SurrogateState) -> np.ndarray:
        """Return d loss / d rows for an evaluated state."""
        cm1 = self.c_pos - 1.0
        x = state.rows
        fake = state.fake_factors
        items = state.item_factors
        # adjoint of the item solve
        g = state.score_grad.T @ self.user_factors[state.users]
        q = _batched_solve(state.item_normals, g)

        fake_q = fake @ q.T
        fake_scores = fake @ items.T
        direct = fake_q * (1.0 + 2.0 * cm1 * x - cm1 * fake_scores)

        # adjoint of the fold-in
        conf = 1.0 + cm1 * x
        h = (conf * (x - fake_scores)) @ q - (conf * fake_q) @ items
        p = _batched_solve(state.fake_normals, h)
        v = self.item_factors
        through_fold_in = (p @ v.T) * (1.0 + 2.0 * cm1 * x - cm1 * (fake @ v.T))
        return direct + through_fold_in


def surrogate_loss(
    params: WRMFParams,
    real_matrix: InteractionMatrix,
    rows: np.ndarray,
    target: int,
    trigger: int | None,
    users: Iterable[int],
    alpha: float,
    k: int = DEFAULT_TOP_K,
) -> float:
    """Return the surrogate blended loss for fake rows."""
    return WRMFSurrogate(params, real_matrix).evaluate(
        rows, target, trigger, users, alpha, k
    ).loss


def fake_block_gradient(
    params: WRMFParams,
    block: FakeUserBlock,
    real_matrix: InteractionMatrix,
    target: int,
    trigger: int | None,
    users: Iterable[int],
    alpha: float,
    k: int = DEFAULT_TOP_K,
) -> np.ndarray:
    """Return the gradient of the surrogate loss with respect to the block rows.

    Forced columns get a gradient too; projection discards it.
    """
    surrogate = WRMFSurrogate(params, real_matrix)
    state = surrogate.evaluate(block.rows, target, trigger, users, alpha, k)
    return surrogate.gradient(state)
