"""Weighted regularized matrix factorization trained by alternating least squares."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, ClassVar

import numpy as np
import scipy.linalg
from scipy import sparse

from ..const import INIT_SCALE
from ..data import InteractionMatrix
from ..errors import DivergenceError, EmptyDatasetError, ShapeError, SolverError
from ..utils import ModelFamily, make_rng
from .base import RecommenderParams, TrainConfig

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class WRMFParams(RecommenderParams):
    """User and item factors plus the weights needed to fold in new rows."""

    family: ClassVar[ModelFamily] = ModelFamily.WRMF
    array_names: ClassVar[tuple[str, ...]] = ("user_factors", "item_factors")

    user_factors: np.ndarray
    item_factors: np.ndarray
    l2_weight: float
    c_pos: float

    def __post_init__(self) -> None:
        """Check the factor shapes agree."""
        if self.user_factors.ndim != 2 or self.item_factors.ndim != 2:
            raise ShapeError("Factor matrices must be two dimensional.")
        if self.user_factors.shape[1] != self.item_factors.shape[1]:
            raise ShapeError("User and item factors differ in latent dimension.")

    @property
    def n_items(self) -> int:
        """Return the size of the item space."""
        return int(self.item_factors.shape[0])

    @property
    def latent_dim(self) -> int:
        """Return the latent dimension."""
        return int(self.item_factors.shape[1])

    def hyper(self) -> dict[str, Any]:
        """Return the non-array fields."""
        return {"l2_weight": self.l2_weight, "c_pos": self.c_pos}

    def score_rows(self, rows: np.ndarray) -> np.ndarray:
        """Fold every row in and score it against the item factors."""
        embeddings = solve_rows(
            self.item_factors, sparse.csr_matrix(rows), self.c_pos, self.l2_weight
        )
        return embeddings @ self.item_factors.T


def _solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        return scipy.linalg.solve(a, b, assume_a="pos")
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
        raise SolverError("Normal equations are singular.") from exc


def solve_rows(
    fixed: np.ndarray, x: sparse.csr_matrix, c_pos: float, l2_weight: float
) -> np.ndarray:
    """Solve the weighted ridge problem of every row of x against fixed factors.

    Row r gets argmin_w sum_j c(x_rj) (x_rj - w.f_j)^2 + l2 |w|^2 with
    c(x) = 1 + (c_pos - 1) x over all columns, so fractional rows are allowed.
    """
    d = fixed.shape[1]
    gram = fixed.T @ fixed + l2_weight * np.eye(d)
    out = np.zeros((x.shape[0], d))
    indptr, indices, data = x.indptr, x.indices, x.data
    for row in range(x.shape[0]):
        lo, hi = indptr[row], indptr[row + 1]
        if lo == hi:
            if l2_weight > 0:
                continue
            out[row] = _solve(gram, np.zeros(d))
            continue
        cols, vals = indices[lo:hi], data[lo:hi]
        f = fixed[cols]
        a = gram + (c_pos - 1.0) * (f.T * vals) @ f
        b = f.T @ (vals + (c_pos - 1.0) * vals**2)
        out[row] = _solve(a, b)
    return out


def fold_in_user(params: WRMFParams, row: np.ndarray) -> np.ndarray:
    """Return the closed-form embedding of an interaction row under fixed item factors.

    Raises:
        ShapeError: If the row length is not the item count.
        SolverError: If the normal matrix is singular.

    """
    arr = np.asarray(row, dtype=np.float64)
    if arr.ndim != 1 or arr.size != params.n_items:
        raise ShapeError(f"Row has shape {arr.shape}, expected ({params.n_items},).")
    return solve_rows(
        params.item_factors, sparse.csr_matrix(arr[None, :]), params.c_pos, params.l2_weight
    )[0]


def wrmf_objective(
    user_factors: np.ndarray,
    item_factors: np.ndarray,
    x: sparse.csr_matrix,
    c_pos: float,
    l2_weight: float,
) -> float:
    """Return the confidence weighted loss over all cells plus the ridge term."""
    coo = x.tocoo()
    pred = np.einsum("nd,nd->n", user_factors[coo.row], item_factors[coo.col])
    conf = 1.0 + (c_pos - 1.0) * coo.data
    dense_part = np.trace((user_factors.T @ user_factors) @ (item_factors.T @ item_factors))
    correction = np.sum(conf * (coo.data - pred) ** 2 - pred**2)
    ridge = l2_weight * (np.sum(user_factors**2) + np.sum(item_factors**2))
    return float(dense_part + correction + ridge)


def fit_wrmf(
    x: sparse.csr_matrix,
    cfg: TrainConfig,
    item_init: np.ndarray | None = None,
    history: list[float] | None = None,
) -> WRMFParams:
    """Run cfg.epochs ALS sweeps on a possibly fractional matrix.

    Each sweep solves users then items; a last user solve makes the stored user
    factors the exact fold-in of their rows.

    Arguments:
        x -- user by item matrix with entries in [0, 1].
        cfg -- training config, latent_dim, l2_weight, c_pos, epochs and seed are used.
        item_init -- warm start for the item factors.
        history -- receives the objective after every half sweep.

    Raises:
        EmptyDatasetError: If the matrix has no rows or columns.
        DivergenceError: If the objective becomes non-finite.

    """
    x = sparse.csr_matrix(x, dtype=np.float64)
    n_users, n_items = x.shape
    if n_users == 0 or n_items == 0:
        raise EmptyDatasetError("Cannot factorize an empty matrix.")
    # users are solved first, only the items need an init
    rng = make_rng(cfg.seed)
    items = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(n_items, cfg.latent_dim))
    if item_init is not None:
        if item_init.shape != items.shape:
            raise ShapeError(f"Warm start has shape {item_init.shape}, need {items.shape}.")
        items = item_init.copy()
    xt = x.T.tocsr()
    for epoch in range(cfg.epochs):
        users = solve_rows(items, x, cfg.c_pos, cfg.l2_weight)
        if history is not None:
            history.append(wrmf_objective(users, items, x, cfg.c_pos, cfg.l2_weight))
        items = solve_rows(users, xt, cfg.c_pos, cfg.l2_weight)
        objective = wrmf_objective(users, items, x, cfg.c_pos, cfg.l2_weight)
        if history is not None:
            history.append(objective)
        if not np.isfinite(objective):
            raise DivergenceError(f"WRMF objective is {objective} at sweep {epoch}.")
        _LOGGER.debug("WRMF sweep %d objective %.6f", epoch, objective)
    users = solve_rows(items, x, cfg.c_pos, cfg.l2_weight)
    params = WRMFParams(users, items, cfg.l2_weight, cfg.c_pos)
    params.check_finite()
    return params


def train_wrmf(m: InteractionMatrix, cfg: TrainConfig) -> WRMFParams:
    """Train WRMF on a binary interaction matrix."""
    return fit_wrmf(m.csr, cfg)
