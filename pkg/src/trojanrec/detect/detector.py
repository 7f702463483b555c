"""Label propagation of suspicion over the user-item graph."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from scipy import sparse
from sklearn.metrics import roc_auc_score

from ..const import DEFAULT_DAMPING, DEFAULT_ITERATIONS
from ..data import InteractionDataset
from ..errors import DetectionError, EmptyDatasetError, ParameterError, ShapeError
from ..utils import SeedHeuristic, UserLabel

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SuspicionScores:
    """Per-user suspicion after propagation."""

    scores: np.ndarray
    iterations: int
    damping: float

    def __post_init__(self) -> None:
        """Check the scores stay finite and inside [0, 1]."""
        if not np.all(np.isfinite(self.scores)):
            raise DetectionError("Suspicion scores are not finite.")
        if np.any(self.scores < 0) or np.any(self.scores > 1):
            raise DetectionError("Suspicion scores left [0, 1].")


def _adjacency(ds: InteractionDataset) -> sparse.csr_matrix:
    return sparse.csr_matrix(
        (np.ones(ds.n_events), (ds.users, ds.items)), shape=(ds.n_users, ds.n_items)
    )


def propagate_suspicion(
    ds: InteractionDataset,
    initial: Sequence[float] | np.ndarray,
    iterations: int = DEFAULT_ITERATIONS,
    damping: float = DEFAULT_DAMPING,
) -> SuspicionScores:
    """Diffuse suspicion between users and items.

    Each round an item takes the mean score of its users, then a user takes
    damping * initial + (1 - damping) * the mean score of its items. Users
    without events keep their initial score.

    Raises:
        ParameterError: If iterations is negative or damping is outside (0, 1).
        ShapeError: If initial does not have one score per user.

    """
    if iterations < 0:
        raise ParameterError("iterations must be non-negative.")
    if not 0 < damping < 1:
        raise ParameterError("damping must lie in (0, 1).")
    initial = np.asarray(initial, dtype=np.float64)
    if initial.shape != (ds.n_users,):
        raise ShapeError(f"Expected {ds.n_users} initial scores, got {initial.shape}.")
    adj = _adjacency(ds)
    user_deg = np.asarray(adj.sum(axis=1)).ravel()
    item_deg = np.asarray(adj.sum(axis=0)).ravel()
    active = user_deg > 0
    scores = initial.copy()
    for _ in range(iterations):
        items = np.divide(
            adj.T @ scores, item_deg, out=np.zeros(ds.n_items), where=item_deg > 0
        )
        spread = np.divide(
            adj @ items, user_deg, out=np.zeros(ds.n_users), where=active
        )
        scores = np.where(active, damping * initial + (1 - damping) * spread, initial)
    return SuspicionScores(np.clip(scores, 0.0, 1.0), iterations, damping)


def _degree_anomaly(ds: InteractionDataset, reference: float | None) -> np.ndarray:
    lengths = ds.profile_lengths().astype(np.float64)
    center = np.median(lengths) if reference is None else reference
    deviation = np.abs(lengths - center)
    top = deviation.max()
    return deviation / top if top > 0 else np.zeros(ds.n_users)


def most_co_rated_pair(ds: InteractionDataset) -> tuple[int, int]:
    """Return the item pair consumed together by most users, ties by lowest pair."""
    adj = _adjacency(ds)
    co = (adj.T @ adj).toarray()
    co[np.tril_indices(ds.n_items)] = -1
    flat = int(np.argmax(co))
    return divmod(flat, ds.n_items)


def _co_rating_burst(
    ds: InteractionDataset, pair: tuple[int, int] | None
) -> np.ndarray:
    if pair is None:
        if ds.n_items < 2:
            return np.zeros(ds.n_users)
        pair = most_co_rated_pair(ds)
    lengths = ds.profile_lengths().astype(np.float64)
    in_pair = np.bincount(
        ds.users[np.isin(ds.items, pair)], minlength=ds.n_users
    ).astype(np.float64)
    share = np.divide(in_pair, lengths, out=np.zeros(ds.n_users), where=lengths > 0)
    top = share.max()
    return share / top if top > 0 else share


def seed_suspicion(
    ds: InteractionDataset,
    heuristic: SeedHeuristic,
    *,
    reference_length: float | None = None,
    item_pair: tuple[int, int] | None = None,
) -> np.ndarray:
    """Return initial suspicion in [0, 1] per user.

    degree_anomaly scores the distance of a profile length from reference_length,
    the median by default. co_rating_burst scores the share of a profile inside
    item_pair, by default the most co-rated pair. Both are scaled by their maximum.

    Raises:
        EmptyDatasetError: If the dataset has no events.
        ParameterError: If a setting belongs to the other heuristic or is invalid.

    """
    if ds.n_events == 0:
        raise EmptyDatasetError("Cannot seed suspicion without events.")
    if heuristic is SeedHeuristic.DEGREE_ANOMALY:
        if item_pair is not None:
            raise ParameterError("item_pair only applies to co_rating_burst.")
        if reference_length is not None and reference_length < 0:
            raise ParameterError("reference_length must be non-negative.")
        return _degree_anomaly(ds, reference_length)
    if reference_length is not None:
        raise ParameterError("reference_length only applies to degree_anomaly.")
    if item_pair is not None:
        first, second = (int(i) for i in item_pair)
        known = all(0 <= i < ds.n_items for i in (first, second))
        if first == second or not known:
            raise ParameterError(f"item_pair {item_pair} is not two distinct items.")
        item_pair = (first, second)
    return _co_rating_burst(ds, item_pair)


def _fake_flags(labels: Sequence[UserLabel | bool | str]) -> np.ndarray:
    flags = []
    for label in labels:
        if isinstance(label, (bool, np.bool_)):
            flags.append(bool(label))
        else:
            flags.append(UserLabel(label) is UserLabel.FAKE)
    return np.asarray(flags, dtype=bool)


def auc(
    scores: Sequence[float] | np.ndarray, labels: Sequence[UserLabel | bool | str]
) -> float:
    """Return the chance a random fake user outscores a random genuine one, ties half.

    Raises:
        ShapeError: If scores and labels differ in length.
        DetectionError: If only one class is present.

    """
    values = np.asarray(scores, dtype=np.float64)
    fake = _fake_flags(labels)
    if values.shape != fake.shape:
        raise ShapeError("Scores and labels differ in length.")
    if fake.all() or not fake.any():
        raise DetectionError("AUC needs both fake and genuine users.")
    return float(roc_auc_score(fake.astype(int), values))


@dataclass(frozen=True, eq=False)
class DetectionResult:
    """Propagated suspicion, the labels it was scored on and its AUC."""

    heuristic: SeedHeuristic
    suspicion: SuspicionScores
    labels: tuple[UserLabel, ...]
    auc: float

    def records(self, ds: InteractionDataset) -> list[tuple[str, float, str]]:
        """Return (user id, score, label) rows."""
        return [
            (uid, float(score), label.value)
            for uid, score, label in zip(
                ds.user_ids, self.suspicion.scores, self.labels
            )
        ]

    def summary(self) -> dict[str, Any]:
        """Return the scalar detection record."""
        return {
            "heuristic": self.heuristic.value,
            "iterations": self.suspicion.iterations,
            "damping": self.suspicion.damping,
            "auc": self.auc,
        }


def detect_fake_users(
    ds: InteractionDataset,
    labels: Sequence[UserLabel | bool | str],
    heuristic: SeedHeuristic = SeedHeuristic.DEGREE_ANOMALY,
    iterations: int = DEFAULT_ITERATIONS,
    damping: float = DEFAULT_DAMPING,
) -> DetectionResult:
    """Seed, propagate and score suspicion against ground-truth labels."""
    flags = _fake_flags(labels)
    initial = seed_suspicion(ds, heuristic)
    suspicion = propagate_suspicion(ds, initial, iterations, damping)
    value = auc(suspicion.scores, flags)
    _LOGGER.info("Detection with %s: AUC %.4f", heuristic.value, value)
    return DetectionResult(
        heuristic=heuristic,
        suspicion=suspicion,
        labels=tuple(UserLabel.FAKE if f else UserLabel.GENUINE for f in flags),
        auc=value,
    )
