"""Base classes shared by the recommender families."""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, ClassVar, Iterable, Sequence

import numpy as np

from ..const import (
    DEFAULT_BETA_KL,
    DEFAULT_C_POS,
    DEFAULT_L2_WEIGHT,
    DEFAULT_LATENT_DIM,
)
from ..data import InteractionMatrix, _load_train_presets
from ..errors import DivergenceError, ParameterError, ShapeError
from ..utils import Activation, ModelFamily, Optimizer

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    """Hyper-parameters of one training run."""

    latent_dim: int = DEFAULT_LATENT_DIM
    l2_weight: float = DEFAULT_L2_WEIGHT
    c_pos: float = DEFAULT_C_POS
    epochs: int = 100
    batch_size: int = 2048
    learning_rate: float = 0.01
    seed: int = 0
    beta_kl: float = DEFAULT_BETA_KL
    optimizer: Optimizer = Optimizer.ADAM
    activation: Activation = Activation.TANH

    def __post_init__(self) -> None:
        """Validate the ranges."""
        if self.latent_dim < 1:
            raise ParameterError("latent_dim must be at least 1.")
        if self.l2_weight < 0:
            raise ParameterError("l2_weight must be non-negative.")
        if self.c_pos < 1:
            raise ParameterError("c_pos must be at least 1.")
        if self.epochs < 1 or self.batch_size < 1:
            raise ParameterError("epochs and batch_size must be at least 1.")
        if self.learning_rate <= 0:
            raise ParameterError("learning_rate must be positive.")
        if not 0 <= self.beta_kl <= 1:
            raise ParameterError("beta_kl must lie in [0, 1].")

    @classmethod
    def for_family(cls, family: ModelFamily, **overrides: Any) -> TrainConfig:
        """Create a config from the packaged preset of a family."""
        preset = dict(_load_train_presets()[family.value])
        preset.update(overrides)
        return cls.from_dict(preset)

    def with_updates(self, **changes: Any) -> TrainConfig:
        """Return a copy with some fields changed."""
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        """Create a dict from the dataclass."""
        out = asdict(self)
        out["optimizer"] = self.optimizer.value
        out["activation"] = self.activation.value
        return out

    @classmethod
    def from_dict(cls, cfg: dict[str, Any]) -> TrainConfig:
        """Create a TrainConfig from a dict."""
        known = {f.name for f in fields(cls)}
        values = {key: value for key, value in cfg.items() if key in known}
        if "optimizer" in values:
            values["optimizer"] = Optimizer(values["optimizer"])
        if "activation" in values:
            values["activation"] = Activation(values["activation"])
        return cls(**values)


@dataclass(frozen=True)
class ScoreRow:
    """Predicted scores of one user over all items."""

    user_index: int | None
    scores: np.ndarray

    def __post_init__(self) -> None:
        """Check the scores are finite."""
        if not np.all(np.isfinite(self.scores)):
            raise DivergenceError("Scores contain non-finite values.")


class RecommenderParams(ABC):
    """Learned parameters of a recommender."""

    family: ClassVar[ModelFamily]
    array_names: ClassVar[tuple[str, ...]]

    @property
    @abstractmethod
    def n_items(self) -> int:
        """Return the size of the item space."""

    @property
    @abstractmethod
    def latent_dim(self) -> int:
        """Return the latent dimension."""

    @abstractmethod
    def score_rows(self, rows: np.ndarray) -> np.ndarray:
        """Score a batch of dense interaction rows."""

    @abstractmethod
    def hyper(self) -> dict[str, Any]:
        """Return the non-array fields needed to rebuild the params."""

    def arrays(self) -> dict[str, np.ndarray]:
        """Return the weight matrices by name."""
        return {name: getattr(self, name) for name in self.array_names}

    @classmethod
    def from_arrays(
        cls, arrays: dict[str, np.ndarray], hyper: dict[str, Any]
    ) -> RecommenderParams:
        """Rebuild the params from arrays and hyper fields."""
        return cls(**{**{n: arrays[n] for n in cls.array_names}, **hyper})  # type: ignore[call-arg]

    def check_finite(self) -> None:
        """Raise if any weight is not finite."""
        for name, value in self.arrays().items():
            if not np.all(np.isfinite(value)):
                raise DivergenceError(f"{self.family.value}: {name} is not finite.")


def _as_row(params: RecommenderParams, row: np.ndarray | Sequence[float]) -> np.ndarray:
    arr = np.asarray(row, dtype=np.float64)
    if arr.ndim != 1 or arr.size != params.n_items:
        raise ShapeError(f"Row has shape {arr.shape}, expected ({params.n_items},).")
    return arr


def score_user(
    params: RecommenderParams,
    row: np.ndarray | Sequence[float],
    user_index: int | None = None,
) -> ScoreRow:
    """Score every item for one interaction row."""
    arr = _as_row(params, row)
    return ScoreRow(user_index, params.score_rows(arr[None, :])[0])


def score_users(
    params: RecommenderParams, m: InteractionMatrix, users: Iterable[int]
) -> np.ndarray:
    """Score the rows of the given users of a matrix."""
    if m.cols != params.n_items:
        raise ShapeError(f"Matrix has {m.cols} items, model has {params.n_items}.")
    users = np.asarray(list(users), dtype=np.int64)
    if users.size == 0:
        return np.zeros((0, params.n_items))
    return params.score_rows(m.dense_rows(users))


def recommend_top_k(
    scores: ScoreRow | np.ndarray, consumed: Iterable[int], k: int
) -> list[int]:
    """Return the k best unseen items, ties by ascending index.

    Raises:
        ParameterError: If k is below 1.

    """
    if k < 1:
        raise ParameterError("k must be at least 1.")
    values = scores.scores if isinstance(scores, ScoreRow) else np.asarray(scores)
    order = np.lexsort((np.arange(values.size), -values))
    seen = np.zeros(values.size, dtype=bool)
    seen[np.fromiter(consumed, dtype=np.int64)] = True
    return order[~seen[order]][:k].tolist()
