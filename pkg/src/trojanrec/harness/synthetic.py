"""Planted block benchmark datasets."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from ..data import InteractionDataset
from ..errors import ConfigError
from ..utils import make_rng

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class SyntheticSpec:
    """Sizes and densities of a block-structured interaction matrix."""

    n_users: int = 600
    n_items: int = 300
    n_clusters: int = 3
    p_in: float = 0.15
    p_out: float = 0.01
    seed: int = 0

    def __post_init__(self) -> None:
        """Validate the spec."""
        self.validate_spec(**asdict(self))

    @classmethod
    def validate_spec(
        cls,
        n_users: int,
        n_items: int,
        n_clusters: int,
        p_in: float,
        p_out: float,
        seed: int | None,
    ) -> None:
        """Validate the fields of a spec.

        Raises:
            ConfigError: If a block would be empty, the probabilities are not
                ordered as 0 <= p_out < p_in <= 1, or the seed is missing.

        """
        if seed is None or seed < 0:
            raise ConfigError("The synthetic spec needs a non-negative seed.")
        if n_clusters < 1:
            raise ConfigError("n_clusters must be at least 1.")
        if n_users < n_clusters or n_items < n_clusters:
            raise ConfigError(
                f"{n_clusters} blocks need at least as many users and items, "
                f"got {n_users} users and {n_items} items."
            )
        if not 0 <= p_out < p_in <= 1:
            raise ConfigError("Probabilities must satisfy 0 <= p_out < p_in <= 1.")

    def block_sizes(self) -> tuple[list[int], list[int]]:
        """Return the user and item counts of every block."""
        users = [len(b) for b in np.array_split(np.arange(self.n_users), self.n_clusters)]
        items = [len(b) for b in np.array_split(np.arange(self.n_items), self.n_clusters)]
        return users, items

    def expected_events(self) -> float:
        """Return the expected number of events."""
        users, items = self.block_sizes()
        inside = sum(u * i for u, i in zip(users, items))
        outside = self.n_users * self.n_items - inside
        return inside * self.p_in + outside * self.p_out

    def to_dict(self) -> dict[str, Any]:
        """Create a dict from the dataclass."""
        return asdict(self)

    @classmethod
    def from_dict(cls, spec: dict[str, Any]) -> SyntheticSpec:
        """Create a SyntheticSpec from a dict."""
        try:
            return cls(**spec)
        except TypeError as exc:
            raise ConfigError(f"Invalid synthetic spec: {exc}") from exc


def _block_labels(n: int, n_clusters: int) -> np.ndarray:
    labels = np.empty(n, dtype=np.int64)
    for block, members in enumerate(np.array_split(np.arange(n), n_clusters)):
        labels[members] = block
    return labels


def generate_synthetic(spec: SyntheticSpec) -> InteractionDataset:
    """Draw every user-item cell independently, p_in inside a block and p_out across."""
    rng = make_rng(spec.seed)
    user_block = _block_labels(spec.n_users, spec.n_clusters)
    item_block = _block_labels(spec.n_items, spec.n_clusters)
    prob = np.where(user_block[:, None] == item_block[None, :], spec.p_in, spec.p_out)
    users, items = np.nonzero(rng.random(prob.shape) < prob)
    width = max(4, len(str(max(spec.n_users, spec.n_items) - 1)))
    _LOGGER.info(
        "Generated synthetic dataset: %d users, %d items, %d events (expected %.1f)",
        spec.n_users,
        spec.n_items,
        users.size,
        spec.expected_events(),
    )
    return InteractionDataset(
        user_ids=tuple(f"u{n:0{width}d}" for n in range(spec.n_users)),
        item_ids=tuple(f"i{n:0{width}d}" for n in range(spec.n_items)),
        users=users.astype(np.int64),
        items=items.astype(np.int64),
        timestamps=np.zeros(users.size, dtype=np.int64),
        weights=np.ones(users.size),
    )
