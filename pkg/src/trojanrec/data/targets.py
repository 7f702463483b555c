"""Target item and target user selection."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..const import DEFAULT_N_CLUSTERS
from ..errors import ParameterError, SelectionError
from ..utils import PopularityBucket, SelectionMode, make_rng
from .clustering import cluster_users
from .dataset import InteractionDataset
from .popularity import bucket_members, popularity_buckets

_LOGGER = logging.getLogger(__name__)

SALT_USERS = 1
SALT_ITEM = 2


@dataclass(frozen=True)
class TargetSpec:
    """The item to promote and the users it is promoted to."""

    target_item: int
    target_users: tuple[int, ...]
    selection_mode: SelectionMode
    seed: int
    bucket: PopularityBucket | None = None

    def __post_init__(self) -> None:
        """Check the spec is usable."""
        if not self.target_users:
            raise ParameterError("target_users must not be empty.")
        if self.target_item < 0:
            raise ParameterError("target_item must be a valid index.")
        object.__setattr__(
            self, "target_users", tuple(sorted(int(u) for u in self.target_users))
        )

    def to_dict(self) -> dict[str, Any]:
        """Create a dict from the dataclass."""
        return {
            "target_item": self.target_item,
            "target_users": list(self.target_users),
            "selection_mode": self.selection_mode.value,
            "seed": self.seed,
            "bucket": self.bucket.value if self.bucket else None,
        }

    @classmethod
    def from_dict(cls, spec: dict[str, Any]) -> TargetSpec:
        """Create a TargetSpec from a dict."""
        return cls(
            target_item=int(spec["target_item"]),
            target_users=tuple(spec["target_users"]),
            selection_mode=SelectionMode(spec["selection_mode"]),
            seed=int(spec["seed"]),
            bucket=PopularityBucket(spec["bucket"]) if spec.get("bucket") else None,
        )


def select_targets(
    ds: InteractionDataset,
    mode: SelectionMode,
    bucket: PopularityBucket,
    seed: int,
    n_clusters: int = DEFAULT_N_CLUSTERS,
) -> TargetSpec:
    """Pick target users and a target item from a popularity bucket.

    Clustered mode picks one of the user clusters uniformly, random_third samples
    floor(|U|/3) users. The item is drawn uniformly among bucket items that not
    every target user has consumed.

    Raises:
        SelectionError: If the bucket holds no eligible item.
        ParameterError: If no target users can be formed.

    """
    rng = make_rng(seed, SALT_USERS)
    if mode is SelectionMode.CLUSTERED:
        clusters = cluster_users(ds.matrix(), n_clusters, seed)
        chosen = int(rng.integers(int(clusters.max()) + 1))
        users = np.flatnonzero(clusters == chosen)
    else:
        size = ds.n_users // 3
        if size == 0:
            raise ParameterError("Too few users for a random third.")
        users = np.sort(rng.choice(ds.n_users, size=size, replace=False))

    members = bucket_members(popularity_buckets(ds), bucket)
    if not members:
        raise SelectionError(f"Popularity bucket {bucket.value} is empty.")
    in_targets = np.zeros(ds.n_users, dtype=bool)
    in_targets[users] = True
    reach = np.bincount(ds.items[in_targets[ds.users]], minlength=ds.n_items)
    eligible = [item for item in members if reach[item] < users.size]
    if not eligible:
        raise SelectionError(
            f"Every {bucket.value} item is consumed by all target users."
        )
    item = int(make_rng(seed, SALT_ITEM).choice(eligible))
    _LOGGER.info(
        "Selected target item %s (%s) for %d %s users",
        ds.item_ids[item],
        bucket.value,
        users.size,
        mode.value,
    )
    return TargetSpec(
        target_item=item,
        target_users=tuple(users.tolist()),
        selection_mode=mode,
        seed=seed,
        bucket=bucket,
    )
