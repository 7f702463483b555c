"""Popularity strata of items."""
from __future__ import annotations

import math

import numpy as np

from ..const import HEAD_FRACTION, LOWER_TORSO_FRACTION, UPPER_TORSO_FRACTION
from ..errors import EmptyDatasetError
from ..utils import PopularityBucket
from .dataset import InteractionDataset


def popularity_ranking(counts: np.ndarray) -> np.ndarray:
    """Return item indices by descending count, ties by ascending index."""
    counts = np.asarray(counts)
    return np.lexsort((np.arange(counts.size), -counts))


def popularity_buckets(ds: InteractionDataset) -> dict[int, PopularityBucket]:
    """Assign every item to a popularity bucket.

    Items are ranked by event count. The first floor(5%) ranks form the head, up to
    floor(25%) the upper torso, up to floor(50%) the lower torso, the rest the tail.

    Raises:
        EmptyDatasetError: If the dataset has no items.

    """
    n = ds.n_items
    if n == 0:
        raise EmptyDatasetError("Cannot bucket an empty item set.")
    head = math.floor(n * HEAD_FRACTION)
    upper = math.floor(n * UPPER_TORSO_FRACTION)
    lower = math.floor(n * LOWER_TORSO_FRACTION)
    buckets: dict[int, PopularityBucket] = {}
    for rank, item in enumerate(popularity_ranking(ds.item_counts()).tolist()):
        if rank < head:
            buckets[item] = PopularityBucket.HEAD
        elif rank < upper:
            buckets[item] = PopularityBucket.UPPER_TORSO
        elif rank < lower:
            buckets[item] = PopularityBucket.LOWER_TORSO
        else:
            buckets[item] = PopularityBucket.TAIL
    return buckets


def bucket_members(
    buckets: dict[int, PopularityBucket], bucket: PopularityBucket
) -> list[int]:
    """Return the sorted items of one bucket."""
    return sorted(item for item, value in buckets.items() if value is bucket)
