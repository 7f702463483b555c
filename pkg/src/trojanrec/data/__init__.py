"""Interaction data, popularity strata and target selection."""
from __future__ import annotations

from .clustering import cluster_users
from .dataset import (
    InteractionDataset,
    InteractionMatrix,
    append_users,
    core_filter,
    dumps_dataset,
    load_interactions,
    loads_dataset,
    read_dataset,
    train_test_split,
)
from .popularity import bucket_members, popularity_buckets, popularity_ranking
from .presets import _load_train_presets
from .targets import TargetSpec, select_targets
