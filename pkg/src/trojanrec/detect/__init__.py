"""Suspicion propagation detector."""
from __future__ import annotations

from .detector import (
    DetectionResult,
    SuspicionScores,
    auc,
    detect_fake_users,
    most_co_rated_pair,
    propagate_suspicion,
    seed_suspicion,
)
