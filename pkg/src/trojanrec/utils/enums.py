"""Enum classes for trojanrec."""
from __future__ import annotations

from enum import Enum, auto
from typing import Any


class AutoName(Enum):
    """Auto name the enums."""

    @staticmethod
    def _generate_next_value_(
        name: str,
        start: Any,
        count: Any,
        last_values: Any,  # pylint: disable=unused-argument
    ) -> str:
        """Return the lower-cased name as value for Enum."""
        return name.lower()


class ModelFamily(AutoName):
    """Recommender model families."""

    WRMF = auto()
    ITEM_AE = auto()
    MULT_VAE = auto()


class PopularityBucket(AutoName):
    """Item strata by click-count percentile."""

    HEAD = auto()
    UPPER_TORSO = auto()
    LOWER_TORSO = auto()
    TAIL = auto()


class SelectionMode(AutoName):
    """How the target users are chosen."""

    CLUSTERED = auto()
    RANDOM_THIRD = auto()


class FileFormat(Enum):
    """Interaction file layouts, value is the field separator."""

    TSV_QUAD = "\t"
    CSV_QUAD = ","
    COLON_QUAD = "::"


class Method(AutoName):
    """Poisoning methods compared in the experiments."""

    CLEAN = auto()
    INJECTION = auto()
    INDIRECTAD = auto()
    POPULARITY_TRIGGER = auto()
    RANDOM_SHILLING = auto()


class TriggerSelection(AutoName):
    """How the trigger item is picked."""

    OPTIMIZED = auto()
    POPULARITY = auto()


class Optimizer(AutoName):
    """Update rules for gradient based training."""

    ADAM = auto()
    SGD = auto()


class Activation(AutoName):
    """Hidden-layer activations of the autoencoders."""

    TANH = auto()
    IDENTITY = auto()


class SeedHeuristic(AutoName):
    """Initial suspicion heuristics for detection."""

    DEGREE_ANOMALY = auto()
    CO_RATING_BURST = auto()


class UserLabel(AutoName):
    """Ground-truth label of a user."""

    GENUINE = auto()
    FAKE = auto()
