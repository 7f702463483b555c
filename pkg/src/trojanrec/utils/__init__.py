"""Init of trojanrec utils."""
from __future__ import annotations

from .counter import Counter
from .enums import (
    Activation,
    FileFormat,
    Method,
    ModelFamily,
    Optimizer,
    PopularityBucket,
    SeedHeuristic,
    SelectionMode,
    TriggerSelection,
    UserLabel,
)
from .files import atomic_write
from .rng import make_rng
