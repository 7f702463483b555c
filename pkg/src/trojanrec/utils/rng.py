"""Seeded random generators."""
from __future__ import annotations

import numpy as np

from ..errors import ConfigError


def make_rng(seed: int | None, *salts: int) -> np.random.Generator:
    """Create a generator from an explicit seed and optional integer salts.

    Salts let independent parts of a run draw from unrelated streams while the
    whole run still follows from one seed.

    Raises:
        ConfigError: If no seed is given.

    """
    if seed is None:
        raise ConfigError("An explicit integer seed is required.")
    entropy = [int(seed)] + [int(salt) for salt in salts]
    if any(value < 0 for value in entropy):
        raise ConfigError(f"Seeds and salts must be non-negative, got {entropy}.")
    return np.random.default_rng(np.random.SeedSequence(entropy))
