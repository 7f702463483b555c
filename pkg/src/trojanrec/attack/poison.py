"""Fake user blocks: seeding, projection and discretization."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..const import POISON_INIT_VALUE
from ..data import TargetSpec
from ..errors import AttackInvariantError, ParameterError, ShapeError
from ..utils import make_rng


@dataclass(frozen=True, eq=False)
class FakeUserBlock:
    """Continuous fake interaction rows with pinned columns."""

    rows: np.ndarray
    forced_items: tuple[int, ...]
    budget_per_user: int

    def __post_init__(self) -> None:
        """Check the box and pin constraints."""
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise ShapeError("A fake block needs at least one row.")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "forced_items", tuple(sorted(set(self.forced_items))))
        self.check()

    @property
    def n_fake(self) -> int:
        """Return the number of fake users."""
        return int(self.rows.shape[0])

    @property
    def n_items(self) -> int:
        """Return the size of the item space."""
        return int(self.rows.shape[1])

    def check(self) -> None:
        """Raise if an entry leaves [0, 1] or a forced column is not 1."""
        if np.any(self.rows < 0.0) or np.any(self.rows > 1.0):
            raise AttackInvariantError("Fake block entries left [0, 1].")
        forced = list(self.forced_items)
        if forced and not np.all(self.rows[:, forced] == 1.0):
            raise AttackInvariantError("A forced column is not pinned to 1.")

    def free_mask(self) -> np.ndarray:
        """Return the boolean mask of optimizable coordinates."""
        mask = np.ones(self.rows.shape, dtype=bool)
        mask[:, list(self.forced_items)] = False
        return mask


def project(rows: np.ndarray, forced_items: Sequence[int]) -> np.ndarray:
    """Clip to [0, 1] and pin the forced columns to 1."""
    out = np.clip(rows, 0.0, 1.0)
    out[:, list(forced_items)] = 1.0
    return out


def pgd_step(block: FakeUserBlock, grad: np.ndarray, eta: float) -> FakeUserBlock:
    """Take one projected descent step.

    Raises:
        ShapeError: If the gradient does not match the block.

    """
    if grad.shape != block.rows.shape:
        raise ShapeError(f"Gradient shape {grad.shape} != block shape {block.rows.shape}.")
    rows = project(block.rows - eta * grad, block.forced_items)
    return FakeUserBlock(rows, block.forced_items, block.budget_per_user)


def seed_block(
    forced: Sequence[int],
    n_fake: int,
    budget: int,
    popularity: np.ndarray,
    rng: np.random.Generator,
) -> FakeUserBlock:
    """Pin the forced items and fill each row with popularity-drawn extra items.

    Raises:
        ParameterError: If the budget cannot hold the forced items or exceeds |I|.

    """
    item_count = int(np.asarray(popularity).size)
    forced = sorted(set(int(i) for i in forced))
    if n_fake < 1:
        raise ParameterError("At least one fake user is needed.")
    if budget < len(forced):
        raise ParameterError(f"Budget {budget} cannot hold {len(forced)} forced items.")
    if budget > item_count:
        raise ParameterError(f"Budget {budget} exceeds the {item_count} items.")
    pool = np.setdiff1d(np.arange(item_count), forced)
    extra = budget - len(forced)
    weights = np.asarray(popularity, dtype=np.float64)[pool].clip(min=0.0)
    if np.count_nonzero(weights) < extra:
        weights = weights + 1.0
    probs = weights / weights.sum() if pool.size else weights
    rows = np.zeros((n_fake, item_count))
    rows[:, forced] = 1.0
    for row in rows:
        if extra:
            row[rng.choice(pool, size=extra, replace=False, p=probs)] = POISON_INIT_VALUE
    return FakeUserBlock(rows, tuple(forced), budget)


def init_poison(
    targets: TargetSpec,
    trigger: int | None,
    n_fake: int,
    budget: int,
    item_count: int,
    popularity: np.ndarray,
    seed: int,
) -> FakeUserBlock:
    """Seed fake rows in which the target and trigger always co-occur.

    Without a trigger only the target is pinned.
    """
    if np.asarray(popularity).size != item_count:
        raise ShapeError("Popularity vector length must equal the item count.")
    forced = [targets.target_item] if trigger is None else [targets.target_item, trigger]
    return seed_block(forced, n_fake, budget, popularity, make_rng(seed, 3))


def discretize(block: FakeUserBlock) -> list[list[int]]:
    """Keep the budget largest entries of every row, forced items first.

    Ties at the budget boundary keep the lower item index.
    """
    forced = np.zeros(block.n_items, dtype=bool)
    forced[list(block.forced_items)] = True
    index = np.arange(block.n_items)
    profiles = []
    for row in block.rows:
        order = np.lexsort((index, -row, ~forced))
        profiles.append(sorted(order[: block.budget_per_user].tolist()))
    return profiles
