"""Counter helper class."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

from ..const import (
    COUNTER_CELLS,
    COUNTER_CELLS_FAILED,
    COUNTER_DUPLICATES,
    COUNTER_EVENTS,
    COUNTER_ITEMS_REMOVED,
    COUNTER_LINES,
    COUNTER_USERS_REMOVED,
)


@dataclass
class Counter:
    """Class for the pipeline counters."""

    lines: int = 0
    events: int = 0
    duplicates: int = 0
    users_removed: int = 0
    items_removed: int = 0
    cells: int = 0
    cells_failed: int = 0

    def get(self, item: str) -> Optional[int]:
        """Get the right counter."""
        if item == COUNTER_LINES:
            return self.lines
        if item == COUNTER_EVENTS:
            return self.events
        if item == COUNTER_DUPLICATES:
            return self.duplicates
        if item == COUNTER_USERS_REMOVED:
            return self.users_removed
        if item == COUNTER_ITEMS_REMOVED:
            return self.items_removed
        if item == COUNTER_CELLS:
            return self.cells
        if item == COUNTER_CELLS_FAILED:
            return self.cells_failed
        return None

    def increment(self, item: str, amount: int = 1) -> None:
        """Increment the right counter."""
        if self.get(item) is None:
            raise KeyError(item)
        setattr(self, item, getattr(self, item) + amount)

    def to_dict(self) -> dict[str, int]:
        """Create a dict from the dataclass."""
        return asdict(self)
