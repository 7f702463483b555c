"""Interaction datasets and their binary matrices."""
from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import pandas as pd
from scipy import sparse

from ..const import (
    COUNTER_DUPLICATES,
    COUNTER_EVENTS,
    COUNTER_ITEMS_REMOVED,
    COUNTER_LINES,
    COUNTER_USERS_REMOVED,
    DATASET_HEADER,
    DEFAULT_MIN_ITEM,
    DEFAULT_MIN_USER,
    DEFAULT_TEST_FRACTION,
    FAKE_USER_PREFIX,
)
from ..errors import DatasetParseError, EmptyDatasetError, ParameterError, ShapeError
from ..utils import Counter, FileFormat, make_rng

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class InteractionDataset:
    """Users, items and implicit feedback events.

    Events are stored column-wise and always sorted by (user, item).
    """

    user_ids: tuple[str, ...]
    item_ids: tuple[str, ...]
    users: np.ndarray
    items: np.ndarray
    timestamps: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        """Normalise the event arrays and check the index invariants."""
        users = np.asarray(self.users, dtype=np.int64)
        items = np.asarray(self.items, dtype=np.int64)
        timestamps = np.asarray(self.timestamps, dtype=np.int64)
        weights = np.asarray(self.weights, dtype=np.float64)
        if not users.shape == items.shape == timestamps.shape == weights.shape:
            raise ShapeError("Event columns must have equal length.")
        if users.size:
            if users.min() < 0 or users.max() >= self.n_users:
                raise ParameterError("User index out of range.")
            if items.min() < 0 or items.max() >= self.n_items:
                raise ParameterError("Item index out of range.")
            if weights.min() < 0:
                raise ParameterError("Event weights must be non-negative.")
        order = np.lexsort((items, users))
        users, items = users[order], items[order]
        keys = users * max(self.n_items, 1) + items
        if keys.size and np.any(keys[1:] == keys[:-1]):
            raise ParameterError("Duplicate (user, item) events.")
        object.__setattr__(self, "users", users)
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "timestamps", timestamps[order])
        object.__setattr__(self, "weights", weights[order])
        object.__setattr__(self, "user_ids", tuple(str(u) for u in self.user_ids))
        object.__setattr__(self, "item_ids", tuple(str(i) for i in self.item_ids))

    @classmethod
    def from_pairs(
        cls,
        pairs: Iterable[tuple[int, int]],
        n_users: int,
        n_items: int,
        timestamp: int = 0,
    ) -> InteractionDataset:
        """Build a dataset with generated ids from (user, item) index pairs."""
        arr = np.array(sorted(set(pairs)), dtype=np.int64).reshape(-1, 2)
        return cls(
            user_ids=tuple(f"u{u}" for u in range(n_users)),
            item_ids=tuple(f"i{i}" for i in range(n_items)),
            users=arr[:, 0],
            items=arr[:, 1],
            timestamps=np.full(len(arr), timestamp, dtype=np.int64),
            weights=np.ones(len(arr)),
        )

    @property
    def n_users(self) -> int:
        """Return the number of users."""
        return len(self.user_ids)

    @property
    def n_items(self) -> int:
        """Return the number of items."""
        return len(self.item_ids)

    @property
    def n_events(self) -> int:
        """Return the number of events."""
        return int(self.users.size)

    def profile_lengths(self) -> np.ndarray:
        """Return the number of events per user."""
        return np.bincount(self.users, minlength=self.n_users)

    def item_counts(self) -> np.ndarray:
        """Return the number of events per item."""
        return np.bincount(self.items, minlength=self.n_items)

    def consumed(self, user: int) -> np.ndarray:
        """Return the sorted item indices a user interacted with."""
        lo, hi = np.searchsorted(self.users, [user, user + 1])
        return self.items[lo:hi]

    def pairs(self) -> set[tuple[int, int]]:
        """Return the event set as (user, item) pairs."""
        return set(zip(self.users.tolist(), self.items.tolist()))

    def max_timestamp(self) -> int:
        """Return the latest event timestamp, 0 when there are no events."""
        return int(self.timestamps.max()) if self.n_events else 0

    def matrix(self) -> InteractionMatrix:
        """Return the binary interaction matrix."""
        return InteractionMatrix.from_dataset(self)

    def __eq__(self, other: object) -> bool:
        """Compare ids and events."""
        if not isinstance(other, InteractionDataset):
            return NotImplemented
        return (
            self.user_ids == other.user_ids
            and self.item_ids == other.item_ids
            and np.array_equal(self.users, other.users)
            and np.array_equal(self.items, other.items)
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class InteractionMatrix:
    """Binary user by item matrix, stored as CSR."""

    csr: sparse.csr_matrix
    row_sums: np.ndarray = field(init=False, repr=False)
    col_sums: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        """Cache the marginals."""
        csr = sparse.csr_matrix(self.csr, dtype=np.float64)
        csr.sum_duplicates()
        csr.sort_indices()
        object.__setattr__(self, "csr", csr)
        object.__setattr__(self, "row_sums", np.asarray(csr.sum(axis=1)).ravel())
        object.__setattr__(self, "col_sums", np.asarray(csr.sum(axis=0)).ravel())

    @classmethod
    def from_dataset(cls, ds: InteractionDataset) -> InteractionMatrix:
        """Build the matrix from the events of a dataset."""
        data = np.ones(ds.n_events, dtype=np.float64)
        return cls(
            sparse.csr_matrix(
                (data, (ds.users, ds.items)), shape=(ds.n_users, ds.n_items)
            )
        )

    @property
    def rows(self) -> int:
        """Return the number of users."""
        return int(self.csr.shape[0])

    @property
    def cols(self) -> int:
        """Return the number of items."""
        return int(self.csr.shape[1])

    def consumed(self, user: int) -> np.ndarray:
        """Return the item indices of a row."""
        return self.csr.indices[self.csr.indptr[user] : self.csr.indptr[user + 1]]

    def dense_rows(self, users: Sequence[int] | np.ndarray) -> np.ndarray:
        """Return the given rows as a dense float array."""
        return self.csr[np.asarray(users, dtype=np.int64)].toarray()

    def nonzero_pairs(self) -> set[tuple[int, int]]:
        """Enumerate the non-zero cells."""
        coo = self.csr.tocoo()
        return set(zip(coo.row.tolist(), coo.col.tolist()))


def _parse_line(line: str, line_no: int, separator: str) -> tuple[str, str, int]:
    fields = line.split(separator)
    if len(fields) != 4:
        raise DatasetParseError(line_no, line, f"expected 4 fields, got {len(fields)}")
    user, item, rating, ts = (value.strip() for value in fields)
    if not user or not item:
        raise DatasetParseError(line_no, line, "empty identifier")
    try:
        float(rating)
        timestamp = int(float(ts))
    except ValueError as exc:
        raise DatasetParseError(line_no, line, "non-numeric rating or timestamp") from exc
    return user, item, timestamp


def load_interactions(
    path: str | os.PathLike[str],
    file_format: FileFormat = FileFormat.TSV_QUAD,
    separator: str | None = None,
    counter: Counter | None = None,
) -> InteractionDataset:
    """Load a user, item, rating, timestamp file as implicit feedback.

    Arguments:
        path -- file with one event per line.
        file_format -- layout of the file, selects the default separator.
        separator -- overrides the separator of the format, e.g. "::".
        counter -- optional counter for line, event and duplicate statistics.

    Returns:
        The dataset with dense indices in order of first appearance, duplicate
        pairs collapsed to their earliest timestamp and all weights set to 1.

    Raises:
        DatasetParseError: On a malformed line, carrying its line number.
        EmptyDatasetError: If the file holds no events.

    """
    sep = separator if separator is not None else file_format.value
    rows: list[tuple[str, str, int]] = []
    with open(path, encoding="utf-8") as stream:
        for line_no, raw in enumerate(stream, start=1):
            line = raw.rstrip("\r\n")
            if counter is not None:
                counter.increment(COUNTER_LINES)
            if not line.strip():
                continue
            rows.append(_parse_line(line, line_no, sep))
    if not rows:
        raise EmptyDatasetError(f"No events in {path}.")
    frame = pd.DataFrame(rows, columns=["user", "item", "timestamp"])
    user_codes, user_ids = pd.factorize(frame["user"])
    item_codes, item_ids = pd.factorize(frame["item"])
    frame["u"], frame["i"] = user_codes, item_codes
    deduped = frame.sort_values("timestamp", kind="mergesort").drop_duplicates(
        subset=["u", "i"], keep="first"
    )
    if counter is not None:
        counter.increment(COUNTER_EVENTS, len(frame))
        counter.increment(COUNTER_DUPLICATES, len(frame) - len(deduped))
    _LOGGER.info(
        "Loaded %s: %d users, %d items, %d events (%d duplicates collapsed)",
        path,
        len(user_ids),
        len(item_ids),
        len(deduped),
        len(frame) - len(deduped),
    )
    return InteractionDataset(
        user_ids=tuple(user_ids),
        item_ids=tuple(item_ids),
        users=deduped["u"].to_numpy(),
        items=deduped["i"].to_numpy(),
        timestamps=deduped["timestamp"].to_numpy(),
        weights=np.ones(len(deduped)),
    )


def subset(
    ds: InteractionDataset, keep_users: np.ndarray, keep_items: np.ndarray
) -> InteractionDataset:
    """Keep the masked users and items and re-densify the indices."""
    user_map = np.cumsum(keep_users) - 1
    item_map = np.cumsum(keep_items) - 1
    mask = keep_users[ds.users] & keep_items[ds.items]
    return InteractionDataset(
        user_ids=tuple(np.asarray(ds.user_ids, dtype=object)[keep_users]),
        item_ids=tuple(np.asarray(ds.item_ids, dtype=object)[keep_items]),
        users=user_map[ds.users[mask]],
        items=item_map[ds.items[mask]],
        timestamps=ds.timestamps[mask],
        weights=ds.weights[mask],
    )


def core_filter(
    ds: InteractionDataset,
    min_user: int = DEFAULT_MIN_USER,
    min_item: int = DEFAULT_MIN_ITEM,
    counter: Counter | None = None,
) -> InteractionDataset:
    """Remove under-threshold users and items alternately until nothing changes.

    Raises:
        ParameterError: If a threshold is below 1.
        EmptyDatasetError: If nothing survives.

    """
    if min_user < 1 or min_item < 1:
        raise ParameterError("min_user and min_item must be at least 1.")
    keep_users = np.ones(ds.n_users, dtype=bool)
    keep_items = np.ones(ds.n_items, dtype=bool)
    while True:
        mask = keep_users[ds.users] & keep_items[ds.items]
        user_counts = np.bincount(ds.users[mask], minlength=ds.n_users)
        item_counts = np.bincount(ds.items[mask], minlength=ds.n_items)
        new_users = keep_users & (user_counts >= min_user)
        new_items = keep_items & (item_counts >= min_item)
        if np.array_equal(new_users, keep_users) and np.array_equal(
            new_items, keep_items
        ):
            break
        keep_users, keep_items = new_users, new_items
    if counter is not None:
        counter.increment(COUNTER_USERS_REMOVED, int((~keep_users).sum()))
        counter.increment(COUNTER_ITEMS_REMOVED, int((~keep_items).sum()))
    if not keep_users.any() or not keep_items.any():
        raise EmptyDatasetError("Dataset is empty after core filtering.")
    _LOGGER.info(
        "Core filter (%d, %d): kept %d of %d users, %d of %d items",
        min_user,
        min_item,
        int(keep_users.sum()),
        ds.n_users,
        int(keep_items.sum()),
        ds.n_items,
    )
    return subset(ds, keep_users, keep_items)


def append_users(
    ds: InteractionDataset,
    profiles: Sequence[Sequence[int]],
    prefix: str = FAKE_USER_PREFIX,
) -> InteractionDataset:
    """Append new users after the existing ones, stamped one second after the last event."""
    taken = set(ds.user_ids)
    new_ids = []
    for number in range(len(profiles)):
        candidate = f"{prefix}-{number:05d}"
        while candidate in taken:
            candidate = f"{candidate}'"
        new_ids.append(candidate)
    users = [ds.users]
    items = [ds.items]
    for offset, profile in enumerate(profiles):
        cols = np.unique(np.asarray(profile, dtype=np.int64))
        users.append(np.full(cols.size, ds.n_users + offset, dtype=np.int64))
        items.append(cols)
    n_new = sum(len(arr) for arr in items[1:])
    stamp = ds.max_timestamp() + 1
    return InteractionDataset(
        user_ids=ds.user_ids + tuple(new_ids),
        item_ids=ds.item_ids,
        users=np.concatenate(users),
        items=np.concatenate(items),
        timestamps=np.concatenate([ds.timestamps, np.full(n_new, stamp)]),
        weights=np.concatenate([ds.weights, np.ones(n_new)]),
    )


def train_test_split(
    ds: InteractionDataset, seed: int, test_fraction: float = DEFAULT_TEST_FRACTION
) -> tuple[InteractionDataset, InteractionDataset]:
    """Hold out a seeded fraction of every user's events.

    Users with a single event keep it in the training part. Both parts share the
    id spaces of the input.
    """
    if not 0 < test_fraction < 1:
        raise ParameterError("test_fraction must lie in (0, 1).")
    rng = make_rng(seed)
    test_mask = np.zeros(ds.n_events, dtype=bool)
    starts = np.searchsorted(ds.users, np.arange(ds.n_users + 1))
    for user in range(ds.n_users):
        lo, hi = starts[user], starts[user + 1]
        n = hi - lo
        if n < 2:
            continue
        n_test = min(n - 1, max(1, math.floor(test_fraction * n + 0.5)))
        test_mask[lo + rng.choice(n, size=n_test, replace=False)] = True

    def _part(mask: np.ndarray) -> InteractionDataset:
        return InteractionDataset(
            ds.user_ids,
            ds.item_ids,
            ds.users[mask],
            ds.items[mask],
            ds.timestamps[mask],
            ds.weights[mask],
        )

    return _part(~test_mask), _part(test_mask)


def dumps_dataset(ds: InteractionDataset) -> str:
    """Render the deterministic text dump of a dataset."""
    lines = [DATASET_HEADER]
    lines.extend(f"u\t{index}\t{uid}" for index, uid in enumerate(ds.user_ids))
    lines.extend(f"i\t{index}\t{iid}" for index, iid in enumerate(ds.item_ids))
    lines.extend(
        f"e\t{u}\t{i}\t{t}\t{w!r}"
        for u, i, t, w in zip(
            ds.users.tolist(),
            ds.items.tolist(),
            ds.timestamps.tolist(),
            ds.weights.tolist(),
        )
    )
    return "\n".join(lines) + "\n"


def loads_dataset(text: str) -> InteractionDataset:
    """Parse a dump made by dumps_dataset."""
    lines = text.splitlines()
    if not lines or lines[0] != DATASET_HEADER:
        raise DatasetParseError(1, lines[0] if lines else "", "missing dump header")
    user_ids: list[str] = []
    item_ids: list[str] = []
    events: list[tuple[int, int, int, float]] = []
    for line_no, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        try:
            if fields[0] == "u" and len(fields) == 3:
                user_ids.append(fields[2])
            elif fields[0] == "i" and len(fields) == 3:
                item_ids.append(fields[2])
            elif fields[0] == "e" and len(fields) == 5:
                events.append(
                    (int(fields[1]), int(fields[2]), int(fields[3]), float(fields[4]))
                )
            else:
                raise DatasetParseError(line_no, line, "unknown record")
        except ValueError as exc:
            raise DatasetParseError(line_no, line, "non-numeric field") from exc
    arr = np.array(events, dtype=np.float64).reshape(-1, 4)
    return InteractionDataset(
        user_ids=tuple(user_ids),
        item_ids=tuple(item_ids),
        users=arr[:, 0].astype(np.int64),
        items=arr[:, 1].astype(np.int64),
        timestamps=np.array([e[2] for e in events], dtype=np.int64),
        weights=arr[:, 3],
    )


def read_dataset(path: str | os.PathLike[str]) -> InteractionDataset:
    """Read a dataset dump from disk."""
    with open(path, encoding="utf-8") as stream:
        return loads_dataset(stream.read())
