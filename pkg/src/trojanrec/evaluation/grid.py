"""Experiment grids over ratios, methods, victims, buckets, modes and seeds."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Any

from tqdm import tqdm

from ..attack import AttackConfig, run_poisoning
from ..const import (
    COUNTER_CELLS,
    COUNTER_CELLS_FAILED,
    DEFAULT_K_LIST,
    DEFAULT_N_CLUSTERS,
)
from ..data import InteractionDataset, select_targets
from ..errors import ConfigError, TrojanRecError
from ..models import TrainConfig
from ..utils import Counter, Method, ModelFamily, PopularityBucket, SelectionMode
from .experiment import victim_report
from .report import ExperimentReport, format_table, sort_reports

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSpec:
    """Axes of a grid and the configs shared by its cells."""

    attack: AttackConfig
    ratios: tuple[float, ...] = (0.001, 0.0005)
    methods: tuple[Method, ...] = (Method.CLEAN, Method.INJECTION, Method.INDIRECTAD)
    victims: tuple[ModelFamily, ...] = (ModelFamily.WRMF,)
    buckets: tuple[PopularityBucket, ...] = (PopularityBucket.UPPER_TORSO,)
    modes: tuple[SelectionMode, ...] = (SelectionMode.CLUSTERED,)
    seeds: tuple[int, ...] = (0,)
    k_list: tuple[int, ...] = DEFAULT_K_LIST
    train: dict[ModelFamily, TrainConfig] = field(default_factory=dict)
    dataset: str = "dataset"
    n_clusters: int = DEFAULT_N_CLUSTERS
    workers: int = 1

    def __post_init__(self) -> None:
        """Reject empty axes."""
        axes = (self.ratios, self.methods, self.victims, self.buckets, self.modes, self.seeds)
        if any(len(axis) == 0 for axis in axes) or not self.k_list:
            raise ConfigError("Every grid axis needs at least one value.")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1.")

    @property
    def size(self) -> int:
        """Return the number of cells."""
        return (
            len(self.ratios)
            * len(self.methods)
            * len(self.victims)
            * len(self.buckets)
            * len(self.modes)
            * len(self.seeds)
        )

    def train_config(self, victim: ModelFamily, seed: int) -> TrainConfig:
        """Return the victim's training config for a seed."""
        cfg = self.train.get(victim) or TrainConfig.for_family(victim)
        return cfg.with_updates(seed=seed)


@dataclass(frozen=True)
class GridResult:
    """Reports of every cell and the merged table."""

    reports: tuple[ExperimentReport, ...]
    table: str
    counter: Counter


def _failed(labels: dict[str, Any], exc: Exception) -> ExperimentReport:
    if isinstance(exc, TrojanRecError):
        _LOGGER.warning("Grid cell %s failed: %s", labels, exc)
    else:
        _LOGGER.error("Grid cell %s crashed: %s", labels, exc, exc_info=exc)
    return ExperimentReport(hr_at={}, error=f"{type(exc).__name__}: {exc}", **labels)


def _run_group(
    ds: InteractionDataset,
    spec: GridSpec,
    bucket: PopularityBucket,
    mode: SelectionMode,
    seed: int,
) -> list[ExperimentReport]:
    """Run every ratio, method and victim cell sharing one target selection."""
    base = {"dataset": spec.dataset, "bucket": bucket, "selection": mode, "seed": seed}
    cells = list(product(spec.ratios, spec.methods, spec.victims))
    try:
        targets = select_targets(ds, mode, bucket, seed, spec.n_clusters)
    except Exception as exc:  # pylint: disable=broad-except
        return [
            _failed({**base, "poisoning_ratio": r, "method": m, "victim": v}, exc)
            for r, m, v in cells
        ]

    clean: dict[ModelFamily, ExperimentReport | Exception] = {}
    if Method.CLEAN in spec.methods:
        for victim in spec.victims:
            try:
                clean[victim] = victim_report(
                    ds,
                    targets,
                    victim,
                    spec.train_config(victim, seed),
                    spec.k_list,
                    dataset=spec.dataset,
                    poisoning_ratio=0.0,
                    method=Method.CLEAN,
                    seed=seed,
                )
            except Exception as exc:  # pylint: disable=broad-except
                clean[victim] = exc

    reports = []
    for ratio, method in product(spec.ratios, spec.methods):
        labels = {**base, "poisoning_ratio": ratio, "method": method}
        if method is Method.CLEAN:
            for victim in spec.victims:
                outcome = clean[victim]
                if isinstance(outcome, Exception):
                    reports.append(_failed({**labels, "victim": victim}, outcome))
                else:
                    reports.append(replace(outcome, poisoning_ratio=ratio))
            continue
        try:
            attack_cfg = spec.attack.with_updates(poisoning_ratio=ratio, seed=seed)
            result = run_poisoning(method, ds, targets, attack_cfg)
        except Exception as exc:  # pylint: disable=broad-except
            reports.extend(_failed({**labels, "victim": v}, exc) for v in spec.victims)
            continue
        for victim in spec.victims:
            try:
                reports.append(
                    victim_report(
                        result.poisoned,
                        targets,
                        victim,
                        spec.train_config(victim, seed),
                        spec.k_list,
                        trigger_item=result.trigger,
                        **labels,
                    )
                )
            except Exception as exc:  # pylint: disable=broad-except
                reports.append(_failed({**labels, "victim": victim}, exc))
    return reports


def run_grid(
    ds: InteractionDataset, spec: GridSpec, progress: bool = False
) -> GridResult:
    """Run the Cartesian product of the grid axes.

    Cells sharing a bucket, mode and seed share their targets, clean victims and
    poisoned datasets, so every victim sees the same poison. Failed cells are
    reported with their error and the grid goes on.
    """
    groups = list(product(spec.buckets, spec.modes, spec.seeds))

    def _job(
        group: tuple[PopularityBucket, SelectionMode, int]
    ) -> list[ExperimentReport]:
        return _run_group(ds, spec, *group)

    with ThreadPoolExecutor(max_workers=spec.workers) as executor:
        outcomes = list(
            tqdm(
                executor.map(_job, groups),
                total=len(groups),
                desc="grid",
                disable=not progress,
            )
        )
    reports = sort_reports(rep for group in outcomes for rep in group)
    counter = Counter()
    counter.increment(COUNTER_CELLS, len(reports))
    failed = sum(rep.error is not None for rep in reports)
    counter.increment(COUNTER_CELLS_FAILED, failed)
    _LOGGER.info("Grid finished: %d cells, %d failed", counter.cells, counter.cells_failed)
    return GridResult(tuple(reports), format_table(reports, spec.k_list), counter)
