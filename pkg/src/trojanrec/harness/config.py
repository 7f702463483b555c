"""Run configuration of the command line harness."""
from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from ..attack import AttackConfig
from ..const import (
    DEFAULT_DAMPING,
    DEFAULT_ITERATIONS,
    DEFAULT_K_LIST,
    DEFAULT_MIN_ITEM,
    DEFAULT_MIN_USER,
    DEFAULT_N_CLUSTERS,
    DEFAULT_POISONING_RATIO,
)
from ..data import InteractionDataset, core_filter, load_interactions
from ..errors import ConfigError, TrojanRecError
from ..evaluation import GridSpec
from ..models import TrainConfig
from ..utils import (
    Counter,
    FileFormat,
    Method,
    ModelFamily,
    PopularityBucket,
    SeedHeuristic,
    SelectionMode,
)
from .synthetic import SyntheticSpec, generate_synthetic

_LOGGER = logging.getLogger(__name__)


def _enum_tuple(enum: Any, values: Any, section: str) -> tuple:
    if isinstance(values, str) or not isinstance(values, (list, tuple)):
        raise ConfigError(f"{section} must be a list.")
    try:
        return tuple(enum(value) for value in values)
    except ValueError as exc:
        raise ConfigError(f"Invalid value in {section}: {exc}") from exc


@dataclass(frozen=True)
class DatasetSource:
    """Where the interactions come from: a file or a synthetic spec."""

    path: Path | None = None
    file_format: FileFormat = FileFormat.TSV_QUAD
    separator: str | None = None
    synthetic: SyntheticSpec | None = None
    core_filter: bool = True
    min_user: int = DEFAULT_MIN_USER
    min_item: int = DEFAULT_MIN_ITEM
    name: str = "dataset"

    @property
    def configured(self) -> bool:
        """Return true when a path or a synthetic spec is set."""
        return self.path is not None or self.synthetic is not None

    def load(self, counter: Counter | None = None) -> InteractionDataset:
        """Load, and for files core filter, the interactions.

        Raises:
            ConfigError: If neither a path nor a synthetic spec is configured.

        """
        if self.synthetic is not None:
            return generate_synthetic(self.synthetic)
        if self.path is None:
            raise ConfigError("No dataset path or synthetic spec configured.")
        ds = load_interactions(self.path, self.file_format, self.separator, counter)
        if self.core_filter:
            ds = core_filter(ds, self.min_user, self.min_item, counter)
        return ds

    def to_dict(self) -> dict[str, Any]:
        """Create a dict from the dataclass."""
        return {
            "path": str(self.path) if self.path is not None else None,
            "format": self.file_format.name.lower(),
            "separator": self.separator,
            "synthetic": self.synthetic.to_dict() if self.synthetic else None,
            "core_filter": self.core_filter,
            "min_user": self.min_user,
            "min_item": self.min_item,
            "name": self.name,
        }

    @classmethod
    def from_dict(cls, src: dict[str, Any], base: Path | None = None) -> DatasetSource:
        """Create a DatasetSource, resolving a relative path against base."""
        if src.get("path") and src.get("synthetic"):
            raise ConfigError("Configure either a dataset path or a synthetic spec.")
        path = None
        if src.get("path"):
            path = Path(src["path"])
            if not path.is_absolute() and base is not None:
                path = base / path
            if not path.is_file():
                raise ConfigError(f"Dataset file {path} does not exist.")
        try:
            file_format = FileFormat[str(src.get("format", "tsv_quad")).upper()]
        except KeyError as exc:
            raise ConfigError(f"Unknown dataset format {src.get('format')}.") from exc
        synthetic = src.get("synthetic")
        return cls(
            path=path,
            file_format=file_format,
            separator=src.get("separator"),
            synthetic=SyntheticSpec.from_dict(synthetic) if synthetic else None,
            core_filter=bool(src.get("core_filter", True)),
            min_user=int(src.get("min_user", DEFAULT_MIN_USER)),
            min_item=int(src.get("min_item", DEFAULT_MIN_ITEM)),
            name=str(src.get("name", "synthetic" if synthetic else "dataset")),
        )


@dataclass(frozen=True)
class TargetSettings:
    """How target users and the target item are selected."""

    mode: SelectionMode = SelectionMode.CLUSTERED
    bucket: PopularityBucket = PopularityBucket.UPPER_TORSO
    n_clusters: int = DEFAULT_N_CLUSTERS

    def to_dict(self) -> dict[str, Any]:
        """Create a dict from the dataclass."""
        return {
            "mode": self.mode.value,
            "bucket": self.bucket.value,
            "n_clusters": self.n_clusters,
        }

    @classmethod
    def from_dict(cls, tgt: dict[str, Any]) -> TargetSettings:
        """Create TargetSettings from a dict."""
        try:
            return cls(
                mode=SelectionMode(tgt.get("mode", SelectionMode.CLUSTERED.value)),
                bucket=PopularityBucket(
                    tgt.get("bucket", PopularityBucket.UPPER_TORSO.value)
                ),
                n_clusters=int(tgt.get("n_clusters", DEFAULT_N_CLUSTERS)),
            )
        except ValueError as exc:
            raise ConfigError(f"Invalid targets section: {exc}") from exc


@dataclass(frozen=True)
class DetectSettings:
    """Detector heuristic and propagation settings."""

    heuristic: SeedHeuristic = SeedHeuristic.DEGREE_ANOMALY
    iterations: int = DEFAULT_ITERATIONS
    damping: float = DEFAULT_DAMPING

    def to_dict(self) -> dict[str, Any]:
        """Create a dict from the dataclass."""
        return {
            "heuristic": self.heuristic.value,
            "iterations": self.iterations,
            "damping": self.damping,
        }

    @classmethod
    def from_dict(cls, det: dict[str, Any]) -> DetectSettings:
        """Create DetectSettings from a dict."""
        try:
            return cls(
                heuristic=SeedHeuristic(
                    det.get("heuristic", SeedHeuristic.DEGREE_ANOMALY.value)
                ),
                iterations=int(det.get("iterations", DEFAULT_ITERATIONS)),
                damping=float(det.get("damping", DEFAULT_DAMPING)),
            )
        except ValueError as exc:
            raise ConfigError(f"Invalid detect section: {exc}") from exc


@dataclass(frozen=True)
class GridAxes:
    """Values swept by the grid subcommand."""

    ratios: tuple[float, ...] = (0.001, 0.0005)
    methods: tuple[Method, ...] = (Method.CLEAN, Method.INJECTION, Method.INDIRECTAD)
    victims: tuple[ModelFamily, ...] = (ModelFamily.WRMF,)
    buckets: tuple[PopularityBucket, ...] = (PopularityBucket.UPPER_TORSO,)
    modes: tuple[SelectionMode, ...] = (SelectionMode.CLUSTERED,)
    seeds: tuple[int, ...] | None = None

    def to_dict(self) -> dict[str, Any]:
        """Create a dict from the dataclass."""
        return {
            "ratios": list(self.ratios),
            "methods": [m.value for m in self.methods],
            "victims": [v.value for v in self.victims],
            "buckets": [b.value for b in self.buckets],
            "modes": [m.value for m in self.modes],
            "seeds": list(self.seeds) if self.seeds is not None else None,
        }

    @classmethod
    def from_dict(cls, grid: dict[str, Any]) -> GridAxes:
        """Create GridAxes from a dict."""
        default = cls()
        seeds = grid.get("seeds")
        return cls(
            ratios=tuple(float(r) for r in grid.get("ratios", default.ratios)),
            methods=_enum_tuple(
                Method,
                grid.get("methods", [m.value for m in default.methods]),
                "grid.methods",
            ),
            victims=_enum_tuple(
                ModelFamily,
                grid.get("victims", [v.value for v in default.victims]),
                "grid.victims",
            ),
            buckets=_enum_tuple(
                PopularityBucket,
                grid.get("buckets", [b.value for b in default.buckets]),
                "grid.buckets",
            ),
            modes=_enum_tuple(
                SelectionMode,
                grid.get("modes", [m.value for m in default.modes]),
                "grid.modes",
            ),
            seeds=tuple(int(s) for s in seeds) if seeds is not None else None,
        )


SECTIONS = (
    "seed",
    "workers",
    "dataset",
    "targets",
    "train",
    "attack",
    "k_list",
    "detect",
    "grid",
    "output",
)


@dataclass(frozen=True)
class RunConfig:
    """Everything a harness run needs, one section per module.

    The seed is mandatory and feeds every seeded step of the run: target
    selection, substitute and victim training, poison seeding and splits.
    """

    seed: int
    dataset: DatasetSource = field(default_factory=DatasetSource)
    targets: TargetSettings = field(default_factory=TargetSettings)
    train: dict[ModelFamily, dict[str, Any]] = field(default_factory=dict)
    attack: AttackConfig = field(
        default_factory=lambda: AttackConfig(poisoning_ratio=DEFAULT_POISONING_RATIO)
    )
    k_list: tuple[int, ...] = DEFAULT_K_LIST
    detect: DetectSettings = field(default_factory=DetectSettings)
    grid: GridAxes = field(default_factory=GridAxes)
    output: Path = Path("out")
    workers: int = 1

    def __post_init__(self) -> None:
        """Validate the cross-section settings."""
        self.validate_config(self.seed, self.k_list, self.workers)

    @classmethod
    def validate_config(cls, seed: Any, k_list: Any, workers: Any) -> None:
        """Validate the scalar settings of a run.

        Raises:
            ConfigError: If the seed is missing or negative, k_list is empty or
                not increasing, or workers is below 1.

        """
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError("A non-negative integer seed is required.")
        if not k_list or any(k < 1 for k in k_list):
            raise ConfigError("k_list needs positive values.")
        if list(k_list) != sorted(set(k_list)):
            raise ConfigError("k_list must be strictly increasing.")
        if workers < 1:
            raise ConfigError("workers must be at least 1.")

    def with_overrides(
        self,
        seed: int | None = None,
        workers: int | None = None,
        output: str | os.PathLike[str] | None = None,
    ) -> RunConfig:
        """Return a copy with command line overrides applied."""
        changes: dict[str, Any] = {}
        if seed is not None:
            changes["seed"] = seed
        if workers is not None:
            changes["workers"] = workers
        if output is not None:
            changes["output"] = Path(output)
        return replace(self, **changes)

    def train_config(self, family: ModelFamily) -> TrainConfig:
        """Return the training config of a victim family under the run seed."""
        overrides = dict(self.train.get(family, {}))
        overrides["seed"] = self.seed
        return TrainConfig.for_family(family, **overrides)

    def attack_config(self) -> AttackConfig:
        """Return the attack config under the run seed and worker count."""
        return self.attack.with_updates(seed=self.seed, workers=self.workers)

    def grid_spec(self) -> GridSpec:
        """Return the grid of this run; seeds default to the run seed."""
        axes = self.grid
        return GridSpec(
            attack=self.attack_config(),
            ratios=axes.ratios,
            methods=axes.methods,
            victims=axes.victims,
            buckets=axes.buckets,
            modes=axes.modes,
            seeds=axes.seeds if axes.seeds is not None else (self.seed,),
            k_list=self.k_list,
            train={family: self.train_config(family) for family in axes.victims},
            dataset=self.dataset.name,
            n_clusters=self.targets.n_clusters,
            workers=self.workers,
        )

    def to_dict(self) -> dict[str, Any]:
        """Create a dict from the dataclass."""
        return {
            "seed": self.seed,
            "workers": self.workers,
            "dataset": self.dataset.to_dict(),
            "targets": self.targets.to_dict(),
            "train": {
                family.value: dict(cfg)
                for family, cfg in sorted(
                    self.train.items(), key=lambda kv: kv[0].value
                )
            },
            "attack": self.attack.to_dict(),
            "k_list": list(self.k_list),
            "detect": self.detect.to_dict(),
            "grid": self.grid.to_dict(),
            "output": str(self.output),
        }

    @classmethod
    def from_dict(cls, cfg: dict[str, Any], base: Path | None = None) -> RunConfig:
        """Create a RunConfig from a dict, relative paths resolved against base.

        Raises:
            ConfigError: On unknown sections or any invalid value.

        """
        unknown = set(cfg) - set(SECTIONS)
        if unknown:
            raise ConfigError(f"Unknown config sections: {sorted(unknown)}.")
        try:
            train = {
                ModelFamily(name): dict(values)
                for name, values in cfg.get("train", {}).items()
            }
            attack_section = {"poisoning_ratio": DEFAULT_POISONING_RATIO}
            attack_section.update(cfg.get("attack", {}))
            output = Path(cfg.get("output", "out"))
            if not output.is_absolute() and base is not None:
                output = base / output
            run = cls(
                seed=cfg.get("seed"),  # type: ignore[arg-type]
                dataset=DatasetSource.from_dict(cfg.get("dataset", {}), base),
                targets=TargetSettings.from_dict(cfg.get("targets", {})),
                train=train,
                attack=AttackConfig.from_dict(attack_section),
                k_list=tuple(int(k) for k in cfg.get("k_list", DEFAULT_K_LIST)),
                detect=DetectSettings.from_dict(cfg.get("detect", {})),
                grid=GridAxes.from_dict(cfg.get("grid", {})),
                output=output,
                workers=int(cfg.get("workers", 1)),
            )
        except ConfigError:
            raise
        except (TrojanRecError, ValueError, TypeError, KeyError) as exc:
            raise ConfigError(f"Invalid configuration: {exc}") from exc
        for family, overrides in train.items():
            try:
                TrainConfig.for_family(family, **overrides)
            except TrojanRecError as exc:
                msg = f"Invalid train section {family.value}: {exc}"
                raise ConfigError(msg) from exc
        return run


def load_config(path: str | os.PathLike[str], seed: int | None = None) -> RunConfig:
    """Read a JSON run config; relative paths are resolved against its directory.

    A seed given here replaces the seed of the file before validation.

    Raises:
        ConfigError: If the file is unreadable, not JSON or invalid.

    """
    source = Path(path)
    try:
        with open(source, encoding="utf-8") as stream:
            raw = json.load(stream)
    except OSError as exc:
        raise ConfigError(f"Cannot read config {source}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Config {source} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"Config {source} must hold a JSON object.")
    if seed is not None:
        raw["seed"] = seed
    return RunConfig.from_dict(raw, base=source.parent)
