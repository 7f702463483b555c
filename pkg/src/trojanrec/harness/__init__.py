"""Configuration, synthetic benchmarks and the command line harness."""
from __future__ import annotations

from .cli import build_parser, main, run
from .config import (
    DatasetSource,
    DetectSettings,
    GridAxes,
    RunConfig,
    TargetSettings,
    load_config,
)
from .output import config_hash, read_labels, write_jsonl, write_labels, write_manifest
from .synthetic import SyntheticSpec, generate_synthetic
