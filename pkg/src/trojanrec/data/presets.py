"""Packaged training presets."""
from __future__ import annotations

import json
from importlib.resources import files
from typing import Any

FILE_TRAIN_PRESETS = "train_presets.json"


def _load_data(file: str) -> dict:
    """Load one of the data json files."""
    with files(__package__).joinpath(file).open("r", encoding="utf-8") as stream:
        return json.load(stream)


def _load_train_presets() -> dict[str, dict[str, Any]]:
    """Alias for loading the per-family training defaults."""
    return _load_data(FILE_TRAIN_PRESETS)
