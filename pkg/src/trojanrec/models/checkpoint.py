"""Versioned model checkpoints in numpy archives."""
from __future__ import annotations

import io
import json
import logging
import os
from pathlib import Path

import numpy as np

from ..const import CHECKPOINT_VERSION
from ..errors import CheckpointError
from ..utils import ModelFamily, atomic_write
from .base import RecommenderParams, TrainConfig
from .item_ae import ItemAEParams
from .mult_vae import MultVAEParams
from .wrmf import WRMFParams

_LOGGER = logging.getLogger(__name__)

HEADER_KEY = "__header__"

PARAM_CLASSES: dict[ModelFamily, type[RecommenderParams]] = {
    ModelFamily.WRMF: WRMFParams,
    ModelFamily.ITEM_AE: ItemAEParams,
    ModelFamily.MULT_VAE: MultVAEParams,
}


def dumps_checkpoint(
    params: RecommenderParams, cfg: TrainConfig | None = None
) -> bytes:
    """Serialize params, shapes and the training config."""
    arrays = params.arrays()
    header = {
        "format_version": CHECKPOINT_VERSION,
        "family": params.family.value,
        "hyper": params.hyper(),
        "shapes": {name: list(value.shape) for name, value in arrays.items()},
        "train_config": cfg.to_dict() if cfg is not None else None,
    }
    buffer = io.BytesIO()
    meta = np.array(json.dumps(header, sort_keys=True))
    np.savez(buffer, **{HEADER_KEY: meta}, **arrays)
    return buffer.getvalue()


def save_checkpoint(
    params: RecommenderParams,
    path: str | os.PathLike[str],
    cfg: TrainConfig | None = None,
) -> Path:
    """Write a checkpoint atomically."""
    target = atomic_write(path, dumps_checkpoint(params, cfg))
    _LOGGER.info("Saved %s checkpoint to %s", params.family.value, target)
    return target


def load_checkpoint(
    path: str | os.PathLike[str],
) -> tuple[RecommenderParams, TrainConfig | None]:
    """Read a checkpoint back bit-exactly.

    Raises:
        CheckpointError: On an unknown version or family, a missing array or a shape
            mismatch.

    """
    try:
        with np.load(path, allow_pickle=False) as archive:
            header = json.loads(str(archive[HEADER_KEY]))
            names = [name for name in archive.files if name != HEADER_KEY]
            arrays = {name: archive[name] for name in names}
    except (OSError, ValueError, KeyError) as exc:
        raise CheckpointError(f"Unreadable checkpoint {path}.") from exc
    if header.get("format_version") != CHECKPOINT_VERSION:
        version = header.get("format_version")
        raise CheckpointError(f"Unsupported checkpoint version {version}.")
    try:
        cls = PARAM_CLASSES[ModelFamily(header["family"])]
    except (KeyError, ValueError) as exc:
        raise CheckpointError(f"Unknown family {header.get('family')}.") from exc
    missing = sorted(set(cls.array_names) - set(arrays))
    if missing or "shapes" not in header or "hyper" not in header:
        raise CheckpointError(f"Checkpoint {path} is incomplete, missing {missing}.")
    for name, shape in header["shapes"].items():
        if name not in arrays:
            raise CheckpointError(f"Checkpoint {path} has no array {name}.")
        if list(arrays[name].shape) != shape:
            found = arrays[name].shape
            raise CheckpointError(f"{name} has shape {found}, header says {shape}.")
    cfg = header.get("train_config")
    return (
        cls.from_arrays(arrays, header["hyper"]),
        TrainConfig.from_dict(cfg) if cfg is not None else None,
    )
