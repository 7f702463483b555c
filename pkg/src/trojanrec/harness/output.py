"""Files written under the output directory of a run."""
from __future__ import annotations

import json
import logging
import os
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any, Iterable, Sequence

from Crypto.Hash import SHA256

from ..const import FILE_MANIFEST
from ..data import InteractionDataset
from ..errors import ConfigError
from ..utils import UserLabel, atomic_write

_LOGGER = logging.getLogger(__name__)

VERSIONED_PACKAGES = ("trojanrec", "numpy", "scipy", "scikit-learn", "pandas")


def canonical_json(obj: Any) -> str:
    """Return obj as JSON with sorted keys and no whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(cfg: dict[str, Any]) -> str:
    """Return the SHA-256 hex digest of the canonical JSON of a config."""
    return SHA256.new(canonical_json(cfg).encode("utf-8")).hexdigest()


def package_versions(packages: Sequence[str] = VERSIONED_PACKAGES) -> dict[str, str]:
    """Return the installed version of every package, or unknown."""
    versions = {}
    for name in packages:
        try:
            versions[name] = version(name)
        except PackageNotFoundError:  # pragma: no cover
            versions[name] = "unknown"
    return versions


def write_json(path: str | os.PathLike[str], obj: Any) -> Path:
    """Write one indented JSON document."""
    return atomic_write(path, json.dumps(obj, sort_keys=True, indent=2) + "\n")


def read_json(path: str | os.PathLike[str]) -> Any:
    """Read one JSON document."""
    with open(path, encoding="utf-8") as stream:
        return json.load(stream)


def write_jsonl(
    path: str | os.PathLike[str], records: Iterable[dict[str, Any]]
) -> Path:
    """Write one JSON object per line."""
    return atomic_write(path, "".join(canonical_json(rec) + "\n" for rec in records))


def read_jsonl(path: str | os.PathLike[str]) -> list[dict[str, Any]]:
    """Read the objects of a JSON lines file."""
    with open(path, encoding="utf-8") as stream:
        return [json.loads(line) for line in stream if line.strip()]


def write_labels(
    path: str | os.PathLike[str], ds: InteractionDataset, n_real: int
) -> Path:
    """Write the genuine or fake label of every user; users from n_real on are fake."""
    lines = [
        f"{index}\t{uid}\t"
        f"{(UserLabel.GENUINE if index < n_real else UserLabel.FAKE).value}\n"
        for index, uid in enumerate(ds.user_ids)
    ]
    return atomic_write(path, "".join(lines))


def read_labels(path: str | os.PathLike[str]) -> list[UserLabel]:
    """Read the labels written by write_labels, in user index order.

    Raises:
        ConfigError: If a line is malformed or the indices are not 0..n-1.

    """
    labels = []
    with open(path, encoding="utf-8") as stream:
        for line_no, line in enumerate(stream, start=1):
            if not line.strip():
                continue
            fields = line.rstrip("\n").split("\t")
            try:
                index, label = int(fields[0]), UserLabel(fields[2])
            except (IndexError, ValueError) as exc:
                raise ConfigError(f"{path}:{line_no}: malformed label line.") from exc
            if index != len(labels):
                msg = f"{path}:{line_no}: expected user index {len(labels)}."
                raise ConfigError(msg)
            labels.append(label)
    return labels


def write_manifest(
    out_dir: str | os.PathLike[str],
    command: str,
    argv: Sequence[str],
    cfg: dict[str, Any],
    **extra: Any,
) -> Path:
    """Write the command, config, config hash, seed and versions of a run."""
    manifest = {
        "command": command,
        "argv": list(argv),
        "config": cfg,
        "config_hash": config_hash(cfg),
        "seed": cfg.get("seed"),
        "workers": cfg.get("workers"),
        "versions": package_versions(),
    }
    manifest.update(extra)
    path = write_json(Path(out_dir) / FILE_MANIFEST, manifest)
    _LOGGER.debug("Wrote manifest %s with hash %s", path, manifest["config_hash"])
    return path
