"""Experiment reports and their tables."""
from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import pandas as pd

from ..const import DEFAULT_K_LIST, HR_DECIMALS
from ..errors import EvaluationError
from ..utils import Method, ModelFamily, PopularityBucket, SelectionMode


@dataclass(frozen=True)
class ExperimentReport:
    """Hit ratios of one victim on one dataset variant."""

    dataset: str
    victim: ModelFamily
    poisoning_ratio: float
    method: Method
    hr_at: dict[int, float]
    bucket: PopularityBucket | None = None
    selection: SelectionMode | None = None
    seed: int = 0
    target_item: int | None = None
    trigger_item: int | None = None
    error: str | None = None
    runtime_seconds: float = field(default=0.0, compare=False)

    def __post_init__(self) -> None:
        """Check the hit ratios are percentages, non-decreasing in k."""
        hr = {int(k): float(v) for k, v in self.hr_at.items()}
        object.__setattr__(self, "hr_at", dict(sorted(hr.items())))
        values = list(self.hr_at.values())
        if any(not 0 <= v <= 100 for v in values):
            raise EvaluationError(f"Hit ratio out of [0, 100]: {self.hr_at}.")
        if any(a > b for a, b in zip(values, values[1:])):
            raise EvaluationError(f"Hit ratio decreases with k: {self.hr_at}.")

    @property
    def key(self) -> tuple:
        """Return the sort key of the report."""
        return (
            self.poisoning_ratio,
            self.dataset,
            self.victim.value,
            self.method.value,
            self.bucket.value if self.bucket else "",
            self.selection.value if self.selection else "",
            self.seed,
        )

    def to_dict(self, runtime: bool = True) -> dict[str, Any]:
        """Create a dict from the dataclass."""
        out: dict[str, Any] = {
            "dataset": self.dataset,
            "victim": self.victim.value,
            "poisoning_ratio": self.poisoning_ratio,
            "method": self.method.value,
            "hr_at": {str(k): v for k, v in self.hr_at.items()},
            "bucket": self.bucket.value if self.bucket else None,
            "selection": self.selection.value if self.selection else None,
            "seed": self.seed,
            "target_item": self.target_item,
            "trigger_item": self.trigger_item,
            "error": self.error,
        }
        if runtime:
            out["runtime_seconds"] = self.runtime_seconds
        return out

    @classmethod
    def from_dict(cls, rep: dict[str, Any]) -> ExperimentReport:
        """Create an ExperimentReport from a dict."""
        return cls(
            dataset=rep["dataset"],
            victim=ModelFamily(rep["victim"]),
            poisoning_ratio=float(rep["poisoning_ratio"]),
            method=Method(rep["method"]),
            hr_at={int(k): float(v) for k, v in rep["hr_at"].items()},
            bucket=PopularityBucket(rep["bucket"]) if rep.get("bucket") else None,
            selection=SelectionMode(rep["selection"]) if rep.get("selection") else None,
            seed=int(rep.get("seed", 0)),
            target_item=rep.get("target_item"),
            trigger_item=rep.get("trigger_item"),
            error=rep.get("error"),
            runtime_seconds=float(rep.get("runtime_seconds", 0.0)),
        )

    def to_record(self) -> str:
        """Return the deterministic JSON line of the report, runtime excluded."""
        return json.dumps(self.to_dict(runtime=False), sort_keys=True)


def sort_reports(reports: Iterable[ExperimentReport]) -> list[ExperimentReport]:
    """Return the reports in their canonical order."""
    return sorted(reports, key=lambda r: r.key)


def reports_to_frame(
    reports: Iterable[ExperimentReport], k_list: Sequence[int] = DEFAULT_K_LIST
) -> pd.DataFrame:
    """Flatten reports into one row per report with an HR column per k."""
    rows = []
    for rep in sort_reports(reports):
        row = {
            "ratio": f"{rep.poisoning_ratio:g}",
            "dataset": rep.dataset,
            "model": rep.victim.value,
            "method": rep.method.value,
            "bucket": rep.bucket.value if rep.bucket else "",
            "selection": rep.selection.value if rep.selection else "",
            "seed": rep.seed,
        }
        for k in k_list:
            row[f"hr@{k}"] = rep.hr_at.get(k)
        row["error"] = rep.error or ""
        rows.append(row)
    columns = ["ratio", "dataset", "model", "method", "bucket", "selection", "seed"]
    columns += [f"hr@{k}" for k in k_list] + ["error"]
    return pd.DataFrame(rows, columns=columns)


def format_table(
    reports: Iterable[ExperimentReport], k_list: Sequence[int] = DEFAULT_K_LIST
) -> str:
    """Render the comma-separated table with hit ratios to four decimals."""
    buffer = io.StringIO()
    reports_to_frame(reports, k_list).to_csv(
        buffer, index=False, float_format=f"%.{HR_DECIMALS}f", lineterminator="\n"
    )
    return buffer.getvalue()


def summarize(reports: Iterable[ExperimentReport], k: int) -> pd.DataFrame:
    """Return mean HR@k per victim and method over seeds and cells."""
    frame = reports_to_frame([r for r in reports if r.error is None], [k])
    if frame.empty:
        return frame
    return (
        frame.groupby(["model", "method"], sort=True)[f"hr@{k}"]
        .mean()
        .unstack("method")
        .round(HR_DECIMALS)
    )
