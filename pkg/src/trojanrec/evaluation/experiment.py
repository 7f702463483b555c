"""Clean versus attacked victim experiments."""
from __future__ import annotations

import logging
import time
from typing import Any, Sequence

from ..const import DEFAULT_K_LIST
from ..data import InteractionDataset, TargetSpec
from ..errors import ParameterError
from ..models import TrainConfig, train_model
from ..utils import Method, ModelFamily
from .metrics import hit_rates
from .report import ExperimentReport

_LOGGER = logging.getLogger(__name__)


def check_prefix(clean_ds: InteractionDataset, poisoned_ds: InteractionDataset) -> None:
    """Raise unless the poisoned dataset extends the clean one with appended users.

    Raises:
        ParameterError: If items differ, users were not appended, or real events changed.

    """
    n = clean_ds.n_users
    if poisoned_ds.item_ids != clean_ds.item_ids:
        raise ParameterError("Clean and poisoned datasets differ in items.")
    if poisoned_ds.user_ids[:n] != clean_ds.user_ids:
        raise ParameterError("The poisoned dataset does not start with the clean users.")
    real = poisoned_ds.users < n
    if not clean_ds.pairs() == set(
        zip(poisoned_ds.users[real].tolist(), poisoned_ds.items[real].tolist())
    ):
        raise ParameterError("Real users' events differ between the datasets.")


def victim_report(
    ds: InteractionDataset,
    targets: TargetSpec,
    victim: ModelFamily,
    cfg: TrainConfig,
    k_list: Sequence[int],
    **labels: Any,
) -> ExperimentReport:
    """Train a victim from scratch on ds and report HR over the target users."""
    start = time.perf_counter()
    m = ds.matrix()
    params = train_model(victim, m, cfg)
    hr = hit_rates(params, m, targets.target_item, targets.target_users, k_list)
    fields: dict[str, Any] = {
        "bucket": targets.bucket,
        "selection": targets.selection_mode,
        "target_item": targets.target_item,
    }
    fields.update(labels)
    return ExperimentReport(
        victim=victim,
        hr_at=hr,
        runtime_seconds=time.perf_counter() - start,
        **fields,
    )


def evaluate_attack(
    clean_ds: InteractionDataset,
    poisoned_ds: InteractionDataset,
    targets: TargetSpec,
    victim: ModelFamily,
    cfg: TrainConfig,
    k_list: Sequence[int] = DEFAULT_K_LIST,
    dataset: str = "dataset",
    method: Method = Method.INDIRECTAD,
    poisoning_ratio: float = 0.0,
    trigger_item: int | None = None,
) -> tuple[ExperimentReport, ExperimentReport]:
    """Train the victim on the clean and on the poisoned data with the same seed.

    Returns:
        The clean report and the attacked report, over the target users.

    """
    check_prefix(clean_ds, poisoned_ds)
    labels = {"dataset": dataset, "poisoning_ratio": poisoning_ratio, "seed": cfg.seed}
    clean = victim_report(
        clean_ds, targets, victim, cfg, k_list, method=Method.CLEAN, **labels
    )
    attacked = victim_report(
        poisoned_ds,
        targets,
        victim,
        cfg,
        k_list,
        method=method,
        trigger_item=trigger_item,
        **labels,
    )
    _LOGGER.info(
        "%s on %s: clean %s, %s %s",
        victim.value,
        dataset,
        clean.hr_at,
        method.value,
        attacked.hr_at,
    )
    return clean, attacked
