"""The trigger-item poisoning loop and its baselines."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy import sparse

from ..data import InteractionDataset, TargetSpec, append_users
from ..errors import AttackInvariantError
from ..models import WRMFParams, fit_wrmf
from ..models.optim import make_optimizer
from ..utils import Method, TriggerSelection
from .config import AttackConfig
from .poison import FakeUserBlock, discretize, init_poison, pgd_step
from .surrogate import WRMFSurrogate
from .trigger import popularity_trigger, select_trigger

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class TraceRecord:
    """Loss values of one outer iteration."""

    iteration: int
    composite_loss: float
    target_loss: float
    trigger_loss: float
    gradient_norm: float

    def to_dict(self) -> dict[str, Any]:
        """Create a dict from the dataclass."""
        return {
            "iteration": self.iteration,
            "composite_loss": self.composite_loss,
            "target_loss": self.target_loss,
            "trigger_loss": self.trigger_loss,
            "gradient_norm": self.gradient_norm,
        }


@dataclass(frozen=True, eq=False)
class AttackResult:
    """Poisoned dataset and everything needed to audit it."""

    method: Method
    poisoned: InteractionDataset
    targets: TargetSpec
    trigger: int | None
    fake_users: tuple[int, ...]
    budget: int
    block: FakeUserBlock
    trace: tuple[TraceRecord, ...]

    @property
    def n_fake(self) -> int:
        """Return the number of injected users."""
        return len(self.fake_users)

    def summary(self) -> dict[str, Any]:
        """Return the attack summary record."""
        ids = self.poisoned.item_ids
        return {
            "method": self.method.value,
            "target_item": self.targets.target_item,
            "target_item_id": ids[self.targets.target_item],
            "trigger_item": self.trigger,
            "trigger_item_id": ids[self.trigger] if self.trigger is not None else None,
            "n_fake": self.n_fake,
            "budget": self.budget,
            "targets": self.targets.to_dict(),
        }


def check_block(block: FakeUserBlock, forced: list[int], n_fake: int) -> None:
    """Raise if the block lost a pinned item, left the box or changed size."""
    block.check()
    if block.n_fake != n_fake:
        raise AttackInvariantError(f"{block.n_fake} fake rows, expected {n_fake}.")
    if not set(forced) <= set(block.forced_items):
        raise AttackInvariantError("Target or trigger is no longer pinned.")


def check_profiles(profiles: list[list[int]], forced: list[int], budget: int) -> None:
    """Raise if a discrete profile misses a pinned item or the budget."""
    for profile in profiles:
        if len(profile) != budget or not set(forced) <= set(profile):
            raise AttackInvariantError(f"Profile {profile} breaks the budget or pins.")


def _train_substitute(
    x: sparse.csr_matrix, cfg: AttackConfig, n_real: int, items: np.ndarray | None
) -> WRMFParams:
    full = fit_wrmf(x, cfg.substitute_config(), item_init=items)
    return WRMFParams(
        full.user_factors[:n_real], full.item_factors, full.l2_weight, full.c_pos
    )


def _poison(
    ds: InteractionDataset,
    targets: TargetSpec,
    cfg: AttackConfig,
    method: Method,
) -> AttackResult:
    m = ds.matrix()
    n_fake = cfg.n_fake(ds.n_users)
    iterations = 0 if cfg.eta == 0 else cfg.t_adv
    if method is Method.INJECTION or method is Method.RANDOM_SHILLING:
        trigger, alpha = None, 1.0
        substitute = None
        if iterations:
            substitute = _train_substitute(m.csr, cfg, m.rows, None)
    elif cfg.trigger_selection is TriggerSelection.POPULARITY:
        substitute = _train_substitute(m.csr, cfg, m.rows, None)
        trigger, alpha = popularity_trigger(substitute, m, targets), cfg.alpha
    else:
        substitute = _train_substitute(m.csr, cfg, m.rows, None)
        trigger, alpha = select_trigger(substitute, m, targets, cfg), cfg.alpha
    forced = [targets.target_item] + ([trigger] if trigger is not None else [])
    budget = cfg.resolve_budget(m, len(forced))
    block = init_poison(targets, trigger, n_fake, budget, m.cols, m.col_sums, cfg.seed)
    _LOGGER.info(
        "%s: %d fake users, budget %d, target %d, trigger %s",
        method.value,
        n_fake,
        budget,
        targets.target_item,
        trigger,
    )

    trace: list[TraceRecord] = []
    optimizer = make_optimizer(cfg.step_rule, cfg.eta)
    items = substitute.item_factors if substitute is not None else None
    free = block.free_mask()
    for iteration in range(iterations):
        # real rows first, fake rows after
        x = sparse.vstack([m.csr, sparse.csr_matrix(block.rows)]).tocsr()
        substitute = _train_substitute(x, cfg, m.rows, items)
        items = substitute.item_factors
        surrogate = WRMFSurrogate(substitute, m)
        state = surrogate.evaluate(
            block.rows, targets.target_item, trigger, targets.target_users, alpha, cfg.k
        )
        grad = surrogate.gradient(state)
        optimizer.tick()
        block = pgd_step(block, optimizer.direction("rows", grad), cfg.eta)
        if cfg.check_invariants:
            check_block(block, forced, n_fake)
        record = TraceRecord(
            iteration=iteration,
            composite_loss=state.loss,
            target_loss=state.target_loss,
            trigger_loss=state.trigger_loss,
            gradient_norm=float(np.linalg.norm(grad[free])),
        )
        trace.append(record)
        _LOGGER.debug("Iteration %d: %s", iteration, record)

    profiles = discretize(block)
    if cfg.check_invariants:
        check_profiles(profiles, forced, budget)
    poisoned = append_users(ds, profiles)
    return AttackResult(
        method=method,
        poisoned=poisoned,
        targets=targets,
        trigger=trigger,
        fake_users=tuple(range(ds.n_users, poisoned.n_users)),
        budget=budget,
        block=block,
        trace=tuple(trace),
    )


def run_indirectad(
    ds: InteractionDataset, targets: TargetSpec, cfg: AttackConfig
) -> AttackResult:
    """Select a trigger, seed co-occurring fake users and optimize them.

    Every outer iteration warm-retrains the WRMF substitute on real plus current
    fake rows for t_sub sweeps, then takes one projected step on the blended loss.
    """
    method = (
        Method.POPULARITY_TRIGGER
        if cfg.trigger_selection is TriggerSelection.POPULARITY
        else Method.INDIRECTAD
    )
    return _poison(ds, targets, cfg, method)


def run_injection_baseline(
    ds: InteractionDataset, targets: TargetSpec, cfg: AttackConfig
) -> AttackResult:
    """Run the same loop with only the target pinned and alpha fixed to 1."""
    return _poison(ds, targets, cfg.with_updates(alpha=1.0), Method.INJECTION)


def run_random_shilling(
    ds: InteractionDataset, targets: TargetSpec, cfg: AttackConfig
) -> AttackResult:
    """Inject popularity-drawn profiles holding the target, without optimization."""
    unoptimized = cfg.with_updates(alpha=1.0, eta=0.0)
    return _poison(ds, targets, unoptimized, Method.RANDOM_SHILLING)


def run_poisoning(
    method: Method, ds: InteractionDataset, targets: TargetSpec, cfg: AttackConfig
) -> AttackResult:
    """Dispatch a poisoning method.

    Raises:
        ValueError: For the clean method, which injects nothing.

    """
    if method is Method.INDIRECTAD:
        return run_indirectad(
            ds, targets, cfg.with_updates(trigger_selection=TriggerSelection.OPTIMIZED)
        )
    if method is Method.POPULARITY_TRIGGER:
        return run_indirectad(
            ds, targets, cfg.with_updates(trigger_selection=TriggerSelection.POPULARITY)
        )
    if method is Method.INJECTION:
        return run_injection_baseline(ds, targets, cfg)
    if method is Method.RANDOM_SHILLING:
        return run_random_shilling(ds, targets, cfg)
    raise ValueError(f"{method.value} does not poison.")
