"""Trigger selection, poison optimization and baselines."""
from __future__ import annotations

from .config import AttackConfig, fake_user_count
from .indirectad import (
    AttackResult,
    TraceRecord,
    run_indirectad,
    run_injection_baseline,
    run_poisoning,
    run_random_shilling,
)
from .losses import (
    composite_loss,
    kth_competitors,
    promotion_loss,
    promotion_loss_and_grad,
)
from .poison import (
    FakeUserBlock,
    discretize,
    init_poison,
    pgd_step,
    project,
    seed_block,
)
from .surrogate import WRMFSurrogate, fake_block_gradient, surrogate_loss
from .trigger import (
    TriggerScore,
    candidate_pool,
    popularity_trigger,
    rank_positions,
    score_triggers,
    select_trigger,
    trigger_delta_loss,
)
