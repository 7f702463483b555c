"""Attack configuration."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any

import numpy as np

from ..const import (
    DEFAULT_ALPHA,
    DEFAULT_CANDIDATE_CAP,
    DEFAULT_ETA,
    DEFAULT_T_ADV,
    DEFAULT_T_SUB,
    DEFAULT_TOP_K,
    DEFAULT_TRIGGER_BATCH,
)
from ..data import InteractionMatrix
from ..errors import ParameterError
from ..models import TrainConfig
from ..utils import ModelFamily, Optimizer, TriggerSelection


def fake_user_count(poisoning_ratio: float, n_users: int) -> int:
    """Return max(1, round(ratio * n_users)) with halves rounded up."""
    return max(1, math.floor(poisoning_ratio * n_users + 0.5))


def _default_substitute() -> TrainConfig:
    return TrainConfig.for_family(ModelFamily.WRMF)


@dataclass(frozen=True)
class AttackConfig:
    """Every knob of the poisoning loop.

    step_rule turns the raw gradient into the PGD direction: sgd (the default)
    steps by eta times the gradient, adam steps by eta times bias-corrected
    moment ratios, which makes eta a per-coordinate step length.
    """

    poisoning_ratio: float
    alpha: float = DEFAULT_ALPHA
    eta: float = DEFAULT_ETA
    t_adv: int = DEFAULT_T_ADV
    t_sub: int = DEFAULT_T_SUB
    budget_per_user: int | None = None
    candidate_cap: int = DEFAULT_CANDIDATE_CAP
    seed: int = 0
    k: int = DEFAULT_TOP_K
    trigger_batch_size: int = DEFAULT_TRIGGER_BATCH
    workers: int = 1
    step_rule: Optimizer = Optimizer.SGD
    trigger_selection: TriggerSelection = TriggerSelection.OPTIMIZED
    check_invariants: bool = True
    substitute: TrainConfig = field(default_factory=_default_substitute)

    def __post_init__(self) -> None:
        """Validate the ranges."""
        if not 0 < self.poisoning_ratio < 1:
            raise ParameterError("poisoning_ratio must lie in (0, 1).")
        if not 0 <= self.alpha <= 1:
            raise ParameterError("alpha must lie in [0, 1].")
        if self.eta < 0:
            raise ParameterError("eta must be non-negative.")
        if self.t_adv < 1 or self.t_sub < 1:
            raise ParameterError("t_adv and t_sub must be at least 1.")
        if self.candidate_cap < 1 or self.trigger_batch_size < 1 or self.k < 1:
            raise ParameterError("candidate_cap, trigger_batch_size and k must be positive.")
        if self.workers < 1:
            raise ParameterError("workers must be at least 1.")
        if self.budget_per_user is not None and self.budget_per_user < 1:
            raise ParameterError("budget_per_user must be positive.")

    def n_fake(self, n_users: int) -> int:
        """Return the number of fake users for a real population."""
        return fake_user_count(self.poisoning_ratio, n_users)

    def resolve_budget(self, m: InteractionMatrix, n_forced: int) -> int:
        """Return the explicit budget, or the rounded mean real profile length."""
        if self.budget_per_user is not None:
            return self.budget_per_user
        mean = float(np.mean(m.row_sums)) if m.rows else 0.0
        return min(max(math.floor(mean + 0.5), n_forced), m.cols)

    def substitute_config(self) -> TrainConfig:
        """Return the substitute training config for one inner retraining."""
        return self.substitute.with_updates(epochs=self.t_sub, seed=self.seed)

    def with_updates(self, **changes: Any) -> AttackConfig:
        """Return a copy with some fields changed."""
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        """Create a dict from the dataclass."""
        out = asdict(self)
        out["step_rule"] = self.step_rule.value
        out["trigger_selection"] = self.trigger_selection.value
        out["substitute"] = self.substitute.to_dict()
        return out

    @classmethod
    def from_dict(cls, cfg: dict[str, Any]) -> AttackConfig:
        """Create an AttackConfig from a dict."""
        known = {f.name for f in fields(cls)}
        values = {key: value for key, value in cfg.items() if key in known}
        if "step_rule" in values:
            values["step_rule"] = Optimizer(values["step_rule"])
        if "trigger_selection" in values:
            values["trigger_selection"] = TriggerSelection(values["trigger_selection"])
        if "substitute" in values:
            values["substitute"] = TrainConfig.for_family(
                ModelFamily.WRMF, **values["substitute"]
            )
        return cls(**values)
