"""Hit ratios, victim experiments and grids."""
from __future__ import annotations

from .experiment import check_prefix, evaluate_attack, victim_report
from .grid import GridResult, GridSpec, run_grid
from .metrics import hit_rate_at_k, hit_rates, holdout_hit_ratio, unseen_rank
from .report import (
    ExperimentReport,
    format_table,
    reports_to_frame,
    sort_reports,
    summarize,
)
