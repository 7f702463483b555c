from importlib.metadata import PackageNotFoundError, version

try:
    # Change here if project is renamed and does not equal the package name
    dist_name = __name__
    __version__ = version(dist_name)
except PackageNotFoundError:  # pragma: no cover
    __version__ = "unknown"
finally:
    del version, PackageNotFoundError

__author__ = "trojanrec contributors"
__copyright__ = "trojanrec contributors"
__license__ = "mit"

from .attack import (
    AttackConfig,
    AttackResult,
    fake_user_count,
    run_indirectad,
    run_injection_baseline,
    run_poisoning,
    run_random_shilling,
    select_trigger,
)
from .data import (
    InteractionDataset,
    InteractionMatrix,
    TargetSpec,
    core_filter,
    load_interactions,
    select_targets,
)
from .detect import auc, detect_fake_users, propagate_suspicion, seed_suspicion
from .errors import TrojanRecError
from .evaluation import ExperimentReport, evaluate_attack, hit_rate_at_k, run_grid
from .models import TrainConfig, train_model
from .utils import Method, ModelFamily, PopularityBucket, SelectionMode
