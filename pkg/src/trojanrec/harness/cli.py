"""Command line harness: ingest, train, attack, evaluate, detect, grid and report."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Sequence

import pytz

from ..attack import run_poisoning
from ..const import (
    FILE_ATTACK,
    FILE_DATASET,
    FILE_DETECTION,
    FILE_DETECTION_SUMMARY,
    FILE_LABELS,
    FILE_POISONED,
    FILE_REPORTS,
    FILE_TABLE,
    FILE_TIMINGS,
    FILE_TRACE,
    LOG_ENV,
)
from ..data import (
    InteractionDataset,
    TargetSpec,
    dumps_dataset,
    read_dataset,
    select_targets,
    train_test_split,
)
from ..detect import detect_fake_users
from ..errors import ConfigError, TrojanRecError
from ..evaluation import (
    ExperimentReport,
    evaluate_attack,
    format_table,
    holdout_hit_ratio,
    run_grid,
    sort_reports,
    summarize,
)
from ..models import save_checkpoint, train_model
from ..utils import (
    Counter,
    FileFormat,
    Method,
    ModelFamily,
    SeedHeuristic,
    atomic_write,
)
from .config import DatasetSource, RunConfig, load_config
from .output import (
    read_json,
    read_jsonl,
    read_labels,
    write_json,
    write_jsonl,
    write_labels,
    write_manifest,
)

_LOGGER = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
POISONING_METHODS = [m.value for m in Method if m is not Method.CLEAN]
FAMILIES = [f.value for f in ModelFamily]


def setup_logging(env: dict[str, str] | os._Environ = os.environ) -> None:
    """Configure the root logger from TROJANREC_LOG, WARNING by default.

    Raises:
        ConfigError: If the variable names an unknown level.

    """
    level = env.get(LOG_ENV, "WARNING").upper()
    if level not in LOG_LEVELS:
        choices = ", ".join(LOG_LEVELS)
        raise ConfigError(f"{LOG_ENV} must be one of {choices}, got {level}.")
    logging.basicConfig(
        level=getattr(logging, level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    if args.config is not None:
        cfg = load_config(args.config, seed=args.seed)
    elif args.seed is not None:
        cfg = RunConfig(seed=args.seed)
    else:
        raise ConfigError("Pass --config with a seed, or --seed.")
    return cfg.with_overrides(workers=args.workers, output=args.out)


def _load_dataset(
    args: argparse.Namespace, cfg: RunConfig, counter: Counter | None = None
) -> InteractionDataset:
    """Return the --dataset dump, else the ingested dump, else the config source."""
    if getattr(args, "dataset", None):
        return read_dataset(args.dataset)
    ingested = cfg.output / FILE_DATASET
    if ingested.is_file():
        return read_dataset(ingested)
    return cfg.dataset.load(counter)


def _targets(ds: InteractionDataset, cfg: RunConfig) -> TargetSpec:
    tgt = cfg.targets
    return select_targets(ds, tgt.mode, tgt.bucket, cfg.seed, tgt.n_clusters)


def _labels(rep: ExperimentReport) -> dict[str, Any]:
    record = rep.to_dict(runtime=False)
    del record["hr_at"], record["error"]
    return record


def _write_reports(
    out: Path, reports: Sequence[ExperimentReport], k_list: Sequence[int]
) -> None:
    ordered = sort_reports(reports)
    write_jsonl(out / FILE_REPORTS, (rep.to_dict(runtime=False) for rep in ordered))
    write_jsonl(
        out / FILE_TIMINGS,
        ({**_labels(rep), "runtime_seconds": rep.runtime_seconds} for rep in ordered),
    )
    atomic_write(out / FILE_TABLE, format_table(ordered, k_list))


def cmd_ingest(args: argparse.Namespace, cfg: RunConfig) -> dict[str, Any]:
    """Load, filter and dump a dataset."""
    counter = Counter()
    source = cfg.dataset
    if args.input is not None:
        source = DatasetSource(
            path=Path(args.input),
            file_format=FileFormat[args.format.upper()],
            separator=args.separator,
            min_user=source.min_user,
            min_item=source.min_item,
            core_filter=source.core_filter,
            name=source.name,
        )
    ds = source.load(counter)
    atomic_write(cfg.output / FILE_DATASET, dumps_dataset(ds))
    print(f"{ds.n_users} users, {ds.n_items} items, {ds.n_events} events")
    return {
        "counter": counter.to_dict(),
        "n_users": ds.n_users,
        "n_items": ds.n_items,
        "n_events": ds.n_events,
    }


def cmd_train(args: argparse.Namespace, cfg: RunConfig) -> dict[str, Any]:
    """Train a model family and write its checkpoint."""
    family = ModelFamily(args.family)
    ds = _load_dataset(args, cfg)
    train_cfg = cfg.train_config(family)
    extra: dict[str, Any] = {"family": family.value}
    if args.holdout:
        train_ds, test_ds = train_test_split(ds, cfg.seed)
        params = train_model(family, train_ds.matrix(), train_cfg)
        extra["holdout_hr"] = {
            str(k): holdout_hit_ratio(params, train_ds.matrix(), test_ds, k)
            for k in cfg.k_list
        }
        print(f"held-out HR: {extra['holdout_hr']}")
    else:
        params = train_model(family, ds.matrix(), train_cfg)
    path = save_checkpoint(params, cfg.output / f"model-{family.value}.npz", train_cfg)
    print(f"checkpoint written to {path}")
    return extra


def cmd_attack(args: argparse.Namespace, cfg: RunConfig) -> dict[str, Any]:
    """Poison a dataset and write the poisoned dump, labels, trace and summary."""
    ds = _load_dataset(args, cfg)
    attack_cfg = cfg.attack_config()
    if args.ratio is not None:
        attack_cfg = attack_cfg.with_updates(poisoning_ratio=args.ratio)
    targets = _targets(ds, cfg)
    result = run_poisoning(Method(args.method), ds, targets, attack_cfg)
    out = cfg.output
    atomic_write(out / FILE_POISONED, dumps_dataset(result.poisoned))
    write_labels(out / FILE_LABELS, result.poisoned, ds.n_users)
    trace = ({**rec.to_dict(), "n_fake": result.n_fake} for rec in result.trace)
    write_jsonl(out / FILE_TRACE, trace)
    summary = {**result.summary(), "poisoning_ratio": attack_cfg.poisoning_ratio}
    write_json(out / FILE_ATTACK, summary)
    print(
        f"{summary['method']}: {result.n_fake} fake users, "
        f"target {summary['target_item_id']}, "
        f"trigger {summary['trigger_item_id']}"
    )
    return {"attack": summary}


def cmd_evaluate(args: argparse.Namespace, cfg: RunConfig) -> dict[str, Any]:
    """Train a victim on clean and poisoned data and report hit ratios."""
    clean_ds = _load_dataset(args, cfg)
    poisoned_path = Path(args.poisoned) if args.poisoned else cfg.output / FILE_POISONED
    poisoned_ds = read_dataset(poisoned_path)
    summary_path = poisoned_path.parent / FILE_ATTACK
    if summary_path.is_file():
        summary = read_json(summary_path)
        targets = TargetSpec.from_dict(summary["targets"])
        method = Method(summary["method"])
        ratio = float(summary["poisoning_ratio"])
        trigger = summary["trigger_item"]
    else:
        targets = _targets(clean_ds, cfg)
        method = Method(args.method)
        ratio = cfg.attack.poisoning_ratio
        trigger = None
    family = ModelFamily(args.family)
    clean, attacked = evaluate_attack(
        clean_ds,
        poisoned_ds,
        targets,
        family,
        cfg.train_config(family),
        cfg.k_list,
        dataset=cfg.dataset.name,
        method=method,
        poisoning_ratio=ratio,
        trigger_item=trigger,
    )
    _write_reports(cfg.output, [clean, attacked], cfg.k_list)
    print(format_table([clean, attacked], cfg.k_list), end="")
    return {}


def cmd_detect(args: argparse.Namespace, cfg: RunConfig) -> dict[str, Any]:
    """Score users for suspicion and the AUC against their labels."""
    if args.poisoned:
        ds = read_dataset(args.poisoned)
    elif args.dataset:
        ds = read_dataset(args.dataset)
    else:
        ds = read_dataset(cfg.output / FILE_POISONED)
    labels = read_labels(args.labels or cfg.output / FILE_LABELS)
    if len(labels) != ds.n_users:
        raise ConfigError(f"{len(labels)} labels for {ds.n_users} users.")
    settings = cfg.detect
    heuristic = SeedHeuristic(args.heuristic) if args.heuristic else settings.heuristic
    result = detect_fake_users(
        ds, labels, heuristic, settings.iterations, settings.damping
    )
    atomic_write(
        cfg.output / FILE_DETECTION,
        "".join(
            f"{uid}\t{score!r}\t{label}\n" for uid, score, label in result.records(ds)
        ),
    )
    write_json(cfg.output / FILE_DETECTION_SUMMARY, result.summary())
    print(f"AUC {result.auc:.4f} with {heuristic.value}")
    return {"detection": result.summary()}


def cmd_grid(args: argparse.Namespace, cfg: RunConfig) -> dict[str, Any]:
    """Run the experiment grid and write its table."""
    ds = _load_dataset(args, cfg)
    result = run_grid(ds, cfg.grid_spec(), progress=True)
    _write_reports(cfg.output, result.reports, cfg.k_list)
    print(result.table, end="")
    return {"counter": result.counter.to_dict()}


def _time_span(ds: InteractionDataset) -> str:
    if ds.n_events == 0:
        return "no events"
    first, last = (
        datetime.fromtimestamp(int(stamp), tz=pytz.utc).strftime("%Y-%m-%d %H:%M:%S %Z")
        for stamp in (ds.timestamps.min(), ds.timestamps.max())
    )
    return f"{first} to {last}"


def cmd_report(args: argparse.Namespace, cfg: RunConfig) -> dict[str, Any]:
    """Print a summary of the records stored in the output directory."""
    out = cfg.output
    lines = []
    reports_path = out / FILE_REPORTS
    if reports_path.is_file():
        reports = [ExperimentReport.from_dict(rec) for rec in read_jsonl(reports_path)]
        failed = sum(rep.error is not None for rep in reports)
        lines.append(f"{len(reports)} reports, {failed} failed")
        for k in cfg.k_list:
            table = summarize(reports, k)
            if not table.empty:
                lines.append(f"mean HR@{k} per victim and method:")
                lines.append(table.to_string())
    if (out / FILE_ATTACK).is_file():
        attack = read_json(out / FILE_ATTACK)
        lines.append(
            f"attack {attack['method']}: target {attack['target_item_id']}, "
            f"trigger {attack['trigger_item_id']}, {attack['n_fake']} fake users"
        )
    if (out / FILE_DETECTION_SUMMARY).is_file():
        detection = read_json(out / FILE_DETECTION_SUMMARY)
        lines.append(f"detection {detection['heuristic']}: AUC {detection['auc']:.4f}")
    if args.dataset:
        candidates = [Path(args.dataset)]
    else:
        candidates = [out / FILE_POISONED, out / FILE_DATASET]
    existing = [path for path in candidates if path.is_file()]
    if existing:
        lines.append(f"events span {_time_span(read_dataset(existing[0]))}")
    if not lines:
        raise ConfigError(f"No stored records under {out}.")
    print("\n".join(lines))
    return {}


COMMANDS: dict[str, Callable[[argparse.Namespace, RunConfig], dict[str, Any]]] = {
    "ingest": cmd_ingest,
    "train": cmd_train,
    "attack": cmd_attack,
    "evaluate": cmd_evaluate,
    "detect": cmd_detect,
    "grid": cmd_grid,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    """Create the argument parser with one subparser per command."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config")
    common.add_argument("--seed", type=int, help="override the seed of the config")
    common.add_argument("--workers", type=int, help="worker threads")
    common.add_argument("--out", help="output directory")

    parser = argparse.ArgumentParser(
        prog="trojanrec", description="Trigger-item poisoning of recommenders."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser(
        "ingest", parents=[common], help="validate and dump a dataset"
    )
    ingest.add_argument("--input", help="raw user, item, rating, timestamp file")
    ingest.add_argument(
        "--format", default="tsv_quad", choices=[f.name.lower() for f in FileFormat]
    )
    ingest.add_argument("--separator")

    train = sub.add_parser("train", parents=[common], help="train a model checkpoint")
    train.add_argument("--dataset", help="dataset dump")
    train.add_argument("--family", default=ModelFamily.WRMF.value, choices=FAMILIES)
    train.add_argument(
        "--holdout", action="store_true", help="report held-out hit ratios"
    )

    attack = sub.add_parser("attack", parents=[common], help="poison a dataset")
    attack.add_argument("--dataset", help="dataset dump")
    attack.add_argument(
        "--method", default=Method.INDIRECTAD.value, choices=POISONING_METHODS
    )
    attack.add_argument("--ratio", type=float, help="override the poisoning ratio")

    evaluate = sub.add_parser(
        "evaluate", parents=[common], help="clean versus poisoned HR"
    )
    evaluate.add_argument("--dataset", help="clean dataset dump")
    evaluate.add_argument("--poisoned", help="poisoned dataset dump")
    evaluate.add_argument("--family", default=ModelFamily.WRMF.value, choices=FAMILIES)
    evaluate.add_argument(
        "--method", default=Method.INDIRECTAD.value, choices=[m.value for m in Method]
    )

    detect = sub.add_parser(
        "detect", parents=[common], help="score users for suspicion"
    )
    detect.add_argument("--dataset", help="dataset dump")
    detect.add_argument("--poisoned", help="poisoned dataset dump")
    detect.add_argument("--labels", help="user labels file")
    detect.add_argument("--heuristic", choices=[h.value for h in SeedHeuristic])

    grid = sub.add_parser("grid", parents=[common], help="run the experiment grid")
    grid.add_argument("--dataset", help="dataset dump")

    report = sub.add_parser("report", parents=[common], help="summarize stored records")
    report.add_argument("--dataset", help="dataset dump for the event time span")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run one subcommand and return its exit code.

    Usage errors exit with 2, every other failure with 1.
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        setup_logging()
        cfg = _resolve_config(args)
        extra = COMMANDS[args.command](args, cfg)
        write_manifest(cfg.output, args.command, argv, cfg.to_dict(), **extra)
    except (TrojanRecError, OSError) as exc:
        _LOGGER.debug("Command %s failed", args.command, exc_info=True)
        print(f"trojanrec {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pylint: disable=broad-except
        _LOGGER.error("Command %s crashed", args.command, exc_info=True)
        name = type(exc).__name__
        print(f"trojanrec {args.command}: unexpected {name}: {exc}", file=sys.stderr)
        return 1
    return 0


def run() -> None:
    """Console script entry point, exits with the code of main."""
    sys.exit(main())
