"""Tests for configs, synthetic data and the command line harness."""
import json
import logging
import re
from pathlib import Path

import numpy as np
import pytest
from pytest_cases import parametrize_with_cases

from trojanrec.const import (
    FILE_ATTACK,
    FILE_DATASET,
    FILE_DETECTION,
    FILE_DETECTION_SUMMARY,
    FILE_LABELS,
    FILE_MANIFEST,
    FILE_POISONED,
    FILE_REPORTS,
    FILE_TABLE,
    FILE_TIMINGS,
    FILE_TRACE,
)
from trojanrec.data import read_dataset
from trojanrec.errors import ConfigError
from trojanrec.harness import cli as harness_cli
from trojanrec.harness import (
    RunConfig,
    SyntheticSpec,
    config_hash,
    generate_synthetic,
    load_config,
    main,
    read_labels,
    write_labels,
)
from trojanrec.utils import Method, ModelFamily, SelectionMode, UserLabel

from tests.test_harness_cases import BadRunConfigs, BadSyntheticSpecs
from tests.test_utils import quad_lines

logging.basicConfig(level=logging.INFO)
_LOGGER = logging.getLogger(__name__)

SMALL_RUN = {
    "seed": 0,
    "dataset": {
        "synthetic": {
            "n_users": 60,
            "n_items": 30,
            "n_clusters": 3,
            "p_in": 0.4,
            "p_out": 0.03,
            "seed": 1,
        }
    },
    "targets": {"mode": "clustered", "bucket": "upper_torso", "n_clusters": 3},
    "train": {"wrmf": {"latent_dim": 3, "epochs": 5}},
    "attack": {
        "poisoning_ratio": 0.05,
        "t_adv": 2,
        "t_sub": 2,
        "eta": 0.5,
        "k": 5,
        "substitute": {"latent_dim": 4, "epochs": 5},
    },
    "k_list": [5, 10],
    "detect": {"iterations": 5},
    "grid": {"ratios": [0.05], "methods": ["clean", "injection", "indirectad"]},
}


def write_config(directory, raw):
    """Write a run config into a directory and return its path."""
    path = Path(directory) / "run.json"
    path.write_text(json.dumps(raw), encoding="utf-8")
    return path


@pytest.fixture
def small_config(tmp_path):
    """Return the path of a small synthetic run config."""
    return write_config(tmp_path, SMALL_RUN)


def cli(*args):
    """Run the harness with string arguments."""
    return main([str(a) for a in args])


class testHarness(object):
    """Class for harness tests."""

    def test_synthetic_blocks(self):
        """Test full blocks without noise give an exact block diagonal."""
        spec = SyntheticSpec(n_users=9, n_items=6, n_clusters=3, p_in=1.0, p_out=0.0)
        ds = generate_synthetic(spec)
        blocks = {(u, i) for u in range(9) for i in range(6) if u // 3 == i // 2}
        assert ds.pairs() == blocks
        assert ds.user_ids[0] == "u0000"
        assert ds.item_ids[-1] == "i0005"
        assert spec.expected_events() == 18

    def test_synthetic_event_count(self):
        """Test the mean event count over seeds is close to its expectation."""
        base = dict(n_users=90, n_items=60, n_clusters=3, p_in=0.2, p_out=0.02)
        counts = [
            generate_synthetic(SyntheticSpec(seed=seed, **base)).n_events
            for seed in range(20)
        ]
        spec = SyntheticSpec(**base)
        users, items = spec.block_sizes()
        inside = sum(u * i for u, i in zip(users, items))
        outside = 90 * 60 - inside
        variance = inside * 0.2 * 0.8 + outside * 0.02 * 0.98
        _LOGGER.warning("Event counts: %s", counts)
        gap = abs(np.mean(counts) - spec.expected_events())
        assert gap <= 3 * np.sqrt(variance / 20)

    def test_synthetic_deterministic(self):
        """Test a seed draws one dataset and another seed another."""
        spec = SyntheticSpec(n_users=30, n_items=15, seed=4)
        assert generate_synthetic(spec) == generate_synthetic(spec)
        other = SyntheticSpec(n_users=30, n_items=15, seed=5)
        assert generate_synthetic(spec) != generate_synthetic(other)

    @parametrize_with_cases("fields", cases=BadSyntheticSpecs)
    def test_synthetic_rejects(self, fields):
        """Test specs without blocks, ordered densities or seed."""
        with pytest.raises(ConfigError):
            SyntheticSpec(**fields)

    def test_synthetic_dict(self):
        """Test the to and from dict methods."""
        spec = SyntheticSpec(n_users=30, n_items=15, seed=2)
        assert SyntheticSpec.from_dict(spec.to_dict()) == spec
        with pytest.raises(ConfigError):
            SyntheticSpec.from_dict({"n_users": 30, "density": 0.1})

    def test_load_config(self, small_config):
        """Test a config file loads every section."""
        cfg = load_config(small_config)
        assert cfg.seed == 0
        assert cfg.dataset.synthetic.n_users == 60
        assert cfg.dataset.name == "synthetic"
        assert cfg.k_list == (5, 10)
        assert cfg.output == small_config.parent / "out"
        assert cfg.train_config(ModelFamily.WRMF).latent_dim == 3
        assert cfg.attack_config().substitute.latent_dim == 4
        assert cfg.grid.methods == (Method.CLEAN, Method.INJECTION, Method.INDIRECTAD)
        spec = cfg.grid_spec()
        assert spec.seeds == (0,)
        assert spec.size == 3
        reseeded = load_config(small_config, seed=9)
        assert reseeded.train_config(ModelFamily.WRMF).seed == 9

    def test_config_dict(self, small_config):
        """Test the to and from dict methods."""
        cfg = load_config(small_config)
        assert RunConfig.from_dict(cfg.to_dict()) == cfg

    @parametrize_with_cases("raw", cases=BadRunConfigs)
    def test_config_rejects(self, tmp_path, raw):
        """Test invalid configs raise a config error."""
        with pytest.raises(ConfigError):
            load_config(write_config(tmp_path, raw))

    def test_config_file_errors(self, tmp_path):
        """Test unreadable, non JSON and non object files."""
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.json")
        broken = tmp_path / "broken.json"
        broken.write_text("{seed: 0", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(broken)
        listed = tmp_path / "list.json"
        listed.write_text("[0]", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(listed)

    def test_config_hash(self):
        """Test the hash ignores key order and follows values."""
        first = config_hash({"seed": 0, "k_list": [10, 20]})
        assert first == config_hash({"k_list": [10, 20], "seed": 0})
        assert first != config_hash({"seed": 1, "k_list": [10, 20]})
        assert len(first) == 64

    def test_labels_file(self, tmp_path, toy_dataset):
        """Test labels read back in user order and malformed files fail."""
        n_real = toy_dataset.n_users - 2
        path = write_labels(tmp_path / FILE_LABELS, toy_dataset, n_real)
        labels = read_labels(path)
        assert labels[-2:] == [UserLabel.FAKE, UserLabel.FAKE]
        assert labels.count(UserLabel.GENUINE) == toy_dataset.n_users - 2
        path.write_text("0\tu0\tgenuine\n2\tu2\tfake\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            read_labels(path)
        path.write_text("0\tu0\thonest\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            read_labels(path)

    def test_cli_usage(self, capsys):
        """Test unknown subcommands and bad flags exit with 2."""
        assert cli("bogus") == 2
        assert cli("attack", "--method", "clean") == 2
        assert "usage" in capsys.readouterr().err

    def test_cli_config_errors(self, tmp_path, capsys, monkeypatch):
        """Test missing seeds, bad configs and bad log levels exit with 1."""
        assert cli("report", "--out", tmp_path) == 1
        bad = write_config(tmp_path, {"seed": -3})
        assert cli("report", "--config", bad) == 1
        assert "trojanrec report: error:" in capsys.readouterr().err
        monkeypatch.setenv("TROJANREC_LOG", "LOUD")
        assert cli("report", "--seed", 0, "--out", tmp_path) == 1
        assert "TROJANREC_LOG" in capsys.readouterr().err

    def test_cli_unexpected_error(self, tmp_path, capsys, monkeypatch):
        """Test a crash inside a command exits with 1 and names the error."""

        def crash(args, cfg):
            raise RuntimeError("disk gremlin")

        monkeypatch.setitem(harness_cli.COMMANDS, "report", crash)
        assert cli("report", "--seed", 0, "--out", tmp_path) == 1
        err = capsys.readouterr().err
        assert "trojanrec report: unexpected RuntimeError: disk gremlin" in err

    def test_readme_modes(self):
        """Test the selection modes the readme lists are the accepted ones."""
        readme = Path(__file__).parents[1] / "README.md"
        lines = readme.read_text(encoding="utf-8").splitlines()
        line = next(text for text in lines if text.startswith("- targets:"))
        listed = re.findall(r"`(\w+)`", line.split("(")[1].split(")")[0])
        assert {SelectionMode(mode) for mode in listed} == set(SelectionMode)

    def test_cli_report_empty(self, tmp_path):
        """Test report without any stored record."""
        assert cli("report", "--seed", 0, "--out", tmp_path / "empty") == 1

    def test_cli_ingest_file(self, tmp_path, capsys):
        """Test ingesting a raw file writes the dump and counters."""
        raw = tmp_path / "events.csv"
        raw.write_text(
            quad_lines([("a", "x", 1, 5), ("b", "x", 1, 6), ("a", "y", 1, 7)], ","),
            encoding="utf-8",
        )
        cfg = write_config(tmp_path, {"seed": 0, "dataset": {"core_filter": False}})
        out = tmp_path / "out"
        args = ["--config", cfg, "--input", raw, "--format", "csv_quad", "--out", out]
        assert cli("ingest", *args) == 0
        assert "2 users, 2 items, 3 events" in capsys.readouterr().out
        ds = read_dataset(out / FILE_DATASET)
        assert ds.user_ids == ("a", "b")
        manifest = json.loads((out / FILE_MANIFEST).read_text(encoding="utf-8"))
        assert manifest["command"] == "ingest"
        assert manifest["counter"]["events"] == 3
        assert manifest["seed"] == 0
        assert manifest["config_hash"] == config_hash(manifest["config"])

    def test_cli_pipeline(self, tmp_path, small_config, capsys):
        """Test ingest, train, attack, evaluate, detect and report in one directory."""
        out = tmp_path / "run"
        common = ["--config", small_config, "--out", out]
        assert cli("ingest", *common) == 0
        assert (out / FILE_DATASET).is_file()

        assert cli("train", *common, "--holdout") == 0
        assert (out / "model-wrmf.npz").is_file()
        manifest = json.loads((out / FILE_MANIFEST).read_text(encoding="utf-8"))
        assert set(manifest["holdout_hr"]) == {"5", "10"}

        assert cli("attack", *common) == 0
        attack = json.loads((out / FILE_ATTACK).read_text(encoding="utf-8"))
        assert attack["method"] == "indirectad"
        assert attack["n_fake"] == 3
        assert attack["trigger_item"] is not None
        poisoned = read_dataset(out / FILE_POISONED)
        assert poisoned.n_users == 63
        labels = read_labels(out / FILE_LABELS)
        assert labels.count(UserLabel.FAKE) == 3
        trace = (out / FILE_TRACE).read_text(encoding="utf-8").splitlines()
        assert len(trace) == 2
        assert all(json.loads(line)["n_fake"] == 3 for line in trace)
        assert "indirectad: 3 fake users" in capsys.readouterr().out

        assert cli("evaluate", *common) == 0
        reports = (out / FILE_REPORTS).read_text(encoding="utf-8").splitlines()
        assert [json.loads(r)["method"] for r in reports] == ["clean", "indirectad"]
        assert all("runtime_seconds" not in json.loads(r) for r in reports)
        timings = (out / FILE_TIMINGS).read_text(encoding="utf-8").splitlines()
        assert all("runtime_seconds" in json.loads(t) for t in timings)
        assert (out / FILE_TABLE).read_text(encoding="utf-8").startswith("ratio,")

        assert cli("detect", *common) == 0
        rows = (out / FILE_DETECTION).read_text(encoding="utf-8").splitlines()
        assert len(rows) == 63
        assert rows[-1].endswith("\tfake")
        summary = (out / FILE_DETECTION_SUMMARY).read_text(encoding="utf-8")
        detection = json.loads(summary)
        assert 0.0 <= detection["auc"] <= 1.0

        capsys.readouterr()
        assert cli("report", *common) == 0
        printed = capsys.readouterr().out
        assert "2 reports, 0 failed" in printed
        assert "attack indirectad" in printed
        assert "detection degree_anomaly" in printed
        assert "events span 1970-01-01 00:00:00 UTC" in printed

    def test_cli_attack_baseline(self, tmp_path, small_config):
        """Test the attack flags pick the method and the ratio."""
        out = tmp_path / "run"
        args = ["--config", small_config, "--out", out]
        assert cli("attack", *args, "--method", "random_shilling", "--ratio", 0.1) == 0
        attack = json.loads((out / FILE_ATTACK).read_text(encoding="utf-8"))
        assert attack["method"] == "random_shilling"
        assert attack["trigger_item"] is None
        assert attack["n_fake"] == 6
        assert attack["poisoning_ratio"] == 0.1
        assert (out / FILE_TRACE).read_text(encoding="utf-8") == ""

    def test_cli_grid_rerun(self, tmp_path, small_config):
        """Test a grid rerun writes a byte identical table and records."""
        first, second = tmp_path / "first", tmp_path / "second"
        assert cli("grid", "--config", small_config, "--out", first) == 0
        threaded = ["--config", small_config, "--out", second, "--workers", 2]
        assert cli("grid", *threaded) == 0
        for name in (FILE_TABLE, FILE_REPORTS):
            assert (first / name).read_bytes() == (second / name).read_bytes()
        lines = (first / FILE_TABLE).read_text(encoding="utf-8").splitlines()
        assert len(lines) == 4
