"""Tests for the interaction data module."""
import logging

import numpy as np
import pytest
from pytest_cases import parametrize_with_cases

from trojanrec.const import COUNTER_DUPLICATES, COUNTER_EVENTS, COUNTER_LINES
from trojanrec.data import (
    InteractionDataset,
    TargetSpec,
    append_users,
    bucket_members,
    cluster_users,
    core_filter,
    dumps_dataset,
    load_interactions,
    loads_dataset,
    popularity_buckets,
    popularity_ranking,
    read_dataset,
    select_targets,
    train_test_split,
)
from trojanrec.errors import (
    DatasetParseError,
    EmptyDatasetError,
    ParameterError,
    SelectionError,
)
from trojanrec.harness import SyntheticSpec, generate_synthetic
from trojanrec.utils import Counter, PopularityBucket, SelectionMode

from tests.test_data_cases import BucketSizes, FileLayouts, MalformedLines
from tests.test_utils import quad_lines, random_dataset

logging.basicConfig(level=logging.INFO)
_LOGGER = logging.getLogger(__name__)


def staircase(n_items):
    """Item i is consumed by n_items - i users, so counts are distinct."""
    pairs = [(u, i) for u in range(n_items) for i in range(n_items - u)]
    return InteractionDataset.from_pairs(pairs, n_items, n_items)


class testData(object):
    """Class for data tests."""

    @parametrize_with_cases("file_format, separator, line_separator", cases=FileLayouts)
    def test_load(self, tmp_path, file_format, separator, line_separator):
        """Test loading the layouts, ids in first appearance order."""
        path = tmp_path / "events.txt"
        events = [
            ("alice", "book", 5, 30),
            ("bob", "film", 1, 10),
            ("alice", "film", 3, 20),
            ("alice", "book", 4, 10),
        ]
        path.write_text(quad_lines(events, line_separator), encoding="utf-8")
        counter = Counter()
        ds = load_interactions(path, file_format, separator, counter)
        _LOGGER.warning("Loaded %s", ds)
        assert ds.user_ids == ("alice", "bob")
        assert ds.item_ids == ("book", "film")
        assert ds.pairs() == {(0, 0), (0, 1), (1, 1)}
        assert ds.timestamps.tolist() == [10, 20, 10]
        assert np.all(ds.weights == 1.0)
        assert counter.get(COUNTER_LINES) == 4
        assert counter.get(COUNTER_EVENTS) == 4
        assert counter.get(COUNTER_DUPLICATES) == 1

    @parametrize_with_cases("content, line_no", cases=MalformedLines)
    def test_load_malformed(self, tmp_path, content, line_no):
        """Test malformed lines report their line number."""
        path = tmp_path / "bad.txt"
        path.write_text(content, encoding="utf-8")
        with pytest.raises(DatasetParseError) as exc:
            load_interactions(path)
        assert exc.value.line_no == line_no

    def test_load_empty(self, tmp_path):
        """Test an empty file."""
        path = tmp_path / "empty.txt"
        path.write_text("\n\n", encoding="utf-8")
        with pytest.raises(EmptyDatasetError):
            load_interactions(path)

    def test_duplicate_events_rejected(self):
        """Test a dataset cannot hold a pair twice."""
        with pytest.raises(ParameterError):
            InteractionDataset(("u",), ("i",), [0, 0], [0, 0], [1, 2], [1.0, 1.0])

    def test_core_filter(self):
        """Test core filtering reaches a fixpoint."""
        ds = random_dataset(3, n_users=40, n_items=25, density=0.2)
        counter = Counter()
        kept = core_filter(ds, 4, 4, counter)
        assert kept.profile_lengths().min() >= 4
        assert kept.item_counts().min() >= 4
        assert core_filter(kept, 4, 4) == kept
        assert counter.users_removed == ds.n_users - kept.n_users
        assert counter.items_removed == ds.n_items - kept.n_items
        assert set(kept.user_ids) <= set(ds.user_ids)

    def test_core_filter_cascade(self):
        """Test removing an item can drop a user below the threshold."""
        pairs = [(u, i) for u in range(3) for i in range(3)] + [(3, 0), (3, 1), (3, 3)]
        ds = InteractionDataset.from_pairs(pairs, 4, 4)
        kept = core_filter(ds, 3, 2)
        assert kept.user_ids == ("u0", "u1", "u2")
        assert kept.item_ids == ("i0", "i1", "i2")

    def test_core_filter_errors(self, toy_dataset):
        """Test thresholds below one and empty results."""
        with pytest.raises(ParameterError):
            core_filter(toy_dataset, 0, 5)
        with pytest.raises(EmptyDatasetError):
            core_filter(toy_dataset, 100, 1)

    @parametrize_with_cases("n_items, sizes", cases=BucketSizes)
    def test_bucket_sizes(self, n_items, sizes):
        """Test bucket sizes follow the floored percentiles."""
        buckets = popularity_buckets(staircase(n_items))
        for bucket, size in sizes.items():
            assert len(bucket_members(buckets, bucket)) == size
        top = PopularityBucket.HEAD
        if not sizes[top]:
            top = PopularityBucket.UPPER_TORSO
        assert buckets[0] is top
        assert buckets[n_items - 1] is PopularityBucket.TAIL

    def test_popularity_ties(self):
        """Test equal counts rank by ascending index."""
        assert popularity_ranking(np.array([2, 5, 2, 5])).tolist() == [1, 3, 0, 2]

    def test_cluster_exact_blocks(self):
        """Test clustering recovers a block diagonal matrix."""
        ds = generate_synthetic(
            SyntheticSpec(n_users=30, n_items=15, n_clusters=3, p_in=1.0, p_out=0.0)
        )
        labels = cluster_users(ds.matrix(), 3, seed=5)
        assert labels.tolist() == [0] * 10 + [1] * 10 + [2] * 10

    def test_cluster_errors(self, toy_dataset):
        """Test invalid cluster counts."""
        with pytest.raises(ParameterError):
            cluster_users(toy_dataset.matrix(), 0, 0)
        with pytest.raises(ParameterError):
            cluster_users(toy_dataset.matrix(), toy_dataset.n_users + 1, 0)
        same = InteractionDataset.from_pairs([(u, 0) for u in range(5)], 5, 2)
        with pytest.raises(ParameterError):
            cluster_users(same.matrix(), 2, 0)

    def test_cluster_singletons(self):
        """Test as many clusters as distinct users puts each user alone."""
        ds = InteractionDataset.from_pairs([(u, u) for u in range(6)], 6, 6)
        labels = cluster_users(ds.matrix(), 6, seed=2)
        assert labels.tolist() == list(range(6))

    def test_cluster_deterministic(self, block_dataset):
        """Test the same seed gives the same clusters."""
        first = cluster_users(block_dataset.matrix(), 3, 7)
        assert np.array_equal(first, cluster_users(block_dataset.matrix(), 3, 7))
        assert set(first.tolist()) == {0, 1, 2}

    def test_select_clustered(self, block_dataset):
        """Test clustered targets are one cluster and the item is eligible."""
        spec = select_targets(
            block_dataset, SelectionMode.CLUSTERED, PopularityBucket.UPPER_TORSO, 4, 3
        )
        labels = cluster_users(block_dataset.matrix(), 3, 4)
        chosen = labels[spec.target_users[0]]
        assert list(spec.target_users) == np.flatnonzero(labels == chosen).tolist()
        buckets = popularity_buckets(block_dataset)
        assert buckets[spec.target_item] is PopularityBucket.UPPER_TORSO
        rows = block_dataset.matrix().dense_rows(spec.target_users)
        assert rows[:, spec.target_item].sum() < len(spec.target_users)
        assert spec == select_targets(
            block_dataset, SelectionMode.CLUSTERED, PopularityBucket.UPPER_TORSO, 4, 3
        )

    def test_select_random_third(self, block_dataset):
        """Test a random third holds floor(|U| / 3) distinct users."""
        spec = select_targets(
            block_dataset, SelectionMode.RANDOM_THIRD, PopularityBucket.LOWER_TORSO, 2
        )
        assert len(spec.target_users) == block_dataset.n_users // 3
        assert len(set(spec.target_users)) == len(spec.target_users)

    def test_select_random_third_benchmark(self):
        """Test six thousand users give two thousand targets."""
        ds = InteractionDataset.from_pairs([(u, u % 10) for u in range(6000)], 6000, 10)
        spec = select_targets(
            ds, SelectionMode.RANDOM_THIRD, PopularityBucket.UPPER_TORSO, 3
        )
        assert len(set(spec.target_users)) == 2000

    def test_select_empty_bucket(self, toy_dataset):
        """Test an empty bucket raises."""
        with pytest.raises(SelectionError):
            select_targets(
                toy_dataset, SelectionMode.RANDOM_THIRD, PopularityBucket.HEAD, 0
            )

    def test_target_spec_dict(self):
        """Test the to and from dict methods."""
        mode, bucket = SelectionMode.CLUSTERED, PopularityBucket.TAIL
        spec = TargetSpec(3, (5, 1, 2), mode, 9, bucket)
        assert spec.target_users == (1, 2, 5)
        assert TargetSpec.from_dict(spec.to_dict()) == spec

    def test_append_users(self, toy_dataset):
        """Test appended users follow the real ones and keep their events apart."""
        poisoned = append_users(toy_dataset, [[0, 3], [3, 4, 4]])
        assert poisoned.n_users == toy_dataset.n_users + 2
        assert poisoned.user_ids[-2:] == ("fake-00000", "fake-00001")
        assert poisoned.consumed(toy_dataset.n_users).tolist() == [0, 3]
        assert poisoned.consumed(toy_dataset.n_users + 1).tolist() == [3, 4]
        real = poisoned.users < toy_dataset.n_users
        assert np.array_equal(poisoned.items[real], toy_dataset.items)

    def test_train_test_split(self, toy_dataset):
        """Test the split partitions the events and keeps a train event per user."""
        train, test = train_test_split(toy_dataset, seed=3, test_fraction=0.3)
        assert train.pairs() | test.pairs() == toy_dataset.pairs()
        assert not train.pairs() & test.pairs()
        assert train.profile_lengths().min() >= 1
        again, _ = train_test_split(toy_dataset, seed=3, test_fraction=0.3)
        assert again == train

    def test_dump(self, tmp_path, toy_dataset):
        """Test the dump reads back to the same dataset."""
        path = tmp_path / "dataset.txt"
        path.write_text(dumps_dataset(toy_dataset), encoding="utf-8")
        assert read_dataset(path) == toy_dataset

    def test_dump_bad_header(self):
        """Test a dump without header is rejected at line 1."""
        with pytest.raises(DatasetParseError) as exc:
            loads_dataset("u\t0\tu0\n")
        assert exc.value.line_no == 1
