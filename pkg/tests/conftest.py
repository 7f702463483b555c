"""Shared fixtures for the trojanrec tests."""
import pytest

from trojanrec.attack import AttackConfig
from trojanrec.harness import SyntheticSpec, generate_synthetic
from trojanrec.utils import ModelFamily

from tests.test_utils import random_dataset, tiny_config


@pytest.fixture
def toy_dataset():
    """Return a small random dataset."""
    return random_dataset(0)


@pytest.fixture
def block_dataset():
    """Return a small planted block dataset."""
    return generate_synthetic(
        SyntheticSpec(
            n_users=60, n_items=30, n_clusters=3, p_in=0.4, p_out=0.03, seed=1
        )
    )


@pytest.fixture
def attack_config():
    """Return a fast attack config."""
    return AttackConfig(
        poisoning_ratio=0.05,
        t_adv=3,
        t_sub=3,
        eta=0.5,
        k=5,
        substitute=tiny_config(ModelFamily.WRMF, latent_dim=4),
    )
