"""Shared fixtures: the standard synthetic benchmarks and trained models.

The "standard" fixture is 3 classes in 20 dimensions, 25 samples per class at
noise 0.1 (seed 7), split 15 train / 10 test per class (seed 7), trained with
alpha=1.0, beta=0.01, lambda=1e-3, tau=1e-6, 2 atoms per class, init seed 10.
The "corrupted" variant replaces 10% of entries with uniform outliers and is
trained with init seed 4.
"""

import numpy as np
import pytest

from dictpair import Hyperparams, make_synthetic, split, train

STANDARD_HP = dict(alpha=1.0, beta=0.01, lam=1e-3, tau=1e-6, atoms_per_class=2, seed=10)
CORRUPT_HP = dict(alpha=1.0, beta=0.01, lam=1e-3, tau=1e-6, atoms_per_class=2, seed=4)


@pytest.fixture(scope="session")
def standard_split():
    ds = make_synthetic(3, 20, 25, 0.1, 0.0, 7)
    return split(ds, 15, 7)


@pytest.fixture(scope="session")
def standard_hp():
    return Hyperparams(**STANDARD_HP)


@pytest.fixture(scope="session")
def trained_standard(standard_split, standard_hp):
    train_ds, _ = standard_split
    return train(train_ds, standard_hp)


@pytest.fixture(scope="session")
def corrupt_split():
    ds = make_synthetic(3, 20, 25, 0.1, 0.1, 7)
    return split(ds, 15, 7)


@pytest.fixture(scope="session")
def corrupt_hp():
    return Hyperparams(**CORRUPT_HP)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
