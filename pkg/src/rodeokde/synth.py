"""Seeded generators for the synthetic benchmark designs and noise augmentation.

All generators are deterministic per seed and use per-group derived seeds
(numpy SeedSequence spawning via ``default_rng([seed, tag, group])``) so the
output is independent of generation order. The generator family is numpy's
PCG64, which is portable and versioned.
"""

import numpy as np

from .classifier import TrainingSet

EX1_GROUPS = 10
EX1_DIMS = 30
EX1_POOL = 1000

# Group means of the two informative dimensions; groups 2..5 scatter
# around group 1 at the origin.
EX2_MEANS = {
    1: (0.0, 0.0),
    2: (0.1635, 0.2044),
    3: (-0.2452, 0.1431),
    4: (-0.2180, -0.3815),
    5: (0.3815, -0.1907),
}
EX2_STDS = (0.1, 0.2)
EX2_DIMS = 10

# "First combination" per group count used by the training-size sweep:
# the hardest overlapping sets {1..k}. Configurable via generate_ex3(groups=...).
EX3_FIRST_COMBINATION = {
    2: (1, 2),
    3: (1, 2, 3),
    4: (1, 2, 3, 4),
    5: (1, 2, 3, 4, 5),
}


def derived_rng(seed, *tags) -> np.random.Generator:
    """Seeded generator keyed by (seed, tags); seed may be an int or a tuple."""
    if isinstance(seed, (tuple, list, np.ndarray)):
        key = [int(v) for v in seed] + [int(t) for t in tags]
    else:
        key = [int(seed), *[int(t) for t in tags]]
    return np.random.default_rng(key)


def ex1_relevant_dims(group: int) -> tuple:
    """0-based relevant column indices of group y: columns y..y+5 (1-based)."""
    return tuple(range(group - 1, group + 5))


def _split(pool, n_train, n_test):
    return pool[:n_train], pool[n_train : n_train + n_test]


def generate_ex1(seed: int, n_train: int, n_test: int, pool_size: int = EX1_POOL):
    """Ten 30-dimensional groups; group y is Gaussian on columns y..y+5, uniform elsewhere."""
    if n_train < 1 or n_test < 0:
        raise ValueError("invalid sizes")
    if n_train + n_test > pool_size:
        raise ValueError(f"n_train + n_test exceeds per-group pool ({pool_size})")
    train_mats, test_X, test_y = [], [], []
    for y in range(1, EX1_GROUPS + 1):
        rng = derived_rng(seed, 1, y)
        pool = rng.uniform(0.0, 1.0, size=(pool_size, EX1_DIMS))
        for k, col in enumerate(ex1_relevant_dims(y)):
            sigma = 0.02 * (k + 1)
            pool[:, col] = rng.normal(0.5, sigma, size=pool_size)
        tr, te = _split(pool, n_train, n_test)
        train_mats.append(tr)
        test_X.append(te)
        test_y.append(np.full(te.shape[0], y))
    train = TrainingSet.from_class_list(list(zip(range(1, EX1_GROUPS + 1), train_mats)))
    return train, np.vstack(test_X), np.concatenate(test_y)


def generate_ex2(seed: int, group_subset, n_train: int, n_test: int):
    """Five-group design: dims 1-2 bivariate normal per group, dims 3-10 uniform.

    Labels are re-encoded 1..c in ascending original group order; the
    original group ids are returned alongside.
    """
    groups = sorted(set(int(g) for g in group_subset))
    if not groups:
        raise ValueError("empty group subset")
    if any(g not in EX2_MEANS for g in groups):
        raise ValueError(f"groups must be within 1..5, got {groups}")
    if n_train < 1 or n_test < 0:
        raise ValueError("invalid sizes")
    train_mats, test_X, test_y = [], [], []
    for new_label, g in enumerate(groups, start=1):
        rng = derived_rng(seed, 2, g)
        total = n_train + n_test
        pool = rng.uniform(0.0, 1.0, size=(total, EX2_DIMS))
        mu = EX2_MEANS[g]
        pool[:, 0] = rng.normal(mu[0], EX2_STDS[0], size=total)
        pool[:, 1] = rng.normal(mu[1], EX2_STDS[1], size=total)
        tr, te = _split(pool, n_train, n_test)
        train_mats.append(tr)
        test_X.append(te)
        test_y.append(np.full(te.shape[0], new_label))
    train = TrainingSet.from_class_list(list(zip(range(1, len(groups) + 1), train_mats)))
    return train, np.vstack(test_X), np.concatenate(test_y), tuple(groups)


def generate_ex3(seed: int, n_train: int, group_count: int, n_test: int = 150, groups=None):
    """Training-size sweep over the five-group design's first combination."""
    if groups is None:
        if group_count not in EX3_FIRST_COMBINATION:
            raise ValueError(f"group_count must be in 2..5, got {group_count}")
        groups = EX3_FIRST_COMBINATION[group_count]
    train, X, y, groups = generate_ex2(seed, groups, n_train, n_test)
    return train, X, y, groups


def augment_noise(X, k_noise: int, seed: int) -> np.ndarray:
    """Append k standard-normal columns; original columns are unchanged."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if k_noise < 0:
        raise ValueError("k_noise must be >= 0")
    if k_noise == 0:
        return X.copy()
    rng = derived_rng(seed, 99)
    noise = rng.normal(0.0, 1.0, size=(X.shape[0], k_noise))
    return np.hstack([X, noise])


def export_csv(path, X, y):
    """Dataset CSV: header x1..xd,label; floats at full round-trip precision."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y)
    d = X.shape[1]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join([f"x{j + 1}" for j in range(d)] + ["label"]) + "\n")
        for row, lab in zip(X, y):
            fh.write(",".join(repr(float(v)) for v in row) + f",{int(lab)}\n")
