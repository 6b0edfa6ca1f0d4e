"""Dataset handling: text matrix I/O, per-class partitioning, normalization,
random-projection features, synthetic data generation, and train/test splits.

Samples are columns of an ``n x N`` matrix; labels are integers ``1..c`` with
every class present. The text matrix format is a header line ``rows cols``
followed by row-major whitespace-separated decimals (17 significant digits on
save, so doubles round-trip exactly). A labels file holds one integer per line.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class LabeledDataset:
    """Column-sample matrix plus 1-based integer class labels.

    ``per_class[l-1]`` lists the column indices of class ``l`` in their
    original order; the lists are disjoint and cover every column.
    """

    X: np.ndarray
    labels: np.ndarray
    per_class: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=int)
        if self.labels.ndim != 1 or self.labels.size != self.X.shape[1]:
            raise ValueError("labels length must equal the number of columns")
        c = int(self.labels.max(initial=0))
        if c < 1 or self.labels.min(initial=1) < 1:
            raise ValueError("labels must be integers in 1..c")
        if not self.per_class:
            self.per_class = [np.flatnonzero(self.labels == l) for l in range(1, c + 1)]
        for l, idx in enumerate(self.per_class, start=1):
            if idx.size == 0:
                raise ValueError(f"class {l} is empty")

    @property
    def n_features(self) -> int:
        return self.X.shape[0]

    @property
    def n_samples(self) -> int:
        return self.X.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.per_class)

    def class_matrix(self, label: int) -> np.ndarray:
        """Columns of class ``label`` (1-based), in original order."""
        return self.X[:, self.per_class[label - 1]]

    def complement_matrix(self, label: int) -> np.ndarray:
        """All columns not belonging to ``label``; empty (n x 0) when c = 1."""
        mask = np.ones(self.n_samples, dtype=bool)
        mask[self.per_class[label - 1]] = False
        return self.X[:, mask]

    def class_counts(self) -> list[int]:
        return [idx.size for idx in self.per_class]


def load_matrix(path) -> np.ndarray:
    """Read a dense matrix from the text format ``rows cols`` + values."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: header must be two integers 'rows cols'")
        try:
            rows, cols = int(header[0]), int(header[1])
        except ValueError:
            raise ValueError(f"{path}: non-integer dimensions in header {header!r}") from None
        if rows <= 0 or cols <= 0:
            raise ValueError(f"{path}: dimensions must be positive, got {rows}x{cols}")
        tokens = fh.read().split()
    if len(tokens) != rows * cols:
        raise ValueError(
            f"{path}: expected {rows * cols} values for a {rows}x{cols} matrix, found {len(tokens)}"
        )
    try:
        values = np.array([float(t) for t in tokens], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric token ({exc})") from None
    return values.reshape(rows, cols)


def save_matrix(path, M: np.ndarray) -> None:
    """Write a matrix in the text format, one row per line, 17 significant digits."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError("save_matrix expects a 2-D array")
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{M.shape[0]} {M.shape[1]}\n")
        for row in M:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def load_labels(path) -> np.ndarray:
    """Read a labels file: one integer per line."""
    with open(path, "r", encoding="ascii") as fh:
        tokens = fh.read().split()
    try:
        labels = np.array([int(t) for t in tokens], dtype=int)
    except ValueError as exc:
        raise ValueError(f"{path}: non-integer label ({exc})") from None
    return labels


def save_labels(path, labels: np.ndarray) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for l in np.asarray(labels, dtype=int):
            fh.write(f"{l}\n")


def normalize_unit_l2(X: np.ndarray) -> np.ndarray:
    """Scale every column to unit Euclidean norm; directions unchanged."""
    norms = np.linalg.norm(X, axis=0)
    bad = np.flatnonzero(norms < 1e-12)
    if bad.size:
        raise ValueError(f"column {bad[0]} has near-zero norm ({norms[bad[0]]:.3e})")
    return X / norms


def random_projection_features(X: np.ndarray, d: int, seed: int) -> np.ndarray:
    """Project samples with a seeded Gaussian matrix whose rows have unit norm.

    The projection R is d x n with N(0, 1) entries from ``default_rng(seed)``,
    each row scaled to unit Euclidean norm; the result is R @ X.
    """
    if d < 1:
        raise ValueError("target dimension d must be >= 1")
    if X.size == 0:
        raise ValueError("X must be nonempty")
    rng = np.random.default_rng(seed)
    R = rng.standard_normal((d, X.shape[0]))
    R /= np.linalg.norm(R, axis=1, keepdims=True)
    return R @ X


def partition_by_class(X: np.ndarray, labels: np.ndarray) -> LabeledDataset:
    """Group columns by class label, preserving within-class column order."""
    labels = np.asarray(labels, dtype=int)
    if labels.ndim != 1 or labels.size != X.shape[1]:
        raise ValueError("labels length must equal the number of columns")
    c = int(labels.max(initial=0))
    if labels.min(initial=1) < 1:
        raise ValueError(f"labels must lie in 1..c, got {labels.min()}")
    for l in range(1, c + 1):
        if not np.any(labels == l):
            raise ValueError(f"class {l} is empty")
    return LabeledDataset(X=X, labels=labels)


def make_synthetic(
    c: int,
    n: int,
    per_class: int,
    noise_sigma: float,
    corrupt_frac: float,
    seed: int,
) -> LabeledDataset:
    """Generate a separable synthetic dataset with optional entry corruption.

    Class means are seeded nonnegative unit vectors on disjoint coordinate
    supports (hence exactly orthogonal), scaled by ``5*noise_sigma + 1`` so the
    pairwise margin grows with the noise level. Samples are mean + Gaussian
    noise; then ``round(corrupt_frac * n * N)`` entries, chosen without
    replacement, are replaced by uniform outliers in [-3, 3].
    """
    if c < 2:
        raise ValueError("need at least 2 classes")
    if n < c:
        raise ValueError("feature dimension must be >= number of classes")
    if per_class < 2:
        raise ValueError("need at least 2 samples per class")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")
    if not 0.0 <= corrupt_frac <= 1.0:
        raise ValueError("corrupt_frac must lie in [0, 1]")

    rng = np.random.default_rng(seed)
    means = np.zeros((n, c))
    supports = np.array_split(rng.permutation(n), c)
    for l in range(c):
        v = np.abs(rng.standard_normal(supports[l].size)) + 0.1
        means[supports[l], l] = v / np.linalg.norm(v)
    means *= 5.0 * noise_sigma + 1.0

    blocks = []
    labels = np.repeat(np.arange(1, c + 1), per_class)
    for l in range(c):
        blocks.append(means[:, [l]] + noise_sigma * rng.standard_normal((n, per_class)))
    X = np.concatenate(blocks, axis=1)

    n_corrupt = int(round(corrupt_frac * X.size))
    if n_corrupt:
        idx = rng.choice(X.size, size=n_corrupt, replace=False)
        X.flat[idx] = rng.uniform(-3.0, 3.0, size=n_corrupt)
    return LabeledDataset(X=X, labels=labels)


def split(ds: LabeledDataset, train_per_class: int, seed: int) -> tuple[LabeledDataset, LabeledDataset]:
    """Seeded per-class split into train (exactly ``train_per_class`` columns) and test."""
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for l, cols in enumerate(ds.per_class, start=1):
        if train_per_class >= cols.size:
            raise ValueError(
                f"train_per_class={train_per_class} leaves no test samples for class {l} (N_l={cols.size})"
            )
        perm = rng.permutation(cols.size)
        train_idx.extend(sorted(cols[perm[:train_per_class]].tolist()))
        test_idx.extend(sorted(cols[perm[train_per_class:]].tolist()))
    train_idx = np.array(train_idx, dtype=int)
    test_idx = np.array(test_idx, dtype=int)
    train = LabeledDataset(X=ds.X[:, train_idx], labels=ds.labels[train_idx])
    test = LabeledDataset(X=ds.X[:, test_idx], labels=ds.labels[test_idx])
    return train, test
