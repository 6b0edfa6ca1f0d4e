"""Reference models: the reduced-mode dictionary pair (locality and
code-discrimination terms switched off) and two sanity classifiers that serve
as accuracy floors."""

import numpy as np

from .data import LabeledDataset
from .model import DictionaryPair, Hyperparams
from .solver import TrainHistory, train


def train_reduced(
    ds: LabeledDataset, hp: Hyperparams, frobenius: bool = False
) -> tuple[DictionaryPair, TrainHistory]:
    """Train with beta = lam = 0; the reconstruction-weight updates are skipped
    since W no longer enters the objective. With frobenius=True the robust
    per-sample reweighting of the synthesis fit is replaced by identity,
    reducing that term to a plain least-squares fit."""
    if hp.beta != 0.0 or hp.lam != 0.0:
        raise ValueError("reduced mode requires beta = 0 and lam = 0")
    pair, _, _, history = train(ds, hp, mode="frobenius" if frobenius else "reduced")
    return pair, history


class NearestClassMean:
    """Assign each sample to the class with the nearest Euclidean mean."""

    def __init__(self, means: np.ndarray):
        self.means = means  # n x c

    def classify(self, y: np.ndarray) -> int:
        d = np.linalg.norm(self.means - np.asarray(y, dtype=float)[:, None], axis=0)
        return int(np.argmin(d)) + 1


def nearest_class_mean(ds_train: LabeledDataset) -> NearestClassMean:
    means = np.stack(
        [ds_train.class_matrix(l).mean(axis=1) for l in range(1, ds_train.n_classes + 1)],
        axis=1,
    )
    return NearestClassMean(means)


class LeastSquaresSubspace:
    """Assign each sample to the class whose rank-k principal subspace
    reconstructs it with the smallest residual."""

    def __init__(self, bases: list[np.ndarray]):
        self.bases = bases  # per class: n x k orthonormal columns

    def classify(self, y: np.ndarray) -> int:
        y = np.asarray(y, dtype=float)
        res = [np.linalg.norm(y - B @ (B.T @ y)) for B in self.bases]
        return int(np.argmin(res)) + 1


def least_squares_subspace(ds_train: LabeledDataset, k: int) -> LeastSquaresSubspace:
    bases = []
    for l in range(1, ds_train.n_classes + 1):
        X_l = ds_train.class_matrix(l)
        if k > min(X_l.shape):
            raise ValueError(
                f"subspace rank k={k} exceeds min(n, N_l)={min(X_l.shape)} for class {l}"
            )
        U, _, _ = np.linalg.svd(X_l, full_matrices=False)
        bases.append(U[:, :k])
    return LeastSquaresSubspace(bases)
