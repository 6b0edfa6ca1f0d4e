"""Class-residual classification with a trained dictionary pair.

A sample y is assigned to the class whose pair reconstructs it best:
argmin_l ||y - D_l (P_l y)||_2, computed as two small matrix-vector products
per class (never forming D_l P_l). Ties break to the lowest class index.
"""

from dataclasses import dataclass

import numpy as np

from .data import LabeledDataset
from .model import DictionaryPair


@dataclass
class EvalReport:
    accuracy: float
    confusion: np.ndarray
    per_class_accuracy: np.ndarray


def class_residuals(y: np.ndarray, model: DictionaryPair) -> np.ndarray:
    """Reconstruction residual ||y - D_l (P_l y)||_2 for every class."""
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != model.n_features:
        raise ValueError(f"sample dimension {y.shape[0]} != model dimension {model.n_features}")
    return np.array([np.linalg.norm(y - D_l @ (P_l @ y)) for D_l, P_l in zip(model.D, model.P)])


def classify_sample(y: np.ndarray, model: DictionaryPair) -> int:
    """1-based label of the minimum-residual class (first on ties)."""
    return int(np.argmin(class_residuals(y, model))) + 1


def evaluate(testset: LabeledDataset, model) -> EvalReport:
    """Confusion matrix and accuracy over a labeled test set.

    model is a DictionaryPair or any object with a classify(y) -> label method
    (the sanity baselines qualify).
    """
    predict = model.classify if hasattr(model, "classify") else lambda y: classify_sample(y, model)
    c = testset.n_classes
    confusion = np.zeros((c, c), dtype=int)
    for j in range(testset.n_samples):
        pred = predict(testset.X[:, j])
        confusion[testset.labels[j] - 1, pred - 1] += 1
    row_sums = confusion.sum(axis=1)
    accuracy = float(np.trace(confusion)) / float(testset.n_samples)
    per_class = np.diag(confusion) / row_sums
    return EvalReport(accuracy=accuracy, confusion=confusion, per_class_accuracy=per_class)
