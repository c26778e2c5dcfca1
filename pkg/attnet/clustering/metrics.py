import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.metrics import adjusted_rand_score, normalized_mutual_info_score
from sklearn.metrics.cluster import contingency_matrix, pair_confusion_matrix

from attnet.errors import ShapeError

__all__ = ["METRICS", "accuracy", "adjusted_rand", "evaluate", "nmi", "pairwise_prf"]

METRICS = ("f_score", "precision", "recall", "nmi", "ar", "acc")


def _labels(true_labels, pred_labels):
    true_labels = np.asarray(true_labels).ravel()
    pred_labels = np.asarray(pred_labels).ravel()
    if true_labels.shape != pred_labels.shape:
        raise ShapeError(
            "Label sequences differ in length ({} vs {}).".format(
                true_labels.size, pred_labels.size
            )
        )
    if true_labels.size == 0:
        raise ValueError("Label sequences are empty.")
    return true_labels, pred_labels


def accuracy(true_labels, pred_labels):
    """Fraction of samples matched under the best one-to-one relabeling."""
    true_labels, pred_labels = _labels(true_labels, pred_labels)
    table = contingency_matrix(true_labels, pred_labels)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum()) / true_labels.size


def pairwise_prf(true_labels, pred_labels):
    """
    Pair-counting F-score, precision and recall.

    A pair of samples is a true positive when both labelings put it in the
    same cluster. Ratios with a zero denominator are 0.

    Returns:
        tuple: `(f_score, precision, recall)`.
    """
    true_labels, pred_labels = _labels(true_labels, pred_labels)
    if true_labels.size < 2:
        raise ValueError("Pairwise metrics need at least two samples.")
    (_, fp), (fn, tp) = pair_confusion_matrix(true_labels, pred_labels)
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f_score = (
        2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    )
    return float(f_score), float(precision), float(recall)


def nmi(true_labels, pred_labels):
    """
    Mutual information normalized by the arithmetic mean of the entropies.
    Two single-cluster labelings score 1; one single-cluster labeling
    against any other scores 0.
    """
    true_labels, pred_labels = _labels(true_labels, pred_labels)
    return float(
        normalized_mutual_info_score(true_labels, pred_labels, average_method="arithmetic")
    )


def adjusted_rand(true_labels, pred_labels):
    true_labels, pred_labels = _labels(true_labels, pred_labels)
    return float(adjusted_rand_score(true_labels, pred_labels))


def evaluate(true_labels, pred_labels):
    """All six metrics as a dictionary keyed by `METRICS`."""
    f_score, precision, recall = pairwise_prf(true_labels, pred_labels)
    return {
        "f_score": f_score,
        "precision": precision,
        "recall": recall,
        "nmi": nmi(true_labels, pred_labels),
        "ar": adjusted_rand(true_labels, pred_labels),
        "acc": accuracy(true_labels, pred_labels),
    }
