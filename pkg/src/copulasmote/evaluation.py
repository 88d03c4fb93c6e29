"""Logistic regression (batch gradient descent) and the metric suite.

The classifier minimizes mean logistic loss with a small fixed L2 penalty
(weight 1/n, intercept unpenalized) using backtracking line search, stopping
on the max-norm of the gradient.  Metrics are computed from first
principles: thresholded confusion counts, rank-based AUC with half credit
for ties, and step-wise (non-interpolated) average precision for PR AUC.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special
from sklearn.base import BaseEstimator

from ._validation import (
    InvalidInputError,
    NumericFailureError,
    as_float_array,
    check_labels,
    check_matrix,
)

__all__ = ["LogisticRegression", "MetricReport", "compute_metrics", "METRIC_NAMES"]

METRIC_NAMES = ("accuracy", "balanced_accuracy", "precision", "recall", "f1", "auc", "pr_auc")

_ARMIJO_C = 1e-4
_MAX_HALVINGS = 60


class LogisticRegression(BaseEstimator):
    """Two-class logistic regression trained by gradient descent.

    Parameters
    ----------
    max_iter : int
        Iteration cap (paper-scale default keeps folds convergent).
    tol : float
        Stop when the gradient max-norm falls below this.

    Attributes
    ----------
    classes_ : ndarray of the two labels, sorted; the second is the
        positive class for ``predict_proba`` column 1.
    coef_, intercept_ : fitted parameters.
    n_iter_, grad_norm_, converged_ : training diagnostics.
    """

    def __init__(self, max_iter: int = 5000, tol: float = 1e-6):
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y):
        X = check_matrix(X, "X")
        y = check_labels(y, X.shape[0])
        classes = np.unique(y)
        if classes.size != 2:
            raise InvalidInputError(f"need exactly two classes, got {classes.size}")
        t = (y == classes[1]).astype(np.float64)
        n, d = X.shape
        w = np.zeros(d)
        b = 0.0
        l2 = 1.0 / n

        def loss_grad(w, b):
            z = X @ w + b
            # mean log(1 + exp(-margin)) written stably plus ridge term
            loss = float(np.mean(np.logaddexp(0.0, z) - t * z)) + 0.5 * l2 * float(w @ w)
            p = special.expit(z)
            r = p - t
            gw = X.T @ r / n + l2 * w
            gb = float(np.mean(r))
            return loss, gw, gb

        def grad_max_norm(gw, gb):
            return max(float(np.max(np.abs(gw))), abs(gb))

        loss, gw, gb = loss_grad(w, b)
        if not math.isfinite(loss):
            raise NumericFailureError("non-finite logistic loss at initialization")
        step = 1.0
        n_iter = 0
        grad_norm = grad_max_norm(gw, gb)
        while grad_norm >= self.tol and n_iter < self.max_iter:
            g2 = float(gw @ gw) + gb * gb
            accepted = False
            for _ in range(_MAX_HALVINGS):
                w_new = w - step * gw
                b_new = b - step * gb
                loss_new, gw_new, gb_new = loss_grad(w_new, b_new)
                if math.isfinite(loss_new) and loss_new <= loss - _ARMIJO_C * step * g2:
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                break
            w, b, loss, gw, gb = w_new, b_new, loss_new, gw_new, gb_new
            if not math.isfinite(loss):
                raise NumericFailureError("non-finite logistic loss during training")
            step = min(step * 2.0, 1e6)
            n_iter += 1
            grad_norm = grad_max_norm(gw, gb)

        self.classes_ = classes
        self.coef_ = w
        self.intercept_ = b
        self.n_iter_ = n_iter
        self.grad_norm_ = grad_norm
        self.converged_ = grad_norm < self.tol
        if not self.converged_:
            warnings.warn(
                f"logistic regression did not converge in {self.max_iter} iterations "
                f"(gradient max-norm {grad_norm:.3e})",
                RuntimeWarning,
                stacklevel=2,
            )
        return self

    def decision_function(self, X):
        X = check_matrix(X, "X")
        if X.shape[1] != self.coef_.shape[0]:
            raise InvalidInputError(
                f"X has {X.shape[1]} features, model was fitted with {self.coef_.shape[0]}"
            )
        return X @ self.coef_ + self.intercept_

    def predict_proba(self, X):
        """Column-stacked probabilities for (classes_[0], classes_[1])."""
        p1 = special.expit(self.decision_function(X))
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X):
        return self.classes_[(self.predict_proba(X)[:, 1] >= 0.5).astype(int)]


@dataclass(frozen=True)
class MetricReport:
    """Threshold and ranking metrics for one evaluation.

    Ranking metrics (and balanced accuracy) are ``None`` when undefined,
    i.e. when only one class is present; zero-denominator threshold metrics
    report 0.0 with a flag.
    """

    positive_label: object
    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: float
    balanced_accuracy: float | None
    precision: float
    recall: float
    f1: float
    auc: float | None
    pr_auc: float | None
    flags: tuple = field(default=())

    def value(self, metric: str):
        if metric not in METRIC_NAMES:
            raise InvalidInputError(f"unknown metric {metric!r}")
        return getattr(self, metric)


def _midranks(scores):
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(scores.size, dtype=np.float64)
    i = 0
    s = scores[order]
    while i < scores.size:
        j = i
        while j + 1 < scores.size and s[j + 1] == s[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _auc(pos_mask, scores):
    n_pos = int(pos_mask.sum())
    n_neg = scores.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = _midranks(scores)
    rank_sum = float(ranks[pos_mask].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def _average_precision(pos_mask, scores):
    n_pos = int(pos_mask.sum())
    if n_pos == 0 or n_pos == scores.size:
        return None
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    hits = pos_mask[order]
    ap = 0.0
    tp = 0
    seen = 0
    i = 0
    n = scores.size
    while i < n:
        j = i
        while j + 1 < n and s[j + 1] == s[i]:
            j += 1
        new_tp = int(hits[i : j + 1].sum())
        tp += new_tp
        seen = j + 1
        if new_tp:
            ap += (new_tp / n_pos) * (tp / seen)
        i = j + 1
    return ap


def compute_metrics(y, scores, threshold: float = 0.5, positive_label=1) -> MetricReport:
    """Full metric suite for scores of the ``positive_label`` class.

    Rows scoring at or above ``threshold`` are predicted positive.
    """
    y = check_labels(y)
    scores = as_float_array(scores, "scores", ndim=1)
    if y.shape[0] != scores.shape[0]:
        raise InvalidInputError(
            f"y has {y.shape[0]} entries but scores has {scores.shape[0]}"
        )
    if y.shape[0] == 0:
        raise InvalidInputError("cannot compute metrics on empty input")

    pos = y == positive_label
    pred = scores >= threshold
    tp = int(np.sum(pos & pred))
    fp = int(np.sum(~pos & pred))
    tn = int(np.sum(~pos & ~pred))
    fn = int(np.sum(pos & ~pred))
    n = y.shape[0]

    flags = []
    accuracy = (tp + tn) / n

    if tp + fp > 0:
        precision = tp / (tp + fp)
    else:
        precision = 0.0
        flags.append("precision_zero_denominator")
    if tp + fn > 0:
        recall = tp / (tp + fn)
    else:
        recall = 0.0
        flags.append("recall_zero_denominator")
    if precision + recall > 0:
        f1 = 2.0 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
        flags.append("f1_zero_denominator")

    n_pos = tp + fn
    n_neg = tn + fp
    if n_pos > 0 and n_neg > 0:
        balanced = 0.5 * (tp / n_pos + tn / n_neg)
    else:
        balanced = None
        flags.append("balanced_accuracy_undefined_single_class")

    auc = _auc(pos, scores)
    pr_auc = _average_precision(pos, scores)
    if auc is None:
        flags.append("auc_undefined_single_class")
    if pr_auc is None and "auc_undefined_single_class" not in flags:
        flags.append("pr_auc_undefined_single_class")

    return MetricReport(
        positive_label=positive_label,
        tp=tp, fp=fp, tn=tn, fn=fn,
        accuracy=accuracy,
        balanced_accuracy=balanced,
        precision=precision,
        recall=recall,
        f1=f1,
        auc=auc,
        pr_auc=pr_auc,
        flags=tuple(flags),
    )
