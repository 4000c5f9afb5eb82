"""ROC analysis of a bias index against trial significance.

Scores are bias-index values; labels mark trials whose hazard-ratio test
came out significant (the "biased" class). AUC comes from the Mann-Whitney
statistic with midranks for ties, its 95% interval from the Hanley-McNeil
normal approximation, and the operating cutoff from Youden's J with the
rule "predicted biased iff score >= cutoff".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["RocResult", "youden_analysis", "rescale_index"]


@dataclass(frozen=True)
class RocResult:
    auc: float
    auc_ci_low: float
    auc_ci_high: float
    cutoff: float
    sensitivity: float
    specificity: float
    ppv: float
    npv: float
    n_positive: int
    n_negative: int


def _midranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with tied values sharing their average rank."""
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    ranks = np.empty(values.size)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[i:j + 1] = (i + j) / 2 + 1
        i = j + 1
    out = np.empty(values.size)
    out[order] = ranks
    return out


def youden_analysis(scores, labels) -> RocResult:
    """ROC summary of scores against binary labels.

    Entries with an absent score are dropped together with their labels;
    both classes must remain present. PPV or NPV with an empty predicted
    class comes back as nan.
    """
    scores = list(scores)
    labels = list(labels)
    if len(scores) != len(labels):
        raise DomainError(f"{len(scores)} scores vs {len(labels)} labels")
    kept = [(s, l) for s, l in zip(scores, labels)
            if s is not None and not (isinstance(s, float) and math.isnan(s))]
    if not kept:
        raise DomainError("no scored entries")
    x = np.array([s for s, _ in kept], dtype=float)
    y = np.array([int(l) for _, l in kept])
    if not np.all((y == 0) | (y == 1)):
        raise DomainError("labels must be binary")
    n1 = int(y.sum())
    n0 = y.size - n1
    if n1 == 0 or n0 == 0:
        raise DomainError("need both classes after dropping absent scores")

    ranks = _midranks(x)
    auc = float((ranks[y == 1].sum() - n1 * (n1 + 1) / 2) / (n0 * n1))

    q1 = auc / (2 - auc)
    q2 = 2 * auc * auc / (1 + auc)
    var = (auc * (1 - auc) + (n1 - 1) * (q1 - auc * auc)
           + (n0 - 1) * (q2 - auc * auc)) / (n0 * n1)
    se = math.sqrt(max(var, 0.0))
    ci_low = max(0.0, auc - 1.96 * se)
    ci_high = min(1.0, auc + 1.96 * se)

    # candidate cutoffs are the observed scores; positive iff score >= cutoff
    candidates = np.unique(x)
    order = np.argsort(x, kind="stable")
    sorted_pos = np.cumsum(np.concatenate(([0], y[order] == 1)))
    sorted_neg = np.cumsum(np.concatenate(([0], y[order] == 0)))
    below = np.searchsorted(x[order], candidates, side="left")
    sens = (n1 - sorted_pos[below]) / n1
    spec = sorted_neg[below] / n0
    j = sens + spec - 1
    best = int(np.argmax(j))  # first maximum = smallest cutoff
    cutoff = float(candidates[best])

    predicted = x >= cutoff
    tp = int(np.sum(predicted & (y == 1)))
    fp = int(np.sum(predicted & (y == 0)))
    fn = n1 - tp
    tn = n0 - fp
    ppv = tp / (tp + fp) if tp + fp else math.nan
    npv = tn / (tn + fn) if tn + fn else math.nan
    return RocResult(auc=auc, auc_ci_low=ci_low, auc_ci_high=ci_high,
                     cutoff=cutoff, sensitivity=float(sens[best]),
                     specificity=float(spec[best]), ppv=ppv, npv=npv,
                     n_positive=n1, n_negative=n0)


def rescale_index(values, cutoff: float):
    """Divide every present value by a positive cutoff, keeping absences."""
    if not (cutoff > 0):
        raise DomainError(f"cutoff must be positive, got {cutoff}")
    return [None if v is None else v / cutoff for v in values]
