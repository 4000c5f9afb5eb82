"""Kaplan-Meier product-limit estimation and two-group Cox fitting.

Both estimators take the package's survival datasets. The Cox fit handles a
single binary covariate (reference group vs comparison group) with Efron tie
correction, which is all the downstream trial machinery needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import SurvivalDataset, concat
from .errors import DomainError, NoEventsError, NonConvergenceError

__all__ = ["KMCurve", "CoxFit", "km_fit", "km_survival_at", "cox_two_group"]


@dataclass(frozen=True)
class KMCurve:
    """Step survival function.

    Parallel arrays, one entry per distinct observed time (censoring-only
    times included so plots can mark them; survival does not change there).
    """

    times: np.ndarray
    survival: np.ndarray
    at_risk: np.ndarray
    events: np.ndarray
    median: float | None

    @property
    def steps(self) -> list[tuple[float, float, int, int]]:
        return [(float(t), float(s), int(r), int(e)) for t, s, r, e
                in zip(self.times, self.survival, self.at_risk, self.events)]


def km_fit(dataset: SurvivalDataset) -> KMCurve:
    """Product-limit estimator with ties grouped by time.

    Censored records at time t leave the risk set after the events at t.
    The median is the smallest event time with survival <= 0.5, or None if
    survival never falls that far.
    """
    times, statuses = dataset.times, dataset.statuses
    uniq, inverse = np.unique(times, return_inverse=True)
    events = np.bincount(inverse, weights=(statuses == 1),
                         minlength=uniq.size).astype(np.int64)
    removed = np.bincount(inverse, minlength=uniq.size)
    at_risk = (dataset.n
               - np.concatenate(([0], np.cumsum(removed)[:-1]))).astype(np.int64)

    # The product is carried in exact integer arithmetic and rounded to
    # float once per step, so survival values are correctly rounded (on
    # uncensored data the telescoped product equals (n-i)/n bit for bit).
    survival = np.empty(uniq.size)
    num, den = 1, 1
    for i, (r, e) in enumerate(zip(at_risk.tolist(), events.tolist())):
        num *= r - e
        den *= r
        if den.bit_length() > 4096:
            g = math.gcd(num, den)
            num //= g
            den //= g
        survival[i] = num / den

    median = None
    reaches = (events > 0) & (survival <= 0.5)
    if reaches.any():
        median = float(uniq[np.argmax(reaches)])
    return KMCurve(times=uniq, survival=survival, at_risk=at_risk,
                   events=events, median=median)


def km_survival_at(curve: KMCurve, t: float) -> float:
    """Right-continuous step evaluation; 1 before the first observed time."""
    if not (t >= 0):
        raise DomainError(f"time must be non-negative, got {t}")
    idx = int(np.searchsorted(curve.times, t, side="right")) - 1
    if idx < 0:
        return 1.0
    return float(curve.survival[idx])


@dataclass(frozen=True)
class CoxFit:
    beta: float
    hr: float
    se: float
    z: float
    p_value: float
    reference: str
    comparison: str


def _efron_structure(times, statuses, x, tie_method):
    """Precompute the beta-independent pieces of the partial likelihood.

    With a binary covariate the risk-set sum of exp(beta*x) is
    R0 + R1*exp(beta); Efron's correction subtracts (l/d) of the tied-event
    counts from each group, so every (event time, l) pair contributes one
    log(A + B*exp(beta)) term with constants A, B.
    """
    event_mask = statuses == 1
    ev_times = times[event_mask]
    ev_x = x[event_mask]

    order = np.argsort(ev_times, kind="stable")
    ev_times = ev_times[order]
    ev_x = ev_x[order]
    uniq = np.unique(ev_times)
    left = np.searchsorted(ev_times, uniq, side="left")
    right = np.searchsorted(ev_times, uniq, side="right")
    d = (right - left).astype(float)
    cum_x = np.concatenate(([0.0], np.cumsum(ev_x)))
    d1 = cum_x[right] - cum_x[left]
    d0 = d - d1

    t0 = np.sort(times[x == 0])
    t1 = np.sort(times[x == 1])
    r0 = t0.size - np.searchsorted(t0, uniq, side="left")
    r1 = t1.size - np.searchsorted(t1, uniq, side="left")

    counts = d.astype(np.int64)
    total = int(counts.sum())
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    l_flat = np.arange(total) - np.repeat(starts, counts)
    if tie_method == "efron":
        frac = l_flat / np.repeat(d, counts)
    else:  # breslow: no within-tie adjustment
        frac = np.zeros(total)
    a = np.repeat(r0.astype(float), counts) - frac * np.repeat(d0, counts)
    b = np.repeat(r1.astype(float), counts) - frac * np.repeat(d1, counts)
    return a, b, float(d1.sum())


def cox_two_group(reference: SurvivalDataset, comparison: SurvivalDataset,
                  tie_method: str = "efron") -> CoxFit:
    """Fit the two-group Cox proportional-hazards model.

    Returns the hazard ratio of ``comparison`` relative to ``reference``
    with the Wald two-sided p-value. Newton iteration from beta = 0 stops
    when the step falls below 1e-9; a beta escaping past +-22 signals a
    monotone likelihood and raises NonConvergenceError.
    """
    if tie_method not in ("efron", "breslow"):
        raise DomainError(f"unknown tie method {tie_method!r}")
    combined = concat(reference, comparison)
    x = np.concatenate([np.zeros(reference.n), np.ones(comparison.n)])
    if combined.n_events == 0:
        raise NoEventsError("Cox fit needs at least one event")

    a, b, s1 = _efron_structure(combined.times, combined.statuses, x, tie_method)

    beta = 0.0
    exp_b = 1.0
    denom = a + b * exp_b
    loglik = beta * s1 - float(np.sum(np.log(denom)))
    for _ in range(25):
        w = b * exp_b / denom
        grad = s1 - float(np.sum(w))
        hess = -float(np.sum(w * (1.0 - w)))
        if hess > -1e-300:
            raise NonConvergenceError(
                "no information about the group effect (flat likelihood)")
        step = -grad / hess
        step = max(-10.0, min(10.0, step))  # trust region; keeps exp() in range
        # step-halving keeps the concave log-likelihood non-decreasing
        for _ in range(30):
            new_beta = beta + step
            new_exp = math.exp(new_beta)
            new_denom = a + b * new_exp
            new_loglik = new_beta * s1 - float(np.sum(np.log(new_denom)))
            if new_loglik >= loglik - 1e-12:
                break
            step /= 2
        beta, exp_b, denom, loglik = new_beta, new_exp, new_denom, new_loglik
        if abs(beta) > 22:
            raise NonConvergenceError(
                "group effect diverges (|beta| > 22); monotone likelihood")
        if abs(step) < 1e-9:
            break
    else:
        raise NonConvergenceError("Newton iteration did not converge in 25 steps")

    w = b * exp_b / denom
    hess = -float(np.sum(w * (1.0 - w)))
    se = math.sqrt(-1.0 / hess)
    z = beta / se
    p_value = math.erfc(abs(z) / math.sqrt(2))
    return CoxFit(beta=beta, hr=math.exp(beta), se=se, z=z, p_value=p_value,
                  reference=reference.label, comparison=comparison.label)
