"""Censoring-bias indexes and the per-dataset clinical audit row.

All five indexes compare the censored observations that fall inside the
event interval (strictly before the last event) against the events
themselves. When no censored time precedes the last event there is nothing
to measure and every index is absent (None).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import SurvivalDataset
from .errors import DomainError, NoEventsError
from .estimate import km_fit, km_survival_at

__all__ = [
    "BiasReport",
    "AuditRow",
    "quantile_type7",
    "qbi",
    "sqbi",
    "umbi",
    "abi",
    "sabi",
    "bias_report",
    "clinical_bias",
    "signif",
    "SQBI_SCALE",
    "SABI_SCALE",
]

# calibrated cutoffs dividing the raw indexes so that 1.0 separates
# biased from unbiased trials
SQBI_SCALE = 1.2
SABI_SCALE = 0.932


def quantile_type7(values, p: float) -> float:
    """Sample quantile with linear interpolation, h = (n-1)p + 1 (1-based)."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise DomainError("quantile of an empty sample")
    if not (0 <= p <= 1):
        raise DomainError(f"quantile probability must be in [0, 1], got {p}")
    return float(np.quantile(values, p, method="linear"))


@dataclass(frozen=True)
class BiasReport:
    qbi: float | None
    sqbi: float | None
    umbi: float | None
    abi: float | None
    sabi: float | None


def _event_interval_censored(dataset: SurvivalDataset):
    """(event times, censored times strictly before the last event)."""
    events = dataset.event_times
    if events.size == 0:
        raise NoEventsError(f"{dataset.name or 'dataset'} has no events")
    censored = dataset.censored_times
    return events, censored[censored < events.max()]


def qbi(dataset: SurvivalDataset) -> float | None:
    """Ratio of the 95th quantile of event times to that of the censored
    times inside the event interval."""
    events, a_censor = _event_interval_censored(dataset)
    if a_censor.size == 0:
        return None
    return quantile_type7(events, 0.95) / quantile_type7(a_censor, 0.95)


def sqbi(dataset: SurvivalDataset) -> float | None:
    value = qbi(dataset)
    return None if value is None else value / SQBI_SCALE


def umbi(dataset: SurvivalDataset) -> float | None:
    """Share of the in-interval censored times that fall below the mean
    event time."""
    events, a_censor = _event_interval_censored(dataset)
    if a_censor.size == 0:
        return None
    return float(np.mean(a_censor < events.mean()))


def abi(dataset: SurvivalDataset, skew_from: str = "events") -> float | None:
    """UMBI amplified by event-distribution skewness and long-term survival.

    The skewness factor is mean/median of the event times; ``skew_from =
    "censored"`` switches it to the in-interval censored times (an
    alternative reading of the definition, not used by the audit tables).
    The survival factor is exp(S_KM(last event)) with S_KM fit on the whole
    dataset.
    """
    if skew_from not in ("events", "censored"):
        raise DomainError(f"skew_from must be 'events' or 'censored', got {skew_from!r}")
    events, a_censor = _event_interval_censored(dataset)
    if a_censor.size == 0:
        return None
    base = umbi(dataset)
    source = events if skew_from == "events" else a_censor
    skew = source.mean() / quantile_type7(source, 0.5)
    tail = math.exp(km_survival_at(km_fit(dataset), float(events.max())))
    return float(base * skew * tail)


def sabi(dataset: SurvivalDataset, skew_from: str = "events") -> float | None:
    value = abi(dataset, skew_from=skew_from)
    return None if value is None else value / SABI_SCALE


def bias_report(dataset: SurvivalDataset, skew_from: str = "events") -> BiasReport:
    """All five indexes in one pass (they share definedness)."""
    raw_qbi = qbi(dataset)
    if raw_qbi is None:
        return BiasReport(None, None, None, None, None)
    raw_abi = abi(dataset, skew_from=skew_from)
    return BiasReport(qbi=raw_qbi, sqbi=raw_qbi / SQBI_SCALE,
                      umbi=umbi(dataset), abi=raw_abi,
                      sabi=raw_abi / SABI_SCALE)


@dataclass(frozen=True)
class AuditRow:
    trial: str
    n: int
    p_cens: float
    sqbi: float | None
    sabi: float | None
    reference: str


def clinical_bias(dataset: SurvivalDataset, trial_name: str,
                  reference: str = "") -> AuditRow:
    """One audit-table row: size, censored share, SQBI and SABI."""
    return AuditRow(trial=trial_name, n=dataset.n,
                    p_cens=float(np.mean(dataset.statuses == 0)),
                    sqbi=sqbi(dataset), sabi=sabi(dataset),
                    reference=reference)


def signif(x: float, digits: int = 2) -> float:
    """Round x to the given number of significant digits (0 stays 0)."""
    if x == 0 or not math.isfinite(x):
        return x
    return round(x, -int(math.floor(math.log10(abs(x)))) + digits - 1)
