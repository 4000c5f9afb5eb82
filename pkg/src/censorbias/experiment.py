"""Monte-Carlo virtual-trial experiments.

One trial draws model parameters, builds a complete-follow-up dataset
(group0), derives a censored twin (group1) under each of the three
censoring mechanisms, and records per-mechanism metrics: achieved censoring
inside the event interval, long-term survivor share, the Cox hazard ratio
of censored vs complete with its p-value, and the bias indexes of the
censored dataset. An experiment stacks n_trials of these, three rows per
trial, in a deterministic order that parallel execution preserves.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .bias import bias_report
from .dataset import SurvivalDataset
from .errors import DomainError, NoEventsError, NonConvergenceError
from .estimate import cox_two_group
from .simulate import (CureModelSpec, RngHandle, case_censoring,
                       complete_follow_up, interim_censoring, open_uniform,
                       time_censoring)

__all__ = [
    "Fixed",
    "Uniform",
    "parse_sampler",
    "ExperimentSpec",
    "TrialResult",
    "ExperimentTable",
    "trial_results",
    "run_experiment",
    "preset_experiment",
    "case_censoring_correlation",
    "MECHANISMS",
]

MECHANISMS = ("time", "interim", "case")

# stream tags: one independent substream per randomness consumer, so any
# trial can be regenerated in isolation
_STREAMS_PER_TRIAL = 8
_TAG_PARAMS = 0
_TAG_COMPLETE = 1
_TAG_MECHANISM = {"time": 2, "interim": 3, "case": 4}


@dataclass(frozen=True)
class Fixed:
    """Sampler that always returns the same value (consumes no draws)."""

    value: float

    def sample(self, gen: np.random.Generator) -> float:
        return self.value


@dataclass(frozen=True)
class Uniform:
    """Uniform sampler on the open interval (low, high)."""

    low: float
    high: float

    def __post_init__(self):
        if not (self.low < self.high):
            raise DomainError(f"uniform sampler needs low < high, got "
                              f"({self.low}, {self.high})")

    def sample(self, gen: np.random.Generator) -> float:
        return self.low + (self.high - self.low) * float(open_uniform(gen))


Sampler = Fixed | Uniform


def parse_sampler(text: str) -> Sampler:
    """Parse "v" into Fixed(v) and "lo:hi" into Uniform(lo, hi)."""
    try:
        if ":" in text:
            lo, hi = text.split(":", 1)
            return Uniform(float(lo), float(hi))
        return Fixed(float(text))
    except ValueError:
        raise DomainError(f"cannot parse sampler {text!r}; "
                          f"expected a number or lo:hi") from None


@dataclass(frozen=True)
class ExperimentSpec:
    n_trials: int
    n_cases: Sampler = Fixed(1000)
    median: Sampler = Fixed(25)
    cure_rate: Sampler = Fixed(0.0)
    p_censoring: Sampler = Uniform(0.05, 0.95)
    q99: float = 100.0
    master_seed: int = 1963

    def __post_init__(self):
        if self.n_trials < 1:
            raise DomainError(f"n_trials must be positive, got {self.n_trials}")


class TrialResult(NamedTuple):
    mechanism: str
    n_cases: int
    p_censored: float | None
    p_long_term: float | None
    hr: float | None
    p_value: float | None
    sqbi: float | None
    umbi: float | None
    sabi: float | None


def trial_results(group0: SurvivalDataset, group1: SurvivalDataset,
                  mechanism: str) -> TrialResult:
    """Metrics of one censored dataset against its complete twin.

    p_censored and p_long_term describe group1 relative to its own last
    event: the censored share among records strictly inside the event
    interval, and the share of records at or beyond the last event.
    """
    events = group1.event_times
    if events.size == 0:
        raise NoEventsError("censored dataset has no events")
    last_event = float(events.max())
    inside = group1.times < last_event
    n_inside = int(np.sum(inside))
    if n_inside > 0:
        p_censored = float(np.mean(group1.statuses[inside] == 0))
    else:
        p_censored = 0.0
    p_long_term = 1.0 - n_inside / group1.n

    try:
        fit = cox_two_group(group0, group1)
        hr, p_value = fit.hr, fit.p_value
    except NonConvergenceError:
        hr, p_value = None, None

    report = bias_report(group1)
    return TrialResult(mechanism=mechanism, n_cases=group1.n,
                       p_censored=p_censored, p_long_term=p_long_term,
                       hr=hr, p_value=p_value, sqbi=report.sqbi,
                       umbi=report.umbi, sabi=report.sabi)


def _empty_result(mechanism: str, n_cases: int) -> TrialResult:
    return TrialResult(mechanism=mechanism, n_cases=n_cases, p_censored=None,
                       p_long_term=None, hr=None, p_value=None, sqbi=None,
                       umbi=None, sabi=None)


def _run_one_trial(spec: ExperimentSpec, index: int) -> list[TrialResult]:
    base = index * _STREAMS_PER_TRIAL
    gen = RngHandle(spec.master_seed, base + _TAG_PARAMS).generator()
    # parameter draw order is part of the reproducibility contract
    n_cases = int(spec.n_cases.sample(gen))
    median = spec.median.sample(gen)
    cure_rate = spec.cure_rate.sample(gen)
    p_censoring = spec.p_censoring.sample(gen)

    model = CureModelSpec(n_cases=n_cases, median=median, q99=spec.q99,
                          cure_rate=cure_rate)
    group0 = complete_follow_up(
        model, RngHandle(spec.master_seed, base + _TAG_COMPLETE))

    rows: list[TrialResult] = []
    for mechanism in MECHANISMS:
        rng = RngHandle(spec.master_seed, base + _TAG_MECHANISM[mechanism])
        if mechanism == "time":
            group1 = time_censoring(group0, median, spec.q99, p_censoring, rng)
        elif mechanism == "interim":
            group1 = interim_censoring(group0, median, spec.q99, p_censoring, rng)
        else:
            group1 = case_censoring(group0, p_censoring, rng)
        try:
            rows.append(trial_results(group0, group1, mechanism))
        except NoEventsError:
            rows.append(_empty_result(mechanism, group1.n))
    return rows


def _run_trial_range(spec: ExperimentSpec, start: int, stop: int) -> list[TrialResult]:
    out: list[TrialResult] = []
    for i in range(start, stop):
        out.extend(_run_one_trial(spec, i))
    return out


_CSV_HEADER = ["type", "nCases", "pCensored", "pCured", "hr", "pValue",
               "SQBI", "UMBI", "SABI"]


@dataclass(frozen=True)
class ExperimentTable:
    """3*n_trials rows of trial metrics, in (trial, mechanism) order."""

    rows: tuple[TrialResult, ...]

    @property
    def n_nonconvergent(self) -> int:
        """Rows where the Cox fit did not converge (hr absent but the trial
        itself produced events)."""
        return sum(1 for r in self.rows
                   if r.hr is None and r.p_censored is not None)

    @property
    def n_no_events(self) -> int:
        return sum(1 for r in self.rows if r.p_censored is None)

    def mechanism_rows(self, mechanism: str) -> list[TrialResult]:
        if mechanism not in MECHANISMS:
            raise DomainError(f"unknown mechanism {mechanism!r}")
        return [r for r in self.rows if r.mechanism == mechanism]

    def column(self, name: str) -> list:
        if name not in TrialResult._fields:
            raise DomainError(f"unknown column {name!r}")
        return [getattr(r, name) for r in self.rows]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(_CSV_HEADER)
            for r in self.rows:
                writer.writerow([
                    r.mechanism, r.n_cases,
                    *("" if v is None else repr(float(v))
                      for v in (r.p_censored, r.p_long_term, r.hr, r.p_value,
                                r.sqbi, r.umbi, r.sabi)),
                ])

    @classmethod
    def read_csv(cls, path) -> "ExperimentTable":
        rows: list[TrialResult] = []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != _CSV_HEADER:
                raise DomainError(
                    f"{path}: not an experiment table (header {header})")
            for raw in reader:
                if not raw:
                    continue
                mechanism = raw[0]
                if mechanism not in MECHANISMS:
                    raise DomainError(f"{path}: unknown mechanism {mechanism!r}")
                values = [None if cell == "" else float(cell) for cell in raw[2:]]
                rows.append(TrialResult(mechanism, int(raw[1]), *values))
        return cls(rows=tuple(rows))


def run_experiment(spec: ExperimentSpec, n_workers: int | None = None) -> ExperimentTable:
    """Run all trials; with n_workers > 1 they are fanned out by contiguous
    chunks, reproducing the serial row order and values exactly."""
    if n_workers is not None and n_workers > 1:
        chunk = math.ceil(spec.n_trials / n_workers)
        ranges = [(s, min(s + chunk, spec.n_trials))
                  for s in range(0, spec.n_trials, chunk)]
        rows: list[TrialResult] = []
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            for part in pool.map(_run_trial_range,
                                 *zip(*((spec, a, b) for a, b in ranges))):
                rows.extend(part)
        return ExperimentTable(rows=tuple(rows))
    return ExperimentTable(rows=tuple(_run_trial_range(spec, 0, spec.n_trials)))


def preset_experiment(preset_id: int, n_trials: int = 1000,
                      master_seed: int = 1963) -> ExperimentSpec:
    """The five stock experiment configurations.

    All use 1000 cases, q99 = 100 and censoring share uniform on
    (0.05, 0.95); they differ in the event-median range and cure rate:
    1 short medians, no cure; 2 long medians, no cure; 3 short medians,
    cure 0.5; 4 long medians, cure 0.5; 5 wide medians, cure uniform
    on (0, 0.8).
    """
    presets = {
        1: (Uniform(5, 50), Fixed(0.0)),
        2: (Uniform(50, 95), Fixed(0.0)),
        3: (Uniform(5, 50), Fixed(0.5)),
        4: (Uniform(50, 95), Fixed(0.5)),
        5: (Uniform(5, 95), Uniform(0.0, 0.8)),
    }
    if preset_id not in presets:
        raise DomainError(f"preset must be 1..5, got {preset_id}")
    median, cure = presets[preset_id]
    return ExperimentSpec(n_trials=n_trials, n_cases=Fixed(1000),
                          median=median, cure_rate=cure,
                          p_censoring=Uniform(0.05, 0.95), q99=100.0,
                          master_seed=master_seed)


class CorrelationLine(NamedTuple):
    r: float
    slope: float
    intercept: float


def case_censoring_correlation(table: ExperimentTable) -> CorrelationLine:
    """Pearson r and least-squares line of hr against pCensored over the
    case-mechanism rows."""
    pairs = [(r.p_censored, r.hr) for r in table.mechanism_rows("case")
             if r.p_censored is not None and r.hr is not None]
    if len(pairs) < 3:
        raise DomainError(f"need at least 3 case rows with hr, got {len(pairs)}")
    x = np.array([p for p, _ in pairs])
    y = np.array([h for _, h in pairs])
    sx, sy = x.std(), y.std()
    if sx == 0 or sy == 0:
        raise DomainError("zero variance in hr or pCensored")
    r = float(np.mean((x - x.mean()) * (y - y.mean())) / (sx * sy))
    slope = r * sy / sx
    intercept = float(y.mean() - slope * x.mean())
    return CorrelationLine(r=r, slope=float(slope), intercept=intercept)
