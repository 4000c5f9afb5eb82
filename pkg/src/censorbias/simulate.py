"""Virtual survival datasets: complete follow-up and three censoring styles.

Complete follow-up draws event times from a Weibull mixture cure-rate model:
a fraction of the cases never experience the event and is carried censored
at the last observed event time. The three censoring mechanisms then imitate
how real follow-up gets cut short:

- time censoring: a per-case random censor time from a related Weibull,
  tuned so larger p_censoring censors more cases;
- interim censoring: one interim analysis date, staggered recruitment,
  anyone still event-free at the cut is censored;
- case censoring: a random subset of cases has follow-up shortened by a
  uniform factor in (0.2, 1).

Every generator is a pure function of (inputs, RngHandle); handles derive
independent Philox streams, so parallel trial execution reproduces the
serial results exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import SurvivalDataset
from .errors import DomainError
from .weibull import inverse_weibull, quantiles_to_weibull

__all__ = [
    "RngHandle",
    "CureModelSpec",
    "complete_follow_up",
    "time_censoring",
    "interim_censoring",
    "case_censoring",
]

_U53 = 1 << 53


@dataclass(frozen=True)
class RngHandle:
    """Addresses one reproducible random stream.

    The same (master_seed, stream_id) gives the identical draw sequence on
    every platform; distinct stream_ids give statistically independent
    streams.
    """

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        if self.master_seed < 0 or self.stream_id < 0:
            raise DomainError("master_seed and stream_id must be non-negative")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence((self.master_seed, self.stream_id))
        return np.random.Generator(np.random.Philox(seq))


def open_uniform(gen: np.random.Generator, size=None):
    """Uniform draws on the open interval (0, 1): never exactly 0 or 1."""
    return (gen.integers(0, _U53, size=size) + 0.5) / _U53


@dataclass(frozen=True)
class CureModelSpec:
    """Weibull mixture cure-rate model for one simulated trial arm.

    median and q99 anchor the event-time distribution; cure_rate is the
    fraction of cases that never experience the event.
    """

    n_cases: int
    median: float
    q99: float
    cure_rate: float = 0.0

    def __post_init__(self):
        if self.n_cases < 2:
            raise DomainError(f"n_cases must be at least 2, got {self.n_cases}")
        if not (0 <= self.cure_rate < 1):
            raise DomainError(f"cure_rate must be in [0, 1), got {self.cure_rate}")
        if not (0 < self.median * (1 - self.cure_rate) < self.q99):
            raise DomainError(
                f"median*(1-cure_rate) must lie in (0, q99), got "
                f"median={self.median}, q99={self.q99}, cure_rate={self.cure_rate}")
        if self.n_events < 1:
            raise DomainError("the model would generate no events")

    @property
    def n_events(self) -> int:
        return int(self.n_cases * (1 - self.cure_rate))


def complete_follow_up(spec: CureModelSpec, rng: RngHandle,
                       label: str = "Uncensored") -> SurvivalDataset:
    """Simulate a fully observed dataset under the cure-rate model.

    Event times are inverse-Weibull draws anchored at quantiles
    (median*(1-cure_rate), q99), sorted ascending; the cured remainder is
    censored at the last event time.
    """
    params = quantiles_to_weibull(spec.median * (1 - spec.cure_rate), spec.q99)
    gen = rng.generator()
    times = np.sort(inverse_weibull(params, open_uniform(gen, spec.n_events)))
    n_cured = spec.n_cases - spec.n_events
    statuses = np.concatenate([np.ones(spec.n_events, dtype=np.int8),
                               np.zeros(n_cured, dtype=np.int8)])
    times = np.concatenate([times, np.full(n_cured, times[-1])])
    return SurvivalDataset(times, statuses, label, name=label)


def time_censoring(uncensored: SurvivalDataset, median: float, q99: float,
                   p_censoring: float, rng: RngHandle) -> SurvivalDataset:
    """Censor with per-case random censor times.

    Censor time candidates are inverse-Weibull draws at survival probability
    u**((1-p)/p); a case is censored when its candidate falls before its
    event time. p_censoring = 0 is the no-censoring limit.
    """
    if not (0 <= p_censoring < 1):
        raise DomainError(f"p_censoring must be in [0, 1), got {p_censoring}")
    if p_censoring == 0:
        return uncensored  # defined as identity: no draws, no relabeling
    label = f"Time censoring {round(100 * p_censoring, 1):g} %"
    times = uncensored.times.copy()
    statuses = uncensored.statuses.copy()
    params = quantiles_to_weibull(median, q99)
    u = open_uniform(rng.generator(), uncensored.n)
    p_random = u ** ((1 - p_censoring) / p_censoring)
    # at tiny p_censoring the power underflows to 0, which stands for a
    # censor time beyond any event: such cases are never censored
    alive = p_random > 0
    candidates = np.full(uncensored.n, np.inf)
    candidates[alive] = inverse_weibull(params, p_random[alive])
    hit = candidates < times
    times[hit] = candidates[hit]
    statuses[hit] = 0
    return SurvivalDataset(times, statuses, label, name=label).sorted_by_time()


def interim_censoring(uncensored: SurvivalDataset, median: float, q99: float,
                      p_censoring: float, rng: RngHandle) -> SurvivalDataset:
    """Censor at one interim analysis with staggered recruitment.

    The interim date is twice the inverse-Weibull time at survival
    probability p_censoring; each case is recruited uniformly inside
    [0, interim), so its observable window is the remainder.
    """
    if not (0 < p_censoring < 1):
        raise DomainError(f"p_censoring must be in (0, 1), got {p_censoring}")
    params = quantiles_to_weibull(median, q99)
    interim = inverse_weibull(params, p_censoring) * 2
    label = f"Interim at t = {round(interim, 1):g}"
    recruit = open_uniform(rng.generator(), uncensored.n) * interim
    interval = interim - recruit
    times = uncensored.times.copy()
    statuses = uncensored.statuses.copy()
    hit = interval < times
    times[hit] = interval[hit]
    statuses[hit] = 0
    keep = times > 0  # open-interval recruitment cannot produce these, kept for safety
    return SurvivalDataset(times[keep], statuses[keep], label,
                           name=label).sorted_by_time()


def case_censoring(uncensored: SurvivalDataset, p_censoring: float,
                   rng: RngHandle) -> SurvivalDataset:
    """Shorten the follow-up of a random fixed-size subset of cases.

    floor(n * p_censoring) distinct cases get their time multiplied by an
    independent uniform(0.2, 1) draw and their status set to censored.
    """
    if not (0 <= p_censoring <= 1):
        raise DomainError(f"p_censoring must be in [0, 1], got {p_censoring}")
    label = f"Case {round(100 * (1 - p_censoring), 1):g} %"
    times = uncensored.times.copy()
    statuses = uncensored.statuses.copy()
    n_censored = int(uncensored.n * p_censoring)
    if n_censored > 0:
        gen = rng.generator()
        chosen = np.argsort(open_uniform(gen, uncensored.n), kind="stable")[:n_censored]
        times[chosen] *= 0.2 + 0.8 * open_uniform(gen, n_censored)
        statuses[chosen] = 0
    return SurvivalDataset(times, statuses, label, name=label).sorted_by_time()
