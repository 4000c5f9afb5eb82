"""Weibull distributions pinned down by two survival quantiles.

A Weibull survival curve S(t) = exp(-(t/scale)**shape) is identified by any
two points on its CDF, (q_a, p_a) and (q_b, p_b) with q_a < q_b. The default
anchors are the median (p_a = 0.5) and the 99th percentile (p_b = 0.99), so a
caller can say "half the events by t = 25, nearly all by t = 100" and get the
unique matching distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["WeibullParams", "quantiles_to_weibull", "inverse_weibull"]


@dataclass(frozen=True)
class WeibullParams:
    shape: float
    scale: float


def quantiles_to_weibull(q_a: float, q_b: float, p_a: float = 0.5,
                         p_b: float = 0.99) -> WeibullParams:
    """Solve shape and scale from two cumulative quantile constraints.

    ``P(T <= q_a) = p_a`` and ``P(T <= q_b) = p_b``. Requires
    0 < q_a < q_b and 0 < p_a < p_b < 1.
    """
    if not (0 < q_a < q_b) or not math.isfinite(q_b):
        raise DomainError(f"quantiles must satisfy 0 < q_a < q_b, got {q_a}, {q_b}")
    if not (0 < p_a < p_b < 1):
        raise DomainError(f"probabilities must satisfy 0 < p_a < p_b < 1, got {p_a}, {p_b}")
    shape = math.log(math.log(1 - p_b) / math.log(1 - p_a)) / math.log(q_b / q_a)
    scale = q_a / (-math.log(1 - p_a)) ** (1 / shape)
    return WeibullParams(shape=shape, scale=scale)


def inverse_weibull(params: WeibullParams, p):
    """Map survival probability p in (0, 1] to the time t with S(t) = p.

    p = 1 maps to t = 0. Accepts a scalar or an array (element-wise).
    Strictly decreasing in p, so small survival probabilities give the
    long times.
    """
    exponent = 1 / params.shape
    if np.ndim(p) == 0:
        p = float(p)
        if not (0 < p <= 1):
            raise DomainError(f"survival probability must be in (0, 1], got {p}")
        if p == 1:
            return 0.0
        return params.scale * (-math.log(p)) ** exponent
    arr = np.asarray(p, dtype=float)
    if not np.all((arr > 0) & (arr <= 1)):
        raise DomainError("survival probabilities must be in (0, 1]")
    return np.where(arr == 1, 0.0, params.scale * (-np.log(arr)) ** exponent)
