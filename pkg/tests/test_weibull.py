import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from censorbias.errors import DomainError
from censorbias.weibull import WeibullParams, inverse_weibull, quantiles_to_weibull


def closed_form(q_a, q_b, p_a=0.5, p_b=0.99):
    k = math.log(math.log(1 - p_b) / math.log(1 - p_a)) / math.log(q_b / q_a)
    b = q_a / (-math.log(1 - p_a)) ** (1 / k)
    return k, b


class TestQuantilesToWeibull:
    def test_median25_q99_100(self):
        params = quantiles_to_weibull(25.0, 100.0)
        k, b = closed_form(25.0, 100.0)
        assert (k, b) == pytest.approx((1.3660104, 32.6937800), abs=1e-6)
        assert params.shape == pytest.approx(k, rel=1e-12)
        assert params.scale == pytest.approx(b, rel=1e-12)

    def test_median50_q99_100(self):
        params = quantiles_to_weibull(50.0, 100.0)
        k, b = closed_form(50.0, 100.0)
        assert (k, b) == pytest.approx((2.7320208, 57.1784750), abs=1e-6)
        assert params.shape == pytest.approx(k, rel=1e-12)
        assert params.scale == pytest.approx(b, rel=1e-12)

    def test_exponential_special_case(self):
        # k = 1 exactly when the quantiles sit at b*ln(1/p)
        params = quantiles_to_weibull(10 * math.log(2), 10 * math.log(100),
                                      p_a=0.5, p_b=0.99)
        assert params.shape == pytest.approx(1.0, rel=1e-12)
        assert params.scale == pytest.approx(10.0, rel=1e-12)

    def test_anchors_recovered(self):
        params = quantiles_to_weibull(25.0, 100.0)
        assert inverse_weibull(params, 0.5) == pytest.approx(25.0, rel=1e-12)
        assert inverse_weibull(params, 0.01) == pytest.approx(100.0, rel=1e-12)

    @pytest.mark.parametrize("qa,qb", [(0.0, 10.0), (-1.0, 10.0),
                                       (10.0, 10.0), (12.0, 10.0),
                                       (1.0, math.inf)])
    def test_bad_quantiles(self, qa, qb):
        with pytest.raises(DomainError):
            quantiles_to_weibull(qa, qb)

    @pytest.mark.parametrize("pa,pb", [(0.0, 0.99), (0.5, 0.5), (0.9, 0.5),
                                       (0.5, 1.0)])
    def test_bad_probabilities(self, pa, pb):
        with pytest.raises(DomainError):
            quantiles_to_weibull(25.0, 100.0, p_a=pa, p_b=pb)


class TestInverseWeibull:
    def test_survival_one_is_time_zero(self):
        params = quantiles_to_weibull(25.0, 100.0)
        assert inverse_weibull(params, 1.0) == 0.0
        assert math.copysign(1.0, inverse_weibull(params, 1.0)) == 1.0

    @pytest.mark.parametrize("p", [0.0, -0.5, 1.0001, 2.0])
    def test_domain(self, p):
        params = quantiles_to_weibull(25.0, 100.0)
        with pytest.raises(DomainError):
            inverse_weibull(params, p)

    def test_array_matches_scalar(self):
        params = quantiles_to_weibull(25.0, 100.0)
        ps = np.array([0.9, 0.5, 0.1, 1.0, 0.01])
        out = inverse_weibull(params, ps)
        assert out.shape == ps.shape
        for p, t in zip(ps, out):
            assert t == inverse_weibull(params, float(p))

    def test_array_rejects_any_bad_element(self):
        params = quantiles_to_weibull(25.0, 100.0)
        with pytest.raises(DomainError):
            inverse_weibull(params, np.array([0.5, 0.0]))
        with pytest.raises(DomainError):
            inverse_weibull(params, np.array([0.5, 1.5]))

    def test_monotone_decreasing_in_survival(self):
        params = quantiles_to_weibull(25.0, 100.0)
        ps = np.linspace(0.001, 1.0, 500)
        ts = inverse_weibull(params, ps)
        assert np.all(np.diff(ts) <= 0)

    def test_direct_formula(self):
        params = WeibullParams(shape=2.0, scale=10.0)
        # S(t) = exp(-(t/b)^k)  =>  t(S=exp(-1)) = b
        assert inverse_weibull(params, math.exp(-1)) == pytest.approx(10.0,
                                                                      rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(qa=st.floats(0.01, 1e4), ratio=st.floats(1.01, 1e3))
def test_roundtrip_property(qa, ratio):
    qb = qa * ratio
    params = quantiles_to_weibull(qa, qb)
    assert inverse_weibull(params, 0.5) == pytest.approx(qa, rel=1e-9)
    assert inverse_weibull(params, 0.01) == pytest.approx(qb, rel=1e-9)


def test_empirical_quantiles():
    params = quantiles_to_weibull(25.0, 100.0)
    rng = np.random.default_rng(7)
    draws = inverse_weibull(params, rng.uniform(1e-12, 1.0, 100_000))
    assert np.quantile(draws, 0.5) == pytest.approx(25.0, rel=0.02)
    assert np.quantile(draws, 0.99) == pytest.approx(100.0, rel=0.05)
