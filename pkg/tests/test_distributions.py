import json
import math

import numpy as np
import pytest
from scipy import stats

from auction_lab.distributions import (
    Exponential,
    LogNormal,
    OrderStatistics,
    ShiftedExponential,
    Uniform,
    distribution_from_dict,
    expected_b1,
    expected_b2,
    hazard_ratio_sup,
    random_stream,
    sample_valuations,
)
from auction_lab.errors import ConfigError

FAMILIES = [
    (Uniform(0.0, 1.0), stats.uniform(0, 1)),
    (Uniform(2.0, 5.0), stats.uniform(2, 3)),
    (Exponential(1.0), stats.expon()),
    (Exponential(2.5), stats.expon(scale=1 / 2.5)),
    (ShiftedExponential(1.5, 2.0), stats.expon(loc=1.5, scale=0.5)),
    (LogNormal(0.0, 1.0), stats.lognorm(1.0)),
    (LogNormal(0.3, 0.5), stats.lognorm(0.5, scale=math.exp(0.3))),
]
IDS = [repr(d) for d, _ in FAMILIES]


@pytest.mark.parametrize("dist, ref", FAMILIES, ids=IDS)
def test_pdf_cdf_against_scipy(dist, ref):
    xs = ref.ppf(np.linspace(0.001, 0.999, 41))
    for x in xs:
        assert dist.pdf(x) == pytest.approx(ref.pdf(x), rel=1e-9, abs=1e-12)
        assert dist.cdf(x) == pytest.approx(ref.cdf(x), rel=1e-9, abs=1e-12)
        assert dist.sf(x) == pytest.approx(ref.sf(x), rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("dist, ref", FAMILIES, ids=IDS)
def test_quantile_round_trip(dist, ref):
    for u in np.linspace(0.0, 0.999999, 2001):
        assert abs(dist.cdf(dist.quantile(u)) - u) <= 1e-9


@pytest.mark.parametrize("dist, ref", FAMILIES, ids=IDS)
def test_samples_pass_ks(dist, ref):
    x = dist.sample(100_000, random_stream(11, 0))
    assert stats.kstest(x, ref.cdf).pvalue > 0.01


@pytest.mark.parametrize("dist, ref", FAMILIES[:5], ids=IDS[:5])
def test_max_of_n_matches_order_statistic(dist, ref):
    n = 5
    x = dist.sample(100_000 * n, random_stream(3, 1)).reshape(-1, n).max(axis=1)
    os_ = OrderStatistics(dist, n)
    assert stats.kstest(x, np.vectorize(os_.cdf_b1)).pvalue > 0.01
    second = np.sort(dist.sample(50_000 * n, random_stream(3, 2)).reshape(-1, n), axis=1)[:, -2]
    assert stats.kstest(second, np.vectorize(os_.cdf_b2)).pvalue > 0.01


def test_exponential_sample_mean():
    x = Exponential(1.0).sample(1_000_000, random_stream(5))
    assert abs(x.mean() - 1.0) < 0.01


def test_sample_valuations_deterministic():
    a = sample_valuations(Uniform(0, 1), 3, seed=7)
    b = sample_valuations(Uniform(0, 1), 3, seed=7)
    assert a.tolist() == b.tolist()
    assert sample_valuations(Uniform(0, 1), 3, seed=8).tolist() != a.tolist()
    # streams do not depend on creation order
    later = sample_valuations(Uniform(0, 1), 3, seed=7, index=5)
    sample_valuations(Uniform(0, 1), 3, seed=7, index=4)
    assert sample_valuations(Uniform(0, 1), 3, seed=7, index=5).tolist() == later.tolist()


@pytest.mark.parametrize(
    "dist, expected",
    [
        (Uniform(0, 1), 1.0),
        (Uniform(3, 4), 1.0),
        (Uniform(0, 2), 2.0),
        (Exponential(1.0), 1.0),
        (Exponential(4.0), 0.25),
        (ShiftedExponential(2.0, 0.5), 2.0),
    ],
)
def test_hazard_ratio_sup(dist, expected):
    assert hazard_ratio_sup(dist) == pytest.approx(expected, rel=1e-9)


def test_lognormal_hazard_is_unbounded():
    assert hazard_ratio_sup(LogNormal(0, 1)) == math.inf


@pytest.mark.parametrize("n", [1, 2, 3, 10, 50])
def test_uniform_order_statistic_means(n):
    assert expected_b1(Uniform(0, 1), n) == pytest.approx(n / (n + 1), abs=1e-9)
    assert expected_b2(Uniform(0, 1), n) == pytest.approx((n - 1) / (n + 1) if n > 1 else 0.0, abs=1e-9)


@pytest.mark.parametrize("n", [2, 5, 10, 50])
def test_exponential_order_statistic_means(n):
    # harmonic numbers: E[max] = H_n, and the top gap of an Exp(1) sample is Exp(1)
    h = sum(1.0 / k for k in range(1, n + 1))
    assert expected_b1(Exponential(1.0), n) == pytest.approx(h, abs=1e-8)
    assert expected_b2(Exponential(1.0), n) == pytest.approx(h - 1.0, abs=1e-8)


def test_n1_second_is_zero():
    assert expected_b2(Exponential(1.0), 1) == 0.0


@pytest.mark.parametrize("dist", [Uniform(0, 1), Exponential(1.0), LogNormal(0, 0.5)], ids=repr)
def test_order_statistic_means_monotone(dist):
    prev1 = prev2 = -1.0
    for n in (2, 3, 5, 10, 20):
        b1, b2 = expected_b1(dist, n), expected_b2(dist, n)
        assert b1 >= b2
        assert b1 >= prev1 and b2 >= prev2
        prev1, prev2 = b1, b2


@pytest.mark.parametrize("dist", [Uniform(0, 1), Exponential(1.0)], ids=repr)
@pytest.mark.parametrize("n", [2, 5, 10, 50])
def test_gap_bounded_by_hazard_sup(dist, n):
    assert expected_b1(dist, n) - expected_b2(dist, n) <= hazard_ratio_sup(dist) + 1e-9


@pytest.mark.parametrize("dist, _", FAMILIES, ids=IDS)
def test_dict_round_trip(dist, _):
    spec = json.loads(json.dumps(dist.to_dict()))
    assert distribution_from_dict(spec) == dist


@pytest.mark.parametrize(
    "spec",
    [{"kind": "uniform", "a": 0}, {"kind": "exponential", "rate": -1}, {"kind": "pareto"}, {"kind": "uniform", "a": 1, "b": 0}],
)
def test_bad_specs(spec):
    with pytest.raises((ConfigError, ValueError)):
        distribution_from_dict(spec)
