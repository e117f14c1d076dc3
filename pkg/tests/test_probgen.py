import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from nkinterdict import probgen
from nkinterdict.errors import DomainError


def test_severe_event_formula():
    out = probgen.severe_event({1: 0.2, 2: 0.7}, region=[1], n=1)
    assert out[1] == pytest.approx(0.2 + 0.8 / 5)  # 0.36
    assert out[2] == 0.7


def test_severe_event_identity_and_fixed_point():
    base = {1: 0.2, 2: 0.9, 3: 1.0}
    assert probgen.severe_event(base, region=[1, 2, 3], n=0) == base
    out = probgen.severe_event(base, region=[3], n=3)
    assert out[3] == pytest.approx(1.0)


def test_severe_event_monotone_in_n():
    base = {i: 0.1 * i for i in range(1, 10)}
    region = [1, 3, 5, 7, 9]
    prev = probgen.severe_event(base, region, 0)
    for n in (1, 2, 3, 4):
        cur = probgen.severe_event(base, region, n)
        for lid in base:
            assert cur[lid] >= prev[lid] - 1e-15
            assert 0 < cur[lid] <= 1.0
        prev = cur


def test_budget_normalize_proportional():
    out = probgen.budget_normalize({i: 1.0 for i in range(4)}, 2.0)
    assert all(v == pytest.approx(0.5) for v in out.values())
    out = probgen.budget_normalize({1: 3.0, 2: 1.0}, 1.0)
    assert out[1] == pytest.approx(0.75)
    assert out[2] == pytest.approx(0.25)


def test_budget_normalize_clamp_and_redistribute():
    # scaling (10,1,1) to budget 2.4 pushes the first weight past 1:
    # clamp it, then split the remaining 1.4 proportionally -> (1.0, 0.7, 0.7)
    out = probgen.budget_normalize({"a": 10.0, "b": 1.0, "c": 1.0}, 2.4)
    assert out["a"] == pytest.approx(1.0)
    assert out["b"] == pytest.approx(0.7)
    assert out["c"] == pytest.approx(0.7)


def test_budget_normalize_errors():
    with pytest.raises(DomainError):
        probgen.budget_normalize({1: 1.0, 2: 1.0}, 3.0)  # budget > |E|
    with pytest.raises(DomainError):
        probgen.budget_normalize({1: -1.0}, 0.5)
    with pytest.raises(DomainError):
        probgen.budget_normalize({1: 1.0}, 0.0)


@given(st.lists(st.floats(min_value=0.01, max_value=100.0), min_size=2, max_size=30),
       st.floats(min_value=0.05, max_value=0.95),
       st.floats(min_value=0.1, max_value=1000.0))
@settings(max_examples=80, deadline=None)
def test_budget_normalize_properties(raw, frac, lam):
    budget = frac * len(raw)
    weights = {i: v for i, v in enumerate(raw)}
    out = probgen.budget_normalize(weights, budget)
    total = sum(out.values())
    assert abs(total - budget) <= 1e-12 * budget + 1e-14
    assert all(0 < v <= 1.0 + 1e-12 for v in out.values())
    # scale invariance: normalize(lam * raw, B) = normalize(raw, B)
    out2 = probgen.budget_normalize({i: lam * v for i, v in weights.items()}, budget)
    for i in weights:
        assert out2[i] == pytest.approx(out[i], rel=1e-12, abs=1e-13)


def test_sample_det():
    assert list(probgen.sample("det", 5, seed=123)) == [0.5] * 5


def test_sample_determinism():
    a = probgen.sample("texp", 1000, seed=42)
    b = probgen.sample("texp", 1000, seed=42)
    assert np.array_equal(a, b)
    c = probgen.sample("uniform", 1000, seed=43)
    d = probgen.sample("uniform", 1000, seed=44)
    assert not np.array_equal(c, d)


def test_texp_mean_within_3_sigma():
    # oracle: the analytic mean, cross-checked by quadrature
    quad_mean, _ = integrate.quad(lambda x: x * math.exp(-x) / (1 - math.exp(-1)), 0, 1)
    assert probgen.texp_mean() == pytest.approx(quad_mean, abs=1e-12)
    n = 10 ** 5
    draws = probgen.sample("texp", n, seed=7)
    assert np.all((draws > 0) & (draws < 1))
    sigma = draws.std(ddof=1) / math.sqrt(n)
    assert abs(draws.mean() - quad_mean) <= 3 * sigma


def test_range_uniform_bounds_and_chi2():
    ref = {1: 0.1, 2: 0.3, 3: 0.22}
    draws = probgen.range_uniform(ref, 10 ** 5, seed=5)
    assert draws.min() >= 0.1 and draws.max() <= 0.3
    hist, _ = np.histogram(draws, bins=20, range=(0.1, 0.3))
    _, p = stats.chisquare(hist)
    assert p > 0.01


def test_range_uniform_degenerate():
    draws = probgen.range_uniform({1: 0.2, 2: 0.2}, 100, seed=9)
    assert np.all(draws == 0.2)


def test_probability_csv_round_trip(net2):
    from nkinterdict.network import parse_probabilities

    csv = probgen.probability_csv(net2, {1: 0.125})
    net = parse_probabilities(csv, net2)
    assert net.line(1).pr == 0.125


def test_parse_region():
    assert probgen.parse_region("1\n\n# comment\n42\n") == [1, 42]
    with pytest.raises(DomainError):
        probgen.parse_region("abc\n")
