import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from prioloss.distributions import (
    Deterministic,
    ErlangK,
    Exponential,
    Hyperexponential,
    ZeroExponential,
    from_dict,
)

FAMILIES = [
    Exponential(3.0),
    Deterministic(0.4),
    ErlangK(3, 6.0),
    Hyperexponential(((0.25, 1.0), (0.75, 8.0))),
    ZeroExponential(0.3, 2.0),
]


def test_means():
    assert Exponential(10).mean() == pytest.approx(0.1)
    assert ZeroExponential(0.3, 2).mean() == pytest.approx(0.35)
    assert ErlangK(2, 4).mean() == pytest.approx(0.5)
    assert Hyperexponential(((0.5, 1.0), (0.5, 4.0))).mean() == pytest.approx(0.625)
    assert Deterministic(0.25).mean() == 0.25


def test_lst_closed_forms():
    assert Exponential(10).lst(0.5) == pytest.approx(10 / 10.5)
    assert ZeroExponential(0.3, 2).lst(1.0) == pytest.approx(0.766667, abs=1e-6)
    assert ErlangK(2, 4).lst(1.0) == pytest.approx(0.64)
    assert Deterministic(0.5).lst(2.0) == pytest.approx(math.exp(-1.0))


@pytest.mark.parametrize("dist", FAMILIES, ids=lambda d: d.kind)
def test_lst_at_zero_is_one(dist):
    assert dist.lst(0.0) == 1.0


@pytest.mark.parametrize("dist", FAMILIES, ids=lambda d: d.kind)
@pytest.mark.parametrize("s", [-1.0, float("nan"), float("inf")])
def test_lst_rejects_bad_argument(dist, s):
    with pytest.raises(ValueError):
        dist.lst(s)


@pytest.mark.parametrize("dist", FAMILIES, ids=lambda d: d.kind)
def test_lst_derivative_at_zero_is_mean(dist):
    # the transform is undefined for s < 0, so difference forward from 0
    h = 1e-6
    slope = (dist.lst(h) - dist.lst(0.0)) / h
    assert -slope == pytest.approx(dist.mean(), rel=1e-5)


@pytest.mark.parametrize("dist", FAMILIES, ids=lambda d: d.kind)
@given(s=st.floats(0.0, 50.0), ds=st.floats(1e-3, 10.0))
def test_lst_bounded_and_decreasing(dist, s, ds):
    a, b = dist.lst(s), dist.lst(s + ds)
    assert 0.0 < a <= 1.0
    assert b < a or (isinstance(dist, Deterministic) and dist.value == 0)


@given(rate=st.floats(0.01, 100.0), s=st.floats(0.0, 100.0))
def test_erlang_one_stage_is_exponential(rate, s):
    assert ErlangK(1, rate).lst(s) == pytest.approx(Exponential(rate).lst(s), rel=1e-14)


@pytest.mark.parametrize("dist", FAMILIES, ids=lambda d: d.kind)
@pytest.mark.parametrize("s", [0.1, 1.0, 10.0])
def test_lst_matches_empirical_transform(dist, s):
    rng = np.random.default_rng(11)
    x = dist.sample(rng, 200_000)
    y = np.exp(-s * x)
    se = y.std(ddof=1) / math.sqrt(len(y))
    assert abs(y.mean() - dist.lst(s)) <= 3 * se + 1e-12


@pytest.mark.parametrize("dist", FAMILIES, ids=lambda d: d.kind)
def test_sample_mean_converges(dist):
    rng = np.random.default_rng(5)
    x = dist.sample(rng, 1_000_000)
    assert (x >= 0).all()
    assert x.mean() == pytest.approx(dist.mean(), rel=0.01)


def test_exponential_sample_mean_three_sigma():
    mu = 4.0
    x = Exponential(mu).sample(np.random.default_rng(1), 1_000_000)
    # sd of the mean is (1/mu)/1000, so 3 sigma is 0.3 % of the mean
    assert abs(x.mean() - 1 / mu) < 3 * (1 / mu) / 1000


@pytest.mark.parametrize("dist", FAMILIES, ids=lambda d: d.kind)
def test_sampling_is_deterministic_per_seed(dist):
    a = dist.sample(np.random.default_rng(9), 100)
    b = dist.sample(np.random.default_rng(9), 100)
    np.testing.assert_array_equal(a, b)
    assert dist.sample(np.random.default_rng(3)) == dist.sample(np.random.default_rng(3))


def test_deterministic_sample():
    rng = np.random.default_rng(0)
    assert Deterministic(0.5).sample(rng) == 0.5
    assert (Deterministic(0.5).sample(rng, 10) == 0.5).all()


def test_zero_exponential_atom_frequency():
    x = ZeroExponential(0.3, 2.0).sample(np.random.default_rng(2), 100_000)
    frac = (x == 0).mean()
    assert abs(frac - 0.3) < 4 * math.sqrt(0.3 * 0.7 / 100_000)


def test_hyperexponential_normalises_with_warning():
    with pytest.warns(UserWarning):
        h = Hyperexponential(((1.0, 1.0), (3.0, 2.0)))
    assert [w for w, _ in h.branches] == pytest.approx([0.25, 0.75])
    assert h.lst(0.0) == pytest.approx(1.0)


@pytest.mark.parametrize(
    "dist",
    [Exponential(0.0), Exponential(-1.0), ErlangK(0, 1.0), ErlangK(2, 0.0), ZeroExponential(1.0, 2.0),
     ZeroExponential(-0.1, 2.0), Hyperexponential(()), Deterministic(-1.0)],
)
def test_problems_reported(dist):
    assert dist.problems()


@pytest.mark.parametrize("dist", FAMILIES, ids=lambda d: d.kind)
def test_dict_round_trip(dist):
    assert from_dict(dist.to_dict()) == dist


def test_from_dict_field_names():
    assert from_dict({"type": "exponential", "rate": 10.0}) == Exponential(10.0)
    assert from_dict({"type": "erlang", "shape": 2, "stage_rate": 4.0}) == ErlangK(2, 4.0)
    assert from_dict({"type": "zero_exponential", "atom": 0.2, "rate": 1.0}) == ZeroExponential(0.2, 1.0)
    h = from_dict({"type": "hyperexponential", "branches": [{"weight": 0.5, "rate": 1.0}, {"weight": 0.5, "rate": 2.0}]})
    assert h.mean() == pytest.approx(0.75)


@pytest.mark.parametrize(
    "data, where",
    [
        ({"type": "exponential", "rate": 1.0, "mean": 2.0}, "service.mean"),
        ({"type": "exponential"}, "service.rate"),
        ({"type": "gamma", "rate": 1.0}, "service.type"),
        ({"type": "hyperexponential", "branches": [{"weight": 1.0, "rat": 1.0}]}, "branches[0].rat"),
    ],
)
def test_from_dict_rejects_with_path(data, where):
    with pytest.raises(ValueError, match=where.replace("[", r"\[").replace("]", r"\]")):
        from_dict(data)
