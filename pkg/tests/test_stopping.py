from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cotlab.compat import check_ci
from cotlab.errors import NotRandomizedST
from cotlab.generators import random_tau
from cotlab.rng import make_rng
from cotlab.stopping import (
    INF, RandomizedStoppingTime, StoppingTime, approximate_stopping, decompose_stopping, first_crossing,
    indicator_process, is_randomized_st, parse_time, reconstruction_defect, time_coord, time_key,
    uniform_time_family,
)

H = F(1, 2)


def uniform12(ys):
    return RandomizedStoppingTime(ys, {y: {1: H, 2: H} for y in ys.paths()})


def test_independent_tau_ok(coins):
    ys, mu = coins
    assert is_randomized_st(uniform12(ys), mu).ok


def test_pure_lifted_ok(coins):
    ys, mu = coins
    st_ = StoppingTime(ys, {y: 1 if y[0] == "h" else 2 for y in ys.paths()})
    assert is_randomized_st(RandomizedStoppingTime.from_stopping_time(st_), mu).ok


def test_anticipative_spread_one(coins):
    ys, mu = coins
    tau = RandomizedStoppingTime(ys, {y: {1 if y[1] == "h" else 2: 1} for y in ys.paths()})
    r = is_randomized_st(tau, mu)
    assert not r.ok and r.max_violation == 1 and r.witness["t"] == 1
    with pytest.raises(NotRandomizedST):
        approximate_stopping(tau, mu)
    with pytest.raises(NotRandomizedST):
        decompose_stopping(tau, mu)


def test_not_a_stopping_time(coins):
    ys, _ = coins
    with pytest.raises(ValueError):
        StoppingTime(ys, {("h", "h"): 1, ("h", "t"): 2, ("t", "h"): 2, ("t", "t"): 2})


def test_decompose_uniform(coins):
    ys, mu = coins
    parts = decompose_stopping(uniform12(ys), mu)
    assert [w for w, _ in parts] == [H, H]
    assert [set(s.rule.values()) for _, s in parts] == [{1}, {2}]


def test_decompose_pure(coins):
    ys, mu = coins
    st_ = StoppingTime(ys, {y: 2 for y in ys.paths()})
    assert decompose_stopping(RandomizedStoppingTime.from_stopping_time(st_), mu) == [(1, st_)]


def test_decompose_prefix_dependent(coins):
    ys, mu = coins
    tau = RandomizedStoppingTime(ys, {y: ({1: H, 2: H} if y[0] == "h" else {2: 1}) for y in ys.paths()})
    parts = decompose_stopping(tau, mu)
    first = StoppingTime(ys, {y: 1 if y[0] == "h" else 2 for y in ys.paths()})
    always2 = StoppingTime(ys, {y: 2 for y in ys.paths()})
    assert parts == [(H, first), (H, always2)]
    assert reconstruction_defect(tau, parts, mu) == 0


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["hazard", "pure"]))
def test_decomposition_reconstructs(seed, kind):
    tau, mu = random_tau(make_rng(seed, "st"), kind)
    parts = decompose_stopping(tau, mu)
    assert reconstruction_defect(tau, parts, mu) == 0
    assert sum(w for w, _ in parts) == 1


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["hazard", "pure", "arbitrary"]))
def test_indicator_process_compatibility(seed, kind):
    tau, mu = random_tau(make_rng(seed, "ind"), kind)
    assert check_ci(indicator_process(tau, mu)).ok == is_randomized_st(tau, mu).ok


def test_first_crossing():
    assert first_crossing((0, 0, 1, 1)) == 3
    assert first_crossing((0, 0)) == INF
    assert first_crossing((0.4, 0.5)) == 2


def test_pure_is_fixed_point(coins):
    ys, mu = coins
    st_ = StoppingTime(ys, {y: 1 if y[0] == "h" else INF for y in ys.paths()})
    r = approximate_stopping(RandomizedStoppingTime.from_stopping_time(st_), mu)
    assert r.st == st_ and r.w1 == pytest.approx(0, abs=1e-12)


def test_uniform_family_w1_nonincreasing():
    w1 = [approximate_stopping(*uniform_time_family(m)).w1 for m in (4, 8, 16)]
    assert w1[0] >= w1[1] >= w1[2]
    assert w1 == pytest.approx([1 / 12, 1 / 16, 1 / 32], abs=1e-9)


def test_time_spelling():
    assert time_key(INF) == "inf" and parse_time("inf") == INF and parse_time("3") == 3
    assert time_coord(1) == 0.5 and time_coord(INF) == 1.0
