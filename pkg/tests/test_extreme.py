from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cotlab.compat import check_ci
from cotlab.errors import InstanceTooLarge, NotCompatible
from cotlab.extreme import (
    MixtureDecomposition, component_bound, count_adapted_maps, decompose_compatible, iter_adapted_maps,
    linear_opt_via_extremes, recompose,
)
from cotlab.generators import random_law, random_objective, small_causal_instance
from cotlab.paths import AdaptedMap, JointPathLaw, PathMeasure, PathSpace, is_adapted, push_adapted, y_marginal
from cotlab.rng import make_rng
from cotlab.transport import causal_value

H = F(1, 2)


def bit_space():
    return PathSpace.from_labels([["0", "1"]])


def test_one_step_shared_split():
    ys = bit_space()
    xs = PathSpace.from_labels([["a", "b"]])
    J = JointPathLaw(ys, xs, {(y, x): F(1, 4) for y in ys.paths() for x in xs.paths()})
    D = decompose_compatible(J)
    assert D.weights == (H, H)
    assert [f.steps[0][("0",)] for f in D.maps] == ["a", "b"]
    assert all(set(f.steps[0].values()) == {lab} for f, lab in zip(D.maps, "ab"))


def test_adapted_single_component(copy_law):
    D = decompose_compatible(copy_law)
    assert len(D) == 1 and D.weights == (1,)
    assert push_adapted(y_marginal(copy_law), D.maps[0], copy_law.x_space) == copy_law


def test_copy_two_steps(coins):
    ys, mu = coins
    J = JointPathLaw(ys, ys, {(y, (a, a)): F(1, 8) for y in ys.paths() for a in "ht"})
    D = decompose_compatible(J)
    assert D.weights == (H, H)
    assert recompose(D, mu, ys) == J


def test_incompatible_refused(anticipative):
    with pytest.raises(NotCompatible):
        decompose_compatible(anticipative)


def test_single_component_recompose_is_push(coins):
    ys, mu = coins
    f = AdaptedMap.from_function(mu, lambda n, p: p[0])
    D = MixtureDecomposition(((F(1), f),), ((F(0), F(1)),))
    assert recompose(D, mu, ys) == push_adapted(mu, f, ys)


def test_two_components_differing_at_one_prefix(coins):
    ys, mu = coins
    f = AdaptedMap.from_function(mu, lambda n, p: "h")
    g_steps = [dict(s) for s in f.steps]
    g_steps[1][("t", "t")] = "t"
    g = AdaptedMap(tuple(g_steps))
    J = recompose(MixtureDecomposition(((H, f), (H, g)), ((F(0), H), (H, F(1)))), mu, ys)
    assert J.support[(("t", "t"), ("h", "t"))] == F(1, 8)
    assert J.support[(("t", "t"), ("h", "h"))] == F(1, 8)
    assert J.support[(("h", "h"), ("h", "h"))] == F(1, 4)


def test_mixture_intervals_validated(coins):
    ys, mu = coins
    f = AdaptedMap.from_function(mu, lambda n, p: "h")
    with pytest.raises(ValueError):
        MixtureDecomposition(((H, f), (H, f)), ((F(0), H), (F(1, 4), F(3, 4))))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["kernel", "mixture", "joint"]))
def test_round_trip_exact(seed, kind):
    J = random_law(make_rng(seed, "rt"), kind)
    if not check_ci(J).ok:
        return
    D = decompose_compatible(J)
    mu = y_marginal(J)
    assert recompose(D, mu, J.x_space) == J
    assert len(D) <= component_bound(J)
    assert all(is_adapted(push_adapted(mu, f, J.x_space)) for f in D.maps)


def test_copy_objective_one_step():
    ys = bit_space()
    mu = PathMeasure.uniform(ys)
    v, f = linear_opt_via_extremes(mu, ys, lambda y, x: F(int(x == y)))
    assert v == 1 and all(f(y) == y for y in ys.paths())


def test_constant_objective(coins):
    ys, mu = coins
    assert linear_opt_via_extremes(mu, ys, lambda y, x: F(7, 3))[0] == F(7, 3)


def test_future_guess_half(coins):
    ys, mu = coins
    assert linear_opt_via_extremes(mu, ys, lambda y, x: F(int(x[0] == y[1])))[0] == H


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_lp_equals_extreme_search(seed):
    rng = make_rng(seed, "lin")
    mu, xs = small_causal_instance(rng)
    c = random_objective(rng, mu, xs)
    for sense in ("min", "max"):
        assert causal_value(mu, xs, c, sense)[0] == linear_opt_via_extremes(mu, xs, c, sense)[0]


def test_enumeration_guard(coins):
    ys, mu = coins
    assert count_adapted_maps(mu, ys) == 2 ** 2 * 2 ** 4
    assert len(list(iter_adapted_maps(mu, ys))) == 64
    with pytest.raises(InstanceTooLarge):
        next(iter_adapted_maps(mu, ys, limit=10))
