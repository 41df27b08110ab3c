from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cotlab.compat import (
    CHECKERS, causal_constraints, check_ci, check_mgale, check_proj, check_reverse, law_to_vector, run_all,
)
from cotlab.errors import UndefinedPrefix
from cotlab.generators import LAW_KINDS, random_adapted_map, random_law, random_path_measure
from cotlab.paths import (
    AdaptedMap, JointPathLaw, PathMeasure, PathSpace, is_adapted, prefix_conditional, push_adapted, y_marginal,
)
from cotlab.rng import make_rng

seeds = st.integers(0, 2**32 - 1)


def test_y_marginal_examples(coins, copy_law):
    ys, mu = coins
    J = JointPathLaw(ys, ys, {(("h", "t"), ("t", "t")): F(1)})
    assert y_marginal(J).weights == {("h", "t"): 1}
    assert y_marginal(copy_law) == mu
    const = push_adapted(mu, AdaptedMap.from_function(mu, lambda n, p: "h"), ys)
    assert y_marginal(copy_law.mix(const, F(1, 3))) == mu


def test_prefix_conditionals(coins, copy_law, product_law, anticipative):
    for y in coins[0].paths():
        a = prefix_conditional(copy_law, 1, y, "path")
        b = prefix_conditional(copy_law, 1, y, "prefix")
        assert dict(a.dist) == dict(b.dist) == {(y[0],): 1}
        assert dict(prefix_conditional(product_law, 1, y).dist) == {("h",): F(1, 2), ("t",): F(1, 2)}
        assert dict(prefix_conditional(anticipative, 1, y, "path").dist) == {(y[1],): 1}
        assert dict(prefix_conditional(anticipative, 1, y, "prefix").dist) == {("h",): F(1, 2), ("t",): F(1, 2)}


def test_push_copy_is_diagonal(copy_law):
    assert all(y == x for (y, x) in copy_law.support)


def test_push_constant_is_product_with_point(coins):
    ys, mu = coins
    J = push_adapted(mu, AdaptedMap.from_function(mu, lambda n, p: "t"), ys)
    assert {x for (_, x) in J.support} == {("t", "t")}
    assert y_marginal(J) == mu


def test_push_xor(coins):
    ys, mu = coins
    flip = {"h": "t", "t": "h"}
    f = AdaptedMap.from_function(mu, lambda n, p: p[0] if n == 1 else (p[0] if p[1] == "h" else flip[p[0]]))
    J = push_adapted(mu, f, ys)
    assert len(J.support) == 4 and set(J.support.values()) == {F(1, 4)}
    for y in ys.paths():
        for n in (1, 2):
            assert len(prefix_conditional(J, n, y).dist) == 1
    assert is_adapted(J)


def test_undefined_prefix(coins):
    ys, mu = coins
    f = AdaptedMap(({("h",): "h"}, {("h", "h"): "h"}))
    with pytest.raises(UndefinedPrefix):
        f(("t", "h"))


# -- checkers ------------------------------------------------------------------------

@pytest.mark.parametrize("name", list(CHECKERS))
def test_trivial_cases_pass(name, copy_law, product_law):
    assert CHECKERS[name](copy_law).ok
    assert CHECKERS[name](product_law).ok
    assert CHECKERS[name](copy_law).max_violation == 0


@pytest.mark.parametrize("name", list(CHECKERS))
def test_anticipative_fails_with_half(name, anticipative):
    r = CHECKERS[name](anticipative)
    assert not r.ok and r.max_violation == F(1, 2)


def test_ci_witness(anticipative):
    r = check_ci(anticipative)
    assert r.witness["n"] == 1


def test_mgale_conditional_expectation(anticipative):
    # E[1{Y_2 = h} | Y_1, X_1] = 1{X_1 = h}, which differs from 1/2 by exactly 1/2
    r = check_mgale(anticipative)
    assert r.max_violation == F(1, 2)


def test_one_step_constraints_are_marginals_only():
    ys = PathSpace.from_labels([["a", "b", "c"]])
    mu = PathMeasure.uniform(ys)
    sys = causal_constraints(mu, ys)
    assert all(lab[0] == "marginal" for lab in sys.labels)


def test_constraints_contain_product(coins, product_law, anticipative):
    ys, mu = coins
    sys = causal_constraints(mu, ys)
    assert sys.max_residual(law_to_vector(product_law, sys)) == 0
    assert sys.max_residual(law_to_vector(anticipative, sys)) == F(1, 4)


@settings(max_examples=80, deadline=None)
@given(seeds, st.sampled_from(LAW_KINDS))
def test_checkers_agree(seed, kind):
    J = random_law(make_rng(seed, "agree"), kind)
    verdicts = {r.ok for r in run_all(J).values()}
    assert len(verdicts) == 1


@settings(max_examples=80, deadline=None)
@given(seeds, st.sampled_from(LAW_KINDS))
def test_constraints_iff_compatible(seed, kind):
    J = random_law(make_rng(seed, "sys"), kind)
    sys = causal_constraints(y_marginal(J), J.x_space)
    assert (sys.max_residual(law_to_vector(J, sys)) == 0) == check_ci(J).ok


@settings(max_examples=60, deadline=None)
@given(seeds, st.fractions(0, 1))
def test_compatible_set_is_convex(seed, lam):
    rng = make_rng(seed, "convex")
    J1 = random_law(rng, "mixture")
    mu = y_marginal(J1)
    J2 = push_adapted(mu, random_adapted_map(rng, mu, J1.x_space), J1.x_space)
    mix = J1.mix(J2, lam)
    assert all(r.ok for r in run_all(mix).values())


def test_closedness_surrogate(coins, copy_law, product_law):
    # J_k = (1 - 1/k) * copy + (1/k) * product stays compatible and converges to copy
    for k in (1, 2, 4, 8, 1000):
        assert check_ci(copy_law.mix(product_law, 1 - F(1, k))).ok
    assert check_ci(copy_law).ok


def test_float_mode_uses_tolerance(anticipative, copy_law):
    assert check_ci(copy_law.as_float(), 1e-9).ok
    assert not check_ci(anticipative.as_float(), 1e-9).ok
    r = check_reverse(anticipative.as_float(), 1e-9)
    assert r.max_violation == pytest.approx(0.5)
    assert check_proj(anticipative).max_violation == F(1, 2)


def test_random_measure_weights_sum_to_one():
    from cotlab.generators import random_path_space

    rng = make_rng(0, "m")
    for _ in range(20):
        mu = random_path_measure(rng, random_path_space(rng, 3, 3, "y"))
        assert sum(mu.weights.values()) == 1
