from fractions import Fraction as F
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cotlab.errors import Infeasible, InstanceTooLarge
from cotlab.generators import control_suite, transport_instance
from cotlab.lp import LinearSystem, lp_solve, transport_system
from cotlab.measure import DiscreteMeasure, FiniteSpace
from cotlab.oracles import transport_bruteforce, transport_vertices
from cotlab.paths import PathMeasure, PathSpace
from cotlab.rng import make_rng
from cotlab.transport import (
    ControlModel, causal_value, control_family, control_values, kantorovich, monge_bruteforce,
    monge_gap_study, unconstrained_value,
)

HALF = (F(1, 2), F(1, 2))


def test_dirac_polytope_single_point():
    res = lp_solve(transport_system((1, 0), (0, 1)), [0, 0, 0, 0])
    assert res.x == (0, 1, 0, 0)


def test_birkhoff_square():
    res = lp_solve(transport_system(HALF, HALF), [0, 1, 1, 0])
    assert res.value == 0
    assert res.x == (F(1, 2), 0, 0, F(1, 2))
    # the two vertices of the square, enumerated independently
    verts = transport_vertices(HALF, HALF)
    assert sorted(verts) == sorted([((F(1, 2), 0), (0, F(1, 2))), ((0, F(1, 2)), (F(1, 2), 0))])


def test_w1_objective_zero():
    X = FiniteSpace.from_labels(["0", "1"])
    v, _ = kantorovich(DiscreteMeasure.uniform(X), DiscreteMeasure.uniform(X))
    assert v == 0


def test_kantorovich_examples():
    X = FiniteSpace.from_labels(["0", "1"])
    mu = DiscreteMeasure(X, (F(1, 3), F(2, 3)))
    assert kantorovich(mu, mu, "hamming")[0] == 0
    v, P = kantorovich(DiscreteMeasure.dirac(X, 0), DiscreteMeasure.uniform(X))
    assert v == F(1, 2) and P.mass[0] == HALF


def test_infeasible_system():
    sys = LinearSystem(("a",), (({0: 1}, F(1)), ({0: 1}, F(2))))
    with pytest.raises(Infeasible):
        lp_solve(sys, [1])


def test_float_mode_matches_exact():
    rng = make_rng(3, "float")
    for _ in range(20):
        a, b, C = transport_instance(rng)
        flat = [c for r in C for c in r]
        ex = lp_solve(transport_system(a, b), flat).value
        fl = lp_solve(transport_system([float(v) for v in a], [float(v) for v in b]), [float(c) for c in flat]).value
        assert fl == pytest.approx(float(ex), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_lp_matches_vertex_oracle(seed):
    a, b, C = transport_instance(make_rng(seed, "prop"))
    flat = [c for r in C for c in r]
    for sense in ("min", "max"):
        assert lp_solve(transport_system(a, b), flat, sense=sense).value == transport_bruteforce(a, b, C, sense)[0]


def test_vertices_are_feasible_and_distinct():
    a, b, _ = transport_instance(make_rng(1, "v"))
    verts = transport_vertices(a, b)
    assert len(set(verts)) == len(verts)
    for P in verts:
        assert all(sum(r) == ai for r, ai in zip(P, a))
        assert all(sum(P[i][j] for i in range(3)) == bj for j, bj in enumerate(b))


# -- Monge -----------------------------------------------------------------------------

def test_monge_constant_map():
    X = FiniteSpace.from_labels(["a", "b"])
    Y = FiniteSpace.from_labels(["c", "d"])
    r = monge_bruteforce(DiscreteMeasure.uniform(X), DiscreteMeasure.dirac(Y, 1))
    assert r.feasible and r.map.targets == (1, 1)


def test_monge_infeasible_granularity():
    X = FiniteSpace.from_labels(["a", "b"])
    r = monge_bruteforce(DiscreteMeasure.uniform(X), DiscreteMeasure(X, (F(1, 4), F(3, 4))))
    assert not r.feasible


def test_monge_equals_kantorovich_uniform():
    X = FiniteSpace.grid(4)
    Y = FiniteSpace.from_labels([str(i) for i in range(4)])
    mu, nu = DiscreteMeasure.uniform(X), DiscreteMeasure.uniform(Y)
    assert monge_bruteforce(mu, nu).value == kantorovich(mu, nu)[0]


def test_monge_limit():
    X = FiniteSpace.grid(8)
    with pytest.raises(InstanceTooLarge):
        monge_bruteforce(DiscreteMeasure.uniform(X), DiscreteMeasure.uniform(X), limit=10)


def test_gap_study_tables():
    rows = monge_gap_study("independent", [2, 4, 8])
    assert [r["gap"] for r in rows] == [F(1, 4), F(1, 4), 0]
    assert all(r["gap"] >= 0 for r in rows)
    rows = monge_gap_study("granular", [2, 4])
    assert rows[0]["feasible"] is False and rows[1]["gap"] == 0
    assert all(r["gap"] == 0 for r in monge_gap_study("diagonal", [2, 4]))


# -- causal transport ------------------------------------------------------------------

def test_causal_gap_half(coins):
    ys, mu = coins
    cost = lambda y, x: F(int(x[0] != y[1]))  # noqa: E731
    assert causal_value(mu, ys, cost)[0] == F(1, 2)
    assert unconstrained_value(mu, ys, cost)[0] == 0


def test_causal_copy_cost_zero(coins):
    ys, mu = coins
    assert causal_value(mu, ys, lambda y, x: F(int(x[0] != y[0])))[0] == 0


def test_causal_one_step_is_pointwise_min():
    ys = PathSpace.from_labels([["a", "b", "c"]])
    xs = PathSpace.from_labels([["u", "v"]])
    mu = PathMeasure(ys, {("a",): F(1, 2), ("b",): F(1, 3), ("c",): F(1, 6)})
    table = {("a",): (3, 1), ("b",): (0, 2), ("c",): (5, 4)}
    c = lambda y, x: F(table[y][xs.alphabets[0].index(x[0])])  # noqa: E731
    expect = sum(w * min(table[y]) for y, w in mu.weights.items())
    assert causal_value(mu, xs, c)[0] == expect


# -- control ---------------------------------------------------------------------------

def test_linear_relaxed_equals_pure(coins):
    ys, mu = coins
    pairs = product(ys.paths(), ys.paths())
    model = ControlModel(mu, ys, {pair: F((3 * i) % 7) for i, pair in enumerate(pairs)})
    v = control_values(model)
    assert v["relaxed"] == v["pure"] and v["method"] == "lp"


def test_constant_reward(coins):
    ys, mu = coins
    v = control_values(ControlModel(mu, ys, lambda y, x: F(3)))
    assert v["relaxed"] == v["pure"] == 3


def test_square_mean_one_step_no_gap():
    for m in (2, 3, 4):
        v = control_values(control_family(m, "square_mean"))
        assert v["gap"] == 0


def test_target_mean_gap_shrinks():
    gaps = [control_values(control_family(m, "target_mean"))["gap"] for m in (2, 4, 8)]
    assert gaps == [F(1, 36), F(1, 144), F(1, 576)]


def test_control_suite_agrees():
    for model in control_suite(make_rng(5, "control"), 10):
        v = control_values(model)
        assert v["relaxed"] == v["pure"]
