from fractions import Fraction as F

import pytest

from cotlab.errors import InvalidMeasure, MissingKernelRow
from cotlab.measure import (
    Coupling, DiscreteMeasure, FiniteSpace, Kernel, compose, disintegrate, marginal, wasserstein1,
)

AB = FiniteSpace.from_labels(["a", "b"])
M = Coupling(AB, AB, ((F(1, 4), F(1, 4)), (F(0), F(1, 2))))


def line(coords):
    return FiniteSpace.from_labels([f"p{i}" for i in range(len(coords))], coords)


def test_marginal_of_product():
    P = Coupling.product(DiscreteMeasure(AB, (F(1, 2), F(1, 2))), DiscreteMeasure(AB, (F(1, 3), F(2, 3))))
    assert marginal(P, "row").weights == (F(1, 2), F(1, 2))
    assert marginal(P, "col").weights == (F(1, 3), F(2, 3))


def test_marginal_of_diagonal():
    P = Coupling.diagonal(DiscreteMeasure.uniform(AB))
    assert marginal(P, "col").weights == (F(1, 2), F(1, 2))


def test_marginal_regression_vector():
    assert marginal(M, "row").weights == (F(1, 2), F(1, 2))
    assert marginal(M, "col").weights == (F(1, 4), F(3, 4))


def test_disintegrate_rows():
    mu, K = disintegrate(M)
    assert mu.weights == (F(1, 2), F(1, 2))
    assert K.rows[0].weights == (F(1, 2), F(1, 2))
    assert K.rows[1].weights == (F(0), F(1))


def test_disintegrate_product_rows_equal_nu():
    nu = DiscreteMeasure(AB, (F(1, 3), F(2, 3)))
    _, K = disintegrate(Coupling.product(DiscreteMeasure.uniform(AB), nu))
    assert all(r == nu for r in K.rows.values())


def test_null_row_skipped_and_recompose_exact():
    P = Coupling(AB, AB, ((F(0), F(0)), (F(1, 3), F(2, 3))))
    mu, K = disintegrate(P)
    assert 0 not in K.rows
    assert compose(mu, K) == P


def test_compose_round_trip():
    assert compose(*disintegrate(M)) == M


def test_compose_dirac_and_deterministic():
    K = Kernel(AB, AB, {0: DiscreteMeasure(AB, (F(1, 5), F(4, 5))), 1: DiscreteMeasure.dirac(AB, 0)})
    P = compose(DiscreteMeasure.dirac(AB, 0), K)
    assert P.mass[1] == (0, 0) and sum(P.mass[0]) == 1
    K2 = Kernel(AB, AB, {0: DiscreteMeasure.dirac(AB, 1), 1: DiscreteMeasure.dirac(AB, 0)})
    assert compose(DiscreteMeasure.uniform(AB), K2).mass == ((0, F(1, 2)), (F(1, 2), 0))


def test_compose_missing_row():
    with pytest.raises(MissingKernelRow):
        compose(DiscreteMeasure.uniform(AB), Kernel(AB, AB, {0: DiscreteMeasure.dirac(AB, 0)}))


def test_w1_examples():
    X = line([F(0), F(1)])
    assert wasserstein1(DiscreteMeasure.dirac(X, 0), DiscreteMeasure.dirac(X, 1), exact=True) == 1
    mu = DiscreteMeasure.uniform(X)
    assert wasserstein1(mu, mu, exact=True) == 0
    Y = line([F(0), F(1, 2), F(1)])
    a = DiscreteMeasure(Y, (F(1, 2), F(1, 2), F(0)))
    b = DiscreteMeasure(Y, (F(0), F(1, 2), F(1, 2)))
    # uniform{0, 1} vs uniform{1, 2} rescaled by 1/2: every quantile moves 1/2
    assert wasserstein1(a, b, exact=True) == F(1, 2)
    assert wasserstein1(a, b) == pytest.approx(0.5, abs=1e-9)


def test_invalid_mass():
    with pytest.raises(InvalidMeasure):
        DiscreteMeasure(AB, (F(1, 2), F(1, 3)))
    with pytest.raises(InvalidMeasure):
        DiscreteMeasure(AB, (F(3, 2), F(-1, 2)))
