from fractions import Fraction as F
from itertools import product

import pytest

from cotlab.errors import GranularityError, NotRepresentable
from cotlab.generators import monge_family
from cotlab.measure import Coupling, DiscreteMeasure, FiniteSpace, marginal
from cotlab.monge import (
    MongeMap, agreement_defect, cell_family, cell_transport, dyadic_partitions, monge_approximate,
    one_marginal_approx, oscillation_bound, quantile_map, representable_levels,
)
from cotlab.stable import default_family, stable_gap

BITS = FiniteSpace.from_labels(["0", "1"])


def test_dyadic_four():
    parts = dyadic_partitions(FiniteSpace.grid(4))
    assert parts.levels == (((0, 4),), ((0, 2), (2, 4)), ((0, 1), (1, 2), (2, 3), (3, 4)))


def test_dyadic_one_and_five():
    assert dyadic_partitions(FiniteSpace.grid(1)).levels == (((0, 1),),)
    assert dyadic_partitions(FiniteSpace.grid(5)).cells(1) == ((0, 3), (3, 5))


def test_cell_transport_examples():
    q = F(1, 4)
    assert cell_transport((q, q), (q, q)) == (0, 1)
    assert cell_transport((q, q), (F(1, 2),)) == (0, 0)
    e = F(1, 8)
    assert cell_transport((e,) * 4, (F(3, 8), e)) == (0, 0, 0, 1)


def test_cell_transport_monotone_is_unique():
    e = F(1, 8)
    fits = [t for t in product(range(2), repeat=4)
            if sum(e for v in t if v == 0) == F(3, 8) and all(a <= b for a, b in zip(t, t[1:]))]
    assert fits == [(0, 0, 0, 1)]


def test_cell_transport_refuses_split():
    with pytest.raises(NotRepresentable) as exc:
        cell_transport((F(1, 2), F(1, 2)), (F(1, 4), F(3, 4)))
    assert exc.value.plan.splits


def _product4():
    return Coupling.product(DiscreteMeasure.uniform(FiniteSpace.grid(4)), DiscreteMeasure.uniform(BITS))


def test_product_level_one_cell_masses():
    P = _product4()
    parts = dyadic_partitions(P.row_space)
    phi, P1 = monge_approximate(P, parts, 1)
    assert phi.targets == (0, 1, 0, 1)
    for a, b in parts.cells(1):
        for j in range(2):
            assert sum(P1.mass[i][j] for i in range(a, b)) == F(1, 4) == sum(P.mass[i][j] for i in range(a, b))


def test_point_target_every_level():
    X = FiniteSpace.grid(4)
    P = Coupling.product(DiscreteMeasure.uniform(X), DiscreteMeasure.dirac(BITS, 1))
    for k in range(3):
        phi, Pk = monge_approximate(P, k=k)
        assert set(phi.targets) == {1} and Pk == P


def test_monge_input_reproduced():
    X, Y = FiniteSpace.grid(4), FiniteSpace.grid(3)
    mu = DiscreteMeasure.uniform(X)
    phi = MongeMap(X, Y, (0, 1, 1, 2))
    P = phi.coupling(mu)
    out, Pk = monge_approximate(P, k=2)
    assert out == phi and Pk == P
    assert one_marginal_approx(P, 2) == phi


def test_one_marginal_is_quantile_at_level_zero():
    for m in (4, 8):
        P = dict(monge_family(m))["monotone"]
        mu, nu = marginal(P, "row"), marginal(P, "col")
        assert one_marginal_approx(P, 0) == quantile_map(mu, nu)


def test_one_marginal_matches_map_output():
    P = _product4()
    assert one_marginal_approx(P, 1) == monge_approximate(P, k=1)[0]


def test_granularity_error():
    P = _product4()
    with pytest.raises(GranularityError):
        monge_approximate(P, k=2)
    assert representable_levels(P) == [0, 1]


@pytest.mark.parametrize("m", [4, 8, 16])
def test_density_identities(m):
    for _, P in monge_family(m):
        parts = dyadic_partitions(P.row_space)
        fam = default_family(P.row_space, P.col_space)
        cfam = cell_family(parts, P.col_space)
        gaps, cgaps = [], []
        for k in representable_levels(P, parts):
            _, Pk = monge_approximate(P, parts, k)
            assert marginal(Pk, "row") == marginal(P, "row")
            assert marginal(Pk, "col") == marginal(P, "col")
            assert agreement_defect(Pk, P, parts.cells(k)) == 0
            g = stable_gap(Pk, P, fam)
            assert g <= oscillation_bound(Pk, P, fam, parts.cells(k))
            gaps.append(g)
            cgaps.append(stable_gap(Pk, P, cfam))
        assert gaps == sorted(gaps, reverse=True)
        assert cgaps == sorted(cgaps, reverse=True)


def test_monotone_reproduced_at_every_level():
    P = dict(monge_family(16))["monotone"]
    parts = dyadic_partitions(P.row_space)
    assert all(monge_approximate(P, parts, k)[1] == P for k in range(parts.top + 1))


def test_cell_gap_halves_on_product():
    P = dict(monge_family(8))["product"]
    parts = dyadic_partitions(P.row_space)
    cfam = cell_family(parts, P.col_space)
    gaps = [stable_gap(monge_approximate(P, parts, k)[1], P, cfam) for k in representable_levels(P, parts)]
    assert gaps == [F(1, 4), F(1, 8), F(1, 16)]
