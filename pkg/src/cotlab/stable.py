"""Test functionals that are measurable in the row variable and continuous in the
column variable, a finite-family gap between couplings, and the Gaussian
rotation demo showing why diagonal indicators are not weakly continuous."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import EmptyFamily, ShapeMismatch
from .measure import Coupling, FiniteSpace, to_number


def _numbers(vals) -> tuple:
    if type(vals) is tuple and all(type(v) is Fraction for v in vals):
        return vals
    return tuple(to_number(v) for v in vals)


@dataclass(frozen=True)
class TestFunction:
    """Either a full ``table[i][j]`` or a product ``f[i] * g[j]``."""

    __test__ = False  # not a pytest class

    kind: str
    shape: tuple
    table: tuple = ()
    f: tuple = ()
    g: tuple = ()
    bound: object = None
    name: str = ""

    def __post_init__(self):
        if self.kind == "table":
            if len(self.table) != self.shape[0] or any(len(r) != self.shape[1] for r in self.table):
                raise ShapeMismatch("table does not match declared shape")
            object.__setattr__(self, "table", tuple(tuple(to_number(v) for v in r) for r in self.table))
            sup = max((abs(v) for r in self.table for v in r), default=0)
        elif self.kind == "product":
            if len(self.f) != self.shape[0] or len(self.g) != self.shape[1]:
                raise ShapeMismatch("product factors do not match declared shape")
            object.__setattr__(self, "f", _numbers(self.f))
            object.__setattr__(self, "g", _numbers(self.g))
            fmax = max((abs(self.f[i]) for i in self.f_support), default=0)
            sup = fmax * max((abs(b) for b in self.g), default=0)
        else:
            raise ValueError(f"unknown test function kind {self.kind!r}")
        if self.bound is None:
            object.__setattr__(self, "bound", sup)
        elif sup > self.bound:
            raise ValueError(f"entries reach {sup}, above declared bound {self.bound}")

    @classmethod
    def from_table(cls, table, name: str = "", bound=None) -> "TestFunction":
        table = tuple(tuple(r) for r in table)
        return cls("table", (len(table), len(table[0]) if table else 0), table=table, bound=bound, name=name)

    @classmethod
    def product(cls, f: Sequence, g: Sequence, name: str = "") -> "TestFunction":
        return cls("product", (len(f), len(g)), f=tuple(f), g=tuple(g), name=name)

    @cached_property
    def f_support(self) -> tuple:
        """Row indices where the product factor ``f`` is nonzero."""
        return tuple(i for i, v in enumerate(self.f) if v != 0)

    def value(self, i: int, j: int):
        if self.kind == "table":
            return self.table[i][j]
        return self.f[i] * self.g[j]


def diagonal_indicator(n: int) -> TestFunction:
    one, zero = Fraction(1), Fraction(0)
    return TestFunction.from_table([[one if i == j else zero for j in range(n)] for i in range(n)], name="1{x=y}")


def eval_test(P: Coupling, phi: TestFunction):
    """``sum_ij P[i][j] * phi(i, j)``; exact when both sides are rational."""
    if phi.shape != P.shape:
        raise ShapeMismatch(f"test function shape {phi.shape} vs coupling shape {P.shape}")
    zero = Fraction(0) if P.exact else 0.0
    if phi.kind == "product":
        total = zero
        for i in phi.f_support:
            total += phi.f[i] * sum((w * gj for w, gj in zip(P.mass[i], phi.g) if w), zero)
        return total
    return sum((w * t for row, trow in zip(P.mass, phi.table) for w, t in zip(row, trow) if w), zero)


def stable_gap(P: Coupling, Q: Coupling, family: Sequence[TestFunction]):
    """Largest discrepancy ``|P(phi) - Q(phi)|`` over ``family``."""
    if not family:
        raise EmptyFamily("stable_gap needs at least one test function")
    if P.row_space != Q.row_space or P.col_space != Q.col_space:
        raise ShapeMismatch("couplings live on different spaces")
    return max(abs(eval_test(P, phi) - eval_test(Q, phi)) for phi in family)


def thresholds(levels: int) -> tuple:
    """Dyadic grid points ``j / 2^l`` for ``l = 1..levels``, sorted and deduplicated."""
    pts = {Fraction(j, 2 ** l) for l in range(1, levels + 1) for j in range(2 ** l)}
    return tuple(sorted(pts))


def _lipschitz_functions(Y: FiniteSpace, levels: int) -> list:
    out = []
    for k in range(Y.dim):
        col = tuple(Y.coord(j)[k] for j in range(Y.size))
        out.append((f"y{k + 1}", col))
        for th in thresholds(levels):
            # ramp reaching 1 at th; th = 0 gives the constant 1
            out.append((f"ramp(y{k + 1},{th})", tuple(min(Fraction(1), 1 + c - th) for c in col)))
    return out


def default_family(X: FiniteSpace, Y: FiniteSpace, L: int = 1) -> list:
    """Products ``1{x = a} * g(y)`` with ``g`` a 1-Lipschitz coordinate or ramp function.

    Order: row atom, then coordinate, then the coordinate itself followed by
    ramps at increasing thresholds.  ``ramp(y, 0)`` is the constant 1.
    """
    gs = _lipschitz_functions(Y, L)
    fam = []
    one, zero = Fraction(1), Fraction(0)
    for i, lab in enumerate(X.labels):
        f = tuple(one if k == i else zero for k in range(X.size))
        for gname, g in gs:
            fam.append(TestFunction.product(f, g, name=f"1{{x={lab}}}*{gname}"))
    return fam


# -- Gaussian rotation demo -------------------------------------------------

def gaussian_grid(grid: int) -> tuple:
    """Cell-centred ``grid x grid`` lattice on ``[-3, 3]^2`` with weights proportional
    to the standard normal density; returns (plane points, weights, space)."""
    h = 6.0 / grid
    centres = -3.0 + (np.arange(grid) + 0.5) * h
    pts = np.array([(a, b) for a in centres for b in centres])
    w = np.exp(-0.5 * (pts ** 2).sum(axis=1))
    w = w / w.sum()
    coords = (pts + 3.0) / 6.0
    space = FiniteSpace(tuple((f"g{i}_{j}", tuple(coords[i * grid + j])) for i in range(grid) for j in range(grid)), 2)
    return pts, w, space


def snap(points: np.ndarray, grid: int) -> np.ndarray:
    """Index of the nearest lattice atom (Euclidean); ties go to the lower index.

    Per-axis rounding is exact nearest-point search on a product lattice; a
    coordinate exactly halfway rounds down, which is the lower atom index.
    """
    h = 6.0 / grid
    t = (points + 3.0) / h - 0.5
    idx = np.ceil(t - 0.5).astype(int)
    idx = np.clip(idx, 0, grid - 1)
    return idx[:, 0] * grid + idx[:, 1]


def rotation_demo(n: int, grid: int) -> dict:
    """Identity coupling vs rotate-by-``1/n``-radians coupling of a gridded Gaussian."""
    if n < 1 or grid < 2:
        raise ValueError("need n >= 1 and grid >= 2")
    pts, w, space = gaussian_grid(grid)
    theta = 1.0 / n
    rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    moved = pts @ rot.T
    target = snap(moved, grid)
    m = len(w)
    fixed = target == np.arange(m)
    P_pts = np.hstack([space.coords, space.coords])
    Pn_pts = np.hstack([space.coords, space.coords[target]])
    # P is the identity coupling, so its diagonal carries every atom; summing the
    # weights as rationals keeps this mass exact
    wq = [Fraction(float(v)) for v in w]
    diag_P = sum(wq, Fraction(0)) / sum(wq, Fraction(0)) if wq else Fraction(0)
    diag_Pn = float(w[fixed].sum())
    # independent route: an atom stays put iff its rotated point remains in its
    # own lattice cell, i.e. moves less than half a cell along both axes
    h = 6.0 / grid
    stays = np.all(np.abs(moved - pts) <= h / 2, axis=1)
    fixed_mass = float(w[stays].sum())
    # the exact rotation fixes only the origin, which is a lattice atom only for odd grids
    origin = np.all(pts == 0.0, axis=1)
    diag_exact = float(w[origin].sum())
    w1 = _w1(P_pts, w, Pn_pts, w)
    return {
        "n": n,
        "grid": grid,
        "diag_P": diag_P,
        "diag_Pn": diag_Pn,
        "diag_exact_rotation": diag_exact,
        "fixed_fraction": float(fixed.sum()) / m,
        "fixed_mass": fixed_mass,
        "w1_gap": w1,
    }


def _w1(pa, wa, pb, wb):
    from .measure import w1_points

    return w1_points(pa, wa, pb, wb)


def rotation_couplings(n: int, grid: int) -> tuple:
    """(P, P_n) as :class:`Coupling` objects on the gridded Gaussian (float mode)."""
    pts, w, space = gaussian_grid(grid)
    theta = 1.0 / n
    rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    target = snap(pts @ rot.T, grid)
    m = len(w)
    mass_p = np.zeros((m, m))
    mass_p[np.arange(m), np.arange(m)] = w
    mass_n = np.zeros((m, m))
    np.add.at(mass_n, (np.arange(m), target), w)
    P = Coupling(space, space, tuple(map(tuple, mass_p.tolist())))
    Pn = Coupling(space, space, tuple(map(tuple, mass_n.tolist())))
    return P, Pn
