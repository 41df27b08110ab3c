"""Finitely supported measures, couplings and kernels on labelled atom sets.

Weights are either all :class:`~fractions.Fraction` (exact mode) or all
``float`` (float mode).  Plain ints are promoted to Fractions; a single float
anywhere switches the whole object to float mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidMeasure, MissingKernelRow, ShapeMismatch

FLOAT_SUM_TOL = 1e-12


def to_number(v, exact: bool | None = None):
    """Parse ``v`` into a Fraction (exact) or float.

    Strings of the form ``"p/q"`` or ``"0.25"`` are read as rationals.
    """
    if isinstance(v, str):
        v = Fraction(v)
    elif isinstance(v, bool):
        raise TypeError("booleans are not weights")
    elif isinstance(v, int):
        v = Fraction(v)
    elif isinstance(v, np.integer):
        v = Fraction(int(v))
    elif isinstance(v, np.floating):
        v = float(v)
    if exact is True:
        return Fraction(v)
    if exact is False:
        return float(v)
    return v


def is_exact(values) -> bool:
    return all(isinstance(v, Fraction) for v in values)


def normalize_weights(values, exact: bool | None = None) -> tuple:
    """Parse a weight vector into one arithmetic mode."""
    vals = [to_number(v, exact) for v in values]
    if exact is None and not is_exact(vals):
        vals = [float(v) for v in vals]
    return tuple(vals)


def _check_total(total, exact: bool, what: str):
    if exact:
        if total != 1:
            raise InvalidMeasure(f"{what} has total mass {total}, expected exactly 1")
    elif abs(total - 1.0) > FLOAT_SUM_TOL:
        raise InvalidMeasure(f"{what} has total mass {total!r}, expected 1")


@dataclass(frozen=True)
class FiniteSpace:
    """Ordered finite set of labelled atoms with coordinates in ``[0, 1]^dim``.

    Atom order is part of the space's identity: it is the canonical total
    order used by every quantile construction.
    """

    atoms: tuple
    dim: int

    def __post_init__(self):
        atoms = tuple((str(label), tuple(to_number(c) for c in coord)) for label, coord in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise InvalidMeasure("a space needs at least one atom")
        labels = [a[0] for a in atoms]
        if len(set(labels)) != len(labels):
            raise InvalidMeasure("atom labels must be pairwise distinct")
        for label, coord in atoms:
            if len(coord) != self.dim:
                raise DimensionMismatch(f"atom {label!r} has {len(coord)} coordinates, space dim is {self.dim}")
            if any(c < 0 or c > 1 for c in coord):
                raise InvalidMeasure(f"atom {label!r} has coordinates outside [0, 1]")

    @classmethod
    def from_labels(cls, labels: Sequence[str], coords: Sequence | None = None) -> "FiniteSpace":
        """One-dimensional space; default coordinates are evenly spaced ``i / (k - 1)``."""
        k = len(labels)
        if coords is None:
            coords = [Fraction(i, k - 1) if k > 1 else Fraction(0) for i in range(k)]
        return cls(tuple((lab, (c,)) for lab, c in zip(labels, coords)), 1)

    @classmethod
    def grid(cls, m: int, prefix: str = "") -> "FiniteSpace":
        """``m`` atoms at cell centres ``(i + 1/2) / m`` of the unit interval."""
        return cls(tuple((f"{prefix}{i}", (Fraction(2 * i + 1, 2 * m),)) for i in range(m)), 1)

    def __len__(self):
        return len(self.atoms)

    @property
    def size(self) -> int:
        return len(self.atoms)

    @cached_property
    def labels(self) -> tuple:
        return tuple(a[0] for a in self.atoms)

    @cached_property
    def _index(self) -> dict:
        return {lab: i for i, lab in enumerate(self.labels)}

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"no atom labelled {label!r}") from None

    def coord(self, i: int) -> tuple:
        return self.atoms[i][1]

    @cached_property
    def coords(self) -> np.ndarray:
        return np.array([[float(c) for c in a[1]] for a in self.atoms], dtype=float).reshape(len(self.atoms), self.dim)

    def product(self, other: "FiniteSpace", sep: str = "|") -> "FiniteSpace":
        """Product space in row-major order; the sum metric is L1 on concatenated coordinates."""
        atoms = tuple(
            (f"{la}{sep}{lb}", ca + cb) for la, ca in self.atoms for lb, cb in other.atoms
        )
        return FiniteSpace(atoms, self.dim + other.dim)


@dataclass(frozen=True)
class DiscreteMeasure:
    space: FiniteSpace
    weights: tuple

    def __post_init__(self):
        w = normalize_weights(self.weights)
        object.__setattr__(self, "weights", w)
        if len(w) != self.space.size:
            raise ShapeMismatch(f"{len(w)} weights for a space of {self.space.size} atoms")
        if any(v < 0 for v in w):
            raise InvalidMeasure("weights must be nonnegative")
        _check_total(sum(w, Fraction(0) if self.exact else 0.0), self.exact, "measure")

    @property
    def exact(self) -> bool:
        return is_exact(self.weights)

    @classmethod
    def dirac(cls, space: FiniteSpace, i: int) -> "DiscreteMeasure":
        return cls(space, tuple(Fraction(int(k == i)) for k in range(space.size)))

    @classmethod
    def uniform(cls, space: FiniteSpace) -> "DiscreteMeasure":
        return cls(space, (Fraction(1, space.size),) * space.size)

    def __getitem__(self, i):
        return self.weights[i]

    def support(self) -> tuple:
        return tuple(i for i, w in enumerate(self.weights) if w > 0)

    def as_float(self) -> "DiscreteMeasure":
        return DiscreteMeasure(self.space, tuple(float(w) for w in self.weights))


@dataclass(frozen=True)
class Coupling:
    """Joint law on ``row_space x col_space`` stored as a dense mass matrix."""

    row_space: FiniteSpace
    col_space: FiniteSpace
    mass: tuple

    def __post_init__(self):
        if len(self.mass) != self.row_space.size:
            raise ShapeMismatch(f"mass has {len(self.mass)} rows, row space has {self.row_space.size} atoms")
        flat = [v for row in self.mass for v in row]
        if any(len(row) != self.col_space.size for row in self.mass):
            raise ShapeMismatch("every mass row must have one entry per column atom")
        flat = normalize_weights(flat)
        k = self.col_space.size
        mass = tuple(tuple(flat[i * k:(i + 1) * k]) for i in range(self.row_space.size))
        object.__setattr__(self, "mass", mass)
        if any(v < 0 for v in flat):
            raise InvalidMeasure("coupling masses must be nonnegative")
        _check_total(sum(flat, Fraction(0) if is_exact(flat) else 0.0), is_exact(flat), "coupling")

    @cached_property
    def exact(self) -> bool:
        return all(is_exact(row) for row in self.mass)

    @property
    def shape(self) -> tuple:
        return (self.row_space.size, self.col_space.size)

    @classmethod
    def from_triplets(cls, row_space, col_space, triplets) -> "Coupling":
        zero = Fraction(0)
        mass = [[zero] * col_space.size for _ in range(row_space.size)]
        for i, j, w in triplets:
            mass[i][j] = mass[i][j] + to_number(w)
        return cls(row_space, col_space, tuple(tuple(r) for r in mass))

    @classmethod
    def product(cls, mu: DiscreteMeasure, nu: DiscreteMeasure) -> "Coupling":
        return cls(mu.space, nu.space, tuple(tuple(a * b for b in nu.weights) for a in mu.weights))

    @classmethod
    def diagonal(cls, mu: DiscreteMeasure) -> "Coupling":
        zero = Fraction(0) if mu.exact else 0.0
        n = mu.space.size
        return cls(mu.space, mu.space, tuple(tuple(mu[i] if i == j else zero for j in range(n)) for i in range(n)))

    def triplets(self) -> list:
        return [(i, j, w) for i, row in enumerate(self.mass) for j, w in enumerate(row) if w > 0]

    def as_array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.mass], dtype=float)

    def joint_points(self) -> tuple:
        """Support coordinates on the product ambient space and their weights."""
        trip = self.triplets()
        rc, cc = self.row_space.coords, self.col_space.coords
        pts = np.array([np.concatenate([rc[i], cc[j]]) for i, j, _ in trip]).reshape(len(trip), -1)
        return pts, [w for _, _, w in trip]

    def as_float(self) -> "Coupling":
        return Coupling(self.row_space, self.col_space, tuple(tuple(float(v) for v in r) for r in self.mass))


@dataclass(frozen=True)
class Kernel:
    """Transition kernel; ``rows`` maps a source atom index to a measure on ``to_space``.

    Rows of null source atoms may be absent.
    """

    from_space: FiniteSpace
    to_space: FiniteSpace
    rows: Mapping

    def __post_init__(self):
        rows = dict(self.rows)
        for i, row in rows.items():
            if not 0 <= i < self.from_space.size:
                raise ShapeMismatch(f"kernel row {i} outside source space")
            if row.space != self.to_space:
                raise ShapeMismatch(f"kernel row {i} lives on a different space")
        object.__setattr__(self, "rows", dict(sorted(rows.items())))


def _axis(axis) -> int:
    if axis in ("row", 0):
        return 0
    if axis in ("col", 1):
        return 1
    raise ValueError(f"axis must be 'row' or 'col', got {axis!r}")


def marginal(P: Coupling, axis="row") -> DiscreteMeasure:
    ax = _axis(axis)
    zero = Fraction(0) if P.exact else 0.0
    if ax == 0:
        return DiscreteMeasure(P.row_space, tuple(sum(row, zero) for row in P.mass))
    cols = tuple(sum((row[j] for row in P.mass), zero) for j in range(P.col_space.size))
    return DiscreteMeasure(P.col_space, cols)


def transpose(P: Coupling) -> Coupling:
    return Coupling(P.col_space, P.row_space, tuple(zip(*P.mass)))


def disintegrate(P: Coupling, axis="row") -> tuple:
    """Split ``P`` into its ``axis`` marginal and the conditional kernel.

    Null atoms of the marginal get no kernel row.
    """
    Q = P if _axis(axis) == 0 else transpose(P)
    mu = marginal(Q, "row")
    rows = {}
    for i, row in enumerate(Q.mass):
        if mu[i] > 0:
            rows[i] = DiscreteMeasure(Q.col_space, tuple(v / mu[i] for v in row))
    return mu, Kernel(Q.row_space, Q.col_space, rows)


def compose(mu: DiscreteMeasure, K: Kernel) -> Coupling:
    """``mass[i][j] = mu[i] * K.rows[i][j]``."""
    if mu.space != K.from_space:
        raise ShapeMismatch("measure and kernel source space differ")
    zero = Fraction(0) if mu.exact else 0.0
    mass = []
    for i, w in enumerate(mu.weights):
        if w > 0:
            if i not in K.rows:
                raise MissingKernelRow(f"atom {mu.space.labels[i]!r} has mass {w} but no kernel row")
            mass.append(tuple(w * v for v in K.rows[i].weights))
        else:
            mass.append((zero,) * K.to_space.size)
    return Coupling(K.from_space, K.to_space, tuple(mass))


def l1_cost_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.abs(a[:, None, :] - b[None, :, :]).sum(axis=-1)


def _transport_dense(C: np.ndarray, wa: np.ndarray, wb: np.ndarray) -> float:
    from scipy.optimize import linprog
    from scipy import sparse

    n, m = C.shape
    A = sparse.vstack([
        sparse.kron(sparse.eye(n), np.ones((1, m))),
        sparse.kron(np.ones((1, n)), sparse.eye(m)),
    ]).tocsr()
    res = linprog(C.ravel(), A_eq=A, b_eq=np.concatenate([wa, wb]), bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    return float(res.fun)


def _transport_sparse(C: np.ndarray, wa: np.ndarray, wb: np.ndarray, k: int = 12, tol: float = 1e-10) -> float:
    """Column generation on the transport LP: start from near-neighbour edges plus a
    north-west-corner tree, add edges with negative reduced cost until none remain."""
    from scipy.optimize import linprog
    from scipy import sparse

    n, m = C.shape
    k = min(k, m, n)
    edges = set()
    near_r = np.argpartition(C, k - 1, axis=1)[:, :k]
    edges.update((i, int(j)) for i in range(n) for j in near_r[i])
    near_c = np.argpartition(C, k - 1, axis=0)[:k, :]
    edges.update((int(i), j) for j in range(m) for i in near_c[:, j])
    # north-west corner guarantees feasibility
    i = j = 0
    ra, rb = wa.copy(), wb.copy()
    while i < n and j < m:
        edges.add((i, j))
        t = min(ra[i], rb[j])
        ra[i] -= t
        rb[j] -= t
        if ra[i] <= rb[j]:
            i += 1
        else:
            j += 1
    scale = max(1.0, float(C.max()))
    for _ in range(100):
        E = np.array(sorted(edges))
        nE = len(E)
        A = sparse.vstack([
            sparse.csr_matrix((np.ones(nE), (E[:, 0], np.arange(nE))), shape=(n, nE)),
            sparse.csr_matrix((np.ones(nE), (E[:, 1], np.arange(nE))), shape=(m, nE)),
        ]).tocsr()
        res = linprog(C[E[:, 0], E[:, 1]], A_eq=A, b_eq=np.concatenate([wa, wb]), bounds=(0, None), method="highs")
        if res.status != 0:
            raise RuntimeError(f"transport LP failed: {res.message}")
        y = res.eqlin.marginals
        u, v = y[:n], y[n:]
        red = C - u[:, None] - v[None, :]
        bad = red < -tol * scale
        if not bad.any():
            return float(res.fun)
        rows = np.nonzero(bad.any(axis=1))[0]
        worst = np.argmin(np.where(bad[rows], red[rows], np.inf), axis=1)
        new = {(int(r), int(c)) for r, c in zip(rows, worst)}
        cols = np.nonzero(bad.any(axis=0))[0]
        worst_r = np.argmin(np.where(bad[:, cols], red[:, cols], np.inf), axis=0)
        new.update((int(r), int(c)) for r, c in zip(worst_r, cols))
        edges.update(new)
    raise RuntimeError("column generation did not converge")


def w1_points(xa, wa, xb, wb, exact: bool = False):
    """Optimal transport cost between two weighted point clouds under L1 ground cost.

    ``exact=True`` solves the transport LP with the rational simplex (weights
    and coordinates must then be rationals) and returns a Fraction.
    """
    if exact:
        from .lp import lp_solve, transport_system

        xa = [tuple(Fraction(c) for c in p) for p in xa]
        xb = [tuple(Fraction(c) for c in p) for p in xb]
        if xa and xb and len(xa[0]) != len(xb[0]):
            raise DimensionMismatch("point clouds live in different dimensions")
        system = transport_system([Fraction(w) for w in wa], [Fraction(w) for w in wb])
        cost = [sum(abs(p - q) for p, q in zip(xa[i], xb[j])) for i in range(len(xa)) for j in range(len(xb))]
        return lp_solve(system, cost, "min", exact=True).value
    xa = np.asarray(xa, dtype=float)
    xb = np.asarray(xb, dtype=float)
    if xa.shape[1] != xb.shape[1]:
        raise DimensionMismatch("point clouds live in different dimensions")
    wa = np.asarray([float(w) for w in wa])
    wb = np.asarray([float(w) for w in wb])
    wa = wa / wa.sum()
    wb = wb / wb.sum()
    C = l1_cost_matrix(xa, xb)
    if C.size <= 40_000:
        return _transport_dense(C, wa, wb)
    return _transport_sparse(C, wa, wb)


def wasserstein1(mu: DiscreteMeasure, nu: DiscreteMeasure, exact: bool = False):
    """W1 between measures on spaces of equal ambient dimension (L1 ground cost)."""
    if mu.space.dim != nu.space.dim:
        raise DimensionMismatch(f"dimensions {mu.space.dim} and {nu.space.dim} differ")
    ia, ib = mu.support(), nu.support()
    if exact:
        xa = [mu.space.coord(i) for i in ia]
        xb = [nu.space.coord(i) for i in ib]
    else:
        xa = mu.space.coords[list(ia)]
        xb = nu.space.coords[list(ib)]
    return w1_points(xa, [mu[i] for i in ia], xb, [nu[i] for i in ib], exact=exact)


def coupling_w1(P: Coupling, Q: Coupling) -> float:
    """W1 between two joint laws on the same product ambient space."""
    if P.row_space.dim + P.col_space.dim != Q.row_space.dim + Q.col_space.dim:
        raise DimensionMismatch("joint laws live in different ambient dimensions")
    pa, wa = P.joint_points()
    pb, wb = Q.joint_points()
    return w1_points(pa, wa, pb, wb)
