"""Small dense simplex solver over exact rationals or floats.

Problems are stated in equality form ``A x = b, x >= 0``.  The solver is a
two-phase tableau method with Bland's smallest-index rule, which rules out
cycling on the degenerate polytopes that transport and causal-coupling
constraints produce.  With :class:`fractions.Fraction` input every pivot is
exact and the optimal value is a rational.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

from .errors import Infeasible, Unbounded

FLOAT_TOL = 1e-9


@dataclass(frozen=True)
class LinearSystem:
    """Equality constraints ``sum_j coeffs[j] * x[j] == rhs`` with ``x >= 0``.

    ``variables`` names each column; rows are stored sparsely as
    ``({column: coefficient}, rhs)`` pairs.  ``labels`` optionally tags each
    row for reporting.
    """

    variables: tuple
    rows: tuple
    labels: tuple = ()

    def __post_init__(self):
        n = len(self.variables)
        for coeffs, _ in self.rows:
            for j in coeffs:
                if not 0 <= j < n:
                    raise ValueError(f"row references column {j} outside 0..{n - 1}")
        if self.labels and len(self.labels) != len(self.rows):
            raise ValueError("labels must align with rows")

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def index(self) -> dict:
        return {v: j for j, v in enumerate(self.variables)}

    def residuals(self, x: Sequence) -> list:
        """Row-wise ``A x - b``."""
        return [sum((c * x[j] for j, c in coeffs.items()), 0) - rhs for coeffs, rhs in self.rows]

    def max_residual(self, x: Sequence):
        res = self.residuals(x)
        return max((abs(r) for r in res), default=0)

    def vector(self, values: Mapping[Hashable, object], zero=Fraction(0)) -> list:
        """Dense vector over ``variables`` from a sparse mapping; keys must be variables."""
        idx = self.index()
        x = [zero] * self.n_vars
        for key, val in values.items():
            if key not in idx:
                raise KeyError(f"{key!r} is not a variable of this system")
            x[idx[key]] = val
        return x


@dataclass(frozen=True)
class LPResult:
    value: object
    x: tuple
    pivots: int = 0
    dropped_rows: tuple = field(default=())


def _is_exact(values) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in values)


class _Tableau:
    def __init__(self, rows, rhs, exact):
        self.T = rows
        self.rhs = rhs
        self.exact = exact
        self.eps = 0 if exact else FLOAT_TOL
        self.pivots = 0

    def pivot(self, r, c, basis, obj):
        T, rhs = self.T, self.rhs
        row = T[r]
        p = row[c]
        if p != 1:
            inv = 1 / p if not self.exact else Fraction(1) / p
            for j in range(len(row)):
                if row[j]:
                    row[j] = row[j] * inv
            rhs[r] = rhs[r] * inv
        nz = [j for j in range(len(row)) if row[j]]
        for i in range(len(T)):
            if i == r:
                continue
            f = T[i][c]
            if f:
                Ti = T[i]
                for j in nz:
                    Ti[j] = Ti[j] - f * row[j]
                if not self.exact:
                    Ti[c] = 0.0
                rhs[i] = rhs[i] - f * rhs[r]
        f = obj[0][c]
        if f:
            z = obj[0]
            for j in nz:
                z[j] = z[j] - f * row[j]
            if not self.exact:
                z[c] = 0.0
            obj[1] = obj[1] - f * rhs[r]
        basis[r] = c
        self.pivots += 1

    def run(self, basis, obj, allowed):
        """Minimise the objective row in place with Bland's rule."""
        eps = self.eps
        while True:
            z = obj[0]
            enter = -1
            for j in allowed:
                if z[j] < -eps:
                    enter = j
                    break
            if enter < 0:
                return
            best = None
            leave = -1
            for i, row in enumerate(self.T):
                a = row[enter]
                if a > eps:
                    ratio = self.rhs[i] / a
                    if (
                        best is None
                        or ratio < best - eps
                        or (abs(ratio - best) <= eps and basis[i] < basis[leave])
                    ):
                        best, leave = ratio, i
            if leave < 0:
                raise Unbounded("objective is unbounded on the feasible set")
            self.pivot(leave, enter, basis, obj)


def lp_solve(system: LinearSystem, objective, sense: str = "min", exact: bool | None = None) -> LPResult:
    """Optimise ``objective . x`` over ``system``.

    ``objective`` is a dense sequence or a ``{column: coefficient}`` mapping.
    ``exact=None`` picks rational arithmetic whenever every coefficient,
    right-hand side and cost is an int or Fraction.
    """
    if sense not in ("min", "max"):
        raise ValueError("sense must be 'min' or 'max'")
    n = system.n_vars
    if isinstance(objective, Mapping):
        cost = [objective.get(j, 0) for j in range(n)]
    else:
        cost = list(objective)
        if len(cost) != n:
            raise ValueError(f"objective has {len(cost)} entries, system has {n} variables")
    if exact is None:
        exact = _is_exact(cost) and all(
            _is_exact(coeffs.values()) and _is_exact([rhs]) for coeffs, rhs in system.rows
        )
    conv = (lambda v: Fraction(v)) if exact else float
    zero = conv(0)
    one = conv(1)
    c = [conv(v) for v in cost]
    if sense == "max":
        c = [-v for v in c]

    rows, rhs = [], []
    for coeffs, b in system.rows:
        dense = [zero] * n
        for j, v in coeffs.items():
            dense[j] = dense[j] + conv(v)
        b = conv(b)
        if not any(dense):
            if (b != 0) if exact else abs(b) > FLOAT_TOL:
                raise Infeasible("constraint row with no variables and nonzero rhs")
            continue
        if b < 0:
            dense = [-v for v in dense]
            b = -b
        rows.append(dense)
        rhs.append(b)
    m = len(rows)
    for i in range(m):
        rows[i].extend(one if k == i else zero for k in range(m))
    tab = _Tableau(rows, rhs, exact)
    basis = [n + i for i in range(m)]

    # phase 1: minimise the sum of artificials
    z1 = [zero] * (n + m)
    val1 = zero
    for i in range(m):
        for j in range(n):
            z1[j] = z1[j] - rows[i][j]
        val1 = val1 - rhs[i]
    obj = [z1, val1]
    tab.run(basis, obj, range(n))
    if (-obj[1] > 0) if exact else (-obj[1] > FLOAT_TOL * max(1, m)):
        raise Infeasible("equality system has no nonnegative solution")

    # drive zero-level artificials out of the basis; drop redundant rows
    dropped = []
    r = 0
    while r < len(tab.T):
        if basis[r] >= n:
            row = tab.T[r]
            j = next((j for j in range(n) if abs(row[j]) > tab.eps), -1)
            if j >= 0:
                tab.pivot(r, j, basis, obj)
            else:
                dropped.append(r + len(dropped))
                del tab.T[r]
                del tab.rhs[r]
                del basis[r]
                continue
        r += 1

    # phase 2
    z2 = list(c) + [zero] * m
    val2 = zero
    for i, bj in enumerate(basis):
        cb = z2[bj] if bj < n else zero
        if cb:
            row = tab.T[i]
            for j in range(n + m):
                if row[j]:
                    z2[j] = z2[j] - cb * row[j]
            val2 = val2 - cb * tab.rhs[i]
    obj = [z2, val2]
    tab.run(basis, obj, range(n))

    x = [zero] * n
    for i, bj in enumerate(basis):
        if bj < n:
            x[bj] = tab.rhs[i]
    if not exact:
        x = [v if v > FLOAT_TOL else 0.0 for v in x]
    value = sum((conv(cost[j]) * x[j] for j in range(n)), zero)
    return LPResult(value=value, x=tuple(x), pivots=tab.pivots, dropped_rows=tuple(dropped))


def transport_system(row_masses: Sequence, col_masses: Sequence) -> LinearSystem:
    """Marginal constraints of the transport polytope, variables ``(i, j)`` row-major."""
    m, k = len(row_masses), len(col_masses)
    variables = tuple((i, j) for i in range(m) for j in range(k))
    rows = []
    labels = []
    for i in range(m):
        rows.append(({i * k + j: 1 for j in range(k)}, row_masses[i]))
        labels.append(("row", i))
    for j in range(k):
        rows.append(({i * k + j: 1 for i in range(m)}, col_masses[j]))
        labels.append(("col", j))
    return LinearSystem(variables, tuple(rows), tuple(labels))
