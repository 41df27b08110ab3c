"""Monge approximation of a coupling by refining partitions of the source space.

On each cell ``A`` of a partition, the sub-measure ``P(A x .)`` is realised as
the push-forward of ``mu`` restricted to ``A`` under a quantile (sorted-order)
assignment.  The resulting Monge coupling agrees with ``P`` on every set of
the form ``A x B``; refining the partition tightens the approximation.

Atoms are never split: when a cell's masses cannot be matched atom-to-atom a
:class:`~cotlab.errors.GranularityError` is raised and the caller should use a
finer source grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import GranularityError, InvalidMeasure, MassMismatch, NotRepresentable
from .measure import Coupling, DiscreteMeasure, FiniteSpace, marginal


@dataclass(frozen=True)
class PartitionSequence:
    """Nested partitions of ``range(base_space.size)`` into contiguous index ranges.

    Each level is a tuple of ``(start, stop)`` cells.
    """

    base_space: FiniteSpace
    levels: tuple

    def __post_init__(self):
        n = self.base_space.size
        for lvl in self.levels:
            if not lvl or lvl[0][0] != 0 or lvl[-1][1] != n:
                raise ValueError("each level must cover all atoms")
            for (a, b), (c, _) in zip(lvl, lvl[1:]):
                if b != c:
                    raise ValueError("cells must be contiguous and ordered")
            if any(a >= b for a, b in lvl):
                raise ValueError("cells must be nonempty")
        for coarse, fine in zip(self.levels, self.levels[1:]):
            cuts = {a for a, _ in coarse}
            if not cuts <= {a for a, _ in fine}:
                raise ValueError("levels must refine one another")
        if self.levels and len(self.levels[-1]) != n:
            raise ValueError("the last level must separate all atoms")

    @property
    def top(self) -> int:
        return len(self.levels) - 1

    def cells(self, k: int) -> tuple:
        return self.levels[k]

    def cell_of(self, k: int) -> list:
        """``cell_of(k)[i]`` is the index of the level-``k`` cell holding atom ``i``."""
        out = [0] * self.base_space.size
        for c, (a, b) in enumerate(self.levels[k]):
            for i in range(a, b):
                out[i] = c
        return out


@dataclass(frozen=True)
class MongeMap:
    from_space: FiniteSpace
    to_space: FiniteSpace
    targets: tuple

    def __post_init__(self):
        if len(self.targets) != self.from_space.size:
            raise ValueError("a Monge map needs one target per source atom")
        if any(not 0 <= t < self.to_space.size for t in self.targets):
            raise ValueError("target index outside the target space")

    def __call__(self, i: int) -> int:
        return self.targets[i]

    def coupling(self, mu: DiscreteMeasure) -> Coupling:
        """``mu(dx) delta_{phi(x)}(dy)``."""
        zero = Fraction(0) if mu.exact else 0.0
        mass = tuple(
            tuple(mu[i] if j == t else zero for j in range(self.to_space.size))
            for i, t in enumerate(self.targets)
        )
        return Coupling(self.from_space, self.to_space, mass)

    def pushforward(self, mu: DiscreteMeasure) -> DiscreteMeasure:
        return marginal(self.coupling(mu), "col")


@dataclass(frozen=True)
class SplitPlan:
    """Source atoms whose quantile interval straddles a target boundary.

    ``splits`` holds ``(source_index, ((target_index, share), ...))``.
    """

    splits: tuple


def dyadic_partitions(X: FiniteSpace) -> PartitionSequence:
    """Repeated halving of index ranges (left half gets the extra atom) down to singletons."""
    n = X.size
    levels = [((0, n),)]
    while len(levels[-1]) < n:
        nxt = []
        for a, b in levels[-1]:
            if b - a == 1:
                nxt.append((a, b))
            else:
                mid = a + (b - a + 1) // 2
                nxt.append((a, mid))
                nxt.append((mid, b))
        levels.append(tuple(nxt))
    return PartitionSequence(X, tuple(levels))


def cell_transport(cell_masses: Sequence, nu_tilde: Sequence) -> tuple:
    """Quantile assignment of source atoms (in order) onto target atoms (in order).

    ``cell_masses`` are the source atom masses inside one cell, ``nu_tilde``
    the target sub-measure with the same total.  Returns one target index per
    source atom.  Raises :class:`NotRepresentable` with a :class:`SplitPlan`
    payload when some atom would have to be split.
    """
    total_src = sum(cell_masses, Fraction(0) if all(isinstance(v, Fraction) for v in cell_masses) else 0.0)
    total_tgt = sum(nu_tilde, type(total_src)(0))
    exact = isinstance(total_src, Fraction) and isinstance(total_tgt, Fraction)
    tol = 0 if exact else 1e-12
    if abs(total_src - total_tgt) > tol:
        raise MassMismatch(f"cell mass {total_src} differs from target mass {total_tgt}")
    bounds = []  # cumulative upper ends of target intervals, skipping null targets
    acc = 0
    for j, w in enumerate(nu_tilde):
        if w > 0:
            acc = acc + w
            bounds.append((acc, j))
    if not bounds:
        return tuple(0 for _ in cell_masses)
    targets = []
    splits = []
    lo = 0
    b = 0
    for i, w in enumerate(cell_masses):
        hi = lo + w
        while b < len(bounds) - 1 and bounds[b][0] <= lo + tol:
            b += 1
        if hi <= bounds[b][0] + tol:
            targets.append(bounds[b][1])
        else:
            shares = []
            cur, k = lo, b
            while cur < hi - tol and k < len(bounds):
                top = min(hi, bounds[k][0])
                if top > cur + tol:
                    shares.append((bounds[k][1], top - cur))
                cur = top
                k += 1
            splits.append((i, tuple(shares)))
            targets.append(bounds[b][1])
        lo = hi
    if splits:
        raise NotRepresentable(f"{len(splits)} source atom(s) straddle target boundaries", SplitPlan(tuple(splits)))
    return tuple(targets)


def monge_approximate(P: Coupling, parts: PartitionSequence | None = None, k: int | None = None) -> tuple:
    """Monge map ``phi_k`` and coupling ``P_k`` matching ``P`` on level-``k`` cells.

    ``P_k`` has the same marginals as ``P`` and ``P_k(A x B) == P(A x B)`` for
    every level-``k`` cell ``A``.  Uniform row marginals whose cell sums are
    multiples of ``1/m`` always succeed; otherwise :class:`GranularityError`
    is raised.
    """
    if parts is None:
        parts = dyadic_partitions(P.row_space)
    if parts.base_space != P.row_space:
        raise ValueError("partition is over a different space")
    if k is None:
        k = parts.top
    if not 0 <= k <= parts.top:
        raise ValueError(f"level {k} outside 0..{parts.top}")
    mu = marginal(P, "row")
    zero = Fraction(0) if P.exact else 0.0
    targets = [0] * P.row_space.size
    for a, b in parts.cells(k):
        nu_tilde = [sum((P.mass[i][j] for i in range(a, b)), zero) for j in range(P.col_space.size)]
        try:
            local = cell_transport(mu.weights[a:b], nu_tilde)
        except NotRepresentable as exc:
            raise GranularityError(
                f"cell [{a}, {b}) at level {k} cannot be matched without splitting atoms; refine the source grid",
                exc.plan,
            ) from None
        targets[a:b] = local
    phi = MongeMap(P.row_space, P.col_space, tuple(targets))
    return phi, phi.coupling(mu)


def one_marginal_approx(P: Coupling, k: int | None = None, parts: PartitionSequence | None = None) -> MongeMap:
    """Map-only form of :func:`monge_approximate` (target law taken from ``P``)."""
    return monge_approximate(P, parts, k)[0]


def representable_levels(P: Coupling, parts: PartitionSequence | None = None) -> list:
    """Levels at which :func:`monge_approximate` succeeds."""
    parts = parts or dyadic_partitions(P.row_space)
    ok = []
    for k in range(parts.top + 1):
        try:
            monge_approximate(P, parts, k)
        except GranularityError:
            continue
        ok.append(k)
    return ok


def cell_family(parts: PartitionSequence, Y: FiniteSpace, L: int = 1) -> list:
    """Products ``1_A * g`` over every cell ``A`` of every level, ``g`` as in the default family."""
    from .stable import TestFunction, _lipschitz_functions

    gs = _lipschitz_functions(Y, L)
    one, zero = Fraction(1), Fraction(0)
    seen, fam = set(), []
    for lvl in parts.levels:
        for a, b in lvl:
            if (a, b) in seen:
                continue
            seen.add((a, b))
            f = tuple(one if a <= i < b else zero for i in range(parts.base_space.size))
            for gname, g in gs:
                fam.append(TestFunction.product(f, g, name=f"1[{a},{b})*{gname}"))
    return fam


def oscillation_bound(P: Coupling, Q: Coupling, family, cells=None):
    """Upper bound on ``stable_gap(P, Q, family)`` for product test functions.

    ``P`` and ``Q`` must share the row marginal.  When ``cells`` (a sequence of
    ``(start, stop)`` row ranges) is given, ``P`` and ``Q`` must also agree on
    every ``cell x B``; the bound is then

        max_phi  sum_A sum_{x in A} |f(x) - mid_A f| * mu(x) * osc_x(g)

    where ``mid_A f`` is the midrange of ``f`` on ``A`` and ``osc_x(g)`` the
    range of ``g`` over the union of both row-``x`` supports.  Without cells
    the midrange term is dropped (``mid = 0``).
    """
    mu_p = marginal(P, "row")
    mu_q = marginal(Q, "row")
    if mu_p.weights != mu_q.weights:
        raise InvalidMeasure("oscillation bound needs equal row marginals")
    n = P.row_space.size
    osc_support = []
    for i in range(n):
        sup = [j for j in range(P.col_space.size) if P.mass[i][j] > 0 or Q.mass[i][j] > 0]
        osc_support.append(sup)
    osc_cache = {}

    def osc(g, i):
        key = (id(g), i)
        if key not in osc_cache:
            gs = [g[j] for j in osc_support[i]]
            osc_cache[key] = (max(gs) - min(gs)) if gs else 0
        return osc_cache[key]

    best = 0
    for phi in family:
        if phi.kind != "product":
            raise ValueError("oscillation bound is defined for product test functions")
        total = 0
        if cells is None:
            # singleton cells with the midrange dropped: only rows where f is nonzero count
            for i in phi.f_support:
                if mu_p[i]:
                    total += abs(phi.f[i]) * mu_p[i] * osc(phi.g, i)
        else:
            for a, b in cells:
                fs = phi.f[a:b]
                hi, lo = max(fs), min(fs)
                if hi == lo:
                    continue
                mid = (hi + lo) / 2
                for i in range(a, b):
                    dev = abs(phi.f[i] - mid)
                    if dev and mu_p[i]:
                        total += dev * mu_p[i] * osc(phi.g, i)
        best = max(best, total)
    return best


def agreement_defect(P: Coupling, Q: Coupling, cells) -> object:
    """Largest ``|P(A x {y}) - Q(A x {y})|`` over cells ``A`` and column atoms ``y``."""
    zero = Fraction(0) if P.exact and Q.exact else 0.0
    worst = zero
    for a, b in cells:
        for j in range(P.col_space.size):
            d = sum((P.mass[i][j] - Q.mass[i][j] for i in range(a, b)), zero)
            worst = max(worst, abs(d))
    return worst


def quantile_map(mu: DiscreteMeasure, nu: DiscreteMeasure) -> MongeMap:
    """Monotone rearrangement from ``mu`` to ``nu`` in atom order (no partition)."""
    return MongeMap(mu.space, nu.space, cell_transport(mu.weights, nu.weights))
