"""Exact decomposition of a compatible joint path law into adapted laws.

A uniform variable ``U`` on ``[0, 1)`` drives an inverse-CDF construction:
for every y-prefix ``b`` of length ``n`` the interval ``[0, 1)`` is cut into
segments carrying an x-prefix.  Segments of ``b[:-1]`` with the same
x-prefix ``a`` are concatenated and re-split by the conditional CDF of
``X_n`` given ``(Y^n = b, X^{n-1} = a)``, atoms taken in canonical order.
Every atomic interval of the common refinement fixes one adapted map.

This relies on compatibility: the conditional law of ``X_n`` must not
depend on future Y, so the construction is refused on other laws.  It has
no continuous-time counterpart; in continuous time a compatible law can fail
to be a mixture of adapted ones, so nothing here generalises past a
finite grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Mapping

from .compat import check_ci
from .errors import InstanceTooLarge, NotCompatible
from .paths import AdaptedMap, JointPathLaw, PathMeasure, PathSpace, push_adapted, y_marginal

MAX_ADAPTED_MAPS = 200_000


@dataclass(frozen=True)
class MixtureDecomposition:
    components: tuple  # (weight, AdaptedMap)
    u_intervals: tuple  # (lo, hi), aligned with components

    def __post_init__(self):
        if len(self.components) != len(self.u_intervals):
            raise ValueError("one interval per component")
        lo = Fraction(0)
        for (w, _), (a, b) in zip(self.components, self.u_intervals):
            if a != lo or b - a != w or w <= 0:
                raise ValueError("intervals must tile [0, 1) with lengths equal to the weights")
            lo = b
        if self.components and lo != 1:
            raise ValueError("intervals must cover [0, 1)")

    @property
    def weights(self) -> tuple:
        return tuple(w for w, _ in self.components)

    @property
    def maps(self) -> tuple:
        return tuple(f for _, f in self.components)

    def __len__(self):
        return len(self.components)


def _conditional_next(J: JointPathLaw, n: int) -> dict:
    """``{(y^n, x^{n-1}): [(x_n, prob), ...]}`` in canonical x order."""
    num = {}
    for (y, x), w in J.support.items():
        d = num.setdefault((y[:n], x[:n - 1]), {})
        d[x[n - 1]] = d.get(x[n - 1], 0) + w
    alph = J.x_space.alphabets[n - 1]
    out = {}
    for key, d in num.items():
        tot = sum(d.values())
        out[key] = [(lab, d[lab] / tot) for lab in alph.labels if lab in d]
    return out


def _segments(J: JointPathLaw) -> tuple:
    """Piecewise-constant maps ``u -> x^n`` for every positive y-prefix, plus the split count bound."""
    segs = {(): [(Fraction(0), Fraction(1), ())]}
    bound = 1
    mu = y_marginal(J)
    for n in range(1, J.N + 1):
        cond = _conditional_next(J, n)
        for b in mu.prefixes(n):
            parent = segs[b[:-1]]
            groups = {}
            for lo, hi, a in parent:
                groups.setdefault(a, []).append((lo, hi))
            new = []
            for a, pieces in groups.items():
                law = cond[(b, a)]
                bound *= len(law)
                length = sum(hi - lo for lo, hi in pieces)
                cuts = []
                acc = Fraction(0)
                for lab, p in law:
                    acc += p
                    cuts.append((acc * length, lab))
                # walk the concatenated pieces in u order
                pos = Fraction(0)
                k = 0
                for lo, hi in pieces:
                    cur = lo
                    while cur < hi:
                        while cuts[k][0] <= pos:
                            k += 1
                        step = min(hi - cur, cuts[k][0] - pos)
                        new.append((cur, cur + step, a + (cuts[k][1],)))
                        cur += step
                        pos += step
            new.sort()
            segs[b] = new
    return segs, bound


def decompose_compatible(J: JointPathLaw) -> MixtureDecomposition:
    """Finite convex mixture of adapted maps whose recomposition is exactly ``J``."""
    if not J.exact:
        raise ValueError("decomposition requires exact weights")
    res = check_ci(J)
    if not res.ok:
        raise NotCompatible(f"law is not compatible (violation {res.max_violation} at {res.witness})")
    segs, bound = _segments(J)
    breaks = sorted({lo for pieces in segs.values() for lo, _, _ in pieces} | {Fraction(1)})
    mu = y_marginal(J)
    prefixes = [mu.prefixes(n) for n in range(1, J.N + 1)]
    components, intervals = [], []
    for u0, u1 in zip(breaks, breaks[1:]):
        steps = []
        for n, pres in enumerate(prefixes, start=1):
            table = {}
            for b in pres:
                table[b] = _lookup(segs[b], u0)[n - 1]
            steps.append(table)
        components.append((u1 - u0, AdaptedMap(tuple(steps))))
        intervals.append((u0, u1))
    if len(components) > bound:
        raise AssertionError("component count exceeds the conditional-support product bound")
    return MixtureDecomposition(tuple(components), tuple(intervals))


def component_bound(J: JointPathLaw) -> int:
    """Product over steps and (y-prefix, x-prefix) of conditional support sizes."""
    return _segments(J)[1]


def _lookup(pieces, u):
    for lo, hi, a in pieces:
        if lo <= u < hi:
            return a
    raise ValueError(f"u = {u} not covered")


def recompose(D: MixtureDecomposition, mu: PathMeasure, x_space: PathSpace) -> JointPathLaw:
    """``sum_i w_i * push_adapted(mu, f_i)``."""
    out = {}
    for w, f in D.components:
        for key, v in push_adapted(mu, f, x_space).support.items():
            out[key] = out.get(key, 0) + w * v
    return JointPathLaw(mu.space, x_space, out)


# -- brute force over adapted maps ---------------------------------------------

def count_adapted_maps(mu: PathMeasure, x_space: PathSpace) -> int:
    total = 1
    for n in range(1, mu.space.N + 1):
        total *= x_space.alphabets[n - 1].size ** len(mu.prefixes(n))
    return total


def iter_adapted_maps(mu: PathMeasure, x_space: PathSpace, limit: int = MAX_ADAPTED_MAPS):
    """Every adapted map on the positive prefixes of ``mu``, in canonical order."""
    total = count_adapted_maps(mu, x_space)
    if total > limit:
        raise InstanceTooLarge(f"{total} adapted maps exceed the limit {limit}")
    slots = [(n, b) for n in range(1, mu.space.N + 1) for b in mu.prefixes(n)]
    choices = [x_space.alphabets[n - 1].labels for n, _ in slots]
    for pick in product(*choices):
        steps = [dict() for _ in range(mu.space.N)]
        for (n, b), lab in zip(slots, pick):
            steps[n - 1][b] = lab
        yield AdaptedMap(tuple(steps))


def _cost_fn(objective) -> Callable:
    if callable(objective):
        return objective
    if isinstance(objective, Mapping):
        return lambda y, x: objective.get((tuple(y), tuple(x)), 0)
    raise TypeError("objective must be a callable c(y, x) or a {(y, x): c} mapping")


def linear_opt_via_extremes(
    mu: PathMeasure, x_space: PathSpace, objective, sense: str = "max", limit: int = MAX_ADAPTED_MAPS
) -> tuple:
    """Exhaustive optimum of ``sum_y mu(y) c(y, f(y))`` over adapted maps ``f``.

    Ties keep the first map in canonical enumeration order.
    """
    if sense not in ("min", "max"):
        raise ValueError("sense must be 'min' or 'max'")
    c = _cost_fn(objective)
    best_val, best_map = None, None
    ys = list(mu.weights.items())
    for f in iter_adapted_maps(mu, x_space, limit):
        val = sum((w * c(y, f(y)) for y, w in ys), Fraction(0))
        if best_val is None or (val > best_val if sense == "max" else val < best_val):
            best_val, best_map = val, f
    return best_val, best_map
