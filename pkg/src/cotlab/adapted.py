"""Approximation of a compatible joint path law by adapted maps.

Step ``n + 1`` fits a Monge map ``g`` from the conditioning variable
``(Y^{n+1}, X^n)`` to ``X_{n+1}`` under the true law, using the partition
construction of :mod:`cotlab.monge` on the ordered conditioning support.  The
adapted map is then built recursively as
``h_{n+1}(y) = g(y^{n+1}, h_1(y), ..., h_n(y))``.

Two orders of the conditioning support are offered:

``"interleaved"`` (default)
    ``(y^n, x^n, y_{n+1})``: the newest Y coordinate varies fastest, so a
    small cell holds one ``(y^n, x^n)`` and neighbouring values of
    ``y_{n+1}``.  The conditional law of ``X_{n+1}`` is then spread over the
    fresh Y coordinate, which is the role of nonatomic noise.
``"lex"``
    ``(y^{n+1}, x^n)``.  Small cells hold a single ``y^{n+1}`` and split mass
    across x-prefixes only, so the fitted ``X_{n+1}`` becomes a function of
    ``X^n``; this fails to converge when ``X_{n+1}`` is fresh randomness.

The accuracy of each step is chosen by a schedule entry: an explicit
partition level, ``"top"`` (singletons) or ``"finest"`` (finest level whose
cells can be matched without splitting atoms, the default).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .compat import check_ci
from .errors import GranularityError, NotCompatible
from .measure import Coupling, FiniteSpace, w1_points
from .monge import dyadic_partitions, monge_approximate, oscillation_bound, representable_levels
from .paths import PATH_SEP, AdaptedMap, JointPathLaw, PathMeasure, PathSpace, push_adapted, y_marginal
from .stable import default_family, stable_gap


@dataclass(frozen=True)
class StepLift:
    """Fitted one-step map ``g: (y^{n+1}, x^n) -> x_{n+1}`` and its bookkeeping."""

    n: int
    keys: tuple  # conditioning atoms (y_prefix, x_prefix) in order
    table: dict
    level: int
    coupling: Coupling  # true law of (conditioning, X_{n+1})
    approx: Coupling  # the Monge coupling actually used
    cells: tuple

    def __call__(self, y_prefix: tuple, x_prefix: tuple, x_space: PathSpace):
        key = (y_prefix, x_prefix)
        if key in self.table:
            return self.table[key]
        return self.table[_nearest_key(self.keys, y_prefix, x_prefix, x_space)]


def _nearest_key(keys, y_prefix, x_prefix, x_space):
    """Supported key with the same y-prefix whose x-prefix is closest in L1."""
    target = x_space.coords(x_prefix)
    best = None
    for yk, xk in keys:
        if yk != y_prefix:
            continue
        d = sum(abs(a - b) for a, b in zip(x_space.coords(xk), target))
        cand = (d, x_space.rank(xk))
        if best is None or cand < best[0]:
            best = (cand, (yk, xk))
    if best is None:
        raise KeyError(f"no conditioning atom with y-prefix {y_prefix}")
    return best[1]


ORDERS = ("interleaved", "lex")


def _order_key(J: JointPathLaw, n: int, order: str):
    ry, rx = J.y_space.rank, J.x_space.rank
    if order == "interleaved":
        return lambda k: (ry(k[0][:n]), rx(k[1]), ry(k[0])[n:])
    if order == "lex":
        return lambda k: (ry(k[0]), rx(k[1]))
    raise ValueError(f"order must be one of {ORDERS}")


def conditioning_coupling(J: JointPathLaw, n: int, order: str = "interleaved") -> tuple:
    """Law of ``((Y^{n+1}, X^n), X_{n+1})`` as a Coupling over the ordered conditioning support."""
    mass = {}
    for (y, x), w in J.support.items():
        key = (y[:n + 1], x[:n])
        d = mass.setdefault(key, {})
        d[x[n]] = d.get(x[n], 0) + w
    keys = sorted(mass, key=_order_key(J, n, order))
    space = FiniteSpace(
        tuple(
            (PATH_SEP.join(yk) + "|" + PATH_SEP.join(xk), J.y_space.coords(yk) + J.x_space.coords(xk))
            for yk, xk in keys
        ),
        sum(a.dim for a in J.y_space.alphabets[:n + 1]) + sum(a.dim for a in J.x_space.alphabets[:n]),
    )
    target = J.x_space.alphabets[n]
    zero = Fraction(0) if J.exact else 0.0
    rows = tuple(tuple(mass[k].get(lab, zero) for lab in target.labels) for k in keys)
    return tuple(keys), Coupling(space, target, rows)


def _resolve_level(P: Coupling, level, parts) -> int:
    if level == "top":
        return parts.top
    if level == "finest":
        ok = representable_levels(P, parts)
        if not ok:
            raise GranularityError("no partition level is representable")
        return ok[-1]
    level = int(level)
    return parts.top + 1 + level if level < 0 else level


def one_step_lift(J: JointPathLaw, n: int, level="finest", order: str = "interleaved") -> StepLift:
    """Fit ``g: (y^{n+1}, x^n) -> x_{n+1}`` at the given partition level (``n`` counts from 0)."""
    if not 0 <= n < J.N:
        raise ValueError(f"step index {n} outside 0..{J.N - 1}")
    keys, P = conditioning_coupling(J, n, order)
    parts = dyadic_partitions(P.row_space)
    k = _resolve_level(P, level, parts)
    phi, Pk = monge_approximate(P, parts, k)
    labels = J.x_space.alphabets[n].labels
    table = {key: labels[phi(i)] for i, key in enumerate(keys)}
    return StepLift(n, keys, table, k, P, Pk, parts.cells(k))


@dataclass(frozen=True)
class AdaptedApproximation:
    f: AdaptedMap
    law: JointPathLaw
    gap: object  # stable gap under the default family
    w1: float
    bound: object
    levels: tuple
    lifts: tuple = ()


def _normalize_schedule(schedule, N):
    if schedule is None or isinstance(schedule, (str, int)):
        return ["finest" if schedule is None else schedule] * N
    schedule = list(schedule)
    if len(schedule) != N:
        raise ValueError(f"schedule needs {N} entries, got {len(schedule)}")
    return schedule


def approximate_adapted(
    J: JointPathLaw, schedule=None, L: int = 1, with_w1: bool = True, order: str = "interleaved"
) -> AdaptedApproximation:
    """Adapted map whose push-forward of the Y-marginal approximates ``J``.

    Raises :class:`NotCompatible` when ``J`` fails the conditional-independence
    check: no sequence of adapted laws can converge to such a law.
    """
    res = check_ci(J)
    if not res.ok:
        raise NotCompatible(f"law is not compatible (violation {res.max_violation} at {res.witness})")
    mu = y_marginal(J)
    sched = _normalize_schedule(schedule, J.N)
    lifts = [one_step_lift(J, n, sched[n], order) for n in range(J.N)]

    steps = [dict() for _ in range(J.N)]
    for y in mu.support():
        xs = ()
        for n, lift in enumerate(lifts):
            pre = y[:n + 1]
            if pre in steps[n]:
                xn = steps[n][pre]
            else:
                xn = lift(pre, xs, J.x_space)
                steps[n][pre] = xn
            xs = xs + (xn,)
    f = AdaptedMap(tuple(steps))
    Jf = push_adapted(mu, f, J.x_space)
    gap, bound = adapted_gap(Jf, J, L)
    w1 = joint_w1(Jf, J) if with_w1 else float("nan")
    return AdaptedApproximation(f, Jf, gap, w1, bound, tuple(l.level for l in lifts), tuple(lifts))


def adapted_gap(Jf: JointPathLaw, J: JointPathLaw, L: int = 1) -> tuple:
    """(stable gap, fiberwise oscillation bound) over the default family."""
    P, Q = Jf.as_coupling(), J.as_coupling()
    fam = default_family(P.row_space, P.col_space, L)
    return stable_gap(P, Q, fam), oscillation_bound(P, Q, fam)


def joint_w1(J1: JointPathLaw, J2: JointPathLaw) -> float:
    """W1 between the two joint laws, L1 ground cost on concatenated coordinates."""
    pa, wa = J1.joint_points()
    pb, wb = J2.joint_points()
    return float(w1_points(pa, [float(w) for w in wa], pb, [float(w) for w in wb]))


# -- instance families -----------------------------------------------------------

def bit_space(name: str = "x") -> FiniteSpace:
    return FiniteSpace.from_labels([f"{name}0", f"{name}1"])


def independent_product_family(m: int, N: int = 2, copy: bool = False) -> JointPathLaw:
    """Y: ``N`` i.i.d. uniform steps on an ``m``-point grid; X: fair bits independent of Y.

    With ``copy=True`` the X-path is a single fair bit repeated, otherwise i.i.d. bits.
    """
    grid = FiniteSpace.grid(m, prefix="y")
    ys = PathSpace.uniform(N, grid)
    xs = PathSpace.uniform(N, bit_space())
    x_law = {}
    for x in xs.paths():
        if copy:
            if len(set(x)) == 1:
                x_law[x] = Fraction(1, 2)
        else:
            x_law[x] = Fraction(1, 2 ** N)
    wy = Fraction(1, m ** N)
    return JointPathLaw(ys, xs, {(y, x): wy * w for y in ys.paths() for x, w in x_law.items()})


def copy_family(m: int, N: int = 2) -> JointPathLaw:
    """Adapted law: X_n is the parity of the grid index of Y_n."""
    grid = FiniteSpace.grid(m, prefix="y")
    ys = PathSpace.uniform(N, grid)
    xs = PathSpace.uniform(N, bit_space())
    bits = bit_space().labels
    mu = PathMeasure.uniform(ys)
    f = AdaptedMap.from_function(mu, lambda n, p: bits[grid.index(p[-1]) % 2])
    return push_adapted(mu, f, xs)


FAMILIES: dict = {"independent": independent_product_family, "copy": copy_family}


def convergence_report(
    family: Callable | str, m_list: Sequence[int], schedule="finest", order: str = "interleaved"
) -> list:
    """Rows ``{m, stable_gap, w1_gap, bound, levels}`` for each refinement ``m``."""
    if isinstance(family, str):
        family = FAMILIES[family]
    out = []
    for m in m_list:
        r = approximate_adapted(family(m), schedule, order=order)
        out.append({"m": m, "stable_gap": r.gap, "w1_gap": r.w1, "bound": r.bound, "levels": r.levels})
    return out
