"""Transport and control problems as linear programs.

* ``kantorovich``: optimal coupling in Pi(mu, nu).
* ``monge_bruteforce``: best map pushing mu to nu (exhaustive).
* ``causal_value``: optimum over compatible joint laws with Y-marginal mu.
* ``control_values``: relaxed (compatible) vs pure (adapted) control values.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .compat import causal_constraints, vector_to_law
from .errors import InstanceTooLarge
from .extreme import MAX_ADAPTED_MAPS, _cost_fn, iter_adapted_maps, linear_opt_via_extremes
from .lp import LinearSystem, lp_solve, transport_system
from .measure import Coupling, DiscreteMeasure, FiniteSpace
from .monge import MongeMap
from .paths import JointPathLaw, PathMeasure, PathSpace

MAX_MONGE_MAPS = 200_000


def cost_matrix(mu: DiscreteMeasure, nu: DiscreteMeasure, cost="l1") -> list:
    """``cost`` may be ``"l1"``, ``"hamming"`` (``1{i != j}`` by label), a callable ``c(i, j)`` or a matrix."""
    m, n = mu.space.size, nu.space.size
    if cost == "l1":
        return [
            [sum((abs(a - b) for a, b in zip(mu.space.coord(i), nu.space.coord(j))), Fraction(0)) for j in range(n)]
            for i in range(m)
        ]
    if cost == "hamming":
        return [[Fraction(int(mu.space.labels[i] != nu.space.labels[j])) for j in range(n)] for i in range(m)]
    if callable(cost):
        return [[cost(i, j) for j in range(n)] for i in range(m)]
    C = [list(r) for r in cost]
    if len(C) != m or any(len(r) != n for r in C):
        raise ValueError("cost matrix shape does not match the measures")
    return C


def kantorovich(mu: DiscreteMeasure, nu: DiscreteMeasure, cost="l1", sense: str = "min") -> tuple:
    """Optimal value and coupling over ``Pi(mu, nu)``."""
    C = cost_matrix(mu, nu, cost)
    sys = transport_system(mu.weights, nu.weights)
    res = lp_solve(sys, [c for row in C for c in row], sense=sense)
    n = nu.space.size
    mass = tuple(tuple(res.x[i * n:(i + 1) * n]) for i in range(mu.space.size))
    return res.value, Coupling(mu.space, nu.space, mass)


@dataclass(frozen=True)
class MongeResult:
    feasible: bool
    value: object = None
    map: MongeMap | None = None
    n_maps: int = 0


def monge_bruteforce(mu: DiscreteMeasure, nu: DiscreteMeasure, cost="l1", sense: str = "min",
                     limit: int = MAX_MONGE_MAPS) -> MongeResult:
    """Exhaustive optimum over maps ``phi`` with ``mu o phi^-1 == nu``; infeasible when none exists.

    Source atoms are assigned depth first and a branch is cut only when a
    target would exceed its mass, so every feasible map is visited.
    ``limit`` caps the number of visited assignments.
    """
    m, n = mu.space.size, nu.space.size
    support = [i for i in range(m) if mu[i]]
    C = cost_matrix(mu, nu, cost)
    cap = list(nu.weights)
    pick = [0] * len(support)
    best = [None, None]
    visited = [0]

    def better(v):
        return best[0] is None or (v < best[0] if sense == "min" else v > best[0])

    def dfs(k, acc):
        visited[0] += 1
        if visited[0] > limit:
            raise InstanceTooLarge(f"more than {limit} partial maps visited")
        if k == len(support):
            if not any(cap) and better(acc):
                best[0], best[1] = acc, tuple(pick)
            return
        i = support[k]
        w = mu[i]
        for j in range(n):
            if cap[j] >= w:
                cap[j] -= w
                pick[k] = j
                dfs(k + 1, acc + w * C[i][j])
                cap[j] += w

    dfs(0, Fraction(0))
    if best[0] is None:
        return MongeResult(False, None, None, visited[0])
    targets = [0] * m
    for i, j in zip(support, best[1]):
        targets[i] = j
    return MongeResult(True, best[0], MongeMap(mu.space, nu.space, tuple(targets)), visited[0])


# -- coupling families for the Monge gap study ---------------------------------------

def _bits() -> FiniteSpace:
    return FiniteSpace.from_labels(["0", "1"])


def diagonal_family(m: int) -> Coupling:
    """Identity coupling of the uniform law on ``m`` grid atoms."""
    return Coupling.diagonal(DiscreteMeasure.uniform(FiniteSpace.grid(m)))


def independent_family(m: int) -> Coupling:
    """``mu x nu`` with ``mu`` alternating masses ``3, 1, 3, 1, ...`` on ``m`` atoms and
    ``nu = (1/4, 3/4)`` on ``{0, 1}``; non-uniform ``mu`` makes Monge strictly costlier."""
    raw = [3 if i % 2 == 0 else 1 for i in range(m)]
    tot = sum(raw)
    mu = DiscreteMeasure(FiniteSpace.grid(m), tuple(Fraction(r, tot) for r in raw))
    nu = DiscreteMeasure(_bits(), (Fraction(1, 4), Fraction(3, 4)))
    return Coupling.product(mu, nu)


def granular_family(m: int) -> Coupling:
    """Uniform ``mu`` on ``m`` atoms against ``nu = (1/4, 3/4)``: no map exists unless ``4 | m``."""
    mu = DiscreteMeasure.uniform(FiniteSpace.grid(m))
    nu = DiscreteMeasure(_bits(), (Fraction(1, 4), Fraction(3, 4)))
    return Coupling.product(mu, nu)


COUPLING_FAMILIES = {"diagonal": diagonal_family, "independent": independent_family, "granular": granular_family}


def monge_gap_study(family: Callable | str, m_list: Sequence[int], cost="l1") -> list:
    """Rows ``{m, kantorovich, monge, gap, feasible}``; ``monge``/``gap`` are None when infeasible."""
    from .measure import marginal

    if isinstance(family, str):
        family = COUPLING_FAMILIES[family]
    rows = []
    for m in m_list:
        P = family(m)
        mu, nu = marginal(P, "row"), marginal(P, "col")
        kv, _ = kantorovich(mu, nu, cost)
        mb = monge_bruteforce(mu, nu, cost)
        rows.append({
            "m": m,
            "kantorovich": kv,
            "monge": mb.value,
            "gap": (mb.value - kv) if mb.feasible else None,
            "feasible": mb.feasible,
        })
    return rows


# -- causal transport -------------------------------------------------------------------

def _objective_vector(system: LinearSystem, cost) -> list:
    c = _cost_fn(cost)
    return [c(y, x) for (y, x) in system.variables]


def causal_value(mu: PathMeasure, x_space: PathSpace, cost, sense: str = "min") -> tuple:
    """Optimum of ``sum c(y, x) P(y, x)`` over compatible ``P`` with Y-marginal ``mu``."""
    sys = causal_constraints(mu, x_space)
    res = lp_solve(sys, _objective_vector(sys, cost), sense=sense)
    return res.value, vector_to_law(sys, res.x, mu.space, x_space)


def marginal_system(mu: PathMeasure, x_space: PathSpace) -> LinearSystem:
    """Only the Y-marginal rows: all of ``Pi(mu)`` with the X-marginal free."""
    ys, xs = mu.support(), x_space.paths()
    variables = tuple((y, x) for y in ys for x in xs)
    k = len(xs)
    rows = tuple(({r * k + j: 1 for j in range(k)}, mu[y]) for r, y in enumerate(ys))
    return LinearSystem(variables, rows, tuple(("marginal", y) for y in ys))


def unconstrained_value(mu: PathMeasure, x_space: PathSpace, cost, sense: str = "min") -> tuple:
    """Same objective over every coupling with Y-marginal ``mu`` (no causality)."""
    sys = marginal_system(mu, x_space)
    res = lp_solve(sys, _objective_vector(sys, cost), sense=sense)
    return res.value, vector_to_law(sys, res.x, mu.space, x_space)


# -- control ------------------------------------------------------------------------------

def _moments(law_items, c):
    m1 = sum((w * c(y, x) for (y, x), w in law_items), Fraction(0))
    m2 = sum((w * c(y, x) ** 2 for (y, x), w in law_items), Fraction(0))
    return m1, m2


TARGET_MEAN = Fraction(1, 3)

NONLINEAR = {
    # functionals of the first two moments of c under the joint law; the first
    # two are convex along mixtures, so pure controls already attain them
    "square_mean": lambda m1, m2: m1 * m1,
    "mean_variance": lambda m1, m2: m1 - (m2 - m1 * m1),
    # concave: randomisation can help, and only finer noise closes the gap
    "target_mean": lambda m1, m2: -(m1 - TARGET_MEAN) ** 2,
}


@dataclass(frozen=True)
class ControlModel:
    """Noise law ``mu`` on Y-paths, action paths in ``action_space`` and a reward.

    ``reward`` is a table or callable ``c(y, a)``.  With ``functional`` set to a
    key of ``NONLINEAR`` the objective is that functional of the law of
    ``c(Y, A)``; otherwise it is ``E[c(Y, A)]``.  Values are maximised.
    """

    mu: PathMeasure
    action_space: PathSpace
    reward: object
    functional: str | None = None
    name: str = ""

    def __post_init__(self):
        if self.action_space.N != self.mu.space.N:
            raise ValueError("action and noise horizons differ")
        if self.functional is not None and self.functional not in NONLINEAR:
            raise ValueError(f"unknown functional {self.functional!r}; choose from {sorted(NONLINEAR)}")

    @property
    def linear(self) -> bool:
        return self.functional is None

    def evaluate(self, J: JointPathLaw):
        c = _cost_fn(self.reward)
        m1, m2 = _moments(J.support.items(), c)
        return m1 if self.linear else NONLINEAR[self.functional](m1, m2)


def control_values(model: ControlModel, grid: int = 24, limit: int = MAX_ADAPTED_MAPS) -> dict:
    """``{relaxed, pure, gap}``.

    Linear rewards: relaxed is the causal LP optimum and pure the best adapted
    map, which agree exactly.  Nonlinear functionals: relaxed is a grid search
    (``grid`` steps) over pairwise mixtures of adapted laws, a lower estimate of
    the optimum over compatible laws; the gap is reported, never assumed zero.
    """
    mu, xs = model.mu, model.action_space
    if model.linear:
        relaxed, _ = causal_value(mu, xs, model.reward, sense="max")
        pure, f = linear_opt_via_extremes(mu, xs, model.reward, sense="max", limit=limit)
        return {"relaxed": relaxed, "pure": pure, "gap": relaxed - pure, "method": "lp"}
    c = _cost_fn(model.reward)
    F = NONLINEAR[model.functional]
    ys = list(mu.weights.items())
    moments = sorted({_moments([((y, f(y)), w) for y, w in ys], c) for f in iter_adapted_maps(mu, xs, limit)})
    if len(moments) ** 2 * (grid + 1) > 50 * limit:
        raise InstanceTooLarge("too many adapted laws for the mixture grid")
    pure = max(F(m1, m2) for m1, m2 in moments)
    relaxed = pure
    lams = [Fraction(k, grid) for k in range(grid + 1)]
    for i, (a1, a2) in enumerate(moments):
        for b1, b2 in moments[i + 1:]:
            for lam in lams:
                v = F(lam * a1 + (1 - lam) * b1, lam * a2 + (1 - lam) * b2)
                if v > relaxed:
                    relaxed = v
    return {"relaxed": relaxed, "pure": pure, "gap": relaxed - pure, "method": "mixture-grid"}


def control_family(m: int, functional: str | None = None) -> ControlModel:
    """One step of noise uniform on ``m`` grid atoms, a binary action, reward = the action."""
    mu = PathMeasure.uniform(PathSpace((FiniteSpace.grid(m, prefix="y"),)))
    acts = PathSpace((_bits(),))
    return ControlModel(mu, acts, lambda y, a: Fraction(int(a[0])), functional, name=f"bit-m{m}")
