"""Randomized and pure stopping times on the grid ``{1, ..., N, inf}``.

A randomized stopping time is a kernel from Y-paths to times whose CDF at
``t`` depends on the path only through its length-``t`` prefix.  Such a
kernel splits into pure stopping times via the quantile rule
``A(y, u) = inf{t : F_y(t) >= u}``; approximation by pure times goes through
the indicator process ``H_t = 1{tau <= t}`` and the first time it reaches 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Mapping, Sequence

from .adapted import approximate_adapted
from .compat import CheckResult
from .errors import MissingKernelRow, NotRandomizedST
from .measure import FiniteSpace, w1_points
from .paths import JointPathLaw, PathMeasure, PathSpace

INF = math.inf
CROSSING_LEVEL = Fraction(1, 2)


def time_key(t):
    """JSON/CSV spelling of a time."""
    return "inf" if t == INF else str(t)


def parse_time(v):
    if v in ("inf", "Infinity", INF, None):
        return INF
    return int(v)


def time_coord(t) -> float:
    """Bounded transform ``t / (1 + t)`` with ``inf -> 1``."""
    return 1.0 if t == INF else t / (1 + t)


def _times(N: int) -> list:
    return list(range(1, N + 1)) + [INF]


@dataclass(frozen=True)
class RandomizedStoppingTime:
    """``kernel[y] = {time: prob}`` for Y-paths ``y``; times in ``1..N`` or ``INF``."""

    y_space: PathSpace
    kernel: Mapping

    def __post_init__(self):
        N = self.y_space.N
        allowed = set(_times(N))
        rows = {}
        for y, row in dict(self.kernel).items():
            y = self.y_space.validate(y)
            clean = {}
            for t, p in dict(row).items():
                t = parse_time(t)
                if t not in allowed:
                    raise ValueError(f"time {t} outside 1..{N} or inf")
                p = Fraction(p) if not isinstance(p, float) else p
                if p < 0:
                    raise ValueError("kernel weights must be nonnegative")
                if p:
                    clean[t] = clean.get(t, 0) + p
            total = sum(clean.values())
            if (total != 1) if all(isinstance(v, Fraction) for v in clean.values()) else abs(total - 1) > 1e-12:
                raise ValueError(f"kernel row for {y} sums to {total}")
            rows[y] = MappingProxyType(dict(sorted(clean.items())))
        object.__setattr__(self, "kernel", MappingProxyType(rows))

    @property
    def N(self) -> int:
        return self.y_space.N

    def cdf(self, y, t):
        row = self.kernel[tuple(y)]
        return sum((p for s, p in row.items() if s <= t), Fraction(0))

    def row(self, y):
        try:
            return self.kernel[tuple(y)]
        except KeyError:
            raise MissingKernelRow(tuple(y)) from None

    @classmethod
    def from_stopping_time(cls, st: "StoppingTime") -> "RandomizedStoppingTime":
        return cls(st.y_space, {y: {t: Fraction(1)} for y, t in st.rule.items()})


@dataclass(frozen=True)
class StoppingTime:
    """Pure stopping time ``rule[y] = time``; ``{tau <= t}`` is decided by ``y[:t]``."""

    y_space: PathSpace
    rule: Mapping

    def __post_init__(self):
        rule = {self.y_space.validate(y): parse_time(t) for y, t in dict(self.rule).items()}
        object.__setattr__(self, "rule", MappingProxyType(dict(sorted(rule.items(), key=lambda kv: self.y_space.rank(kv[0])))))
        bad = self.violation()
        if bad is not None:
            raise ValueError(f"not a stopping time: paths {bad[0]} and {bad[1]} share a prefix but disagree")

    def violation(self):
        """A pair of paths breaking prefix-measurability, or None."""
        by_prefix = {}
        for y, s in self.rule.items():
            if s == INF:
                continue
            by_prefix.setdefault(y[:s], (y, s))
        for y, s in self.rule.items():
            for t in range(1, self.y_space.N + 1):
                hit = by_prefix.get(y[:t])
                if hit is not None and hit[1] == t and s != t:
                    return hit[0], y
        return None

    def __call__(self, y):
        return self.rule[tuple(y)]

    def __eq__(self, other):
        return isinstance(other, StoppingTime) and self.y_space == other.y_space and dict(self.rule) == dict(other.rule)

    def __hash__(self):
        return hash(tuple(self.rule.items()))


def _support_paths(tau: RandomizedStoppingTime, mu: PathMeasure | None) -> list:
    if mu is None:
        return list(tau.kernel)
    for y in mu.support():
        if y not in tau.kernel:
            raise MissingKernelRow(y)
    return mu.support()


def is_randomized_st(tau: RandomizedStoppingTime, mu: PathMeasure | None = None) -> CheckResult:
    """Spread of ``F_y(t)`` across paths sharing the prefix ``y[:t]``, maximised over ``t``."""
    paths = _support_paths(tau, mu)
    exact = all(isinstance(p, Fraction) for row in tau.kernel.values() for p in row.values())
    worst = Fraction(0) if exact else 0.0
    witness = {}
    for t in range(1, tau.N):
        groups = {}
        for y in paths:
            groups.setdefault(y[:t], []).append(tau.cdf(y, t))
        for pre, vals in groups.items():
            spread = max(vals) - min(vals)
            if spread > worst:
                worst, witness = spread, {"t": t, "prefix": pre}
    ok = worst == 0 if exact else worst <= 1e-9
    return CheckResult(ok, worst, witness, "randomized_st")


def _quantile_time(tau, y, u):
    acc = Fraction(0)
    for t in _times(tau.N):
        acc += tau.kernel[y].get(t, 0)
        if acc >= u:
            return t
    return INF


def decompose_stopping(tau: RandomizedStoppingTime, mu: PathMeasure | None = None) -> list:
    """``[(weight, StoppingTime)]`` with ``sum_i w_i 1{st_i(y) <= t} == F_y(t)``.

    The interval ``(u0, u1]`` of the common refinement of all CDF values is
    represented by ``u1``; the rule there is ``y -> inf{t : F_y(t) >= u1}``.
    """
    res = is_randomized_st(tau, mu)
    if not res.ok:
        raise NotRandomizedST(f"kernel CDF spread {res.max_violation} at {res.witness}")
    paths = _support_paths(tau, mu)
    levels = {Fraction(0), Fraction(1)}
    for y in paths:
        for t in range(1, tau.N + 1):
            levels.add(tau.cdf(y, t))
    levels = sorted(levels)
    out = []
    for u0, u1 in zip(levels, levels[1:]):
        rule = {y: _quantile_time(tau, y, u1) for y in paths}
        out.append((u1 - u0, StoppingTime(tau.y_space, rule)))
    return out


def reconstruction_defect(tau: RandomizedStoppingTime, parts: Sequence, mu: PathMeasure | None = None):
    """Largest ``|sum_i w_i 1{st_i(y) <= t} - F_y(t)|`` over paths and times."""
    worst = Fraction(0)
    for y in _support_paths(tau, mu):
        for t in _times(tau.N):
            got = sum((w for w, st in parts if st(y) <= t), Fraction(0))
            worst = max(worst, abs(got - tau.cdf(y, t)))
    return worst


H_SPACE = FiniteSpace.from_labels(["0", "1"])


def indicator_process(tau: RandomizedStoppingTime, mu: PathMeasure) -> JointPathLaw:
    """Joint law of ``(Y, H)`` with ``H_t = 1{tau <= t}`` under ``mu(dy) tau(y, dt)``."""
    xs = PathSpace.uniform(tau.N, H_SPACE)
    support = {}
    for y, w in mu.weights.items():
        for s, p in tau.row(y).items():
            h = tuple("1" if s <= t else "0" for t in range(1, tau.N + 1))
            support[(y, h)] = support.get((y, h), 0) + w * p
    return JointPathLaw(mu.space, xs, support)


def first_crossing(h: Sequence) -> object:
    """First (1-based) index with ``h >= 1/2``, else ``INF``."""
    for t, v in enumerate(h, start=1):
        if v >= CROSSING_LEVEL:
            return t
    return INF


@dataclass(frozen=True)
class StoppingApproximation:
    st: StoppingTime
    w1: float
    levels: tuple


def stopping_w1(tau: RandomizedStoppingTime, st: StoppingTime, mu: PathMeasure) -> float:
    """W1 between the laws of ``(Y, tau)`` and ``(Y, st)`` with times mapped to ``t/(1+t)``."""
    pa, wa, pb, wb = [], [], [], []
    for y, w in mu.weights.items():
        c = mu.space.coords(y)
        for s, p in tau.row(y).items():
            pa.append(c + (time_coord(s),))
            wa.append(float(w * p))
        pb.append(c + (time_coord(st(y)),))
        wb.append(float(w))
    return float(w1_points(pa, wa, pb, wb))


def approximate_stopping(tau: RandomizedStoppingTime, mu: PathMeasure, schedule="finest") -> StoppingApproximation:
    """Pure stopping time ``first_crossing(h(Y))`` for the adapted approximation ``h`` of ``(Y, H)``."""
    res = is_randomized_st(tau, mu)
    if not res.ok:
        raise NotRandomizedST(f"kernel CDF spread {res.max_violation} at {res.witness}")
    r = approximate_adapted(indicator_process(tau, mu), schedule, with_w1=False)
    rule = {y: first_crossing([Fraction(v) for v in r.f(y)]) for y in mu.support()}
    st = StoppingTime(mu.space, rule)
    return StoppingApproximation(st, stopping_w1(tau, st, mu), r.levels)


# -- instance families -------------------------------------------------------------

def uniform_time_family(m: int) -> tuple:
    """``tau`` uniform on ``{1, 2}`` independent of ``Y``; ``Y_1`` uniform on ``m`` grid atoms, ``Y_2`` trivial."""
    ys = PathSpace((FiniteSpace.grid(m, prefix="y"), FiniteSpace.from_labels(["o"], [Fraction(1, 2)])))
    mu = PathMeasure.uniform(ys)
    tau = RandomizedStoppingTime(ys, {y: {1: Fraction(1, 2), 2: Fraction(1, 2)} for y in mu.support()})
    return tau, mu

