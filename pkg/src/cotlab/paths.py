"""Discrete-time path spaces and joint laws of (Y-path, X-path) pairs.

Paths are tuples of atom labels, one per time step.  Joint laws are stored
sparsely as ``{(y_path, x_path): weight}`` with positive weights only.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .errors import InvalidMeasure, NullPath, ShapeMismatch, UndefinedPrefix
from .measure import Coupling, FiniteSpace, normalize_weights

PATH_SEP = "/"


@dataclass(frozen=True)
class PathSpace:
    alphabets: tuple

    def __post_init__(self):
        alph = tuple(self.alphabets)
        object.__setattr__(self, "alphabets", alph)
        if not alph:
            raise ValueError("horizon N must be at least 1")
        if any(not isinstance(a, FiniteSpace) for a in alph):
            raise TypeError("alphabets must be FiniteSpace instances")

    @classmethod
    def uniform(cls, N: int, alphabet: FiniteSpace) -> "PathSpace":
        return cls((alphabet,) * N)

    @classmethod
    def from_labels(cls, labels_per_step: Sequence[Sequence[str]]) -> "PathSpace":
        return cls(tuple(FiniteSpace.from_labels(list(ls)) for ls in labels_per_step))

    @property
    def N(self) -> int:
        return len(self.alphabets)

    def prefixes(self, n: int) -> list:
        """All label tuples of length ``n`` in lexicographic atom order."""
        return [tuple(p) for p in product(*(a.labels for a in self.alphabets[:n]))]

    def paths(self) -> list:
        return self.prefixes(self.N)

    def n_paths(self) -> int:
        out = 1
        for a in self.alphabets:
            out *= a.size
        return out

    def validate(self, path: Sequence[str], n: int | None = None) -> tuple:
        path = tuple(path)
        n = self.N if n is None else n
        if len(path) != n:
            raise ShapeMismatch(f"path {path} has length {len(path)}, expected {n}")
        for lab, alph in zip(path, self.alphabets):
            if lab not in alph._index:
                raise ShapeMismatch(f"label {lab!r} not in alphabet {alph.labels}")
        return path

    def rank(self, path: Sequence[str]) -> tuple:
        """Sort key realising the lexicographic atom order."""
        return tuple(a.index(lab) for a, lab in zip(self.alphabets, path))

    def coords(self, path: Sequence[str]) -> tuple:
        out = ()
        for a, lab in zip(self.alphabets, path):
            out = out + a.coord(a.index(lab))
        return out

    @property
    def dim(self) -> int:
        return sum(a.dim for a in self.alphabets)

    def as_space(self, paths: Iterable | None = None) -> FiniteSpace:
        """Flatten (a subset of) paths into a FiniteSpace with concatenated coordinates."""
        paths = self.paths() if paths is None else sorted(paths, key=self.rank)
        return FiniteSpace(tuple((PATH_SEP.join(p), self.coords(p)) for p in paths), self.dim)


@dataclass(frozen=True)
class PathMeasure:
    """Probability on full paths of ``space``; ``weights`` maps path to mass (positive only)."""

    space: PathSpace
    weights: Mapping

    def __post_init__(self):
        items = [(self.space.validate(p), w) for p, w in dict(self.weights).items()]
        vals = normalize_weights([w for _, w in items])
        merged = {}
        for (p, _), w in zip(items, vals):
            if w < 0:
                raise InvalidMeasure("path weights must be nonnegative")
            if w:
                merged[p] = merged.get(p, 0) + w
        total = sum(merged.values(), Fraction(0) if all(isinstance(v, Fraction) for v in vals) else 0.0)
        exact = isinstance(total, Fraction)
        if (total != 1) if exact else abs(total - 1.0) > 1e-12:
            raise InvalidMeasure(f"path measure has total mass {total}")
        ordered = dict(sorted(merged.items(), key=lambda kv: self.space.rank(kv[0])))
        object.__setattr__(self, "weights", MappingProxyType(ordered))

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.weights.values())

    def __getitem__(self, path):
        return self.weights.get(tuple(path), 0)

    def support(self) -> list:
        return list(self.weights)

    @cached_property
    def prefix_mass(self) -> dict:
        """Mass of every positive prefix of every length ``0..N``."""
        out = {}
        for p, w in self.weights.items():
            for n in range(self.space.N + 1):
                out[p[:n]] = out.get(p[:n], 0) + w
        return out

    def prefixes(self, n: int) -> list:
        seen = dict.fromkeys(p[:n] for p in self.weights)
        return list(seen)

    def conditional(self, path, n: int):
        """``mu(Y = path | Y^n = path[:n])``."""
        path = tuple(path)
        den = self.prefix_mass.get(path[:n], 0)
        if not den:
            raise NullPath(f"prefix {path[:n]} has zero probability")
        return self[path] / den

    @classmethod
    def product(cls, space: PathSpace, step_weights: Sequence[Sequence]) -> "PathMeasure":
        """Independent steps with the given per-step laws."""
        w = {}
        for path in space.paths():
            v = Fraction(1)
            for n, lab in enumerate(path):
                v = v * Fraction(step_weights[n][space.alphabets[n].index(lab)])
            if v:
                w[path] = v
        return cls(space, w)

    @classmethod
    def uniform(cls, space: PathSpace) -> "PathMeasure":
        k = space.n_paths()
        return cls(space, {p: Fraction(1, k) for p in space.paths()})


@dataclass(frozen=True)
class JointPathLaw:
    y_space: PathSpace
    x_space: PathSpace
    support: Mapping

    def __post_init__(self):
        if self.y_space.N != self.x_space.N:
            raise ShapeMismatch("Y and X path spaces must share the horizon")
        raw = list(dict(self.support).items()) if isinstance(self.support, Mapping) else list(self.support)
        keys = [(self.y_space.validate(y), self.x_space.validate(x)) for (y, x), _ in raw]
        vals = normalize_weights([w for _, w in raw])
        merged = {}
        for k, w in zip(keys, vals):
            if w < 0:
                raise InvalidMeasure("joint weights must be nonnegative")
            if w:
                merged[k] = merged.get(k, 0) + w
        exact = all(isinstance(v, Fraction) for v in vals)
        total = sum(merged.values(), Fraction(0) if exact else 0.0)
        if (total != 1) if exact else abs(total - 1.0) > 1e-12:
            raise InvalidMeasure(f"joint law has total mass {total}")
        ordered = dict(sorted(merged.items(), key=lambda kv: (self.y_space.rank(kv[0][0]), self.x_space.rank(kv[0][1]))))
        object.__setattr__(self, "support", MappingProxyType(ordered))

    @classmethod
    def from_triples(cls, y_space, x_space, triples) -> "JointPathLaw":
        return cls(y_space, x_space, [((tuple(y), tuple(x)), w) for y, x, w in triples])

    @property
    def N(self) -> int:
        return self.y_space.N

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.support.values())

    def __eq__(self, other):
        if not isinstance(other, JointPathLaw):
            return NotImplemented
        return (
            self.y_space == other.y_space
            and self.x_space == other.x_space
            and dict(self.support) == dict(other.support)
        )

    def __hash__(self):
        return hash((self.y_space, self.x_space, tuple(self.support.items())))

    def items(self):
        return self.support.items()

    def as_float(self) -> "JointPathLaw":
        return JointPathLaw(self.y_space, self.x_space, {k: float(v) for k, v in self.support.items()})

    def mix(self, other: "JointPathLaw", lam) -> "JointPathLaw":
        """``lam * self + (1 - lam) * other``."""
        out = {}
        for k, w in self.support.items():
            out[k] = out.get(k, 0) + lam * w
        for k, w in other.support.items():
            out[k] = out.get(k, 0) + (1 - lam) * w
        return JointPathLaw(self.y_space, self.x_space, out)

    def as_coupling(self) -> Coupling:
        """Dense coupling between the full Y-path space and X-path space."""
        ys, xs = self.y_space.as_space(), self.x_space.as_space()
        yi = {lab: i for i, lab in enumerate(ys.labels)}
        xi = {lab: i for i, lab in enumerate(xs.labels)}
        zero = Fraction(0) if self.exact else 0.0
        mass = [[zero] * xs.size for _ in range(ys.size)]
        for (y, x), w in self.support.items():
            mass[yi[PATH_SEP.join(y)]][xi[PATH_SEP.join(x)]] += w
        return Coupling(ys, xs, tuple(map(tuple, mass)))

    def joint_points(self) -> tuple:
        pts = [self.y_space.coords(y) + self.x_space.coords(x) for (y, x) in self.support]
        return pts, list(self.support.values())


def y_marginal(J: JointPathLaw) -> PathMeasure:
    w = {}
    for (y, _), v in J.support.items():
        w[y] = w.get(y, 0) + v
    return PathMeasure(J.y_space, w)


def x_marginal(J: JointPathLaw) -> PathMeasure:
    w = {}
    for (_, x), v in J.support.items():
        w[x] = w.get(x, 0) + v
    return PathMeasure(J.x_space, w)


@dataclass(frozen=True)
class PrefixConditional:
    """Law of ``X^n`` given a Y-path (``given='path'``) or its length-``n`` prefix."""

    prefix: tuple
    n: int
    given: str
    dist: Mapping

    def tv(self, other: "PrefixConditional"):
        keys = set(self.dist) | set(other.dist)
        return sum((abs(self.dist.get(k, 0) - other.dist.get(k, 0)) for k in keys), 0) / 2


def prefix_conditional(J: JointPathLaw, n: int, y_full_path, given: str = "path") -> PrefixConditional:
    """Conditional law of ``(X_1..X_n)`` given the full Y-path or its length-``n`` prefix."""
    y = J.y_space.validate(y_full_path)
    if not 1 <= n <= J.N:
        raise ValueError(f"n must be in 1..{J.N}")
    if given == "path":
        match = lambda yy: yy == y  # noqa: E731
        cond = y
    elif given == "prefix":
        match = lambda yy: yy[:n] == y[:n]  # noqa: E731
        cond = y[:n]
    else:
        raise ValueError("given must be 'path' or 'prefix'")
    num = {}
    den = 0
    for (yy, xx), w in J.support.items():
        if match(yy):
            num[xx[:n]] = num.get(xx[:n], 0) + w
            den += w
    if not den:
        raise NullPath(f"Y-path {y} has zero probability")
    dist = {k: v / den for k, v in sorted(num.items(), key=lambda kv: J.x_space.rank(kv[0]))}
    return PrefixConditional(cond, n, given, MappingProxyType(dist))


@dataclass(frozen=True)
class AdaptedMap:
    """Per-step tables ``steps[n-1][(y_1..y_n)] -> x_n``.

    Step ``n`` reads only the length-``n`` prefix, so adaptedness holds by
    construction.
    """

    steps: tuple

    def __post_init__(self):
        steps = tuple(MappingProxyType(dict(s)) for s in self.steps)
        for n, table in enumerate(steps, start=1):
            for pre in table:
                if len(pre) != n:
                    raise ShapeMismatch(f"step {n} table has a key of length {len(pre)}")
        object.__setattr__(self, "steps", steps)

    @property
    def N(self) -> int:
        return len(self.steps)

    def __call__(self, y) -> tuple:
        y = tuple(y)
        out = []
        for n, table in enumerate(self.steps, start=1):
            try:
                out.append(table[y[:n]])
            except KeyError:
                raise UndefinedPrefix(f"adapted map undefined on prefix {y[:n]}") from None
        return tuple(out)

    def __eq__(self, other):
        return isinstance(other, AdaptedMap) and [dict(s) for s in self.steps] == [dict(s) for s in other.steps]

    def __hash__(self):
        return hash(tuple(tuple(sorted(s.items())) for s in self.steps))

    def restrict(self, mu: PathMeasure) -> "AdaptedMap":
        """Drop table entries on prefixes of zero ``mu``-probability."""
        return AdaptedMap(tuple({p: v for p, v in s.items() if mu.prefix_mass.get(p, 0)} for s in self.steps))

    @classmethod
    def from_function(cls, mu: PathMeasure, fn) -> "AdaptedMap":
        """Build from ``fn(n, prefix) -> x_label`` on every positive prefix of ``mu``."""
        return cls(tuple({p: fn(n, p) for p in mu.prefixes(n)} for n in range(1, mu.space.N + 1)))


def push_adapted(mu: PathMeasure, f: AdaptedMap, x_space: PathSpace) -> JointPathLaw:
    """``mu(dy) delta_{f(y)}(dx)``."""
    if f.N != mu.space.N:
        raise ShapeMismatch("adapted map horizon differs from the measure's")
    return JointPathLaw(mu.space, x_space, [((y, f(y)), w) for y, w in mu.weights.items()])


def is_adapted(J: JointPathLaw) -> bool:
    """True iff ``J`` is the push-forward of its Y-marginal under an adapted map."""
    return adapted_map_of(J) is not None


def adapted_map_of(J: JointPathLaw) -> AdaptedMap | None:
    """The adapted map realising ``J``, or None if ``J`` is not adapted."""
    xs = {}
    for (y, x) in J.support:
        if y in xs:
            return None
        xs[y] = x
    steps = [dict() for _ in range(J.N)]
    for y, x in xs.items():
        for n in range(1, J.N + 1):
            prev = steps[n - 1].setdefault(y[:n], x[n - 1])
            if prev != x[n - 1]:
                return None
    return AdaptedMap(tuple(steps))


def conditional_law_table(J: JointPathLaw, n: int) -> dict:
    """``{(y^n, x^{n-1}): {x_n: P(X_n = x_n | Y^n = y^n, X^{n-1} = x^{n-1})}}``."""
    num = {}
    for (y, x), w in J.support.items():
        key = (y[:n], x[:n - 1])
        d = num.setdefault(key, {})
        d[x[n - 1]] = d.get(x[n - 1], 0) + w
    out = {}
    for key, d in num.items():
        tot = sum(d.values())
        alph = J.x_space.alphabets[n - 1]
        out[key] = {lab: d[lab] / tot for lab in alph.labels if lab in d}
    return out
