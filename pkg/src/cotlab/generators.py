"""Random instance generators for the regression suite.

Every generator takes a numpy Generator from :func:`cotlab.rng.make_rng`, so
a suite run is reproducible from its seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .measure import Coupling, DiscreteMeasure, FiniteSpace
from .paths import AdaptedMap, JointPathLaw, PathMeasure, PathSpace, push_adapted
from .rng import rational_weights
from .stopping import INF, RandomizedStoppingTime, StoppingTime
from .transport import ControlModel

LAW_KINDS = ("joint", "kernel", "mixture", "anticipative")


@dataclass(frozen=True)
class LawInstance:
    kind: str
    law: JointPathLaw
    index: int = 0


def _alphabet(k: int, prefix: str) -> FiniteSpace:
    return FiniteSpace.from_labels([f"{prefix}{i}" for i in range(k)])


def random_path_space(rng, N: int, max_size: int, prefix: str) -> PathSpace:
    return PathSpace(tuple(_alphabet(int(rng.integers(1, max_size + 1)), prefix) for _ in range(N)))


def random_path_measure(rng, space: PathSpace, p_zero: float = 0.3) -> PathMeasure:
    paths = space.paths()
    w = rational_weights(rng, len(paths), p_zero=p_zero)
    return PathMeasure(space, {p: v for p, v in zip(paths, w) if v})


def _kernel_law(rng, mu: PathMeasure, xs: PathSpace, lookahead: int) -> JointPathLaw:
    """X_n drawn from a random kernel of ``(y^{n + lookahead}, x^{n-1})``."""
    N = mu.space.N
    kernels = [dict() for _ in range(N)]

    def kernel(n, key):
        table = kernels[n]
        if key not in table:
            table[key] = rational_weights(rng, xs.alphabets[n].size, denom=4, p_zero=0.4)
        return table[key]

    law = {}
    for y, wy in mu.weights.items():
        partial = [((), wy)]
        for n in range(N):
            nxt = []
            for x, w in partial:
                probs = kernel(n, (y[:n + 1 + lookahead], x))
                for lab, p in zip(xs.alphabets[n].labels, probs):
                    if p:
                        nxt.append((x + (lab,), w * p))
            partial = nxt
        for x, w in partial:
            law[(y, x)] = law.get((y, x), 0) + w
    return JointPathLaw(mu.space, xs, law)


def random_adapted_map(rng, mu: PathMeasure, xs: PathSpace) -> AdaptedMap:
    return AdaptedMap.from_function(
        mu, lambda n, p: xs.alphabets[n - 1].labels[int(rng.integers(xs.alphabets[n - 1].size))]
    )


def random_law(rng, kind: str, N: int | None = None, max_size: int = 3) -> JointPathLaw:
    N = int(rng.integers(1, 4)) if N is None else N
    ys = random_path_space(rng, N, max_size, "y")
    xs = random_path_space(rng, N, max_size, "x")
    mu = random_path_measure(rng, ys)
    if kind == "joint":
        pairs = [(y, x) for y in mu.support() for x in xs.paths()]
        w = rational_weights(rng, len(pairs), p_zero=0.6)
        return JointPathLaw(ys, xs, {p: v for p, v in zip(pairs, w) if v})
    if kind == "kernel":
        return _kernel_law(rng, mu, xs, 0)
    if kind == "anticipative":
        return _kernel_law(rng, mu, xs, 1)
    if kind == "mixture":
        k = int(rng.integers(1, 4))
        lam = rational_weights(rng, k)
        out = {}
        for l in lam:
            for key, v in push_adapted(mu, random_adapted_map(rng, mu, xs), xs).support.items():
                out[key] = out.get(key, 0) + l * v
        return JointPathLaw(ys, xs, out)
    raise ValueError(f"unknown law kind {kind!r}")


def law_suite(rng, count: int = 1000, max_size: int = 3) -> list:
    """``count`` instances cycling through :data:`LAW_KINDS`."""
    return [
        LawInstance(LAW_KINDS[i % len(LAW_KINDS)], random_law(rng, LAW_KINDS[i % len(LAW_KINDS)], max_size=max_size), i)
        for i in range(count)
    ]


# -- stopping times ----------------------------------------------------------------

TAU_KINDS = ("hazard", "pure", "arbitrary")


def random_tau(rng, kind: str, N: int | None = None, max_size: int = 3) -> tuple:
    """``(tau, mu)``; ``hazard`` and ``pure`` are randomized stopping times by construction."""
    N = int(rng.integers(1, 4)) if N is None else N
    ys = random_path_space(rng, N, max_size, "y")
    mu = random_path_measure(rng, ys)
    if kind == "arbitrary":
        times = list(range(1, N + 1)) + [INF]
        kern = {y: dict(zip(times, rational_weights(rng, len(times), denom=4, p_zero=0.4))) for y in mu.support()}
        return RandomizedStoppingTime(ys, kern), mu
    hazard = {}
    for n in range(1, N + 1):
        for b in mu.prefixes(n):
            if kind == "pure":
                hazard[b] = Fraction(int(rng.integers(0, 2)))
            else:
                hazard[b] = Fraction(int(rng.integers(0, 5)), 4)
    kern = {}
    for y in mu.support():
        alive = Fraction(1)
        row = {}
        for n in range(1, N + 1):
            p = alive * hazard[y[:n]]
            if p:
                row[n] = p
            alive -= p
        if alive:
            row[INF] = alive
        kern[y] = row
    tau = RandomizedStoppingTime(ys, kern)
    if kind == "pure":
        StoppingTime(ys, {y: next(iter(r)) for y, r in tau.kernel.items()})  # validates
    return tau, mu


def tau_suite(rng, count: int = 300, max_size: int = 3) -> list:
    out = []
    for i in range(count):
        kind = TAU_KINDS[i % len(TAU_KINDS)]
        tau, mu = random_tau(rng, kind, max_size=max_size)
        out.append((kind, tau, mu))
    return out


# -- linear objectives and control models --------------------------------------------------

def random_objective(rng, mu: PathMeasure, xs: PathSpace, high: int = 5) -> dict:
    return {(y, x): Fraction(int(rng.integers(0, high + 1))) for y in mu.support() for x in xs.paths()}


def small_causal_instance(rng, max_vars: int = 64, max_maps: int = 4096) -> tuple:
    """``(mu, x_space)`` small enough for both the exact LP and exhaustive adapted search."""
    from .extreme import count_adapted_maps

    while True:
        N = int(rng.integers(1, 4))
        ys = random_path_space(rng, N, 3, "y")
        xs = random_path_space(rng, N, 2, "x")
        mu = random_path_measure(rng, ys)
        if len(mu.support()) * xs.n_paths() <= max_vars and count_adapted_maps(mu, xs) <= max_maps:
            return mu, xs


def control_suite(rng, count: int = 30) -> list:
    out = []
    for i in range(count):
        mu, xs = small_causal_instance(rng)
        out.append(ControlModel(mu, xs, random_objective(rng, mu, xs), None, name=f"linear-{i}"))
    return out


# -- transport -----------------------------------------------------------------------

def transport_instance(rng, m: int = 3, n: int = 3, high: int = 9) -> tuple:
    a = rational_weights(rng, m)
    b = rational_weights(rng, n)
    C = [[Fraction(int(v)) for v in rng.integers(0, high + 1, size=n)] for _ in range(m)]
    return a, b, C


def monge_family(m: int) -> list:
    """Standard couplings with the uniform row law on ``m`` grid atoms:
    ``mu x Unif{0, 1}`` and the monotone Monge coupling onto four atoms."""
    X = FiniteSpace.grid(m, prefix="x")
    Y = FiniteSpace.grid(4, prefix="y")
    mu = DiscreteMeasure.uniform(X)
    bits = FiniteSpace.from_labels(["0", "1"])
    prod = Coupling.product(mu, DiscreteMeasure.uniform(bits))
    one = Fraction(1, m)
    mono = Coupling(X, Y, tuple(tuple(one if j == (4 * i) // m else Fraction(0) for j in range(4)) for i in range(m)))
    return [("product", prod), ("monotone", mono)]
