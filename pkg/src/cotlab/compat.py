"""Four checks of the compatibility (immersion) property of a joint path law,
and the linear constraints that cut out the compatible polytope.

Writing ``F`` for the filtration of Y and ``G`` for the joint filtration of
(Y, X), the checks are:

* ``check_ci``      X^n is conditionally independent of the whole Y-path given Y^n;
* ``check_mgale``   closed F-martingales of full-path indicators are G-martingales;
* ``check_proj``    E[1{Y = c} | F_n] == E[1{Y = c} | G_n];
* ``check_reverse`` E[1{Y^n = b, X^n = a} | F_n] == E[same | F_N].

On finite spaces they accept exactly the same laws.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .lp import FLOAT_TOL, LinearSystem
from .paths import JointPathLaw, PathMeasure, PathSpace, prefix_conditional, y_marginal


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    max_violation: object
    witness: dict = field(default_factory=dict)
    checker: str = ""

    def to_json(self) -> dict:
        return {
            "checker": self.checker,
            "ok": self.ok,
            "max_violation": _fmt(self.max_violation),
            "witness": {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.witness.items()},
        }


def _fmt(v):
    if isinstance(v, Fraction):
        return str(v)
    return repr(float(v))


def _verdict(name, worst, witness, exact, tol):
    ok = worst == 0 if exact else worst <= tol
    return CheckResult(ok, worst, witness, name)


class _Tally:
    """Running maximum with the first witness attaining it."""

    def __init__(self, zero):
        self.worst = zero
        self.witness = {}

    def add(self, value, **witness):
        if value > self.worst:
            self.worst = value
            self.witness = witness


def _zero(J):
    return Fraction(0) if J.exact else 0.0


def _tol(J, tol):
    return FLOAT_TOL if tol is None else tol


def check_ci(J: JointPathLaw, tol: float | None = None) -> CheckResult:
    """Largest total variation between ``L(X^n | Y)`` and ``L(X^n | Y^n)``."""
    tally = _Tally(_zero(J))
    mu = y_marginal(J)
    for n in range(1, J.N):  # at n = N both conditionals coincide
        cache = {}
        for y in mu.support():
            pre = y[:n]
            if pre not in cache:
                cache[pre] = prefix_conditional(J, n, y, given="prefix")
            full = prefix_conditional(J, n, y, given="path")
            tally.add(full.tv(cache[pre]), n=n, y=y)
    return _verdict("ci", tally.worst, tally.witness, J.exact, _tol(J, tol))


def _joint_prefix_tables(J: JointPathLaw):
    """For each n: mass of (y^n, x^n) and mass of (y^n, x^n, full y)."""
    N = J.N
    pair = [dict() for _ in range(N + 1)]
    with_y = [dict() for _ in range(N + 1)]
    for (y, x), w in J.support.items():
        for n in range(N + 1):
            k = (y[:n], x[:n])
            pair[n][k] = pair[n].get(k, 0) + w
            k2 = (y[:n], x[:n], y)
            with_y[n][k2] = with_y[n].get(k2, 0) + w
    return pair, with_y


def check_mgale(J: JointPathLaw, tol: float | None = None) -> CheckResult:
    """One-step G-martingale property of ``M_n = mu(c | Y^n)`` for every full path ``c``."""
    mu = y_marginal(J)
    pm = mu.prefix_mass
    pair, with_y = _joint_prefix_tables(J)
    tally = _Tally(_zero(J))
    for n in range(J.N):
        # E[M_{n+1} | y^n, x^n] = sum_y P(y | y^n, x^n) mu(c | y^{n+1})
        groups = {}
        for (b, a, y), w in with_y[n].items():
            groups.setdefault((b, a), []).append((y, w))
        for (b, a), rows in groups.items():
            den = pair[n][(b, a)]
            # collect the next-step prefix law under G_n
            nxt = {}
            for y, w in rows:
                nxt[y[:n + 1]] = nxt.get(y[:n + 1], 0) + w / den
            for c in mu.support():
                if c[:n] != b:
                    continue
                m_n = mu[c] / pm[b]
                expect = nxt.get(c[:n + 1], 0) * (mu[c] / pm[c[:n + 1]])
                tally.add(abs(expect - m_n), n=n, y_prefix=b, x_prefix=a, path=c)
    return _verdict("mgale", tally.worst, tally.witness, J.exact, _tol(J, tol))


def check_proj(J: JointPathLaw, tol: float | None = None) -> CheckResult:
    """``P(Y = c | Y^n, X^n)`` against ``mu(c | Y^n)`` for all full paths ``c``."""
    mu = y_marginal(J)
    pm = mu.prefix_mass
    pair, with_y = _joint_prefix_tables(J)
    tally = _Tally(_zero(J))
    zero = _zero(J)
    for n in range(1, J.N):
        for (b, a), den in pair[n].items():
            for c in mu.support():
                if c[:n] != b:
                    continue
                lhs = with_y[n].get((b, a, c), zero) / den
                tally.add(abs(lhs - mu[c] / pm[b]), n=n, y_prefix=b, x_prefix=a, path=c)
    return _verdict("proj", tally.worst, tally.witness, J.exact, _tol(J, tol))


def check_reverse(J: JointPathLaw, tol: float | None = None) -> CheckResult:
    """``P(X^n = a | Y^n)`` against ``P(X^n = a | Y)`` atom by atom."""
    mu = y_marginal(J)
    pm = mu.prefix_mass
    pair, with_y = _joint_prefix_tables(J)
    tally = _Tally(_zero(J))
    zero = _zero(J)
    for n in range(1, J.N):
        x_prefixes = {}
        for b, a in pair[n]:
            x_prefixes.setdefault(b, []).append(a)
        for y in mu.support():
            b = y[:n]
            for a in x_prefixes.get(b, ()):
                given_prefix = pair[n][(b, a)] / pm[b]
                given_path = with_y[n].get((b, a, y), zero) / mu[y]
                tally.add(abs(given_prefix - given_path), n=n, y=y, x_prefix=a)
    return _verdict("reverse", tally.worst, tally.witness, J.exact, _tol(J, tol))


CHECKERS = {"ci": check_ci, "mgale": check_mgale, "proj": check_proj, "reverse": check_reverse}


def run_all(J: JointPathLaw, tol: float | None = None) -> dict:
    return {name: fn(J, tol) for name, fn in CHECKERS.items()}


def is_compatible(J: JointPathLaw, tol: float | None = None) -> bool:
    return check_ci(J, tol).ok


# -- linear description --------------------------------------------------------

def causal_constraints(mu: PathMeasure, x_space: PathSpace) -> LinearSystem:
    """Equality system over ``P(y, x)`` (``y`` in the support of ``mu``, ``x`` any path).

    Rows: the Y-marginal equals ``mu``; and for ``n < N``, every x-prefix ``a``,
    y-prefix ``b`` and full path ``c`` extending ``b``,

        sum_{y^n = b, x^n = a} P(y, x) (1{y = c} - mu(c | b)) / mu(b) = 0.

    Dividing by ``mu(b)`` states the row in conditional form, so a residual
    reads as a conditional-probability discrepancy.
    """
    N = mu.space.N
    if x_space.N != N:
        raise ValueError("x_space horizon differs from mu's")
    ys = mu.support()
    xs = x_space.paths()
    variables = tuple((y, x) for y in ys for x in xs)
    col = {v: j for j, v in enumerate(variables)}
    pm = mu.prefix_mass
    rows, labels = [], []
    for y in ys:
        rows.append(({col[(y, x)]: 1 for x in xs}, mu[y]))
        labels.append(("marginal", y))
    for n in range(1, N):
        for b in mu.prefixes(n):
            ext = [c for c in ys if c[:n] == b]
            if len(ext) < 2:
                continue  # g - g_n vanishes identically on this prefix
            for a in x_space.prefixes(n):
                xa = [x for x in xs if x[:n] == a]
                for c in ext:
                    g_n = mu[c] / pm[b]
                    coeffs = {}
                    for y in ext:
                        v = ((1 if y == c else 0) - g_n) / pm[b]
                        if v:
                            for x in xa:
                                coeffs[col[(y, x)]] = v
                    if coeffs:
                        rows.append((coeffs, 0))
                        labels.append(("causal", n, a, b, c))
    return LinearSystem(variables, tuple(rows), tuple(labels))


def law_to_vector(J: JointPathLaw, system: LinearSystem) -> list:
    """Dense variable vector of ``J`` over ``system``; pairs outside the variable set raise KeyError."""
    zero = Fraction(0) if J.exact else 0.0
    return system.vector(dict(J.support), zero=zero)


def vector_to_law(system: LinearSystem, x, y_space: PathSpace, x_space: PathSpace) -> JointPathLaw:
    return JointPathLaw(y_space, x_space, {v: w for v, w in zip(system.variables, x) if w})
