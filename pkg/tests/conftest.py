from fractions import Fraction

import pytest

from cotlab.paths import AdaptedMap, JointPathLaw, PathMeasure, PathSpace, push_adapted

F = Fraction


@pytest.fixture
def coins():
    """Two fair-coin steps, the same alphabet on the X side."""
    ys = PathSpace.from_labels([["h", "t"], ["h", "t"]])
    return ys, PathMeasure.uniform(ys)


@pytest.fixture
def anticipative(coins):
    """X_1 = X_2 = Y_2: the first action sees the future."""
    ys, _ = coins
    return JointPathLaw(ys, ys, {(y, (y[1], y[1])): F(1, 4) for y in ys.paths()})


@pytest.fixture
def product_law(coins):
    ys, _ = coins
    return JointPathLaw(ys, ys, {(y, x): F(1, 16) for y in ys.paths() for x in ys.paths()})


@pytest.fixture
def copy_law(coins):
    ys, mu = coins
    return push_adapted(mu, AdaptedMap.from_function(mu, lambda n, p: p[-1]), ys)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for cid in sorted(LINES):
            terminalreporter.write_line(LINES[cid])
