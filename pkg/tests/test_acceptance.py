"""Acceptance criteria, one test each.

Every criterion runs at its stated tolerance and time budget.  A
``CRITERION`` line per criterion is printed at the end of the pytest session
(and directly when this file is run as a script).
"""

import sys

import pytest

from cotlab.suite import CRITERIA, run_criterion

LINES = {}


@pytest.mark.parametrize("cid", [c[0] for c in CRITERIA], ids=[f"c{c[0]:02d}-{c[1]}" for c in CRITERIA])
def test_criterion(cid):
    r = run_criterion(cid, seed=0)
    LINES[cid] = r.line()
    print(r.line())
    assert r.passed, r.detail
    assert r.within_budget, f"took {r.runtime:.2f}s, budget {r.budget}s"


if __name__ == "__main__":
    ok = True
    for cid, *_ in CRITERIA:
        r = run_criterion(cid, seed=0)
        print(r.line(), flush=True)
        ok &= r.ok
    sys.exit(0 if ok else 1)
