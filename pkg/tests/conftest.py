import os
import sys

import pytest
from hypothesis import settings, strategies as st

from redlab.terms import Binder, Node, Var

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=150, deadline=None)
settings.load_profile("default")

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")
GOLDEN = os.path.join(os.path.dirname(__file__), "golden")

NAMES = st.sampled_from(["x", "y", "z", "y1"])


def lambda_terms(max_leaves=12):
    """Untyped stlc-shaped terms over a small name pool."""
    return st.recursive(
        st.builds(Var, NAMES),
        lambda kids: st.one_of(
            st.builds(lambda v, b: Binder("lam", v, b), NAMES, kids),
            st.builds(lambda a, b: Node("app", (a, b)), kids, kids),
        ),
        max_leaves=max_leaves,
    )


@pytest.fixture
def fixture_path():
    return lambda name: os.path.join(FIXTURES, name)


# Acceptance results are printed after the run, whatever the capture mode.
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}")
