from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from floorbound.instance import ComponentSpec, Instance, make_instance_1d

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def small_1d():
    """l = (1, 2, 3), all weights 1; optimum 14 at order (2, 1, 3)."""
    return make_instance_1d([1, 2, 3], {(1, 2): 1, (1, 3): 1, (2, 3): 1}, floor=100)


@pytest.fixture
def two_squares():
    """Two unit-area squares of half-width 1/2 with weight 2."""
    h = Fraction(1, 2)
    comps = tuple(ComponentSpec(i, (h, h), (h, h), Fraction(1)) for i in (1, 2))
    return Instance(2, (Fraction(4), Fraction(4)), comps, {(1, 2): Fraction(2)})


SMALL_1D_TEXT = """\
FLP 1
N 3
L 100
COMP 1 1
COMP 2 2
COMP 3 3
P 1 2 1
P 1 3 1
P 2 3 1
"""


@st.composite
def instances_1d(draw, min_n=2, max_n=5, floor_factor=2):
    n = draw(st.integers(min_n, max_n))
    hw = draw(st.lists(st.integers(1, 10), min_size=n, max_size=n))
    hw = [Fraction(h, 2) for h in hw]
    weights = {}
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            p = draw(st.integers(0, 5))
            if p:
                weights[(i, j)] = p
    return make_instance_1d(hw, weights, floor=floor_factor * sum(hw))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for num in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[num])
