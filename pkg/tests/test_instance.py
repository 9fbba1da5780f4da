from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from floorbound.instance import (DuplicateEntryError, InvariantError, ParseError,
                                 active_components, generate_instance, make_instance_1d,
                                 parse_instance, serialize_instance)

from conftest import SMALL_1D_TEXT


def test_parse_small_1d():
    inst = parse_instance(SMALL_1D_TEXT)
    assert inst.dim == 1 and inst.n == 3
    assert inst.floor == (Fraction(100),)
    assert [p for _, _, p in inst.pairs()] == [1, 1, 1]
    assert inst.halfwidth(3) == 3


def test_comments_and_blank_lines_are_ignored():
    text = "# header\n\n" + SMALL_1D_TEXT.replace("N 3", "N 3   # three parts")
    assert parse_instance(text).n == 3


def test_duplicate_weight_line():
    with pytest.raises(DuplicateEntryError):
        parse_instance(SMALL_1D_TEXT + "P 1 2 3.0\n")


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as exc:
        parse_instance(SMALL_1D_TEXT.replace("COMP 2 2", "COMP 2 two"))
    assert exc.value.line == 5


def test_fraction_literal_rejected():
    with pytest.raises(ParseError):
        parse_instance(SMALL_1D_TEXT.replace("P 1 2 1", "P 1 2 1/2"))


def test_floor_too_small_2d():
    text = """FLP 2
N 2
L 10 40
COMP 1 1 3 1 3 4
COMP 2 1 3 1 3 4
P 1 2 1
"""
    # sum of ub on x is 6 half-widths, so full widths need 12 > 10
    with pytest.raises(InvariantError, match="floor too small"):
        parse_instance(text)


def test_area_must_be_reachable():
    text = """FLP 2
N 1
L 40 40
COMP 1 1 2 1 2 17
"""
    with pytest.raises(InvariantError):
        parse_instance(text)


def test_negative_weight_rejected():
    with pytest.raises((InvariantError, ParseError)):
        parse_instance(SMALL_1D_TEXT.replace("P 1 2 1", "P 1 2 -1"))


def test_generator_is_deterministic():
    a = generate_instance(1, 3, 1.0, 42)
    b = generate_instance(1, 3, 1.0, 42)
    assert serialize_instance(a) == serialize_instance(b)


def test_generator_zero_density_2d():
    inst = generate_instance(2, 4, 0.0, 7)
    assert list(inst.pairs()) == []
    assert active_components(inst) == set()


def test_generator_density_count():
    inst = generate_instance(1, 8, 0.5, 1)
    assert len(list(inst.pairs())) == 14


def test_generator_clamps_bad_parameters(caplog):
    inst = generate_instance(1, 3, 1.7, 0)
    assert len(list(inst.pairs())) == 3
    assert "clamped" in caplog.text


@pytest.mark.parametrize("weights,expected", [
    ({}, set()),
    ({(1, 2): 1}, {1, 2}),
])
def test_active_components_small(weights, expected):
    inst = make_instance_1d([1, 1, 1, 1], weights)
    assert active_components(inst) == expected


def test_active_components_dense():
    inst = generate_instance(1, 5, 1.0, 3)
    assert active_components(inst) == {1, 2, 3, 4, 5}


@given(dim=st.sampled_from([1, 2]), n=st.integers(2, 7),
       density=st.floats(0, 1), seed=st.integers(0, 10 ** 6))
def test_serialize_round_trip(dim, n, density, seed):
    inst = generate_instance(dim, n, density, seed)
    again = parse_instance(serialize_instance(inst))
    assert again == inst
    assert again.digest() == inst.digest()


@given(n=st.integers(2, 6), seed=st.integers(0, 10 ** 6))
def test_generated_2d_areas_are_reachable(n, seed):
    inst = generate_instance(2, n, 0.5, seed)
    for c in inst.components:
        assert 4 * c.ub[0] * c.ub[1] >= c.area >= 4 * c.lb[0] * c.lb[1]
    for s in range(2):
        assert inst.floor[s] >= 2 * sum(c.ub[s] for c in inst.components)
