from fractions import Fraction
from itertools import combinations, product

import pytest
from hypothesis import given, settings, strategies as st

from floorbound.instance import ComponentSpec, Instance, generate_instance, make_instance_1d
from floorbound.layout import Relation, check_feasibility, objective
from floorbound.subproblem import (RefineConfig, SubproblemError, SubsetCache,
                                   enumerate_assignments, gamma_1d, gamma_2d,
                                   gamma_exact_small, is_acyclic, subset_bound)

from conftest import instances_1d


def test_pair_is_weighted_sum_of_halfwidths(small_1d):
    assert gamma_1d(small_1d, (1, 3)).gamma == 4
    inst = make_instance_1d([1, 2], {(1, 2): 5})
    assert gamma_1d(inst, (1, 2)).gamma == 15


def test_full_small_instance(small_1d):
    sb = gamma_1d(small_1d, (1, 2, 3))
    assert sb.gamma == sb.upper == 14
    assert objective(small_1d, sb.witness) == 14
    assert check_feasibility(small_1d, sb.witness).feasible


def test_zero_weights_inside_subset():
    inst = make_instance_1d([1, 2, 3, 4], {(1, 4): 3})
    assert gamma_1d(inst, (1, 2, 3)).gamma == 0


def test_unit_squares_pair(two_squares):
    assert gamma_2d(two_squares, (1, 2)).gamma == 2


def _pair_2d(lbx, lby, p=1):
    comps = tuple(ComponentSpec(i, (Fraction(lbx[i - 1]), Fraction(lby[i - 1])),
                                (Fraction(4), Fraction(4)),
                                Fraction(4 * lbx[i - 1] * lby[i - 1]))
                  for i in (1, 2))
    return Instance(2, (Fraction(40), Fraction(40)), comps, {(1, 2): Fraction(p)})


def test_pair_takes_cheaper_axis():
    inst = _pair_2d((1, 2), (2, 3), p=3)
    assert gamma_2d(inst, (1, 2)).gamma == 9


def test_pair_lp_search_matches_closed_form():
    inst = _pair_2d((1, 2), (2, 3), p=3)
    sb = gamma_2d(inst, (1, 2), RefineConfig(closed_form_pairs=False))
    assert abs(sb.gamma - 9) <= 1e-7
    assert sb.upper >= sb.gamma - 1e-9


def test_zero_weights_2d():
    inst = generate_instance(2, 3, 0.0, 1)
    assert gamma_2d(inst, (1, 2, 3)).gamma == 0


def test_assignments_for_a_pair():
    assert len(list(enumerate_assignments((1, 2)))) == 2


def test_assignments_for_a_triple_are_acyclic():
    got = list(enumerate_assignments((1, 2, 3)))
    assert all(is_acyclic(a) for a in got)
    assert len(got) < 64


def _mirror(rel, axis):
    return Relation(rel.axis, rel.after, rel.before) if rel.axis == axis else rel


@pytest.mark.parametrize("C", [(1, 2, 3), (1, 2, 3, 4)])
def test_assignments_plus_mirrors_give_every_acyclic_assignment(C):
    pairs = list(combinations(C, 2))
    everything = []
    for choice in product(range(4), repeat=len(pairs)):
        a = {}
        for (i, j), c in zip(pairs, choice):
            a[(i, j)] = [Relation(0, i, j), Relation(0, j, i),
                         Relation(1, i, j), Relation(1, j, i)][c]
        if is_acyclic(a):
            everything.append(frozenset(a.items()))
    rebuilt = set()
    for a in enumerate_assignments(C):
        for mx, my in product((False, True), repeat=2):
            b = {k: r for k, r in a.items()}
            if mx:
                b = {k: _mirror(r, 0) for k, r in b.items()}
            if my:
                b = {k: _mirror(r, 1) for k, r in b.items()}
            rebuilt.add(frozenset(b.items()))
    assert rebuilt == set(everything)


def test_oracle_rejects_large_subsets(small_1d):
    inst = make_instance_1d([1] * 5, {(1, 2): 1})
    with pytest.raises(SubproblemError):
        gamma_exact_small(inst, (1, 2, 3, 4, 5))


@settings(max_examples=15)
@given(instances_1d(max_n=5), st.data())
def test_enumeration_matches_lp_oracle(inst, data):
    size = data.draw(st.integers(2, min(4, inst.n)))
    C = tuple(sorted(data.draw(st.permutations(range(1, inst.n + 1)))[:size]))
    sb = gamma_1d(inst, C)
    assert sb.gamma == gamma_exact_small(inst, C).gamma
    assert sb.gamma == sb.upper


@settings(max_examples=3)
@given(st.integers(0, 10 ** 6))
def test_2d_bracket_is_consistent(seed):
    inst = generate_instance(2, 3, 1.0, seed)
    C = (1, 2, 3)
    sb = gamma_2d(inst, C)
    assert sb.gamma <= sb.upper + 1e-9
    assert check_feasibility(inst, sb.witness, tol=1e-9).feasible
    assert abs(objective(inst, sb.witness) - sb.upper) <= 1e-9
    orc = gamma_exact_small(inst, C, grid=3)
    assert orc.gamma <= orc.upper + 1e-9
    assert sb.gamma <= orc.upper + 1e-7


def test_refinement_never_lowers_the_bound():
    inst = generate_instance(2, 3, 1.0, 11)
    loose = gamma_2d(inst, (1, 2, 3), RefineConfig(max_rounds=0))
    tight = gamma_2d(inst, (1, 2, 3), RefineConfig(max_rounds=8))
    assert tight.gamma >= loose.gamma - 1e-9


def test_cache_returns_first_entry(small_1d):
    cache = SubsetCache(small_1d.digest())
    first = cache.put(subset_bound(small_1d, (2, 1)))
    assert (1, 2) in cache and cache.get((2, 1)) is first


def test_dimension_mismatch(small_1d, two_squares):
    with pytest.raises(SubproblemError):
        gamma_2d(small_1d, (1, 2))
    with pytest.raises(SubproblemError):
        gamma_1d(two_squares, (1, 2))
