from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from floorbound.bound import (SizeCapError, SubsetFamily, build_family, exact_optimum,
                              hierarchy, master_bound, master_bound_primal, omega2_closed_form,
                              prune_family, relative_gap, solve_subsets)
from floorbound.instance import generate_instance, make_instance_1d
from floorbound.subproblem import gamma_1d

from conftest import instances_1d


def _dense(n):
    return make_instance_1d([1] * n, {(i, j): 1 for i in range(1, n + 1)
                                      for j in range(i + 1, n + 1)})


def test_family_sizes():
    assert len(build_family(_dense(4), 2)) == 6
    assert len(build_family(_dense(4), 3)) == 10


def test_family_skips_isolated_component():
    inst = make_instance_1d([1] * 4, {(1, 2): 1, (1, 3): 1, (2, 3): 1})
    fam = build_family(inst, 3)
    assert len(fam) == 4 and all(4 not in C for C in fam)


def test_family_bounds_on_k():
    with pytest.raises(SizeCapError):
        build_family(_dense(4), 5)
    with pytest.raises(SizeCapError):
        build_family(_dense(4), 1)


def test_prune_isolated_member():
    inst = make_instance_1d([1] * 3, {(1, 2): 1})
    fam = prune_family(inst, SubsetFamily([(1, 2, 3)]))
    assert fam.subsets == [(1, 2)]


def test_prune_leaves_dense_family_alone():
    inst = _dense(5)
    fam = build_family(inst, 3)
    assert prune_family(inst, fam).subsets == fam.subsets
    assert prune_family(inst, fam).tag == "pruned-from-3"


def test_prune_star():
    inst = make_instance_1d([1] * 4, {(1, 2): 1, (1, 3): 1, (1, 4): 1})
    fam = prune_family(inst, build_family(inst, 3))
    assert all(1 in C for C in fam)
    assert fam.subsets == [(1, 2), (1, 3), (1, 4), (1, 2, 3), (1, 2, 4), (1, 3, 4)]


def test_empty_family_gives_zero(small_1d):
    assert master_bound(small_1d, []).omega == 0


def test_levels_of_small_instance(small_1d):
    res = hierarchy(small_1d, 3, workers=1)
    assert [r.omega for r in res] == [12, 14]
    assert res[0].mode == "rational"
    assert exact_optimum(small_1d).gamma == 14
    assert res[1].duals[(1, 2, 3)] == 1


def test_omega2_closed_forms(small_1d, two_squares):
    assert omega2_closed_form(small_1d) == 12
    assert omega2_closed_form(two_squares) == 2
    assert omega2_closed_form(generate_instance(2, 4, 0.0, 7)) == 0


def test_level_two_equals_closed_form_2d():
    inst = generate_instance(2, 5, 0.6, 4)
    res = hierarchy(inst, 2)
    assert abs(res[0].omega - omega2_closed_form(inst)) <= 1e-9


def test_exact_for_one_weighted_pair():
    inst = make_instance_1d([1, 2, 3, 4], {(2, 4): 3})
    assert exact_optimum(inst).gamma == 18


def test_exact_size_cap():
    with pytest.raises(SizeCapError):
        exact_optimum(_dense(9))


def test_hierarchy_cap():
    with pytest.raises(SizeCapError):
        hierarchy(_dense(9), 9)


def test_gap():
    assert relative_gap(14, 14) == 0
    assert relative_gap(12, 16) == 25


def test_primal_and_dual_master_agree():
    inst = generate_instance(1, 6, 0.7, 5)
    bounds = list(solve_subsets(inst, build_family(inst, 3)).values())
    assert master_bound(inst, bounds).omega == master_bound_primal(inst, bounds)


def test_float_mode_close_to_rational():
    inst = generate_instance(1, 6, 0.7, 9)
    bounds = list(solve_subsets(inst, build_family(inst, 3)).values())
    exact = master_bound(inst, bounds, mode="rational").omega
    approx = master_bound(inst, bounds, mode="float").omega
    assert isinstance(approx, float) and abs(approx - float(exact)) < 1e-7


@settings(max_examples=20)
@given(instances_1d(max_n=5))
def test_hierarchy_is_monotone_and_tight(inst):
    if not list(inst.pairs()):
        return
    res = hierarchy(inst, inst.n)
    values = [r.omega for r in res]
    assert values == sorted(values)
    assert values[0] == omega2_closed_form(inst)
    assert values[-1] == exact_optimum(inst).gamma


@settings(max_examples=15)
@given(instances_1d(max_n=5), st.integers(2, 5))
def test_pruning_does_not_change_bound(inst, k):
    k = min(k, inst.n)
    if not list(inst.pairs()):
        return
    a = hierarchy(inst, k, prune=True)[-1]
    b = hierarchy(inst, k, prune=False)[-1]
    assert a.omega == b.omega
    assert a.n_pruned <= a.n_subsets


def test_workers_do_not_change_results():
    inst = generate_instance(1, 6, 0.7, 2)
    one = hierarchy(inst, 4, workers=1)
    two = hierarchy(inst, 4, workers=2)
    assert [r.omega for r in one] == [r.omega for r in two]
    assert one[-1].duals == two[-1].duals


def test_subset_bounds_are_valid_lower_bounds():
    inst = generate_instance(1, 5, 1.0, 3)
    full = gamma_1d(inst, tuple(range(1, 6)))
    for C, sb in solve_subsets(inst, build_family(inst, 4)).items():
        # restricting the optimal layout to C costs at least gamma(C)
        cost = sum(p * full.witness.d[(0, i, j)] for i, j, p in inst.pairs(C))
        assert sb.gamma <= cost
