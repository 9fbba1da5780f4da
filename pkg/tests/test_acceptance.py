"""Acceptance criteria, one test per criterion.

Every test records a one-line verdict in ``RESULTS``; the verdicts are
printed in the terminal summary (see conftest.py) and when this file is run
as a script.
"""
import time
from fractions import Fraction
from itertools import combinations

import pytest

from floorbound.bound import (build_family, exact_optimum, hierarchy, master_bound,
                              omega2_closed_form, prune_family, solve_subsets)
from floorbound.cli import main
from floorbound.instance import generate_instance, serialize_instance
from floorbound.subproblem import gamma_1d, gamma_2d, gamma_exact_small
from floorbound.theory_audit import (FLOAT_TOL, audit_lifted_point, audit_moment_matrix,
                                     audit_takouda_point, audit_zero_point, build_lifted,
                                     lifted_point, moment_matrix, relaxation_value)

RESULTS = {}

DENSITIES = (0.3, 0.7, 1.0)


def record(num, ok, detail):
    RESULTS[num] = f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(RESULTS[num])
    return ok


def suite_1d(count=50, seed0=100):
    return [generate_instance(1, 3 + s % 5, DENSITIES[s % 3], seed0 + s) for s in range(count)]


def suite_2d(count=20, seed0=200):
    return [generate_instance(2, 4, (0.5, 1.0)[s % 2], seed0 + s) for s in range(count)]


def test_hierarchy_monotone_and_exact_1d():
    t0 = time.perf_counter()
    bad = []
    for inst in suite_1d():
        res = hierarchy(inst, inst.n, workers=1)
        vals = [r.omega for r in res]
        exact = exact_optimum(inst).gamma
        rational = all(r.mode == "rational" and isinstance(r.omega, Fraction) for r in res)
        if vals != sorted(vals) or vals[-1] != exact or not rational:
            bad.append((inst.digest(), vals, exact))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 60
    record(1, ok, f"50 1D instances, {len(bad)} bad, {elapsed:.1f}s")
    assert ok, bad[:3]


def test_hierarchy_valid_2d():
    t0 = time.perf_counter()
    bad = []
    for inst in suite_2d():
        vals = [float(r.omega) for r in hierarchy(inst, 4, workers=1)]
        upper = float(exact_optimum(inst).upper)
        steps = all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))
        if not steps or vals[-1] > upper + 1e-9:
            bad.append((inst.digest(), vals, upper))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 300
    record(2, ok, f"20 2D instances (n=4), {len(bad)} bad, {elapsed:.1f}s")
    assert ok, bad[:3]


def test_level_two_closed_form():
    bad = []
    for inst in suite_1d() + suite_2d():
        omega = hierarchy(inst, 2)[0].omega
        cf = omega2_closed_form(inst)
        same = omega == cf if inst.dim == 1 else abs(omega - cf) <= FLOAT_TOL
        if not same:
            bad.append((inst.digest(), omega, cf))
    ok = not bad
    record(3, ok, f"70 instances, {len(bad)} mismatches")
    assert ok, bad[:3]


def test_zero_relaxation_and_objective_cuts():
    bad = []
    for inst in suite_1d(20) + suite_2d(10):
        zero = relaxation_value(inst, "none")
        point_ok = audit_zero_point(inst).passed
        cut = relaxation_value(inst, "objective_cuts")
        cf = omega2_closed_form(inst)
        cut_ok = cut == cf if inst.dim == 1 else abs(cut - cf) <= FLOAT_TOL
        if zero != 0 or not point_ok or not cut_ok:
            bad.append((inst.digest(), zero, point_ok, cut, cf))
    ok = not bad
    record(4, ok, f"30 instances, {len(bad)} bad")
    assert ok, bad[:3]


def test_pruning_neutral():
    bad, shrunk = [], 0
    for s in range(20):
        inst = generate_instance(1, 6 + s % 2, 0.3, 300 + s)
        k = min(5, inst.n)
        pruned = hierarchy(inst, k, prune=True)
        full = hierarchy(inst, k, prune=False)
        if [r.omega for r in pruned] != [r.omega for r in full]:
            bad.append(inst.digest())
        if any(r.n_pruned < r.n_subsets for r in pruned):
            shrunk += 1
    ok = not bad and shrunk >= 1
    record(5, ok, f"20 sparse instances, {len(bad)} differ, {shrunk} with a smaller family")
    assert ok


def test_lifted_point_and_moment_matrix():
    bad = []
    for s in range(20):
        inst = generate_instance(1, 2 + s % 5, DENSITIES[s % 3], 400 + s, floor_factor=4)
        rep = audit_lifted_point(inst)
        omega2 = master_bound(inst, solve_subsets(inst, build_family(inst, 2)).values()).omega \
            if list(inst.pairs()) else 0
        if not rep.passed or rep.objective != omega2 or not audit_moment_matrix(inst).passed:
            bad.append((inst.digest(), rep.failed_families(), rep.objective, omega2))
    base = generate_instance(1, 4, 1.0, 7, floor_factor=4)
    mutated = audit_lifted_point(base, overrides={"y_z1_2_z2_1": Fraction(1, 4)})
    system = build_lifted(base)
    M = moment_matrix(system, lifted_point(base))
    a, b = next((a, b) for a, b in combinations(range(1, len(M)), 2) if M[a][b] == Fraction(1, 4))
    M[a][b] = M[b][a] = Fraction(1, 2)
    moment_fails = not audit_moment_matrix(base, M).passed
    ok = not bad and mutated.failed_families() == ["A1e"] and moment_fails
    record(6, ok, f"20 1D instances, {len(bad)} bad; mutations caught: "
                  f"{mutated.failed_families() == ['A1e'] and moment_fails}")
    assert ok, bad[:3]


def test_takouda_point():
    bad = []
    for s in range(15):
        inst = generate_instance(2, 2 + s % 3, 1.0, 500 + s)
        rep = audit_takouda_point(inst)
        if not rep.passed or abs(rep.objective - omega2_closed_form(inst)) > FLOAT_TOL:
            bad.append((inst.digest(), rep.failed_families()))
    ok = not bad
    fams = sorted({f for _, fs in bad for f in fs})
    record(7, ok, f"15 2D instances, {len(bad)} fail (families {','.join(fams) or '-'})")
    assert ok, bad[:3]


def test_subproblem_oracles():
    mism = []
    for s in range(20):
        inst = generate_instance(1, 4, DENSITIES[s % 3], 600 + s)
        for size in (2, 3, 4):
            for C in combinations(range(1, 5), size):
                if gamma_1d(inst, C).gamma != gamma_exact_small(inst, C).gamma:
                    mism.append((inst.digest(), C))
    brackets = []
    for s in range(4):
        inst = generate_instance(2, 3, 1.0, 700 + s)
        ours = gamma_2d(inst, (1, 2, 3))
        orc = gamma_exact_small(inst, (1, 2, 3), grid=3)
        consistent = (ours.gamma <= ours.upper + 1e-9 and orc.gamma <= orc.upper + 1e-9
                      and ours.gamma <= orc.upper + 1e-7 and orc.gamma <= ours.upper + 1e-7)
        if not consistent:
            brackets.append((inst.digest(), ours.gamma, ours.upper, orc.gamma, orc.upper))
    ok = not mism and not brackets
    record(8, ok, f"1D: {len(mism)} mismatches over 20 instances; "
                  f"2D: {len(brackets)} inconsistent brackets")
    assert ok, (mism[:3], brackets)


def test_level_two_timing():
    inst = generate_instance(1, 33, 1.0, 33)
    t0 = time.perf_counter()
    cf = omega2_closed_form(inst)
    t_cf = time.perf_counter() - t0
    t0 = time.perf_counter()
    res = hierarchy(inst, 2, workers=1)[0]
    t_lp = time.perf_counter() - t0
    ok = t_cf < 0.01 and t_lp < 1.0 and abs(float(res.omega) - float(cf)) <= 1e-6 * float(cf)
    record(9, ok, f"n=33 dense: closed form {t_cf * 1000:.2f} ms, master LP {t_lp:.3f} s")
    assert ok


def test_machine_reports_deterministic(tmp_path):
    cases = [(generate_instance(1, 6, 0.7, 800), 4), (generate_instance(1, 7, 1.0, 801), 3),
             (generate_instance(2, 4, 1.0, 802), 3)]
    differ = []
    for idx, (inst, k) in enumerate(cases):
        src = tmp_path / f"case{idx}.flp"
        src.write_text(serialize_instance(inst))
        outs = []
        for w in (1, 2, 8):
            dst = tmp_path / f"case{idx}.w{w}.txt"
            assert main(["bound", "--instance", str(src), "--k", str(k), "--workers", str(w),
                         "--format", "machine", "--out", str(dst)]) == 0
            outs.append(dst.read_bytes())
        if len(set(outs)) != 1:
            differ.append(idx)
    ok = not differ
    record(10, ok, f"{len(cases)} instances x workers 1/2/8, {len(differ)} differ")
    assert ok


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
