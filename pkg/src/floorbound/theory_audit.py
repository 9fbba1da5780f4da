"""Executable checks of how other relaxations compare with omega_2.

Four families of checks live here:

* the continuous relaxation of the layout model (value 0 without cuts,
  omega_2 with the objective cuts) and its zero-value point;
* the lifted LP obtained by multiplying the 1D relaxation by ``z`` and
  ``1 - z``, together with a closed-form point of value omega_2;
* the congruence diagonalisation of that point's moment matrix;
* the Takouda model with ``-1/1`` relation variables and its closed-form
  point.

Points are checked row by row in exact rational arithmetic. Rows touching an
irrational square root are checked in floating point with slack ``FLOAT_TOL``
and flagged as such in the report.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations

from floorbound._numbers import exact_sqrt, format_number
from floorbound.bound import omega2_closed_form
from floorbound.instance import Instance
from floorbound.layout import Layout
from floorbound.lp import INF, LinearProgram, row_activity, solve_lp, write_lp
from floorbound.subproblem import initial_tangents

FLOAT_TOL = 1e-9


class AuditError(ValueError):
    pass


# ---------------------------------------------------------------- reports

@dataclass
class FamilyVerdict:
    family: str
    count: int = 0
    violated: int = 0
    worst: object = 0
    mode: str = "exact"          # "exact" or "float" (rows with square roots)
    examples: list = field(default_factory=list)

    @property
    def satisfied(self) -> bool:
        return self.violated == 0


@dataclass
class AuditReport:
    name: str
    families: dict[str, FamilyVerdict] = field(default_factory=dict)
    objective: object = None
    expected: object = None
    objective_tol: float = 0
    notes: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def objective_matches(self) -> bool:
        if self.expected is None:
            return True
        return abs(self.objective - self.expected) <= self.objective_tol

    @property
    def passed(self) -> bool:
        return all(f.satisfied for f in self.families.values()) and self.objective_matches

    def failed_families(self) -> list[str]:
        return sorted(k for k, f in self.families.items() if not f.satisfied)

    def lines(self) -> list[str]:
        out = []
        for name in sorted(self.families):
            f = self.families[name]
            status = "ok" if f.satisfied else "VIOLATED"
            out.append(f"{name}\t{f.count}\t{format_number(f.worst)}\t{f.mode}\t{status}")
        if self.objective is not None:
            out.append(f"objective\t{format_number(self.objective)}")
        if self.expected is not None:
            out.append(f"expected\t{format_number(self.expected)}")
        out.append(f"result\t{'PASS' if self.passed else 'FAIL'}")
        return out


def _family(name: str) -> str:
    return name.split(".", 1)[0]


def _check_rows(lp: LinearProgram, point: dict, report: AuditReport, families=None):
    """Check each row of ``lp`` at ``point`` and fold results into ``report``."""
    vec = [point.get(n, 0) for n in lp.names]
    for row in lp.rows:
        fam = _family(row.name)
        if families is not None and fam not in families:
            continue
        fv = report.families.setdefault(fam, FamilyVerdict(fam))
        fv.count += 1
        inexact = any(isinstance(vec[j], float) or isinstance(a, float)
                      for j, a in row.coeffs.items()) or isinstance(row.rhs, float)
        tol = FLOAT_TOL if inexact else 0
        if inexact:
            fv.mode = "float"
        lhs = row_activity(row, vec)
        if row.sense == ">=":
            gap = row.rhs - lhs
        elif row.sense == "<=":
            gap = lhs - row.rhs
        else:
            gap = abs(lhs - row.rhs)
        if gap > tol:
            fv.violated += 1
            if gap > fv.worst:
                fv.worst = gap
            if len(fv.examples) < 5:
                fv.examples.append(row.name)


# ---------------------------------------------------------------- relaxations

def _pairs(n):
    return list(combinations(range(1, n + 1), 2))


def _ordered(n):
    return list(permutations(range(1, n + 1), 2))


def build_relaxation(inst: Instance, cuts: str = "none") -> LinearProgram:
    """Continuous relaxation of the layout model, optionally with objective cuts.

    In 2D the area requirement is replaced by tangent cuts at the initial
    tangent points used by the subproblem solver.
    """
    if cuts not in ("none", "objective_cuts"):
        raise AuditError(f"unknown cut option {cuts!r}")
    n = inst.n
    lp = LinearProgram()
    if inst.dim == 1:
        L = inst.floor[0]
        for i in range(1, n + 1):
            lp.add_var(f"c{i}", 0, 0, L)
        for i, j in _pairs(n):
            lp.add_var(f"d{i}_{j}", inst.weight(i, j))
        for i, j in _ordered(n):
            lp.add_var(f"z{i}_{j}", 0, 0, 1)
        for i, j in _pairs(n):
            lp.add_row({f"d{i}_{j}": 1, f"c{i}": -1, f"c{j}": 1}, ">=", 0, f"3b.{i}.{j}")
            lp.add_row({f"d{i}_{j}": 1, f"c{i}": 1, f"c{j}": -1}, ">=", 0, f"3c.{i}.{j}")
        for i, j in _ordered(n):
            w = inst.halfwidth(i) + inst.halfwidth(j)
            lp.add_row({f"c{j}": 1, f"c{i}": -1, f"z{i}_{j}": -L}, ">=", w - L, f"3d.{i}.{j}")
        for i, j in _pairs(n):
            lp.add_row({f"z{i}_{j}": 1, f"z{j}_{i}": 1}, "=", 1, f"3e.{i}.{j}")
        if cuts == "objective_cuts":
            for i, j in _pairs(n):
                lp.add_row({f"d{i}_{j}": 1}, ">=", inst.halfwidth(i) + inst.halfwidth(j),
                           f"cut4.{i}.{j}")
        return lp

    for i in range(1, n + 1):
        comp = inst.comp(i)
        for s, ax in enumerate("xy"):
            lp.add_var(f"c{ax}{i}", 0, -INF, INF)
            lp.add_var(f"l{ax}{i}", 0, comp.lb[s], comp.ub[s])
    for i, j in _pairs(n):
        for ax in "xy":
            lp.add_var(f"d{ax}{i}_{j}", inst.weight(i, j))
    for i, j in _ordered(n):
        for ax in "xy":
            lp.add_var(f"z{ax}{i}_{j}", 0, 0, 1)
    for s, ax in enumerate("xy"):
        L = inst.floor[s]
        for i, j in _pairs(n):
            d = f"d{ax}{i}_{j}"
            lp.add_row({d: 1, f"c{ax}{i}": -1, f"c{ax}{j}": 1}, ">=", 0, f"2b.{ax}.{i}.{j}")
            lp.add_row({d: 1, f"c{ax}{i}": 1, f"c{ax}{j}": -1}, ">=", 0, f"2c.{ax}.{i}.{j}")
        for i in range(1, n + 1):
            lp.add_row({f"c{ax}{i}": 1, f"l{ax}{i}": -1}, ">=", 0, f"2d.{ax}.{i}.lo")
            lp.add_row({f"c{ax}{i}": 1, f"l{ax}{i}": 1}, "<=", L, f"2d.{ax}.{i}.hi")
        for i, j in _ordered(n):
            lp.add_row({f"c{ax}{i}": 1, f"l{ax}{i}": 1, f"c{ax}{j}": -1, f"l{ax}{j}": 1,
                        f"z{ax}{i}_{j}": L}, "<=", L, f"2f.{ax}.{i}.{j}")
    for i in range(1, n + 1):
        a = float(inst.comp(i).area)
        for k, t in enumerate(initial_tangents(inst.comp(i))):
            lp.add_row({f"lx{i}": a / (4 * t * t), f"ly{i}": 1.0}, ">=", a / (2 * t),
                       f"2e.{i}.{k}")
    for i, j in _pairs(n):
        lp.add_row({f"zx{i}_{j}": 1, f"zx{j}_{i}": 1, f"zy{i}_{j}": 1, f"zy{j}_{i}": 1},
                   "=", 1, f"2g.{i}.{j}")
    if cuts == "objective_cuts":
        for i, j in _pairs(n):
            ci, cj = inst.comp(i), inst.comp(j)
            m = min(ci.lb[0] + cj.lb[0], ci.lb[1] + cj.lb[1])
            lp.add_row({f"dx{i}_{j}": 1, f"dy{i}_{j}": 1}, ">=", m, f"cut5.{i}.{j}")
    return lp


def relaxation_value(inst: Instance, cuts: str = "none", mode: str | None = None):
    """Optimal value of the continuous relaxation (exact in 1D)."""
    lp = build_relaxation(inst, cuts)
    mode = mode or ("rational" if inst.dim == 1 else "float")
    sol = solve_lp(lp, mode=mode)
    if sol.status != "optimal":
        raise AuditError(f"relaxation LP is {sol.status}")
    return sol.value


def _half_sqrt(a):
    """sqrt(a)/2 as a Fraction when rational, else a float."""
    r = exact_sqrt(Fraction(a) / 4)
    return r if r is not None else math.sqrt(a) / 2


def _sqrt(a):
    r = exact_sqrt(Fraction(a))
    return r if r is not None else math.sqrt(a)


def zero_point(inst: Instance, variant: str = "half-sqrt") -> Layout:
    """Relaxation point with every centre in the middle of the floor and d = 0.

    In 2D the half-widths are ``max(lb, sqrt(a)/2)`` ("half-sqrt") or
    ``max(lb, sqrt(a))`` ("sqrt"). For "half-sqrt" a value above the upper
    bound is clipped and the other axis widened to keep the area.
    """
    n = inst.n
    centers, hw, z, d = {}, {}, {}, {}
    if inst.dim == 1:
        for i in range(1, n + 1):
            centers[i] = (inst.floor[0] / 2,)
            hw[i] = (inst.halfwidth(i),)
        for i, j in _ordered(n):
            z[(0, i, j)] = Fraction(1, 2)
        for i, j in _pairs(n):
            d[(0, i, j)] = Fraction(0)
        return Layout(1, centers, hw, z, d)
    if variant not in ("half-sqrt", "sqrt"):
        raise AuditError(f"unknown zero-point variant {variant!r}")
    for i in range(1, n + 1):
        comp = inst.comp(i)
        base = _half_sqrt(comp.area) if variant == "half-sqrt" else _sqrt(comp.area)
        h = [max(comp.lb[s], base) for s in range(2)]
        if variant == "half-sqrt":
            for s in range(2):
                if h[s] > comp.ub[s]:
                    h[s] = comp.ub[s]
                    h[1 - s] = max(h[1 - s], Fraction(comp.area) / (4 * h[s]))
        centers[i] = (inst.floor[0] / 2, inst.floor[1] / 2)
        hw[i] = tuple(h)
    for i, j in _ordered(n):
        for s in range(2):
            z[(s, i, j)] = Fraction(1, 4)
    for i, j in _pairs(n):
        for s in range(2):
            d[(s, i, j)] = Fraction(0)
    return Layout(2, centers, hw, z, d)


def layout_point(inst: Instance, layout: Layout) -> dict:
    """Map a (possibly fractional) layout onto relaxation variable names."""
    pt = {}
    if inst.dim == 1:
        for i in layout.ids:
            pt[f"c{i}"] = layout.centers[i][0]
        for (_, i, j), v in layout.z.items():
            pt[f"z{i}_{j}"] = v
        for (_, i, j), v in layout.d.items():
            pt[f"d{i}_{j}"] = v
        return pt
    for i in layout.ids:
        for s, ax in enumerate("xy"):
            pt[f"c{ax}{i}"] = layout.centers[i][s]
            pt[f"l{ax}{i}"] = layout.halfwidths[i][s]
    for (s, i, j), v in layout.z.items():
        pt[f"z{'xy'[s]}{i}_{j}"] = v
    for (s, i, j), v in layout.d.items():
        pt[f"d{'xy'[s]}{i}_{j}"] = v
    return pt


def _bounds_family(lp: LinearProgram, point: dict, report: AuditReport, name="bounds"):
    fv = report.families.setdefault(name, FamilyVerdict(name))
    for j, var in enumerate(lp.names):
        v = point.get(var, 0)
        tol = FLOAT_TOL if isinstance(v, float) else 0
        if isinstance(v, float):
            fv.mode = "float"
        for gap in (lp.lower[j] - v, v - lp.upper[j]):
            fv.count += 1
            if gap > tol:
                fv.violated += 1
                fv.worst = max(fv.worst, gap)
                if len(fv.examples) < 5:
                    fv.examples.append(var)


def audit_zero_point(inst: Instance, variant: str = "half-sqrt") -> AuditReport:
    lp = build_relaxation(inst, "none")
    point = layout_point(inst, zero_point(inst, variant))
    rep = AuditReport(f"zero-point[{variant}]" if inst.dim == 2 else "zero-point")
    _check_rows(lp, point, rep)
    _bounds_family(lp, point, rep)
    rep.objective = sum((lp.objective[j] * point.get(nm, 0) for j, nm in enumerate(lp.names)),
                        Fraction(0))
    rep.expected = Fraction(0)
    return rep


# ---------------------------------------------------------------- lifted LP (1D)

def _yname(u: str, v: str) -> str:
    return f"y_{u}_{v}"


def _zz(a: tuple, b: tuple) -> str:
    """Variable for the product z_a z_b; the square of z_a is z_a itself."""
    if a == b:
        return f"z{a[0]}_{a[1]}"
    a, b = sorted((a, b))
    return f"y_z{a[0]}_{a[1]}_z{b[0]}_{b[1]}"


@dataclass
class LiftedSystem:
    inst: Instance
    lp: LinearProgram
    moment_index: list          # [None] + ordered pairs
    family_counts: dict[str, int]

    def moment_entry_name(self, I, J):
        if I is None and J is None:
            return None
        if I is None or J is None:
            K = J if I is None else I
            return f"z{K[0]}_{K[1]}"
        return _zz(I, J)


LIFTED_FAMILIES = ("A1a", "A1b", "A1c", "A1d", "A1e", "A1f", "A1g", "A1h", "A1i", "A1j",
                   "A1k", "cut4")


def build_lifted(inst: Instance) -> LiftedSystem:
    """Lifted linear system of the 1D relaxation plus the objective cuts.

    Every relaxation row is multiplied by ``z_rs`` and ``1 - z_rs`` for each
    ordered pair (r, s) and products are replaced by ``y`` variables. All
    variables are free; the bound rows are part of the lifted system.
    """
    if inst.dim != 1:
        raise AuditError("lifted system is defined for 1D instances")
    n = inst.n
    L = inst.floor[0]
    hw = inst.halfwidth
    U, O = _pairs(n), _ordered(n)
    lp = LinearProgram()

    def var(name, cost=0):
        if name not in lp._index:
            lp.add_var(name, cost, -INF, INF)
        return name

    for i in range(1, n + 1):
        var(f"c{i}")
    for i, j in U:
        var(f"d{i}_{j}", inst.weight(i, j))
    for i, j in O:
        var(f"z{i}_{j}")
    for r, s in O:
        for i in range(1, n + 1):
            var(_yname(f"c{i}", f"z{r}_{s}"))
        for i, j in U:
            var(_yname(f"d{i}_{j}", f"z{r}_{s}"))
    for a in O:
        for b in O:
            if a < b:
                var(_zz(a, b))

    def row(fam, tag, terms, sense, rhs):
        # terms may repeat a variable (z_rs z_rs = z_rs), so accumulate
        coeffs = {}
        for name, a in terms:
            coeffs[name] = coeffs.get(name, 0) + a
        lp.add_row(coeffs, sense, rhs, f"{fam}.{tag}")

    for r, s in O:
        zrs = f"z{r}_{s}"
        rs = f"{r}.{s}"
        yc = lambda i: _yname(f"c{i}", zrs)
        for i, j in U:
            d, yd = f"d{i}_{j}", _yname(f"d{i}_{j}", zrs)
            w = hw(i) + hw(j)
            tag = f"{i}.{j}.{rs}"
            # d - c_i + c_j >= y(d) - y(c_i) + y(c_j) >= 0
            row("A1a", "lo." + tag, [(yd, 1), (yc(i), -1), (yc(j), 1)], ">=", 0)
            row("A1a", "hi." + tag, [(d, 1), (f"c{i}", -1), (f"c{j}", 1),
                                     (yd, -1), (yc(i), 1), (yc(j), -1)], ">=", 0)
            row("A1b", "lo." + tag, [(yd, 1), (yc(i), 1), (yc(j), -1)], ">=", 0)
            row("A1b", "hi." + tag, [(d, 1), (f"c{i}", 1), (f"c{j}", -1),
                                     (yd, -1), (yc(i), -1), (yc(j), 1)], ">=", 0)
            row("A1e", tag, [(_zz((i, j), (r, s)), 1), (_zz((j, i), (r, s)), 1), (zrs, -1)],
                "=", 0)
            # d - (l_i + l_j) >= y(d) - (l_i + l_j) z_rs >= 0
            row("A1i", "lo." + tag, [(yd, 1), (zrs, -w)], ">=", 0)
            row("A1i", "hi." + tag, [(d, 1), (yd, -1), (zrs, w)], ">=", w)
        for i, j in O:
            w = hw(i) + hw(j)
            tag = f"{i}.{j}.{rs}"
            zij, yzz = f"z{i}_{j}", _zz((i, j), (r, s))
            # (1 - z_rs) times the non-overlap row
            row("A1c", tag, [(zij, -L), (zrs, -L + w), (yzz, L), (f"c{i}", -1), (f"c{j}", 1),
                             (yc(i), 1), (yc(j), -1)], ">=", w - L)
            # z_rs times the non-overlap row
            row("A1d", tag, [(zrs, L - w), (yzz, -L), (yc(i), -1), (yc(j), 1)], ">=", 0)
            row("A1j", "lo." + tag, [(yzz, 1)], ">=", 0)
            row("A1j", "hi." + tag, [(zij, 1), (yzz, -1)], ">=", 0)
            row("A1k", "lo." + tag, [(zrs, 1), (yzz, -1)], ">=", 0)
            row("A1k", "hi." + tag, [(zij, -1), (zrs, -1), (yzz, 1)], ">=", -1)
        for i in range(1, n + 1):
            tag = f"{i}.{rs}"
            row("A1g", "lo." + tag, [(yc(i), 1)], ">=", 0)
            row("A1g", "hi." + tag, [(f"c{i}", 1), (yc(i), -1)], ">=", 0)
            row("A1h", "lo." + tag, [(zrs, L), (yc(i), -1)], ">=", 0)
            row("A1h", "hi." + tag, [(f"c{i}", -1), (zrs, -L), (yc(i), 1)], ">=", -L)
    for i, j in U:
        row("A1f", f"{i}.{j}", [(f"z{i}_{j}", 1), (f"z{j}_{i}", 1)], "=", 1)
        row("cut4", f"{i}.{j}", [(f"d{i}_{j}", 1)], ">=", hw(i) + hw(j))

    counts = {f: 0 for f in LIFTED_FAMILIES}
    for rw in lp.rows:
        counts[_family(rw.name)] += 1
    return LiftedSystem(inst, lp, [None] + O, counts)


def lifted_row_counts(n: int) -> dict[str, int]:
    """Closed-form number of rows per family for ``n`` components."""
    U, O = n * (n - 1) // 2, n * (n - 1)
    return {"A1a": 2 * U * O, "A1b": 2 * U * O, "A1c": O * O, "A1d": O * O, "A1e": U * O,
            "A1f": U, "A1g": 2 * n * O, "A1h": 2 * n * O, "A1i": 2 * U * O,
            "A1j": 2 * O * O, "A1k": 2 * O * O, "cut4": U}


def lifted_point(inst: Instance, variant: str = "corrected") -> dict:
    """Closed-form lifted point with objective omega_2.

    The y(c_i, z_rs) offsets are -l_i/2 when i = r and +l_i/2 when i = s
    ("corrected"). The "swapped" variant uses -l_s/2 and +l_r/2, which
    violates the d-rows as soon as one width exceeds the sum of two others.
    """
    if variant not in ("corrected", "swapped"):
        raise AuditError(f"unknown lifted-point variant {variant!r}")
    n = inst.n
    L = inst.floor[0]
    hw = inst.halfwidth
    half, quarter = Fraction(1, 2), Fraction(1, 4)
    pt = {}
    for i in range(1, n + 1):
        pt[f"c{i}"] = L / 2
    for i, j in _pairs(n):
        pt[f"d{i}_{j}"] = hw(i) + hw(j)
    for i, j in _ordered(n):
        pt[f"z{i}_{j}"] = half
    for r, s in _ordered(n):
        zrs = f"z{r}_{s}"
        for i in range(1, n + 1):
            if variant == "corrected":
                off = -hw(i) if i == r else hw(i) if i == s else 0
            else:
                off = -hw(s) if i == r else hw(r) if i == s else 0
            pt[_yname(f"c{i}", zrs)] = L / 4 + Fraction(off) / 2
        for i, j in _pairs(n):
            pt[_yname(f"d{i}_{j}", zrs)] = (hw(i) + hw(j)) / 2
    for a in _ordered(n):
        for b in _ordered(n):
            if a < b:
                pt[_zz(a, b)] = Fraction(0) if (a[1], a[0]) == b else quarter
    return pt


def _objective_at(lp: LinearProgram, point: dict):
    return sum((lp.objective[j] * point.get(nm, 0) for j, nm in enumerate(lp.names)),
               Fraction(0))


def audit_lifted_point(inst: Instance, variant: str = "corrected",
                       overrides: dict | None = None) -> AuditReport:
    system = build_lifted(inst)
    point = lifted_point(inst, variant)
    if overrides:
        point.update(overrides)
    rep = AuditReport(f"lifted-lp[{variant}]")
    for fam in LIFTED_FAMILIES:
        rep.families[fam] = FamilyVerdict(fam)
    _check_rows(system.lp, point, rep)
    rep.objective = _objective_at(system.lp, point)
    rep.expected = omega2_closed_form(inst)
    need = lifted_floor_requirement(inst)
    if inst.floor[0] < need:
        rep.notes.append(f"floor {format_number(inst.floor[0])} is below "
                         f"4*l_max + 2*l_second = {format_number(need)}; the closed-form "
                         "point is only guaranteed above that")
    return rep


def lifted_floor_requirement(inst: Instance):
    """Smallest floor at which the closed-form lifted point satisfies every row."""
    ws = sorted((inst.halfwidth(i) for i in range(1, inst.n + 1)), reverse=True)
    if len(ws) < 2:
        return Fraction(0)
    return max(4 * ws[0] + 2 * ws[1], 2 * (ws[0] + ws[1]))


# ---------------------------------------------------------------- moment matrix

def moment_matrix(system: LiftedSystem, point: dict) -> list[list]:
    idx = system.moment_index
    M = []
    for I in idx:
        rowv = []
        for J in idx:
            name = system.moment_entry_name(I, J)
            rowv.append(Fraction(1) if name is None else Fraction(point[name]))
        M.append(rowv)
    return M


def diagonalize_moment(M: list[list], index: list) -> list[list]:
    """Apply the elementary congruence used to certify the lifted point.

    Rows: subtract half of row 0 from every other row, then add row (i,j)
    to row (j,i) for i < j. Columns: the same operations mirrored, so the
    result is H M H^T for a unit-triangular (hence invertible) H.
    """
    A = [list(r) for r in M]
    pos = {K: k for k, K in enumerate(index)}
    m = len(A)
    half = Fraction(1, 2)
    for k in range(1, m):
        A[k] = [a - half * b for a, b in zip(A[k], A[0])]
    sym = [(pos[(i, j)], pos[(j, i)]) for (i, j) in index[1:] if i < j]
    for a, b in sym:
        A[b] = [x + y for x, y in zip(A[b], A[a])]
    for k in range(1, m):
        for r in range(m):
            A[r][k] -= half * A[r][0]
    for a, b in sym:
        for r in range(m):
            A[r][b] += A[r][a]
    return A


def audit_moment_matrix(inst: Instance, M: list[list] | None = None,
                        variant: str = "corrected") -> AuditReport:
    """Certify M >= 0 at the lifted point by exact congruence to a diagonal matrix."""
    system = build_lifted(inst)
    if M is None:
        M = moment_matrix(system, lifted_point(inst, variant))
    rep = AuditReport("moment-matrix")
    m = len(M)
    sym = FamilyVerdict("symmetric", count=m * (m - 1) // 2)
    for a in range(m):
        for b in range(a + 1, m):
            if M[a][b] != M[b][a]:
                sym.violated += 1
                sym.worst = max(sym.worst, abs(M[a][b] - M[b][a]))
    D = diagonalize_moment(M, system.moment_index)
    diag = FamilyVerdict("diagonal", count=m * (m - 1))
    nonneg = FamilyVerdict("nonneg-diagonal", count=m)
    for a in range(m):
        for b in range(m):
            if a != b and D[a][b] != 0:
                diag.violated += 1
                diag.worst = max(diag.worst, abs(D[a][b]))
        if D[a][a] < 0:
            nonneg.violated += 1
            nonneg.worst = max(nonneg.worst, -D[a][a])
    rep.families = {f.family: f for f in (sym, diag, nonneg)}
    rep.notes.append("diagonal " + " ".join(format_number(D[a][a]) for a in range(m)))
    rep.extra["diagonal"] = [D[a][a] for a in range(m)]
    return rep


def export_lifted(system: LiftedSystem, path, point: dict | None = None):
    """Write the lifted LP plus a moment-matrix sidecar in comment lines.

    Sidecar layout (each line starts with a backslash, so LP readers skip it)::

        \\ MOMENT-MATRIX <size>
        \\ INDEX <k> <label>          label is "empty" or "r,s"
        \\ ENTRY <a> <b> <value>       lower triangle, value is 1 or a variable name
    """
    idx = system.moment_index
    lines = [f"lifted LP of a {system.inst.n}-component 1D instance",
             "rows: " + " ".join(f"{f}={c}" for f, c in system.family_counts.items()),
             f"MOMENT-MATRIX {len(idx)}"]
    for k, K in enumerate(idx):
        lines.append(f"INDEX {k} " + ("empty" if K is None else f"{K[0]},{K[1]}"))
    for a, I in enumerate(idx):
        for b, J in enumerate(idx[:a + 1]):
            name = system.moment_entry_name(I, J)
            val = "1" if name is None else name
            if point is not None and name is not None:
                val += " " + format_number(point[name])
            lines.append(f"ENTRY {a} {b} {val}")
    with open(path, "w", encoding="utf-8") as fh:
        write_lp(system.lp, fh, comments=lines)


def read_moment_sidecar(path) -> tuple[list, list]:
    """Parse the sidecar back into (index labels, lower-triangle entries)."""
    index, entries = [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("\\ "):
                continue
            toks = line[2:].split()
            if toks and toks[0] == "INDEX":
                index.append(None if toks[2] == "empty" else tuple(map(int, toks[2].split(","))))
            elif toks and toks[0] == "ENTRY":
                entries.append((int(toks[1]), int(toks[2]), toks[3]))
    return index, entries


# ---------------------------------------------------------------- Takouda model (2D)

TAKOUDA_LINEAR = ("8c", "8d", "8e", "8f", "8g", "8h", "8i", "8j", "8k", "8m", "8n",
                  "8o", "8p", "8q", "8r", "8s", "8t")


@dataclass
class TakoudaSystem:
    """Takouda model in full widths on the centred floor [-L/2, L/2]^2.

    ``lp`` holds the linear rows with products sigma*alpha replaced by
    ``sa`` variables; ``psd`` lists the 2x2 blocks of the area (8a) and floor
    (8b) constraints as entry templates; ``comp_rows`` lists the ordered
    triples of the complementarity rows (8l), evaluated polynomially.
    """
    inst: Instance
    lp: LinearProgram
    psd: list
    comp_rows: list
    lb: dict
    ub: dict
    area: dict
    floor: tuple

    def sigma(self, point, i, j):
        return point[f"sg{min(i, j)}_{max(i, j)}"]

    def alpha(self, point, i, j):
        v = point[f"al{min(i, j)}_{max(i, j)}"]
        return v if i < j else -v


def build_takouda(inst: Instance) -> TakoudaSystem:
    if inst.dim != 2:
        raise AuditError("the Takouda model is defined for 2D instances")
    n = inst.n
    Lx, Ly = inst.floor
    lb = {i: tuple(2 * v for v in inst.comp(i).lb) for i in range(1, n + 1)}
    ub = {i: tuple(2 * v for v in inst.comp(i).ub) for i in range(1, n + 1)}
    area = {i: inst.comp(i).area for i in range(1, n + 1)}
    lp = LinearProgram()
    for i in range(1, n + 1):
        for s, ax in enumerate("xy"):
            lp.add_var(f"c{ax}{i}", 0, -INF, INF)
            lp.add_var(f"l{ax}{i}", 0, -INF, INF)
    for i, j in _pairs(n):
        for ax in "xy":
            lp.add_var(f"d{ax}{i}_{j}", inst.weight(i, j), -INF, INF)
            lp.add_var(f"S{ax}{i}_{j}", 0, -INF, INF)
        for nm in ("sg", "al", "sa"):
            lp.add_var(f"{nm}{i}_{j}", 0, -INF, INF)

    def row(label, tag, coeffs, sense, rhs):
        lp.add_row(coeffs, sense, rhs, f"{label}.{tag}")

    for i, j in _pairs(n):
        t = f"{i}.{j}"
        sg, al, sa = f"sg{i}_{j}", f"al{i}_{j}", f"sa{i}_{j}"
        half = Fraction(1, 2)
        dx, dy, Sx, Sy = f"dx{i}_{j}", f"dy{i}_{j}", f"Sx{i}_{j}", f"Sy{i}_{j}"
        # d^x >= (l_i + l_j)/2 - Lx/2 (1 - sigma)
        row("8c", t, {dx: 1, f"lx{i}": -half, f"lx{j}": -half, sg: -Lx / 2}, ">=", -Lx / 2)
        row("8d", t, {dy: 1, f"ly{i}": -half, f"ly{j}": -half, sg: Ly / 2}, ">=", -Ly / 2)
        for ax, d, S in (("x", dx, Sx), ("y", dy, Sy)):
            row("8e", f"{ax}.{t}", {d: 1, S: -2, f"c{ax}{j}": -1, f"c{ax}{i}": 1}, "=", 0)
            row("8f", f"{ax}.{t}", {S: 1}, ">=", 0)
            row("8g", f"{ax}.{t}", {S: 1, f"c{ax}{j}": 1, f"c{ax}{i}": -1}, ">=", 0)
        Kx = Lx - (lb[i][0] + lb[j][0]) / 2
        Ky = Ly - (lb[i][1] + lb[j][1]) / 2
        q = Fraction(1, 4)
        # S <= K/4 (3 + a sigma + b alpha + c sigma*alpha), written as S - K/4(...) <= 3K/4
        row("8h", t, {Sx: 1, sg: q * Kx, al: q * Kx, sa: q * Kx}, "<=", 3 * q * Kx)
        row("8i", t, {Sx: 1, "cx%d" % j: 1, "cx%d" % i: -1, sg: q * Kx, al: -q * Kx,
                      sa: -q * Kx}, "<=", 3 * q * Kx)
        row("8j", t, {Sy: 1, sg: -q * Ky, al: q * Ky, sa: -q * Ky}, "<=", 3 * q * Ky)
        row("8k", t, {Sy: 1, "cy%d" % j: 1, "cy%d" % i: -1, sg: -q * Ky, al: -q * Ky,
                      sa: q * Ky}, "<=", 3 * q * Ky)
        bx = (lb[i][0] + lb[j][0]) / 2
        by = (lb[i][1] + lb[j][1]) / 2
        row("8m", t, {dx: 1, sg: -bx}, ">=", bx)
        row("8n", t, {dy: 1, sg: by}, ">=", by)
        h = Fraction(1, 2)
        row("8o", t, {"cx%d" % i: 1, "cx%d" % j: -1, f"lx{i}": h, f"lx{j}": h,
                      sg: h * Lx, al: h * Lx, sa: h * Lx}, "<=", 3 * h * Lx)
        row("8p", t, {"cx%d" % j: 1, "cx%d" % i: -1, f"lx{i}": h, f"lx{j}": h,
                      sg: h * Lx, al: -h * Lx, sa: -h * Lx}, "<=", 3 * h * Lx)
        row("8q", t, {"cy%d" % i: 1, "cy%d" % j: -1, f"ly{i}": h, f"ly{j}": h,
                      sg: -h * Ly, al: h * Ly, sa: -h * Ly}, "<=", 3 * h * Ly)
        row("8r", t, {"cy%d" % j: 1, "cy%d" % i: -1, f"ly{i}": h, f"ly{j}": h,
                      sg: -h * Ly, al: -h * Ly, sa: h * Ly}, "<=", 3 * h * Ly)
        for nm in (sg, al):
            row("8t", f"{nm}.lo", {nm: 1}, ">=", -1)
            row("8t", f"{nm}.hi", {nm: 1}, "<=", 1)
    for i in range(1, n + 1):
        for s, ax in enumerate("xy"):
            row("8s", f"{ax}.{i}.lo", {f"l{ax}{i}": 1}, ">=", lb[i][s])
            row("8s", f"{ax}.{i}.hi", {f"l{ax}{i}": 1}, "<=", ub[i][s])

    psd = []
    for i in range(1, n + 1):
        psd.append(("8a", f"{i}", i))
        for ax in "xy":
            psd.append(("8b", f"{ax}.{i}", (ax, i)))
    triples = [(i, j, k) for i in range(1, n + 1) for j in range(1, n + 1)
               for k in range(1, n + 1) if len({i, j, k}) == 3]
    return TakoudaSystem(inst, lp, psd, triples, lb, ub, area, (Lx, Ly))


def takouda_point(inst: Instance, system: TakoudaSystem | None = None) -> dict:
    """Closed-form point: centres 0, widths max(sqrt(a), lb), relations 0."""
    system = system or build_takouda(inst)
    n = inst.n
    pt = {}
    for i in range(1, n + 1):
        r = _sqrt(system.area[i])
        for s, ax in enumerate("xy"):
            pt[f"c{ax}{i}"] = Fraction(0)
            lbv = system.lb[i][s]
            # compare squares so an irrational root never forces a float comparison
            pt[f"l{ax}{i}"] = lbv if lbv * lbv >= system.area[i] else r
    for i, j in _pairs(n):
        bx = (system.lb[i][0] + system.lb[j][0])
        by = (system.lb[i][1] + system.lb[j][1])
        dx = bx / 2 if bx <= by else Fraction(0)
        dy = by / 2 if bx > by else Fraction(0)
        pt[f"dx{i}_{j}"], pt[f"dy{i}_{j}"] = dx, dy
        pt[f"Sx{i}_{j}"], pt[f"Sy{i}_{j}"] = dx / 2, dy / 2
        for nm in ("sg", "al", "sa"):
            pt[f"{nm}{i}_{j}"] = Fraction(0)
    return pt


def _psd2(a, b, c) -> bool:
    """[[a, b], [b, c]] >= 0 via trace and determinant signs."""
    return a >= 0 and c >= 0 and a * c - b * b >= 0


def audit_takouda_point(inst: Instance, overrides: dict | None = None) -> AuditReport:
    system = build_takouda(inst)
    point = takouda_point(inst, system)
    if overrides:
        point.update(overrides)
    rep = AuditReport("takouda")
    for fam in ("8a", "8b") + TAKOUDA_LINEAR[:9] + ("8l",) + TAKOUDA_LINEAR[9:] + ("vvT",):
        rep.families[fam] = FamilyVerdict(fam)
    Lx, Ly = system.floor

    for fam, tag, key in system.psd:
        fv = rep.families[fam]
        fv.count += 1
        if fam == "8a":
            i = key
            lx, ly, a = point[f"lx{i}"], point[f"ly{i}"], system.area[i]
            inexact = isinstance(lx, float) or isinstance(ly, float)
            # [[lx, sqrt a], [sqrt a, ly]]: the determinant needs only a itself
            ok = lx >= 0 and ly >= 0 and lx * ly - a >= (-FLOAT_TOL if inexact else 0)
            gap = max(0, a - lx * ly)
        else:
            ax, i = key
            L = Lx if ax == "x" else Ly
            half = (L - point[f"l{ax}{i}"]) / 2
            c = point[f"c{ax}{i}"]
            inexact = isinstance(half, float) or isinstance(c, float)
            ok = _psd2(half, c, half) if not inexact else (half >= -FLOAT_TOL
                                                          and half * half - c * c >= -FLOAT_TOL)
            gap = max(0, abs(c) - half)
        if inexact:
            fv.mode = "float"
        if not ok:
            fv.violated += 1
            fv.worst = max(fv.worst, gap)
            if len(fv.examples) < 5:
                fv.examples.append(f"{fam}.{tag}")

    _check_rows(system.lp, point, rep)

    fv = rep.families["8l"]
    for i, j, k in system.comp_rows:
        fv.count += 1
        sg, al = system.sigma, system.alpha
        val = ((sg(point, i, j) + sg(point, j, k)) * (sg(point, i, j) + sg(point, i, k))
               * (al(point, i, j) + al(point, j, k)) * (al(point, i, j) - al(point, i, k)))
        if val != 0:
            fv.violated += 1
            fv.worst = max(fv.worst, abs(val))
            if len(fv.examples) < 5:
                fv.examples.append(f"8l.{i}.{j}.{k}")

    # rank-one product matrix: every linearised product equals the product of its factors
    fv = rep.families["vvT"]
    for i, j in _pairs(inst.n):
        fv.count += 1
        gap = abs(point[f"sa{i}_{j}"] - point[f"sg{i}_{j}"] * point[f"al{i}_{j}"])
        if gap > 0:
            fv.violated += 1
            fv.worst = max(fv.worst, gap)

    rep.objective = _objective_at(system.lp, point)
    rep.expected = omega2_closed_form(inst)
    rep.objective_tol = FLOAT_TOL
    return rep
