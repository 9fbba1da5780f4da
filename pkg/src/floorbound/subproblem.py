"""Partial lower bounds gamma(C) for component subsets.

1D subsets are solved exactly by enumerating permutations: for a fixed order
the contiguous packing minimises every pairwise distance at once, so the
best packing over all orders is the subproblem optimum.

2D subsets are bounded by a branch and bound over relation assignments
(one of left/right/below/above per pair). Each node solves an LP in which
the area requirement ``4 lx ly >= a`` is replaced by tangent cuts, which is
a relaxation, so the minimum over leaves is a valid lower bound. Cuts are
added at the optimum of the best leaf until its area violation disappears or
the round budget runs out.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, islice, permutations

import numpy as np

from floorbound.instance import Instance
from floorbound.layout import Layout, Relation, pack_1d, pack_2d, objective
from floorbound.lp import LinearProgram, solve_lp

log = logging.getLogger(__name__)

ORACLE_MAX = 4


class SubproblemError(ValueError):
    pass


@dataclass
class SubsetBound:
    subset: tuple[int, ...]
    gamma: object
    upper: object
    witness: Layout | None = None
    exact: bool = True          # gamma is an exact rational and equals the optimum
    rounds: int = 0
    nodes: int = 0

    def __post_init__(self):
        self.subset = tuple(sorted(self.subset))


@dataclass(frozen=True)
class RefineConfig:
    eps_area: float = 1e-6
    max_rounds: int = 8
    lp_tol: float = 1e-9
    closed_form_pairs: bool = True   # |C| = 2 via the closed form instead of the LP search


def _check_subset(inst: Instance, C, dim):
    C = tuple(sorted(set(C)))
    if inst.dim != dim:
        raise SubproblemError(f"expected a {dim}D instance, got {inst.dim}D")
    if len(C) < 2:
        raise SubproblemError("subset needs at least two components")
    if C[0] < 1 or C[-1] > inst.n:
        raise SubproblemError(f"subset {C} outside 1..{inst.n}")
    return C


def _lcm_den(values) -> int:
    return math.lcm(*(Fraction(v).denominator for v in values)) if values else 1


# ---------------------------------------------------------------- 1D

def gamma_1d(inst: Instance, C, chunk: int = 50000) -> SubsetBound:
    """Exact optimum of the 1D subproblem on ``C`` by permutation enumeration.

    Costs are computed on integers scaled by the common denominator, so the
    result is exact. Ties keep the lexicographically first order.
    """
    C = _check_subset(inst, C, 1)
    pairs = list(inst.pairs(C))
    if not pairs:
        return SubsetBound(C, Fraction(0), Fraction(0), pack_1d(inst, C))
    k = len(C)
    if k == 2:
        # adjacent placement; both orders cost the same
        gamma = pairs[0][2] * (inst.halfwidth(C[0]) + inst.halfwidth(C[1]))
        return SubsetBound(C, gamma, gamma, pack_1d(inst, C))
    idx = {c: a for a, c in enumerate(C)}
    hw = [inst.halfwidth(c) for c in C]
    ws = [p for _, _, p in pairs]
    sh, sp = _lcm_den(hw), _lcm_den(ws)
    w_int = np.array([int(h * sh) for h in hw], dtype=np.int64)
    pi = np.array([idx[i] for i, _, _ in pairs])
    pj = np.array([idx[j] for _, j, _ in pairs])
    pw = np.array([int(p * sp) for p in ws], dtype=np.int64)
    if int(w_int.sum()) * 2 * int(pw.sum()) >= 2**62:
        w_int, pw = w_int.astype(object), pw.astype(object)

    best, best_perm = None, None
    it = permutations(range(k))
    while True:
        block = list(islice(it, chunk))
        if not block:
            break
        P = np.array(block)
        wid = w_int[P]
        centers = 2 * np.cumsum(wid, axis=1) - wid        # scaled centers in order
        pos = np.empty_like(centers)
        np.put_along_axis(pos, P, centers, axis=1)         # pos[:, comp]
        cost = (np.abs(pos[:, pi] - pos[:, pj]) * pw).sum(axis=1)
        a = int(np.argmin(cost))
        if best is None or cost[a] < best:
            best, best_perm = cost[a], block[a]
    gamma = Fraction(int(best), sh * sp)
    perm = [C[a] for a in best_perm]
    wit = pack_1d(inst, perm)
    return SubsetBound(C, gamma, gamma, wit)


def _oracle_1d(inst: Instance, C) -> SubsetBound:
    """Per-permutation LP over centres and distances with the order fixed."""
    best, best_perm = None, None
    for perm in permutations(C):
        lp = LinearProgram()
        for i in C:
            lp.add_var(f"c{i}", 0, 0, inst.floor[0])
        for i, j, p in inst.pairs(C):
            lp.add_var(f"d{i}_{j}", p)
            lp.add_row({f"d{i}_{j}": 1, f"c{i}": -1, f"c{j}": 1}, ">=", 0)
            lp.add_row({f"d{i}_{j}": 1, f"c{i}": 1, f"c{j}": -1}, ">=", 0)
        for a, b in zip(perm, perm[1:]):
            # consecutive non-overlap rows imply the rest of the chain
            lp.add_row({f"c{b}": 1, f"c{a}": -1}, ">=",
                       inst.halfwidth(a) + inst.halfwidth(b))
        for i in C:
            lp.add_row({f"c{i}": 1}, ">=", inst.halfwidth(i))
        sol = solve_lp(lp, mode="rational")
        if sol.status != "optimal":
            raise SubproblemError(f"oracle LP {sol.status} for order {perm}")
        if best is None or sol.value < best:
            best, best_perm = sol.value, perm
    return SubsetBound(C, best, best, pack_1d(inst, best_perm))


# ---------------------------------------------------------------- 2D assignments

def _pair_options(i, j, first):
    opts = [Relation(0, i, j), Relation(1, i, j)]
    if not first:
        opts = [Relation(0, i, j), Relation(0, j, i), Relation(1, i, j), Relation(1, j, i)]
    return opts


def _reaches(succ, a, b) -> bool:
    stack, seen = [a], {a}
    while stack:
        u = stack.pop()
        if u == b:
            return True
        for v in succ.get(u, ()):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return False


class _Partial:
    """Relation assignment under construction with per-axis successor lists."""

    def __init__(self):
        self.rels: dict[tuple[int, int], Relation] = {}
        self.succ = ({}, {})

    def can_add(self, r: Relation) -> bool:
        return not _reaches(self.succ[r.axis], r.after, r.before)

    def push(self, key, r):
        self.rels[key] = r
        self.succ[r.axis].setdefault(r.before, []).append(r.after)

    def pop(self, key):
        r = self.rels.pop(key)
        self.succ[r.axis][r.before].pop()


def enumerate_assignments(C):
    """Yield every acyclic relation assignment of ``C``.

    The first pair is restricted to "i left of j" and "i below j"; mirroring
    an axis maps the remaining assignments onto these.
    """
    C = tuple(sorted(C))
    if len(C) < 2:
        raise SubproblemError("subset needs at least two components")
    pairs = list(combinations(C, 2))
    part = _Partial()

    def rec(k):
        if k == len(pairs):
            yield dict(part.rels)
            return
        i, j = pairs[k]
        for r in _pair_options(i, j, k == 0):
            if part.can_add(r):
                part.push((i, j), r)
                yield from rec(k + 1)
                part.pop((i, j))

    yield from rec(0)


def is_acyclic(assignment) -> bool:
    part = _Partial()
    for key, r in assignment.items():
        if not part.can_add(r):
            return False
        part.push(key, r)
    return True


# ---------------------------------------------------------------- 2D LP

def _x_range(comp):
    """Range of lx on which the area arc is relevant: [x_lo, x_hi]."""
    a = comp.area
    lbx, ubx = comp.lb[0], comp.ub[0]
    lby, uby = comp.lb[1], comp.ub[1]
    x_lo = max(lbx, a / (4 * uby))
    x_hi = min(ubx, max(x_lo, a / (4 * lby)))
    return x_lo, x_hi


def initial_tangents(comp) -> list[float]:
    if comp.area == 0:
        return []
    a = comp.area
    t1 = comp.lb[0]
    t2 = a / (4 * comp.lb[1])
    ts = {float(t1), float(t2), math.sqrt(float(t1) * float(t2))}
    return sorted(t for t in ts if t > 0)


class _SubsetLp:
    """Tangent-cut LP of one subset; rebuilt per node from a shared template."""

    def __init__(self, inst: Instance, C, cuts):
        self.inst, self.C = inst, C
        self.pairs = list(inst.pairs(C))
        self.cuts = cuts     # id -> list of tangent abscissas

    def build(self, rels) -> LinearProgram:
        inst = self.inst
        lp = LinearProgram()
        for i in self.C:
            comp = inst.comp(i)
            a = comp.area
            lp.add_var(f"ux{i}", 0, 0)
            lp.add_var(f"uy{i}", 0, 0)
            # the opposite axis upper bound forces a minimum width on each axis
            lp.add_var(f"lx{i}", 0, float(max(comp.lb[0], a / (4 * comp.ub[1]))), float(comp.ub[0]))
            lp.add_var(f"ly{i}", 0, float(max(comp.lb[1], a / (4 * comp.ub[0]))), float(comp.ub[1]))
        for i, j, p in self.pairs:
            for s in "xy":
                d = f"d{s}{i}_{j}"
                lp.add_var(d, float(p))
                ci = {f"u{s}{i}": 1.0, f"l{s}{i}": 1.0}
                cj = {f"u{s}{j}": 1.0, f"l{s}{j}": 1.0}
                lp.add_row({d: 1.0, **{k: -v for k, v in ci.items()}, **cj}, ">=", 0.0)
                lp.add_row({d: 1.0, **ci, **{k: -v for k, v in cj.items()}}, ">=", 0.0)
        for r in rels:
            s = "xy"[r.axis]
            lp.add_row({f"u{s}{r.after}": 1.0, f"u{s}{r.before}": -1.0,
                        f"l{s}{r.before}": -2.0}, ">=", 0.0)
        for i in self.C:
            a = float(self.inst.comp(i).area)
            for t in self.cuts.get(i, ()):
                lp.add_row({f"lx{i}": a / (4 * t * t), f"ly{i}": 1.0}, ">=", a / (2 * t))
        return lp

    def solve(self, rels, tol):
        lp = self.build(rels)
        sol = solve_lp(lp, mode="float", tol=tol)
        if sol.status != "optimal":
            return math.inf, None
        return sol.value, {name: sol.x[k] for k, name in enumerate(lp.names)}


def _witness_halfwidths(inst: Instance, C, point):
    """Area-feasible exact half-widths near the LP optimum."""
    out = {}
    for i in C:
        comp = inst.comp(i)
        x_lo, _ = _x_range(comp)
        lx = Fraction(point[f"lx{i}"]).limit_denominator(10**6)
        lx = min(max(lx, x_lo), comp.ub[0])
        ly = max(comp.lb[1], comp.area / (4 * lx))
        if ly > comp.ub[1]:
            ly = comp.ub[1]
            lx = max(lx, comp.area / (4 * ly))
        out[i] = (lx, ly)
    return out


def _min_halfwidths(inst: Instance, C):
    out = {}
    for i in C:
        comp = inst.comp(i)
        x_lo, _ = _x_range(comp)
        out[i] = (x_lo, max(comp.lb[1], comp.area / (4 * x_lo)))
    return out


def _branch_and_bound(inst, C, cuts, tol):
    """Exact minimum over acyclic assignments of the tangent-cut LP."""
    model = _SubsetLp(inst, C, cuts)
    pairs = list(combinations(C, 2))
    part = _Partial()
    state = {"best": math.inf, "point": None, "rels": None, "nodes": 0}
    leaves = []

    def rec(k):
        if k == len(pairs):
            return
        i, j = pairs[k]
        for r in _pair_options(i, j, k == 0):
            if not part.can_add(r):
                continue
            part.push((i, j), r)
            state["nodes"] += 1
            val, point = model.solve(list(part.rels.values()), tol)
            best = state["best"]
            if math.isinf(best) or val < best - tol * max(1.0, abs(best)):
                if k + 1 == len(pairs):
                    state.update(best=val, point=point, rels=dict(part.rels))
                    leaves.append((dict(part.rels), point))
                else:
                    rec(k + 1)
            part.pop((i, j))

    rec(0)
    return state, leaves


def _closed_form_pair(inst: Instance, i, j) -> SubsetBound:
    ci, cj = inst.comp(i), inst.comp(j)
    p = inst.weight(i, j)
    sx = ci.lb[0] + cj.lb[0]
    sy = ci.lb[1] + cj.lb[1]
    axis = 0 if sx <= sy else 1
    hw = {}
    for k, comp in ((i, ci), (j, cj)):
        lo = comp.lb[axis]
        other = max(comp.lb[1 - axis], comp.area / (4 * lo))
        hw[k] = (lo, other) if axis == 0 else (other, lo)
    wit = pack_2d(inst, {(i, j): Relation(axis, i, j)}, hw)
    gamma = p * min(sx, sy)
    return SubsetBound((i, j), gamma, objective(inst, wit), wit, exact=True)


def gamma_2d(inst: Instance, C, refine: RefineConfig | None = None) -> SubsetBound:
    refine = refine or RefineConfig()
    C = _check_subset(inst, C, 2)
    if not any(True for _ in inst.pairs(C)):
        wit = pack_2d(inst, {}, _min_halfwidths(inst, C))
        return SubsetBound(C, Fraction(0), Fraction(0), wit)
    if len(C) == 2 and refine.closed_form_pairs:
        return _closed_form_pair(inst, *C)

    cuts = {i: initial_tangents(inst.comp(i)) for i in C}
    upper, best_wit = math.inf, None
    gamma, nodes, rounds = 0.0, 0, 0
    for rounds in range(1, refine.max_rounds + 1):
        state, leaves = _branch_and_bound(inst, C, cuts, refine.lp_tol)
        nodes += state["nodes"]
        if state["point"] is None:
            raise SubproblemError(f"no feasible relation assignment for {C}")
        gamma = max(gamma, state["best"])
        for rels, point in leaves:
            wit = pack_2d(inst, rels, _witness_halfwidths(inst, C, point))
            cost = objective(inst, wit)
            if cost < upper:
                upper, best_wit = cost, wit
        added = False
        point = state["point"]
        for i in C:
            a = float(inst.comp(i).area)
            lx, ly = point[f"lx{i}"], point[f"ly{i}"]
            if a > 0 and lx * ly < (1 - refine.eps_area) * a / 4:
                cuts[i] = sorted(set(cuts[i]) | {lx})
                added = True
        if not added:
            break
    return SubsetBound(C, max(gamma, 0.0), upper, best_wit, exact=False,
                       rounds=rounds, nodes=nodes)


# ---------------------------------------------------------------- 2D oracle

def _axis_value(inst, order_rels, axis, widths, weights, cache):
    """min sum p|c_i - c_j| on one axis with fixed widths and precedences."""
    key = (axis, order_rels, widths)
    if key in cache:
        return cache[key]
    ids = [i for i, _ in widths]
    lp = LinearProgram()
    for i in ids:
        lp.add_var(f"c{i}", 0, 0)
    for (i, j), p in weights:
        lp.add_var(f"d{i}_{j}", p)
        lp.add_row({f"d{i}_{j}": 1.0, f"c{i}": -1.0, f"c{j}": 1.0}, ">=", 0.0)
        lp.add_row({f"d{i}_{j}": 1.0, f"c{i}": 1.0, f"c{j}": -1.0}, ">=", 0.0)
    wd = dict(widths)
    for a, b in order_rels:
        lp.add_row({f"c{b}": 1.0, f"c{a}": -1.0}, ">=", wd[a] + wd[b])
    sol = solve_lp(lp, mode="float")
    val = sol.value if sol.status == "optimal" else math.inf
    cache[key] = val
    return val


def gamma_exact_small(inst: Instance, C, grid: int = 4) -> SubsetBound:
    """Independent oracle for small subsets.

    1D: exact, via one LP per permutation. 2D: for every acyclic assignment
    the half-widths of each component are scanned on a grid along the area
    arc. Because the fixed-width optimum only grows with the widths, the
    lowest corner of each grid cell gives a lower bound and the points on
    the arc give feasible layouts; the result is a bracket [gamma, upper].
    """
    C = tuple(sorted(set(C)))
    if len(C) > ORACLE_MAX:
        raise SubproblemError(f"oracle limited to |C| <= {ORACLE_MAX}, got {len(C)}")
    if inst.dim == 1:
        C = _check_subset(inst, C, 1)
        return _oracle_1d(inst, C)
    C = _check_subset(inst, C, 2)
    weights = tuple(((i, j), float(p)) for i, j, p in inst.pairs(C))
    if not weights:
        return SubsetBound(C, 0.0, 0.0, exact=False)

    cells = {}
    for i in C:
        comp = inst.comp(i)
        x_lo, x_hi = _x_range(comp)
        ts = [x_lo + (x_hi - x_lo) * Fraction(k, grid) for k in range(grid + 1)]
        ys = lambda x, comp=comp: max(comp.lb[1], comp.area / (4 * x))
        lows = [(float(ts[k]), float(ys(ts[k + 1]))) for k in range(grid)]
        feas = [(float(t), float(ys(t))) for t in ts]
        cells[i] = (sorted(set(lows)), sorted(set(feas)))

    def best_over(choice_idx, rels, cache):
        x_rels = tuple(sorted((r.before, r.after) for r in rels.values() if r.axis == 0))
        y_rels = tuple(sorted((r.before, r.after) for r in rels.values() if r.axis == 1))
        best = math.inf
        grids = [cells[i][choice_idx] for i in C]

        def rec(k, chosen):
            nonlocal best
            if k == len(C):
                wx = tuple((C[a], chosen[a][0]) for a in range(len(C)))
                wy = tuple((C[a], chosen[a][1]) for a in range(len(C)))
                v = (_axis_value(inst, x_rels, 0, wx, weights, cache)
                     + _axis_value(inst, y_rels, 1, wy, weights, cache))
                best = min(best, v)
                return
            for pt in grids[k]:
                rec(k + 1, chosen + [pt])

        rec(0, [])
        return best

    cache: dict = {}
    lower = upper = math.inf
    for rels in enumerate_assignments(C):
        lower = min(lower, best_over(0, rels, cache))
        upper = min(upper, best_over(1, rels, cache))
    return SubsetBound(C, lower, upper, exact=False)


# ---------------------------------------------------------------- dispatch

def subset_bound(inst: Instance, C, refine: RefineConfig | None = None) -> SubsetBound:
    if inst.dim == 1:
        return gamma_1d(inst, C)
    return gamma_2d(inst, C, refine)


@dataclass
class SubsetCache:
    """Memo of subset bounds keyed by sorted subset, for one instance and config."""
    digest: str
    refine: RefineConfig = field(default_factory=RefineConfig)
    table: dict = field(default_factory=dict)

    def get(self, C):
        return self.table.get(tuple(sorted(C)))

    def put(self, sb: SubsetBound):
        self.table.setdefault(sb.subset, sb)
        return self.table[sb.subset]

    def __contains__(self, C):
        return tuple(sorted(C)) in self.table
