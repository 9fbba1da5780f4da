"""Candidate layouts: objective, feasibility checking and packed constructions.

A :class:`Layout` may cover all components of an instance or only a subset
(the subproblem witnesses do the latter). Constraint identifiers in
feasibility verdicts follow the usual labelling of the unary MIP model:
``2b``..``2k`` for the two-dimensional model and ``3b``..``3i`` for the
one-dimensional one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations

from floorbound._numbers import format_number
from floorbound.feasibility import FeasibilityVerdict, Violation
from floorbound.instance import AXES, Instance


class LayoutError(ValueError):
    pass


@dataclass
class Layout:
    dim: int
    centers: dict[int, tuple]           # id -> per-axis center
    halfwidths: dict[int, tuple]        # id -> per-axis half-width
    z: dict[tuple[int, int, int], object] = field(default_factory=dict)  # (axis, i, j), i != j
    d: dict[tuple[int, int, int], object] = field(default_factory=dict)  # (axis, i, j), i < j

    @property
    def ids(self) -> list[int]:
        return sorted(self.centers)


@dataclass(frozen=True, order=True)
class Relation:
    """``before`` precedes ``after`` along ``axis`` (0 = left of, 1 = below)."""
    axis: int
    before: int
    after: int

    def describe(self) -> str:
        word = "left of" if self.axis == 0 else "below"
        return f"{self.before} {word} {self.after}"


# one relation per unordered pair (i, j), i < j
RelationAssignment = dict


def objective(inst: Instance, layout: Layout):
    if layout.dim != inst.dim:
        raise LayoutError(f"layout has dim {layout.dim}, instance has dim {inst.dim}")
    total = 0
    for (axis, i, j), v in layout.d.items():
        if axis >= inst.dim:
            raise LayoutError(f"distance on axis {axis} in a {inst.dim}D layout")
        total += inst.weight(i, j) * v
    return total


def _ordered(ids):
    return [(i, j) for i in ids for j in ids if i != j]


def check_feasibility(inst: Instance, layout: Layout, tol=0) -> FeasibilityVerdict:
    """Check every constraint of the relevant MIP model at ``layout``."""
    if layout.dim != inst.dim:
        raise LayoutError(f"layout has dim {layout.dim}, instance has dim {inst.dim}")
    ids = layout.ids
    out: list[Violation] = []
    tag = "3" if inst.dim == 1 else "2"

    def need(ok_gap, label, detail):
        # ok_gap is how far the row is violated; positive means violated
        if ok_gap > tol:
            out.append(Violation(tag + label, detail, ok_gap))

    c, h = layout.centers, layout.halfwidths
    for i in ids:
        if len(c[i]) != inst.dim or len(h[i]) != inst.dim:
            raise LayoutError(f"component {i}: wrong number of axes")

    for axis in range(inst.dim):
        a = AXES[axis]
        for i, j in combinations(ids, 2):
            dv = layout.d.get((axis, i, j))
            if dv is None:
                out.append(Violation(tag + "b", f"d^{a}_{i},{j} missing", float("inf")))
                continue
            need(c[i][axis] - c[j][axis] - dv, "b", f"{a} ({i},{j})")
            need(c[j][axis] - c[i][axis] - dv, "c", f"{a} ({i},{j})")
            need(-dv, "g" if inst.dim == 1 else "h", f"{a} ({i},{j})")
        L = inst.floor[axis]
        for i in ids:
            if inst.dim == 1:
                need(-c[i][0], "f", f"c_{i} >= 0")
                need(c[i][0] - L, "f", f"c_{i} <= L")
            else:
                need(h[i][axis] - c[i][axis], "d", f"{a} c_{i} >= l_{i}")
                need(c[i][axis] - (L - h[i][axis]), "d", f"{a} c_{i} <= L - l_{i}")
        for i, j in _ordered(ids):
            zv = layout.z.get((axis, i, j), 0)
            lhs = c[i][axis] + h[i][axis]
            rhs = c[j][axis] - h[j][axis] + L * (1 - zv)
            need(lhs - rhs, "d" if inst.dim == 1 else "f", f"{a} ({i},{j})")
            zt = "h" if inst.dim == 1 else "j"
            need(-zv, zt, f"z^{a}_{i},{j} >= 0")
            need(zv - 1, zt, f"z^{a}_{i},{j} <= 1")
            if zv != 0 and zv != 1:
                out.append(Violation(tag + ("i" if inst.dim == 1 else "k"),
                                     f"z^{a}_{i},{j} = {zv}", min(abs(zv), abs(1 - zv))))

    for i, j in combinations(ids, 2):
        total = sum(layout.z.get((axis, p, q), 0)
                    for axis in range(inst.dim) for p, q in ((i, j), (j, i)))
        need(abs(total - 1), "e" if inst.dim == 1 else "g", f"({i},{j})")

    if inst.dim == 2:
        for i in ids:
            comp = inst.comp(i)
            need(comp.area - 4 * h[i][0] * h[i][1], "e", f"area of {i}")
            for axis in range(2):
                need(comp.lb[axis] - h[i][axis], "i", f"{AXES[axis]} l_{i} >= lb")
                need(h[i][axis] - comp.ub[axis], "i", f"{AXES[axis]} l_{i} <= ub")
    return FeasibilityVerdict(out)


def _tight_distances(layout: Layout, dim: int):
    ids = layout.ids
    for axis in range(dim):
        for i, j in combinations(ids, 2):
            layout.d[(axis, i, j)] = abs(layout.centers[i][axis] - layout.centers[j][axis])


def pack_1d(inst: Instance, perm) -> Layout:
    """Place ``perm`` contiguously from the left edge, in order."""
    perm = list(perm)
    if inst.dim != 1:
        raise LayoutError("pack_1d needs a 1D instance")
    if len(set(perm)) != len(perm) or not perm or any(not 1 <= i <= inst.n for i in perm):
        raise LayoutError(f"invalid permutation {perm}")
    centers, hw = {}, {}
    edge = Fraction(0)
    for i in perm:
        w = inst.halfwidth(i)
        centers[i] = (edge + w,)
        hw[i] = (w,)
        edge += 2 * w
    lay = Layout(1, centers, hw)
    pos = {i: k for k, i in enumerate(perm)}
    for i, j in _ordered(perm):
        lay.z[(0, i, j)] = 1 if pos[i] < pos[j] else 0
    _tight_distances(lay, 1)
    return lay


def canonical_layouts(inst: Instance, perm) -> tuple[Layout, Layout]:
    """The left-packed layout of ``perm`` and of its reversal."""
    perm = list(perm)
    return pack_1d(inst, perm), pack_1d(inst, perm[::-1])


def packed_cost_1d(inst: Instance, perm):
    """Closed-form cost of the contiguous packing of ``perm``."""
    perm = list(perm)
    total = Fraction(0)
    for a in range(len(perm)):
        between = Fraction(0)
        for b in range(a + 1, len(perm)):
            i, j = perm[a], perm[b]
            p = inst.weight(i, j)
            if p:
                total += p * (inst.halfwidth(i) + inst.halfwidth(j) + 2 * between)
            between += inst.halfwidth(j)
    return total


def topological_order(ids, edges):
    """Kahn's algorithm with smallest-id tie breaking; None if cyclic."""
    indeg = {i: 0 for i in ids}
    succ = {i: [] for i in ids}
    for a, b in edges:
        succ[a].append(b)
        indeg[b] += 1
    ready = sorted(i for i in ids if indeg[i] == 0)
    order = []
    while ready:
        i = ready.pop(0)
        order.append(i)
        for b in succ[i]:
            indeg[b] -= 1
            if indeg[b] == 0:
                ready.append(b)
        ready.sort()
    return order if len(order) == len(ids) else None


def pack_2d(inst: Instance, assignment, halfwidths) -> Layout:
    """Longest-path packing of a relation assignment.

    ``halfwidths`` maps each component to ``(l_x, l_y)``; its keys define
    the component set. Each component's low edge on an axis sits at the
    largest high edge of its predecessors on that axis (0 if none).
    """
    if inst.dim != 2:
        raise LayoutError("pack_2d needs a 2D instance")
    ids = sorted(halfwidths)
    hw = {i: tuple(Fraction(v) if not isinstance(v, float) else v for v in halfwidths[i])
          for i in ids}
    for i in ids:
        comp = inst.comp(i)
        for axis in range(2):
            if not comp.lb[axis] <= hw[i][axis] <= comp.ub[axis]:
                raise LayoutError(f"component {i}: half-width out of bounds on {AXES[axis]}")
        if 4 * hw[i][0] * hw[i][1] < comp.area:
            raise LayoutError(f"component {i}: half-widths violate the area requirement")
    rels = list(assignment.values()) if isinstance(assignment, dict) else list(assignment)
    pairs_seen = set()
    for r in rels:
        if r.before not in hw or r.after not in hw:
            raise LayoutError(f"relation {r.describe()} mentions a component outside the layout")
        key = (min(r.before, r.after), max(r.before, r.after))
        if key in pairs_seen:
            raise LayoutError(f"pair {key} has more than one relation")
        pairs_seen.add(key)
    low = {i: [Fraction(0), Fraction(0)] for i in ids}
    for axis in range(2):
        edges = [(r.before, r.after) for r in rels if r.axis == axis]
        order = topological_order(ids, edges)
        if order is None:
            raise LayoutError(f"relation assignment is cyclic on axis {AXES[axis]}")
        preds = {i: [a for a, b in edges if b == i] for i in ids}
        for i in order:
            low[i][axis] = max((low[a][axis] + 2 * hw[a][axis] for a in preds[i]),
                               default=Fraction(0))
    centers = {i: (low[i][0] + hw[i][0], low[i][1] + hw[i][1]) for i in ids}
    lay = Layout(2, centers, hw)
    for i, j in _ordered(ids):
        for axis in range(2):
            lay.z[(axis, i, j)] = 0
    for r in rels:
        lay.z[(r.axis, r.before, r.after)] = 1
    _tight_distances(lay, 2)
    return lay


def serialize_layout(layout: Layout, inst: Instance | None = None) -> str:
    f = format_number
    lines = [f"LAYOUT {layout.dim}"]
    for i in layout.ids:
        parts = [f"C {i}"]
        for axis in range(layout.dim):
            parts.append(f"{f(layout.centers[i][axis])} {f(layout.halfwidths[i][axis])}")
        lines.append(" ".join(parts))
    if inst is not None:
        lines.append(f"OBJ {f(objective(inst, layout))}")
    return "\n".join(lines) + "\n"


def all_permutations(ids):
    """Lexicographic permutations of ``ids`` (sorted first)."""
    return permutations(sorted(ids))
