"""Subset families, the master aggregation LP and the omega_k hierarchy.

The master LP is

    omega(F) = min sum_{i<j} p_ij d_ij   s.t.  sum_{(i,j) in P(C)} p_ij d_ij >= gamma(C)  for C in F,
                                               d >= 0,

with ``d`` the (axis-aggregated) objective variables; every other variable
of the layout model has been projected out.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from floorbound.instance import Instance, active_components
from floorbound.lp import LinearProgram, LpError, solve_lp
from floorbound.subproblem import (RefineConfig, SubsetBound, SubsetCache, gamma_1d,
                                   gamma_2d, subset_bound)

log = logging.getLogger(__name__)

# largest subset size handled by explicit enumeration, per dimension
K_CAP = {1: 8, 2: 4}
EXACT_CAP = {1: 8, 2: 4}
RATIONAL_MASTER_MAX_N = 15


class SizeCapError(ValueError):
    pass


class MasterLpError(RuntimeError):
    pass


@dataclass
class SubsetFamily:
    subsets: list[tuple[int, ...]]
    tag: str = "custom"

    def __post_init__(self):
        clean = {tuple(sorted(set(C))) for C in self.subsets}
        self.subsets = sorted((C for C in clean if len(C) >= 2), key=lambda C: (len(C), C))

    def __len__(self):
        return len(self.subsets)

    def __iter__(self):
        return iter(self.subsets)


@dataclass
class BoundResult:
    level: int | None
    omega: object
    table: dict = field(default_factory=dict)        # subset -> SubsetBound
    duals: dict = field(default_factory=dict)        # subset -> master dual weight
    timings: dict = field(default_factory=dict)      # phase -> seconds
    n_subsets: int = 0                               # before pruning
    n_pruned: int = 0                                # after pruning
    mode: str = "rational"
    r_choice: str = "nonnegative-orthant"


def build_family(inst: Instance, k: int) -> SubsetFamily:
    """All subsets of active components with size in [2, k]."""
    if not 2 <= k <= inst.n:
        raise SizeCapError(f"k={k} outside [2, n={inst.n}]")
    act = sorted(active_components(inst))
    subsets = [C for size in range(2, min(k, len(act)) + 1) for C in combinations(act, size)]
    return SubsetFamily(subsets, f"level-{k}")


def reduce_subset(inst: Instance, C) -> tuple[int, ...]:
    """Drop members of ``C`` with zero weight to every other member, to a fixed point."""
    cur = list(C)
    changed = True
    while changed:
        changed = False
        for r in cur:
            if all(inst.weight(r, s) == 0 for s in cur if s != r):
                cur.remove(r)
                changed = True
                break
    return tuple(cur)


def prune_family(inst: Instance, fam: SubsetFamily) -> SubsetFamily:
    """Replace every subset by its reduction; drop what shrinks below two members."""
    tag = fam.tag
    if tag.startswith("level-"):
        tag = "pruned-from-" + tag[len("level-"):]
    elif not tag.startswith("pruned"):
        tag = "pruned-" + tag
    return SubsetFamily([reduce_subset(inst, C) for C in fam], tag)


def build_master_lp(inst: Instance, bounds) -> tuple[LinearProgram, list]:
    """Master LP over weighted pairs; one covering row per subset bound."""
    lp = LinearProgram()
    for i, j, p in inst.pairs():
        lp.add_var(f"d{i}_{j}", p)
    keys = []
    for sb in sorted(bounds, key=lambda b: (len(b.subset), b.subset)):
        coeffs = {f"d{i}_{j}": p for i, j, p in inst.pairs(sb.subset)}
        lp.add_row(coeffs, ">=", sb.gamma, "C_" + "_".join(map(str, sb.subset)))
        keys.append(sb.subset)
    return lp, keys


def _pick_mode(inst, bounds, mode):
    if mode is not None:
        return mode
    exact = inst.n <= RATIONAL_MASTER_MAX_N and all(isinstance(b.gamma, (int, Fraction))
                                                    for b in bounds)
    return "rational" if exact else "float"


def build_master_dual(inst: Instance, bounds) -> tuple[LinearProgram, list]:
    """Dual of the master LP, as a minimisation.

    min -sum gamma_C y_C  s.t.  sum_{C containing i,j} y_C <= 1 per weighted pair, y >= 0.
    (each pair row of the dual is divided by its positive weight)
    """
    bounds = sorted(bounds, key=lambda b: (len(b.subset), b.subset))
    lp = LinearProgram()
    keys = []
    for sb in bounds:
        lp.add_var("y_" + "_".join(map(str, sb.subset)), -sb.gamma)
        keys.append(sb.subset)
    members = {C: set(C) for C in keys}
    for i, j, _ in inst.pairs():
        coeffs = {k: 1 for k, C in enumerate(keys) if i in members[C] and j in members[C]}
        lp.add_row(coeffs, "<=", 1, f"d{i}_{j}")
    return lp, keys


def master_bound(inst: Instance, bounds, mode: str | None = None, tol=None) -> BoundResult:
    """omega over the subsets of ``bounds``.

    The dual is solved: its rows are one per weighted pair and all slacks
    start basic, which is far cheaper than the primal's one row per subset.
    Its optimal y are the subset weights reported in ``duals``.
    """
    bounds = list(bounds)
    for sb in bounds:
        if not sb.subset or sb.subset[0] < 1 or sb.subset[-1] > inst.n:
            raise ValueError(f"subset {sb.subset} outside 1..{inst.n}")
    mode = _pick_mode(inst, bounds, mode)
    t0 = time.perf_counter()
    lp, keys = build_master_dual(inst, bounds)
    try:
        sol = solve_lp(lp, mode=mode, tol=tol)
    except LpError as exc:
        raise MasterLpError(str(exc)) from exc
    if sol.status != "optimal":
        raise MasterLpError(f"master LP dual is {sol.status}")
    zero = Fraction(0) if mode == "rational" else 0.0
    omega = -sol.value if lp.n_vars else zero
    if omega == 0:
        omega = zero   # avoid -0.0
    duals = dict(zip(keys, sol.x or []))
    res = BoundResult(None, omega, {b.subset: b for b in bounds}, duals, mode=mode)
    res.timings["master"] = time.perf_counter() - t0
    return res


def master_bound_primal(inst: Instance, bounds, mode: str = "rational", tol=None):
    """Direct solve of the primal master LP; kept as a cross-check of ``master_bound``."""
    lp, _ = build_master_lp(inst, list(bounds))
    sol = solve_lp(lp, mode=mode, tol=tol)
    if sol.status != "optimal":
        raise MasterLpError(f"master LP is {sol.status}")
    return sol.value


def omega2_closed_form(inst: Instance):
    """Level-2 bound without any LP: each pair at its cheapest adjacent distance."""
    if inst.dim == 1:
        # sum p_ij (l_i + l_j) = sum_i l_i * (weighted degree of i)
        deg = [0] * (inst.n + 1)
        for (i, j), p in inst.weights.items():
            deg[i] += p
            deg[j] += p
        return sum((inst.halfwidth(i) * deg[i] for i in range(1, inst.n + 1) if deg[i]),
                   Fraction(0))
    total = Fraction(0)
    for i, j, p in inst.pairs():
        ci, cj = inst.comp(i), inst.comp(j)
        total += p * min(ci.lb[0] + cj.lb[0], ci.lb[1] + cj.lb[1])
    return total


def _solve_job(args):
    inst, C, refine = args
    return subset_bound(inst, C, refine)


def solve_subsets(inst: Instance, subsets, workers: int = 1, refine=None,
                  cache: SubsetCache | None = None) -> dict:
    """Subset bounds for ``subsets``, reusing and filling ``cache``.

    Jobs go out largest first; results are merged by subset key, so the
    outcome does not depend on completion order or worker count.
    """
    refine = refine or RefineConfig()
    out = {}
    todo = []
    for C in subsets:
        hit = cache.get(C) if cache is not None else None
        if hit is not None:
            out[hit.subset] = hit
        else:
            todo.append(tuple(sorted(C)))
    todo = sorted(set(todo), key=lambda C: (-len(C), C))
    if workers > 1 and len(todo) > 1:
        chunk = max(1, len(todo) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_job, [(inst, C, refine) for C in todo],
                                    chunksize=chunk))
    else:
        results = [subset_bound(inst, C, refine) for C in todo]
    for sb in results:
        if cache is not None:
            sb = cache.put(sb)
        out[sb.subset] = sb
    return out


def k_cap(inst: Instance) -> int:
    return min(K_CAP[inst.dim], inst.n)


def hierarchy(inst: Instance, k_max: int, workers: int = 1, refine=None, prune: bool = True,
              cache: SubsetCache | None = None, mode: str | None = None,
              k_min: int = 2) -> list[BoundResult]:
    """omega_k for k = k_min..k_max; subset bounds are shared across levels."""
    if k_max > K_CAP[inst.dim]:
        raise SizeCapError(f"k={k_max} exceeds the {inst.dim}D cap of {K_CAP[inst.dim]}")
    if not 2 <= k_min <= k_max <= inst.n:
        raise SizeCapError(f"levels {k_min}..{k_max} outside [2, n={inst.n}]")
    refine = refine or RefineConfig()
    if cache is None:
        cache = SubsetCache(inst.digest(), refine)
    results = []
    for k in range(k_min, k_max + 1):
        fam = build_family(inst, k)
        used = prune_family(inst, fam) if prune else fam
        t0 = time.perf_counter()
        table = solve_subsets(inst, used, workers, refine, cache)
        t_sub = time.perf_counter() - t0
        res = master_bound(inst, [table[C] for C in used], mode)
        res.level = k
        res.n_subsets, res.n_pruned = len(fam), len(used)
        res.timings["subproblems"] = t_sub
        results.append(res)
    return results


def exact_optimum(inst: Instance, refine=None) -> SubsetBound:
    """Optimum of the full instance (1D) or a [gamma, upper] bracket (2D)."""
    cap = EXACT_CAP[inst.dim]
    if inst.n > cap:
        raise SizeCapError(f"exact optimum limited to n <= {cap} in {inst.dim}D, got {inst.n}")
    C = tuple(range(1, inst.n + 1))
    if inst.n < 2:
        zero = Fraction(0)
        return SubsetBound(C, zero, zero)
    if inst.dim == 1:
        return gamma_1d(inst, C)
    return gamma_2d(inst, C, refine)


def relative_gap(lower, upper) -> float:
    """100 (UB - LB) / UB."""
    upper = float(upper)
    if upper == 0:
        return 0.0
    return 100.0 * (upper - float(lower)) / upper
