"""Floor layout instances: data model, text format, random generator.

All numeric data is held as :class:`~fractions.Fraction` parsed from exact
decimal literals. Half-widths are used throughout (a component with
half-width ``l`` occupies ``[c - l, c + l]``).

File format (``#`` starts a comment)::

    FLP <dim>
    N <n>
    L <Lx> [<Ly>]
    COMP <id> <lb_x> <ub_x> [<lb_y> <ub_y> <area>]   # dim=1: COMP <id> <halfwidth>
    P <i> <j> <weight>
"""
from __future__ import annotations

import hashlib
import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from floorbound._numbers import format_number, parse_decimal

log = logging.getLogger(__name__)

AXES = ("x", "y")


class InstanceError(Exception):
    pass


class ParseError(InstanceError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f"line {line}" + (f", column {column}" if column else "") if line else ""
        super().__init__(f"{where}: {message}" if where else message)


class DuplicateEntryError(ParseError):
    pass


class InvariantError(InstanceError):
    pass


@dataclass(frozen=True)
class ComponentSpec:
    id: int
    lb: tuple[Fraction, ...]
    ub: tuple[Fraction, ...]
    area: Fraction | None = None


@dataclass(frozen=True, eq=True)
class Instance:
    dim: int
    floor: tuple[Fraction, ...]
    components: tuple[ComponentSpec, ...]
    weights: dict[tuple[int, int], Fraction] = field(default_factory=dict)

    def __post_init__(self):
        validate(self)

    __hash__ = None

    @property
    def n(self) -> int:
        return len(self.components)

    @property
    def ids(self) -> list[int]:
        return [c.id for c in self.components]

    def comp(self, i: int) -> ComponentSpec:
        return self.components[i - 1]

    def weight(self, i: int, j: int) -> Fraction:
        if i > j:
            i, j = j, i
        return self.weights.get((i, j), Fraction(0))

    def halfwidth(self, i: int) -> Fraction:
        """Fixed half-width of a component in a 1D instance."""
        return self.components[i - 1].lb[0]

    def pairs(self, subset=None):
        """Weighted pairs (i, j, p) with i < j, optionally restricted to ``subset``."""
        # weights are validated nonnegative, so truthiness means positive
        if subset is None:
            for (i, j), p in sorted(self.weights.items()):
                if p:
                    yield i, j, p
            return
        members = sorted(set(subset))
        w = self.weights
        for a, i in enumerate(members):
            for j in members[a + 1:]:
                p = w.get((i, j))
                if p:
                    yield i, j, p

    def digest(self) -> str:
        return hashlib.sha256(serialize_instance(self).encode()).hexdigest()[:16]


def validate(inst: Instance):
    if inst.dim not in (1, 2):
        raise InvariantError(f"dimension must be 1 or 2, got {inst.dim}")
    if inst.n < 1:
        raise InvariantError("instance needs at least one component")
    if len(inst.floor) != inst.dim:
        raise InvariantError(f"floor needs {inst.dim} length(s)")
    for k, comp in enumerate(inst.components, start=1):
        if comp.id != k:
            raise InvariantError(f"component ids must be 1..n in order, got {comp.id} at {k}")
        if len(comp.lb) != inst.dim or len(comp.ub) != inst.dim:
            raise InvariantError(f"component {comp.id}: wrong number of axes")
        for s in range(inst.dim):
            if not 0 < comp.lb[s] <= comp.ub[s]:
                raise InvariantError(
                    f"component {comp.id}: need 0 < lb <= ub on axis {AXES[s]}")
        if inst.dim == 1:
            if comp.area is not None:
                raise InvariantError(f"component {comp.id}: 1D components carry no area")
            if comp.lb[0] != comp.ub[0]:
                raise InvariantError(f"component {comp.id}: 1D half-width must be fixed")
        else:
            if comp.area is None or comp.area < 0:
                raise InvariantError(f"component {comp.id}: area must be >= 0")
            for s in range(2):
                t = 1 - s
                if comp.area > 4 * comp.lb[s] * comp.ub[t]:
                    raise InvariantError(
                        f"component {comp.id}: area exceeds 4*lb_{AXES[s]}*ub_{AXES[t]}")
    for (i, j), p in inst.weights.items():
        if not (1 <= i < j <= inst.n):
            raise InvariantError(f"weight pair ({i},{j}) out of range")
        if p < 0:
            raise InvariantError(f"weight p_{i},{j} is negative")
    for s in range(inst.dim):
        # full widths 2*ub must fit side by side
        need = 2 * sum(c.ub[s] for c in inst.components)
        if inst.floor[s] < need:
            raise InvariantError(
                f"floor too small for axis {AXES[s]}: {format_number(inst.floor[s])}"
                f" < 2*sum(ub) = {format_number(need)}")


def active_components(inst: Instance) -> set[int]:
    """Components with a positive weight to some other component."""
    out = set()
    for i, j, _ in inst.pairs():
        out.update((i, j))
    return out


def parse_instance(text: str) -> Instance:
    dim = n = None
    floor = None
    comps: dict[int, ComponentSpec] = {}
    weights: dict[tuple[int, int], Fraction] = {}

    def num(tok, lineno, col):
        try:
            return parse_decimal(tok)
        except ValueError:
            raise ParseError(f"expected a decimal number, got {tok!r}", lineno, col) from None

    def integer(tok, lineno, col):
        try:
            return int(tok)
        except ValueError:
            raise ParseError(f"expected an integer, got {tok!r}", lineno, col) from None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        toks = line.split()
        cols = []
        pos = 0
        for tok in toks:
            pos = line.index(tok, pos)
            cols.append(pos + 1)
            pos += len(tok)
        key = toks[0].upper()
        args = toks[1:]

        def arity(*allowed):
            if len(args) not in allowed:
                raise ParseError(f"{key} expects {' or '.join(map(str, allowed))} "
                                 f"value(s), got {len(args)}", lineno, cols[0])

        if key == "FLP":
            arity(1)
            if dim is not None:
                raise DuplicateEntryError("repeated FLP header", lineno, cols[0])
            dim = integer(args[0], lineno, cols[1])
            if dim not in (1, 2):
                raise ParseError(f"dimension must be 1 or 2, got {dim}", lineno, cols[1])
        elif key == "N":
            arity(1)
            if n is not None:
                raise DuplicateEntryError("repeated N line", lineno, cols[0])
            n = integer(args[0], lineno, cols[1])
            if n < 1:
                raise ParseError("N must be positive", lineno, cols[1])
        elif key == "L":
            if dim is None:
                raise ParseError("L before FLP header", lineno, cols[0])
            arity(dim)
            if floor is not None:
                raise DuplicateEntryError("repeated L line", lineno, cols[0])
            floor = tuple(num(a, lineno, cols[k + 1]) for k, a in enumerate(args))
            if any(v <= 0 for v in floor):
                raise ParseError("floor lengths must be positive", lineno, cols[1])
        elif key == "COMP":
            if dim is None:
                raise ParseError("COMP before FLP header", lineno, cols[0])
            arity(2 if dim == 1 else 6)
            cid = integer(args[0], lineno, cols[1])
            vals = [num(a, lineno, cols[k + 2]) for k, a in enumerate(args[1:])]
            if cid in comps:
                raise DuplicateEntryError(f"component {cid} defined twice", lineno, cols[1])
            if dim == 1:
                comps[cid] = ComponentSpec(cid, (vals[0],), (vals[0],))
            else:
                comps[cid] = ComponentSpec(cid, (vals[0], vals[2]), (vals[1], vals[3]), vals[4])
        elif key == "P":
            arity(3)
            i = integer(args[0], lineno, cols[1])
            j = integer(args[1], lineno, cols[2])
            p = num(args[2], lineno, cols[3])
            if i == j:
                raise ParseError("weight needs two distinct components", lineno, cols[1])
            k = (min(i, j), max(i, j))
            if k in weights:
                raise DuplicateEntryError(f"weight for pair {k} given twice", lineno, cols[0])
            weights[k] = p
        else:
            raise ParseError(f"unknown record {toks[0]!r}", lineno, cols[0])

    for what, val in (("FLP", dim), ("N", n), ("L", floor)):
        if val is None:
            raise ParseError(f"missing {what} line")
    if sorted(comps) != list(range(1, n + 1)):
        raise InvariantError(f"expected COMP lines for ids 1..{n}, got {sorted(comps)}")
    for (i, j) in weights:
        if j > n:
            raise InvariantError(f"weight pair ({i},{j}) references a missing component")
    weights = {k: v for k, v in weights.items() if v != 0}
    return Instance(dim, floor, tuple(comps[i] for i in range(1, n + 1)), weights)


def serialize_instance(inst: Instance) -> str:
    f = format_number
    lines = [f"FLP {inst.dim}", f"N {inst.n}", "L " + " ".join(f(v) for v in inst.floor)]
    for c in inst.components:
        if inst.dim == 1:
            lines.append(f"COMP {c.id} {f(c.lb[0])}")
        else:
            lines.append(f"COMP {c.id} {f(c.lb[0])} {f(c.ub[0])} "
                         f"{f(c.lb[1])} {f(c.ub[1])} {f(c.area)}")
    for (i, j), p in sorted(inst.weights.items()):
        lines.append(f"P {i} {j} {f(p)}")
    return "\n".join(lines) + "\n"


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def make_instance_1d(halfwidths, weights, floor=None) -> Instance:
    """Convenience constructor; ``weights`` maps (i, j) -> p with 1-based ids."""
    hw = [Fraction(str(v)) if isinstance(v, float) else Fraction(v) for v in halfwidths]
    comps = tuple(ComponentSpec(k + 1, (h,), (h,)) for k, h in enumerate(hw))
    if floor is None:
        floor = 2 * sum(hw)
    w = {(min(i, j), max(i, j)): Fraction(p) for (i, j), p in weights.items() if p != 0}
    return Instance(1, (Fraction(floor),), comps, w)


# half-width grids, in steps of 1/2
HALF_1D = [Fraction(k, 2) for k in range(1, 11)]       # 0.5 .. 5
LB_2D = [Fraction(k, 2) for k in range(1, 5)]          # 0.5 .. 2
UB_2D = [Fraction(k, 2) for k in range(4, 9)]          # 2 .. 4
WEIGHTS = list(range(1, 11))


def generate_instance(dim: int, n: int, weight_density: float, seed: int,
                      floor_factor=2) -> Instance:
    """Random instance, deterministic in ``seed``.

    1D half-widths come from {0.5, 1, ..., 5}. In 2D, lower half-widths come
    from {0.5, ..., 2} and upper ones from {2, ..., 4}; the area is
    ``4*lb_x*lb_y*f`` with ``f`` a multiple of 1/4 in ``[1, min(ub/lb)]``.
    Exactly ``ceil(density * n(n-1)/2)`` pairs get an integer weight in 1..10.
    The floor is ``floor_factor * sum(ub)`` per axis; the default factor 2 is
    the tightest floor on which every arrangement of full widths fits.
    """
    if dim not in (1, 2):
        log.warning("dimension %r clamped to 1", dim)
        dim = 1
    if n < 2:
        log.warning("n=%r clamped to 2", n)
        n = 2
    if not 0 <= weight_density <= 1:
        clamped = min(1.0, max(0.0, weight_density))
        log.warning("weight density %r clamped to %r", weight_density, clamped)
        weight_density = clamped
    floor_factor = Fraction(floor_factor)
    if floor_factor < 2:
        log.warning("floor factor %s clamped to 2", floor_factor)
        floor_factor = Fraction(2)
    rng = random.Random(seed)
    comps = []
    for i in range(1, n + 1):
        if dim == 1:
            h = rng.choice(HALF_1D)
            comps.append(ComponentSpec(i, (h,), (h,)))
        else:
            lb = (rng.choice(LB_2D), rng.choice(LB_2D))
            ub = (rng.choice(UB_2D), rng.choice(UB_2D))
            fmax = min(ub[0] / lb[0], ub[1] / lb[1])
            steps = math.floor((fmax - 1) * 4)
            f = 1 + Fraction(rng.randint(0, steps), 4)
            comps.append(ComponentSpec(i, lb, ub, 4 * lb[0] * lb[1] * f))
    all_pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    count = math.ceil(weight_density * len(all_pairs) - 1e-12)
    chosen = sorted(rng.sample(all_pairs, count))
    weights = {pr: Fraction(rng.choice(WEIGHTS)) for pr in chosen}
    floor = tuple(floor_factor * sum(c.ub[s] for c in comps) for s in range(dim))
    return Instance(dim, floor, tuple(comps), weights)
