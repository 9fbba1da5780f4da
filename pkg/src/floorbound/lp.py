"""Small dense linear-programming kernel.

Two-phase primal simplex on a full tableau. The same code path runs on
float64 arrays or on object arrays of :class:`fractions.Fraction`, so every
LP in the package can be solved exactly when the data is rational.

Pricing is Dantzig's rule; after ``stall`` consecutive degenerate pivots the
solver falls back to Bland's rule until the objective moves again. Ties are
always broken by the lowest column index (entering) or the lowest basic
variable index (leaving), which keeps runs reproducible.

The module also reads and writes the CPLEX-style text LP format.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np

from floorbound._numbers import format_number, is_terminating
from floorbound.feasibility import FeasibilityVerdict, Violation

INF = math.inf
SENSES = (">=", "<=", "=")


class LpError(Exception):
    pass


class IterationLimitError(LpError):
    pass


@dataclass
class Row:
    coeffs: dict[int, object]
    sense: str
    rhs: object
    name: str = ""


@dataclass
class LinearProgram:
    """min objective·x + constant  s.t.  rows, lower <= x <= upper."""

    objective: list = field(default_factory=list)
    rows: list[Row] = field(default_factory=list)
    lower: list = field(default_factory=list)
    upper: list = field(default_factory=list)
    names: list[str] = field(default_factory=list)
    constant: object = 0

    def __post_init__(self):
        n = len(self.objective)
        if not self.lower:
            self.lower = [0] * n
        if not self.upper:
            self.upper = [INF] * n
        if not self.names:
            self.names = [f"x{j + 1}" for j in range(n)]
        self._index = {name: j for j, name in enumerate(self.names)}

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def add_var(self, name: str, cost=0, lower=0, upper=INF) -> int:
        if name in self._index:
            raise ValueError(f"duplicate variable {name}")
        j = len(self.objective)
        self.objective.append(cost)
        self.lower.append(lower)
        self.upper.append(upper)
        self.names.append(name)
        self._index[name] = j
        return j

    def var(self, name: str) -> int:
        return self._index[name]

    def add_row(self, coeffs: dict, sense: str, rhs, name: str | None = None) -> int:
        if sense not in SENSES:
            raise ValueError(f"bad sense {sense!r}")
        keyed = {}
        for k, v in coeffs.items():
            j = self._index[k] if isinstance(k, str) else k
            keyed[j] = keyed.get(j, 0) + v
        keyed = {j: v for j, v in keyed.items() if v != 0}
        self.rows.append(Row(keyed, sense, rhs, name or f"R{len(self.rows) + 1}"))
        return len(self.rows) - 1

    def validate(self):
        n = self.n_vars
        if not (len(self.lower) == len(self.upper) == len(self.names) == n):
            raise ValueError("inconsistent column dimensions")
        for row in self.rows:
            for j, v in row.coeffs.items():
                if not 0 <= j < n:
                    raise ValueError(f"row {row.name} references column {j}")
                if isinstance(v, float) and not math.isfinite(v):
                    raise ValueError(f"row {row.name} has non-finite coefficient")
            if isinstance(row.rhs, float) and not math.isfinite(row.rhs):
                raise ValueError(f"row {row.name} has non-finite rhs")
        for c in self.objective:
            if isinstance(c, float) and not math.isfinite(c):
                raise ValueError("non-finite objective coefficient")


@dataclass
class LpSolution:
    status: str                     # "optimal" | "infeasible" | "unbounded"
    value: object = None
    x: list | None = None
    duals: list | None = None       # one per row; >= rows carry y >= 0
    reduced_costs: list | None = None
    iterations: int = 0


def _fr(x):
    return x if isinstance(x, Fraction) else Fraction(x)


class _Tableau:
    def __init__(self, T, z, basis, allowed, exact, tol):
        self.T = T
        self.z = z
        self.basis = basis
        self.allowed = allowed
        self.exact = exact
        self.tol = tol
        self.iterations = 0

    def pivot(self, r, q):
        T = self.T
        T[r] = T[r] / T[r, q]
        col = T[:, q].copy()
        col[r] = 0
        rows = np.nonzero(col)[0]
        cols = np.nonzero(T[r])[0]
        if len(rows):
            T[np.ix_(rows, cols)] -= np.outer(col[rows], T[r, cols])
            if not self.exact:
                block = T[np.ix_(rows, cols)]
                block[np.abs(block) < 1e-12] = 0.0
                T[np.ix_(rows, cols)] = block
        if self.z[q] != 0:
            self.z[cols] -= self.z[q] * T[r, cols]
            if not self.exact:
                zc = self.z[cols]
                zc[np.abs(zc) < 1e-12] = 0.0
                self.z[cols] = zc
        self.basis[r] = q
        self.iterations += 1

    def run(self, max_iter, stall):
        T, tol = self.T, self.tol
        degenerate = 0
        bland = False
        while True:
            if self.iterations >= max_iter:
                raise IterationLimitError(f"simplex exceeded {max_iter} iterations")
            zc = self.z[:-1]
            cand = np.nonzero((zc < -tol) & self.allowed)[0]
            if len(cand) == 0:
                return "optimal"
            if bland:
                q = int(cand[0])
            else:
                q = int(cand[np.argmin(zc[cand])])
            colq = T[:, q]
            rows = np.nonzero(colq > tol)[0]
            if len(rows) == 0:
                return "unbounded"
            ratios = T[rows, -1] / colq[rows]
            best = ratios.min()
            slack = 0 if self.exact else tol * max(1.0, abs(float(best)))
            ties = rows[ratios <= best + slack]
            r = int(min(ties, key=lambda i: self.basis[i]))
            if best == 0 or (not self.exact and abs(best) <= tol):
                degenerate += 1
                if degenerate >= stall:
                    bland = True
            else:
                degenerate = 0
                bland = False
            self.pivot(r, q)


def solve_lp(lp: LinearProgram, mode: str = "float", tol: float | None = None,
             max_iter: int | None = None, stall: int = 50) -> LpSolution:
    """Solve ``lp``; ``mode`` is "float" or "rational"."""
    if mode not in ("float", "rational"):
        raise ValueError(f"unknown mode {mode!r}")
    lp.validate()
    exact = mode == "rational"
    cast = _fr if exact else float
    tol = 0 if exact else (1e-9 if tol is None else tol)
    zero = Fraction(0) if exact else 0.0
    n = lp.n_vars

    # columns of the nonnegative standard form
    colmap: list[list[tuple[int, int]]] = []
    shift = []
    box_rows = []
    ncols = 0
    for j in range(n):
        lo, hi = lp.lower[j], lp.upper[j]
        if lo > hi:
            return LpSolution("infeasible")
        if lo == hi:
            colmap.append([])
            shift.append(cast(lo))
        elif lo > -INF:
            colmap.append([(ncols, 1)])
            shift.append(cast(lo))
            if hi < INF:
                box_rows.append((ncols, cast(hi) - cast(lo)))
            ncols += 1
        elif hi < INF:
            colmap.append([(ncols, -1)])
            shift.append(cast(hi))
            ncols += 1
        else:
            colmap.append([(ncols, 1), (ncols + 1, -1)])
            shift.append(zero)
            ncols += 2

    std_rows = []   # (coeffs on std cols, sense, rhs, original row index)
    for i, row in enumerate(lp.rows):
        coeffs = {}
        rhs = cast(row.rhs)
        for j, a in row.coeffs.items():
            a = cast(a)
            rhs -= a * shift[j]
            for k, sgn in colmap[j]:
                coeffs[k] = coeffs.get(k, zero) + sgn * a
        coeffs = {k: v for k, v in coeffs.items() if v != 0}
        if not coeffs:
            ok = {">=": rhs <= tol, "<=": rhs >= -tol, "=": abs(rhs) <= tol}[row.sense]
            if not ok:
                return LpSolution("infeasible")
            continue
        std_rows.append((coeffs, row.sense, rhs, i))
    for k, width in box_rows:
        std_rows.append(({k: cast(1)}, "<=", width, None))

    m = len(std_rows)
    n_slack = sum(1 for r in std_rows if r[1] != "=")
    width = ncols + n_slack + m + 1
    dtype = object if exact else float
    T = np.full((m, width), zero, dtype=dtype)
    flip = []
    init_col = []
    is_art = np.zeros(width - 1, dtype=bool)
    s = ncols
    art = ncols + n_slack
    basis = []
    for i, (coeffs, sense, rhs, _) in enumerate(std_rows):
        for k, v in coeffs.items():
            T[i, k] = v
        slack_col = None
        if sense == "<=":
            T[i, s] = cast(1)
            slack_col = s
            s += 1
        elif sense == ">=":
            T[i, s] = cast(-1)
            slack_col = s
            s += 1
        T[i, -1] = rhs
        f = 1
        if rhs < 0:
            T[i] = -T[i]
            f = -1
        flip.append(f)
        if slack_col is not None and T[i, slack_col] == 1:
            basis.append(slack_col)
            init_col.append(slack_col)
        else:
            T[i, art] = cast(1)
            is_art[art] = True
            basis.append(art)
            init_col.append(art)
            art += 1
    # artificial columns (used or not) never enter the basis
    allowed = np.ones(width - 1, dtype=bool)
    allowed[ncols + n_slack:] = False
    if max_iter is None:
        max_iter = 50 * (m + width) + 1000

    # phase 1
    z = np.full(width, zero, dtype=dtype)
    for i, b in enumerate(basis):
        if is_art[b]:
            z[:] -= T[i]
            z[b] = zero
    tab = _Tableau(T, z, basis, allowed, exact, tol)
    if is_art.any():
        tab.run(max_iter, stall)
        infeas = -z[-1]
        scale = 1.0 if exact else max(1.0, float(np.abs(T[:, -1]).max(initial=0)))
        if infeas > tol * scale:
            return LpSolution("infeasible", iterations=tab.iterations)
        for i in range(m):
            if is_art[basis[i]]:
                row = T[i, :ncols + n_slack]
                nz = np.nonzero(np.abs(row) > tol)[0] if not exact else np.nonzero(row)[0]
                if len(nz):
                    tab.pivot(i, int(nz[0]))

    # phase 2
    cstd = np.full(width, zero, dtype=dtype)
    for j in range(n):
        cj = cast(lp.objective[j])
        for k, sgn in colmap[j]:
            cstd[k] += sgn * cj
    z = cstd.copy()
    for i, b in enumerate(basis):
        if cstd[b] != 0:
            z -= cstd[b] * T[i]
    tab.z = z
    status = tab.run(max_iter, stall)
    if status == "unbounded":
        return LpSolution("unbounded", iterations=tab.iterations)

    xstd = [zero] * (width - 1)
    for i, b in enumerate(basis):
        xstd[b] = T[i, -1]
    x = []
    for j in range(n):
        v = shift[j]
        for k, sgn in colmap[j]:
            v = v + sgn * xstd[k]
        x.append(v)
    value = cast(lp.constant) + sum((cast(lp.objective[j]) * x[j] for j in range(n)), zero)

    # y_std = c_B B^-1, read off the initial unit columns of the reduced-cost row
    duals = [zero] * lp.n_rows
    for i, (_, _, _, orig) in enumerate(std_rows):
        if orig is not None:
            duals[orig] = flip[i] * (cstd[init_col[i]] - z[init_col[i]])
    reduced = [cast(c) for c in lp.objective]
    for i, row in enumerate(lp.rows):
        if duals[i] != 0:
            for j, a in row.coeffs.items():
                reduced[j] -= duals[i] * cast(a)
    if not exact:
        value, x = float(value), [float(v) for v in x]
        duals, reduced = [float(v) for v in duals], [float(v) for v in reduced]
    return LpSolution("optimal", value, x, duals, reduced, tab.iterations)


def row_activity(row: Row, point):
    return sum((a * point[j] for j, a in row.coeffs.items()), 0)


def check_point(lp: LinearProgram, point, tol=0) -> FeasibilityVerdict:
    """Check every row and bound of ``lp`` at ``point`` (a list or name->value dict)."""
    if isinstance(point, dict):
        point = [point[name] for name in lp.names]
    if len(point) != lp.n_vars:
        raise ValueError("point dimension does not match the LP")
    out = []
    for row in lp.rows:
        lhs = row_activity(row, point)
        if row.sense == ">=":
            gap = row.rhs - lhs
        elif row.sense == "<=":
            gap = lhs - row.rhs
        else:
            gap = abs(lhs - row.rhs)
        if gap > tol:
            out.append(Violation(row.name, row.sense, gap))
    for j, v in enumerate(point):
        if v < lp.lower[j] - tol:
            out.append(Violation("bound", f"{lp.names[j]} >= {lp.lower[j]}", lp.lower[j] - v))
        if v > lp.upper[j] + tol:
            out.append(Violation("bound", f"{lp.names[j]} <= {lp.upper[j]}", v - lp.upper[j]))
    return FeasibilityVerdict(out)


# ---------------------------------------------------------------- LP format

def _row_scale(values) -> int:
    """Integer factor that clears non-terminating denominators in a row."""
    dens = [Fraction(v).denominator for v in values
            if not isinstance(v, float) and not is_terminating(Fraction(v))]
    if not dens:
        return 1
    return reduce(lambda a, b: a * b // math.gcd(a, b), dens, 1)


def _expr(coeffs, names, scale=1) -> str:
    parts = []
    for j in sorted(coeffs):
        v = coeffs[j] * scale
        sign = "-" if v < 0 else "+"
        parts.append(f"{sign} {format_number(abs(v))} {names[j]}")
    if not parts:
        return "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else "-" + text[1:]


def _wrap(text: str, width: int = 200) -> list[str]:
    lines, cur = [], ""
    for tok in text.split(" "):
        if cur and len(cur) + len(tok) + 1 > width:
            lines.append(cur)
            cur = tok
        else:
            cur = f"{cur} {tok}" if cur else tok
    lines.append(cur)
    return lines


def write_lp(lp: LinearProgram, stream, comments: list[str] | None = None):
    """Write ``lp`` in CPLEX LP text format.

    Rows holding non-terminating rationals are scaled by the lcm of their
    denominators so every printed coefficient is exact.
    """
    for line in comments or []:
        stream.write(f"\\ {line}\n")
    stream.write("Minimize\n")
    obj = {j: c for j, c in enumerate(lp.objective) if c != 0}
    if lp.constant != 0:
        stream.write(f"\\ objective constant {format_number(lp.constant)}\n")
    for k, line in enumerate(_wrap(f"obj: {_expr(obj, lp.names)}")):
        stream.write((" " if k == 0 else "   ") + line + "\n")
    stream.write("Subject To\n")
    for row in lp.rows:
        scale = _row_scale(list(row.coeffs.values()) + [row.rhs])
        text = f"{row.name}: {_expr(row.coeffs, lp.names, scale)} {row.sense} {format_number(row.rhs * scale)}"
        for k, line in enumerate(_wrap(text)):
            stream.write((" " if k == 0 else "   ") + line + "\n")
    stream.write("Bounds\n")
    for j, name in enumerate(lp.names):
        lo, hi = lp.lower[j], lp.upper[j]
        if lo == 0 and hi == INF:
            continue
        if lo == -INF and hi == INF:
            stream.write(f" {name} free\n")
        elif lo == hi:
            stream.write(f" {name} = {format_number(lo)}\n")
        else:
            los = "-inf" if lo == -INF else format_number(lo)
            his = "+inf" if hi == INF else format_number(hi)
            stream.write(f" {los} <= {name} <= {his}\n")
    stream.write("End\n")


def _num(tok: str):
    low = tok.lower()
    if low in ("inf", "+inf", "infinity", "+infinity"):
        return INF
    if low in ("-inf", "-infinity"):
        return -INF
    return Fraction(tok)


def _parse_expr(text: str) -> dict[str, Fraction]:
    toks = text.split()
    out: dict[str, Fraction] = {}
    sign, coef = 1, None
    for tok in toks:
        if tok == "+":
            sign = 1
        elif tok == "-":
            sign = -1
        elif re.match(r"^[0-9.]", tok):
            coef = Fraction(tok)
        else:
            name = tok
            if name.startswith("-"):
                sign, name = -1, name[1:]
            val = sign * (coef if coef is not None else 1)
            out[name] = out.get(name, 0) + val
            sign, coef = 1, None
    return out


def read_lp(stream) -> LinearProgram:
    """Read the subset of the LP format produced by :func:`write_lp`."""
    section = None
    chunks: dict[str, list[str]] = {"obj": [], "rows": [], "bounds": []}
    for raw in stream:
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = line.lower()
        if key in ("minimize", "minimise", "min"):
            section = "obj"
            continue
        if key in ("subject to", "st", "s.t."):
            section = "rows"
            continue
        if key == "bounds":
            section = "bounds"
            continue
        if key == "end":
            break
        chunks[section].append(line)

    lp = LinearProgram()
    obj_text = " ".join(chunks["obj"]).split(":", 1)[1]
    obj = _parse_expr(obj_text) if obj_text.strip() != "0" else {}

    statements = []
    for line in chunks["rows"]:
        m = re.match(r"^([^\s:]+):\s*(.*)$", line)
        if m:
            statements.append([m.group(1), m.group(2)])
        else:
            statements[-1][1] += " " + line
    parsed_rows = []
    for name, body in statements:
        m = re.match(r"^(.*?)\s*(>=|<=|=)\s*(\S+)$", body)
        if not m:
            raise ValueError(f"cannot parse row {name}")
        coeffs = _parse_expr(m.group(1)) if m.group(1).strip() != "0" else {}
        parsed_rows.append((name, coeffs, m.group(2), Fraction(m.group(3))))

    def ensure(name):
        if name not in lp._index:
            lp.add_var(name)
        return lp.var(name)

    for name in obj:
        ensure(name)
    for _, coeffs, _, _ in parsed_rows:
        for name in coeffs:
            ensure(name)
    for line in chunks["bounds"]:
        toks = line.split()
        if len(toks) == 2 and toks[1].lower() == "free":
            j = ensure(toks[0])
            lp.lower[j], lp.upper[j] = -INF, INF
        elif len(toks) == 3 and toks[1] == "=":
            j = ensure(toks[0])
            lp.lower[j] = lp.upper[j] = _num(toks[2])
        elif len(toks) == 5:
            j = ensure(toks[2])
            lp.lower[j], lp.upper[j] = _num(toks[0]), _num(toks[4])
        elif len(toks) == 3 and toks[1] in (">=", "<="):
            j = ensure(toks[0])
            if toks[1] == ">=":
                lp.lower[j] = _num(toks[2])
            else:
                lp.upper[j] = _num(toks[2])
        else:
            raise ValueError(f"cannot parse bound {line!r}")
    for name, c in obj.items():
        lp.objective[lp.var(name)] = c
    for name, coeffs, sense, rhs in parsed_rows:
        lp.add_row(coeffs, sense, rhs, name)
    return lp
