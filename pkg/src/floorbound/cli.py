"""Command-line front end: ``floorbound {bound,exact,gen,audit,export}``.

Exit codes: 0 success, 1 audit FAIL, 2 parse/usage error, 3 invariant
violation, 4 size cap exceeded, 5 internal solver failure.

Machine reports are ``key<TAB>value`` lines. Keys (stable)::

    instance.digest  instance.dim  instance.n
    level.<k>.omega  level.<k>.subsets  level.<k>.subsets_pruned  level.<k>.mode
    level.<k>.gap                      (only with --ub)
    gamma.<i,j,..>   upper.<i,j,..>    dual.<i,j,..>   (top level only)
    time.<phase>.<k>                   (only with --timings)
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field

from floorbound._numbers import format_number, parse_decimal
from floorbound.bound import (K_CAP, MasterLpError, SizeCapError, build_family, build_master_lp,
                              exact_optimum, hierarchy, omega2_closed_form, prune_family,
                              relative_gap)
from floorbound.instance import (InstanceError, InvariantError, ParseError, generate_instance,
                                 load_instance, serialize_instance)
from floorbound.layout import LayoutError, serialize_layout
from floorbound.lp import LpError, write_lp
from floorbound.subproblem import RefineConfig, SubproblemError, SubsetCache, subset_bound
from floorbound import theory_audit as ta

log = logging.getLogger("floorbound")

EXIT_OK, EXIT_AUDIT_FAIL, EXIT_PARSE, EXIT_INVARIANT, EXIT_CAP, EXIT_SOLVER = 0, 1, 2, 3, 4, 5

AUDITS = ("zero-point", "relaxation", "lifted-lp", "moment-matrix", "takouda")


def _env_float(name, default):
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        log.warning("ignoring %s=%r: not a number", name, raw)
        return default


@dataclass
class RunConfig:
    subcommand: str
    instance: str | None = None
    k: int | None = None
    k_min: int = 2
    workers: int = 1
    mode: str | None = None
    eps_area: float = 1e-6
    lp_tol: float = 1e-9
    max_rounds: int = 8
    out: str | None = None
    emit_layout: str | None = None
    fmt: str = "human"
    timings: bool = False
    prune: bool = True
    ub: object = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("worker count must be >= 1")

    @property
    def refine(self) -> RefineConfig:
        return RefineConfig(eps_area=self.eps_area, max_rounds=self.max_rounds,
                            lp_tol=self.lp_tol)


def _key(C) -> str:
    return ",".join(map(str, C))


def _emit(lines, out=None):
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- bound

def bound_report(inst, results, cfg: RunConfig) -> list[str]:
    f = format_number
    if cfg.fmt == "machine":
        lines = [f"instance.digest\t{inst.digest()}", f"instance.dim\t{inst.dim}",
                 f"instance.n\t{inst.n}"]
        for res in results:
            k = res.level
            lines += [f"level.{k}.omega\t{f(res.omega)}", f"level.{k}.subsets\t{res.n_subsets}",
                      f"level.{k}.subsets_pruned\t{res.n_pruned}", f"level.{k}.mode\t{res.mode}"]
            if cfg.ub is not None:
                lines.append(f"level.{k}.gap\t{relative_gap(res.omega, cfg.ub):.6f}")
            if cfg.timings:
                for phase, sec in sorted(res.timings.items()):
                    lines.append(f"time.{phase}.{k}\t{sec:.6f}")
        top = results[-1]
        for C in sorted(top.table, key=lambda C: (len(C), C)):
            sb = top.table[C]
            lines += [f"gamma.{_key(C)}\t{f(sb.gamma)}", f"upper.{_key(C)}\t{f(sb.upper)}",
                      f"dual.{_key(C)}\t{f(top.duals.get(C, 0))}"]
        return lines
    lines = [f"instance {inst.digest()}  dim={inst.dim}  n={inst.n}"]
    head = f"{'k':>3} {'omega':>16} {'subsets':>8} {'pruned':>8} {'mode':>9}"
    if cfg.ub is not None:
        head += f" {'gap%':>8}"
    if cfg.timings:
        head += f" {'sub(s)':>9} {'master(s)':>9}"
    lines.append(head)
    for res in results:
        row = (f"{res.level:>3} {f(res.omega):>16} {res.n_subsets:>8} {res.n_pruned:>8} "
               f"{res.mode:>9}")
        if cfg.ub is not None:
            row += f" {relative_gap(res.omega, cfg.ub):>7.2f}%"
        if cfg.timings:
            row += (f" {res.timings.get('subproblems', 0):>9.4f}"
                    f" {res.timings.get('master', 0):>9.4f}")
        lines.append(row)
    return lines


def cmd_bound(cfg: RunConfig) -> int:
    inst = load_instance(cfg.instance)
    k = cfg.k if cfg.k is not None else min(K_CAP[inst.dim], inst.n)
    cache = SubsetCache(inst.digest(), cfg.refine)
    results = hierarchy(inst, k, workers=cfg.workers, refine=cfg.refine, prune=cfg.prune,
                        cache=cache, mode=cfg.mode, k_min=cfg.k_min)
    _emit(bound_report(inst, results, cfg), cfg.out)
    if cfg.emit_layout:
        top = results[-1]
        best = max((sb for sb in top.table.values() if sb.witness is not None),
                   key=lambda sb: (len(sb.subset), sb.gamma), default=None)
        if best is None:
            log.warning("no witness layout available")
        else:
            with open(cfg.emit_layout, "w", encoding="utf-8") as fh:
                fh.write(serialize_layout(best.witness, inst))
    return EXIT_OK


# ---------------------------------------------------------------- exact

def cmd_exact(cfg: RunConfig) -> int:
    inst = load_instance(cfg.instance)
    sb = exact_optimum(inst, cfg.refine)
    f = format_number
    if cfg.fmt == "machine":
        lines = [f"instance.digest\t{inst.digest()}", f"exact.lower\t{f(sb.gamma)}",
                 f"exact.upper\t{f(sb.upper)}", f"exact.proven\t{int(sb.exact)}"]
    else:
        lines = [f"instance {inst.digest()}  dim={inst.dim}  n={inst.n}",
                 f"optimum in [{f(sb.gamma)}, {f(sb.upper)}]" if not sb.exact
                 else f"optimum {f(sb.gamma)}"]
    _emit(lines, cfg.out)
    if cfg.emit_layout:
        if sb.witness is None:
            log.warning("no witness layout available")
        else:
            with open(cfg.emit_layout, "w", encoding="utf-8") as fh:
                fh.write(serialize_layout(sb.witness, inst))
    return EXIT_OK


# ---------------------------------------------------------------- gen

def cmd_gen(cfg: RunConfig) -> int:
    x = cfg.extra
    inst = generate_instance(x["dim"], x["n"], x["density"], x["seed"],
                             floor_factor=x["floor_factor"])
    text = serialize_instance(inst)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------- audit

def run_audit(inst, which: str, variant: str | None = None, cuts: str = "none"):
    if which == "zero-point":
        return ta.audit_zero_point(inst, variant or "half-sqrt")
    if which == "relaxation":
        rep = ta.AuditReport(f"relaxation[{cuts}]")
        rep.objective = ta.relaxation_value(inst, cuts)
        rep.expected = 0 if cuts == "none" else omega2_closed_form(inst)
        rep.objective_tol = 0 if inst.dim == 1 else ta.FLOAT_TOL
        return rep
    if inst.dim == 1 and which in ("lifted-lp", "moment-matrix"):
        if which == "lifted-lp":
            return ta.audit_lifted_point(inst, variant or "corrected")
        return ta.audit_moment_matrix(inst, variant=variant or "corrected")
    if inst.dim == 2 and which == "takouda":
        return ta.audit_takouda_point(inst)
    raise ta.AuditError(f"audit {which!r} does not apply to a {inst.dim}D instance")


def cmd_audit(cfg: RunConfig) -> int:
    inst = load_instance(cfg.instance)
    rep = run_audit(inst, cfg.extra["which"], cfg.extra.get("variant"), cfg.extra["cuts"])
    lines = [f"audit\t{rep.name}"] + rep.lines()
    if cfg.fmt == "human":
        lines += [f"note\t{n}" for n in rep.notes]
        for fam in rep.failed_families():
            lines.append(f"examples\t{fam}\t{' '.join(rep.families[fam].examples)}")
    _emit(lines, cfg.out)
    return EXIT_OK if rep.passed else EXIT_AUDIT_FAIL


# ---------------------------------------------------------------- export

def cmd_export(cfg: RunConfig) -> int:
    inst = load_instance(cfg.instance)
    what = cfg.extra["what"]
    if not cfg.out:
        raise ValueError("export needs --out")
    if what == "lifted":
        if inst.dim != 1:
            raise ta.AuditError("the lifted LP is defined for 1D instances only")
        system = ta.build_lifted(inst)
        point = ta.lifted_point(inst) if cfg.extra.get("with_point") else None
        ta.export_lifted(system, cfg.out, point)
        return EXIT_OK
    k = cfg.k if cfg.k is not None else 2
    fam = build_family(inst, k)
    if cfg.prune:
        fam = prune_family(inst, fam)
    bounds = [subset_bound(inst, C, cfg.refine) for C in fam]
    lp, _ = build_master_lp(inst, bounds)
    with open(cfg.out, "w", encoding="utf-8") as fh:
        write_lp(lp, fh, comments=[f"master LP, level {k}, instance {inst.digest()}",
                                   f"family {fam.tag} with {len(fam)} subsets"])
    return EXIT_OK


# ---------------------------------------------------------------- parsing

def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _decimal(text):
    try:
        return parse_decimal(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="floorbound",
                                     description="Dual bounds for floor layout problems.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, instance=True):
        if instance:
            p.add_argument("--instance", required=True, help="instance file (.flp)")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--format", dest="fmt", choices=("human", "machine"), default="human")

    def tolerances(p):
        p.add_argument("--eps-area", type=float,
                       default=_env_float("FLOORBOUND_EPS_AREA", 1e-6))
        p.add_argument("--lp-tol", type=float, default=_env_float("FLOORBOUND_LP_TOL", 1e-9))
        p.add_argument("--max-rounds", type=int, default=8, help="tangent-cut refinement rounds")

    p = sub.add_parser("bound", help="compute the omega_k hierarchy")
    common(p)
    tolerances(p)
    p.add_argument("--k", type=int, help="highest level (default: the size cap)")
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--workers", type=_positive_int, default=os.cpu_count() or 1)
    p.add_argument("--mode", choices=("rational", "float"))
    p.add_argument("--ub", type=_decimal, help="known upper bound; adds the relative gap")
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--timings", action="store_true")
    p.add_argument("--emit-layout", help="write the witness layout of the largest subset")

    p = sub.add_parser("exact", help="optimum (1D) or bracket (2D) of a small instance")
    common(p)
    tolerances(p)
    p.add_argument("--emit-layout")

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--out")
    p.add_argument("--dim", type=int, choices=(1, 2), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--floor-factor", type=float, default=2)

    p = sub.add_parser("audit", help="check a candidate point against a relaxation")
    common(p)
    p.add_argument("--which", choices=AUDITS, required=True)
    p.add_argument("--variant", help="zero-point: half-sqrt|sqrt; lifted: corrected|swapped")
    p.add_argument("--cuts", choices=("none", "objective_cuts"), default="none")

    p = sub.add_parser("export", help="write an LP in CPLEX LP format")
    common(p)
    tolerances(p)
    p.add_argument("--what", choices=("lifted", "master"), required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--with-point", action="store_true",
                   help="lifted: annotate moment entries with the lifted point")
    return parser


def config_from_args(args) -> RunConfig:
    extra = {k: getattr(args, k) for k in ("dim", "n", "density", "seed", "floor_factor",
                                           "which", "variant", "cuts", "what", "with_point")
             if hasattr(args, k)}
    return RunConfig(
        subcommand=args.subcommand,
        instance=getattr(args, "instance", None),
        k=getattr(args, "k", None),
        k_min=getattr(args, "k_min", 2),
        workers=getattr(args, "workers", 1),
        mode=getattr(args, "mode", None),
        eps_area=getattr(args, "eps_area", 1e-6),
        lp_tol=getattr(args, "lp_tol", 1e-9),
        max_rounds=getattr(args, "max_rounds", 8),
        out=getattr(args, "out", None),
        emit_layout=getattr(args, "emit_layout", None),
        fmt=getattr(args, "fmt", "human"),
        timings=getattr(args, "timings", False),
        prune=not getattr(args, "no_prune", False),
        ub=getattr(args, "ub", None),
        extra=extra,
    )


COMMANDS = {"bound": cmd_bound, "exact": cmd_exact, "gen": cmd_gen, "audit": cmd_audit,
            "export": cmd_export}


def run(cfg: RunConfig) -> int:
    """Dispatch ``cfg`` and map failures onto exit codes."""
    try:
        return COMMANDS[cfg.subcommand](cfg)
    except InvariantError as exc:
        log.error("invariant violation: %s", exc)
        return EXIT_INVARIANT
    except (ParseError, InstanceError, OSError) as exc:
        log.error("cannot read input: %s", exc)
        return EXIT_PARSE
    except SizeCapError as exc:
        log.error("size cap exceeded: %s", exc)
        return EXIT_CAP
    except (MasterLpError, LpError, SubproblemError, LayoutError) as exc:
        log.error("solver failure: %s", exc)
        return EXIT_SOLVER
    except (ta.AuditError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_PARSE


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        parser.error(str(exc))
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
