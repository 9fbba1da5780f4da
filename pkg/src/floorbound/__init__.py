"""Combinatorial dual bounds for the one- and two-dimensional floor layout problem."""
from floorbound.instance import (ComponentSpec, Instance, active_components, generate_instance,
                                 parse_instance, serialize_instance)
from floorbound.layout import Layout, Relation, check_feasibility, objective, pack_1d, pack_2d
from floorbound.lp import LinearProgram, LpSolution, check_point, solve_lp
from floorbound.subproblem import (RefineConfig, SubsetBound, enumerate_assignments, gamma_1d,
                                   gamma_2d, gamma_exact_small)
from floorbound.bound import (BoundResult, SubsetFamily, build_family, exact_optimum, hierarchy,
                              master_bound, omega2_closed_form, prune_family)

__version__ = "0.1.0"

__all__ = [
    "ComponentSpec", "Instance", "active_components", "generate_instance", "parse_instance",
    "serialize_instance", "Layout", "Relation", "check_feasibility", "objective", "pack_1d",
    "pack_2d", "LinearProgram", "LpSolution", "check_point", "solve_lp", "RefineConfig",
    "SubsetBound", "enumerate_assignments", "gamma_1d", "gamma_2d", "gamma_exact_small",
    "BoundResult", "SubsetFamily", "build_family", "exact_optimum", "hierarchy", "master_bound",
    "omega2_closed_form", "prune_family",
]
