"""Exact solver: dense simplex, product linearization, placement MILP and branch-and-bound."""

from .linearize import linearize_product
from .lp import (EQ, GE, INFEASIBLE, LE, OPTIMAL, UNBOUNDED, Constraint, LinearProgram,
                 LpSolution, Variable, simplex, solve_lp)
from .milp import (BUDGET_EXHAUSTED, FEASIBLE_WITH_GAP, INFEASIBLE_STATUS, OPTIMAL_STATUS,
                   ExactResult, ExtractionError, MilpProblem, SolveLimits, build_milp,
                   extract_deployment, relaxation_bound, solve_milp)
from .mps import write_mps
