"""Constraint-logic bytecode VM with an explicit search tree."""

from clvm.constraints import ConstraintStack, Constraint, Var, Verdict
from clvm.ir import Program, parse_program, load_program
from clvm.search import (
    BUDGET_EXCEEDED,
    EXHAUSTED,
    SearchBudget,
    SolutionStream,
    Strategy,
    collect_all,
    next_solution,
    open_stream,
)
from clvm.vm import Solution, run_oracle

__all__ = [
    "BUDGET_EXCEEDED", "EXHAUSTED", "Constraint", "ConstraintStack", "Program",
    "SearchBudget", "Solution", "SolutionStream", "Strategy", "Var", "Verdict",
    "collect_all", "load_program", "next_solution", "open_stream", "parse_program",
    "run_oracle",
]
__version__ = "0.1.0"
