"""A decision procedure for monadic shallow linear clauses with straight
dismatching constraints, and an approximation-refinement loop around it
for general equality-free clause sets."""

from .approximation import (AncestorIndex, Approximation, TransformStep,
                            approximate, linear_step, monadic_project,
                            refine_transform, shallow_resolvent, shallow_step)
from .clauses import (ConstrainedClause, classify, condense, make_clause,
                      subsumes, variant)
from .constraints import (BOTTOM, TOP, Constraint, dismatch,
                          enumerate_solutions, is_solvable, normalize)
from .oracle import check, expand, sat
from .ordering import Cmp, OrderingConfig, compare
from .problem import Disequation, ProblemError, ProblemFile, parse, render
from .refinement import (ConflictingCore, Conflict, FOARConfig, FOARResult,
                         Lifted, extract_core, fo_ar_solve, lift,
                         plan_refinement, skeleton)
from .saturation import (Decision, Limits, NotMSLError, decide, factor,
                         model_eval, resolve, saturate, select)
from .signature import Signature
from .terms import App, Atom, Var, unify

__all__ = [
    "AncestorIndex", "App", "Approximation", "Atom", "BOTTOM", "Cmp", "Conflict",
    "ConflictingCore", "ConstrainedClause", "Constraint", "Decision",
    "Disequation", "FOARConfig", "FOARResult", "Lifted", "Limits",
    "NotMSLError", "OrderingConfig", "ProblemError", "ProblemFile", "Signature",
    "TOP", "TransformStep", "Var", "approximate", "check", "classify",
    "compare", "condense", "decide", "dismatch", "enumerate_solutions",
    "expand", "extract_core", "factor", "fo_ar_solve", "is_solvable", "lift",
    "linear_step", "make_clause", "model_eval", "monadic_project", "normalize",
    "parse", "plan_refinement", "refine_transform", "render", "resolve", "sat",
    "saturate", "select", "shallow_resolvent", "shallow_step", "skeleton",
    "subsumes", "unify", "variant",
]
