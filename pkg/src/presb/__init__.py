"""Exact calculus for Presburger-definable subsets of Z^m.

Quantifier elimination and decision procedures, cell decomposition, dimension,
rectilinearisation and classification up to definable bijection, elimination
of imaginaries, and brute-force box oracles that independently verify every
symbolic claim.  All values are immutable; all operations are pure.
"""

from .cells import (
    BandCoord,
    Cell,
    CellDecomposition,
    EqCoord,
    apply_linear,
    cell_to_formula,
    classify_fiber,
    decompose,
    decompose_function,
    project_to_full_cell,
)
from .classify import are_isomorphic, classify
from .dimension import dimension, growth_dimension_estimate
from .errors import (
    ArityError,
    DomainError,
    EmptyOrFiniteError,
    EvaluationError,
    NotABijectionError,
    ParseError,
    PieceLimitError,
    PresbError,
    UnsatisfiableError,
)
from .imaginaries import FiberCode, FiberCodeFamily, elim_imaginaries_code, fibers_equal, lhd_less, lhd_min
from .linear import DivTerm, LinearFunction
from .maps import BijectionCertificate, Piece, PiecewiseLinearMap, compose, invert, is_bijection_onto
from .oracle import check_bijection_on_box, check_partition, count_box, enumerate_box
from .parser import parse, render
from .qe import decide_sentence, eliminate_quantifiers, equivalent, satisfiable, simplify
from .recti import RectPiece, rectilinearize
from .syntax import Formula, LinearTerm, evaluate, free_variables, normalize, substitute

__all__ = [
    "ArityError",
    "BandCoord",
    "BijectionCertificate",
    "Cell",
    "CellDecomposition",
    "DivTerm",
    "DomainError",
    "EmptyOrFiniteError",
    "EqCoord",
    "EvaluationError",
    "FiberCode",
    "FiberCodeFamily",
    "Formula",
    "LinearFunction",
    "LinearTerm",
    "NotABijectionError",
    "ParseError",
    "Piece",
    "PieceLimitError",
    "PiecewiseLinearMap",
    "PresbError",
    "RectPiece",
    "UnsatisfiableError",
    "apply_linear",
    "are_isomorphic",
    "cell_to_formula",
    "check_bijection_on_box",
    "check_partition",
    "classify",
    "classify_fiber",
    "compose",
    "count_box",
    "decide_sentence",
    "decompose",
    "decompose_function",
    "dimension",
    "elim_imaginaries_code",
    "eliminate_quantifiers",
    "enumerate_box",
    "equivalent",
    "evaluate",
    "fibers_equal",
    "free_variables",
    "growth_dimension_estimate",
    "invert",
    "is_bijection_onto",
    "lhd_less",
    "lhd_min",
    "normalize",
    "parse",
    "project_to_full_cell",
    "rectilinearize",
    "render",
    "satisfiable",
    "simplify",
    "substitute",
]
