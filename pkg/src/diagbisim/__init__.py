"""Bisimilarity and path-logic model checking for finitary diagrams over the rationals."""

from .bisim import check_bisimilar, iter_branches, vector_kernel
from .diagram import (
    BisimWitness,
    FinitaryDiagram,
    FinitePoset,
    Triple,
    load_diagram,
    load_witness,
    verify_bisimulation,
)
from .encodings import Lts, encode_lts, load_lts, lts_bisimilar, word_kernel
from .etim import (
    Auto,
    Deterministic,
    EtimFormula,
    Randomized,
    assemble,
    decide,
    export_smt,
    load_etim,
    prune_unused,
)
from .logic import format_formula, is_positive, model_check_positive, parse_formula
from .matrix import RatMatrix, det, matmul, nullspace, rank

__version__ = "0.1.0"
