"""Proof kernel for arithmetic with a machine-premise omega rule, machine
arithmetization, and a dovetailed halting search."""

from .syntax import (
    Formula,
    Term,
    eval_bounded,
    numeral,
    parse_formula,
    print_formula,
    substitute,
)
from .kernel import Proof, ProofStep, Verdict, check_proof, pa_axioms
from .machines import CORPUS, MachineDesc, run
from .arithmetize import (
    halted_by_formula,
    halts_no_formula,
    halts_yes_formula,
    loops_formula,
)
from .omega import (
    OmegaProof,
    OmegaStep,
    OmegaVerdict,
    build_loops_certificate,
    check_omega_bounded,
    check_omega_proof,
)
from .dovetail import HOutcome, SearchBudget, bfs_search, halting_search

__version__ = "0.1.0"

__all__ = [
    "CORPUS",
    "Formula",
    "HOutcome",
    "MachineDesc",
    "OmegaProof",
    "OmegaStep",
    "OmegaVerdict",
    "Proof",
    "ProofStep",
    "SearchBudget",
    "Term",
    "Verdict",
    "bfs_search",
    "build_loops_certificate",
    "check_omega_bounded",
    "check_omega_proof",
    "check_proof",
    "eval_bounded",
    "halted_by_formula",
    "halting_search",
    "halts_no_formula",
    "halts_yes_formula",
    "loops_formula",
    "numeral",
    "pa_axioms",
    "parse_formula",
    "print_formula",
    "run",
    "substitute",
]
