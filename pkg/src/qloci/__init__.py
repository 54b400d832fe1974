"""Eigenvalue-free entanglement certificates from determinantal rank loci."""

__version__ = "0.1.0"

from .exact import (
    ExactMatrix,
    GaussianRational,
    dagger,
    det_exact,
    kron,
    minor_index_sets,
    rank_exact,
)
from .numeric import TolerancePolicy, eig_hermitian, numerical_rank, random_unitary
from .poly import (
    HomogPoly,
    LinearForm,
    SymbolicPencil,
    divide_linear,
    linear_factor_scan,
    sym_det,
    sym_minors,
)
from .states import (
    Cut,
    DensityMatrix,
    Ensemble,
    SpectraReport,
    block,
    from_ensemble,
    is_ppt,
    partial_trace,
    partial_transpose,
    spectra_report,
)

__all__ = [
    "ExactMatrix",
    "GaussianRational",
    "dagger",
    "det_exact",
    "kron",
    "minor_index_sets",
    "rank_exact",
    "TolerancePolicy",
    "eig_hermitian",
    "numerical_rank",
    "random_unitary",
    "HomogPoly",
    "LinearForm",
    "SymbolicPencil",
    "divide_linear",
    "linear_factor_scan",
    "sym_det",
    "sym_minors",
    "Cut",
    "DensityMatrix",
    "Ensemble",
    "SpectraReport",
    "block",
    "from_ensemble",
    "is_ppt",
    "partial_trace",
    "partial_transpose",
    "spectra_report",
]
