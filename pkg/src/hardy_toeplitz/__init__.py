"""Toeplitz operators on H^2 with symbol p(1/z) + phi(z): spectra, explicit
eigenvectors and resolvents, and three-valued hypercyclicity decisions."""

from __future__ import annotations

__version__ = "0.1.0"

from .eigensystem import (
    AdjointEigenData,
    BranchComponents,
    RationalEigenvector,
    ResolventSolution,
    adjoint_overvalence_eigenvector,
    branch_decomposition,
    eigenvector,
    fit_branch_components,
    resolvent_solve,
)
from .errors import (
    CapError,
    DomainError,
    HardyToeplitzError,
    LeadingCoefficientError,
    PreconditionError,
    RootFindingError,
    SymbolError,
)
from .hypercyclicity import Status, Verdict, decide, gs_completeness_residual, shkarin_oracle
from .polyroots import count_in_disc, roots, winding_count
from .symbol import (
    Symbol,
    TaylorVector,
    apply_symbol_series,
    eval_symbol,
    fourier_coefficient,
    load_symbol,
    psi_polynomial,
)
from .truncation import ToeplitzTruncation, cauchy_kernel_vector, orbit_witness_shift
from .valence import (
    SamplingPolicy,
    SpectralClass,
    classify_lambda,
    closed_disc_exact_valence,
    condition_witnesses,
    spectral_portrait,
    valence_at,
    valence_scan,
)
