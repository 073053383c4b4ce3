"""Variational quasiparticle energies of a multi-level emitter in a 1D cavity.

The emitter couples to the cavity through both the ``A.p`` and ``A^2``
terms.  The ``A^2`` term is treated exactly by screening the cavity modes,
the ``A.p`` term to second order with the screened modes, and an exact
diagonalization in a truncated Fock space serves as the reference.
"""
from .config import ConfigError, ScenarioConfig, bundled_scenarios, load_config
from .energies import (
    EnergyBreakdown,
    ResonanceError,
    bare_pt_energy,
    casimir_energy,
    correlation_shift,
    spectrum,
    variational_energy,
)
from .fock import BasisTooLarge, FockBasis, basis_size, enumerate_basis
from .kernels import BACKEND
from .matter import (
    EmitterSpec,
    MatterEigensystem,
    MatterError,
    build_matter_hamiltonian,
    calibrate_site_length,
    diagonalize_matter,
    momentum_matrix,
    solve_matter,
    trk_sum,
)
from .modes import (
    CavityGeometry,
    InteractingModeSet,
    ModeError,
    bare_mode,
    gram_matrix,
    interacting_profile,
    mode_residual,
    solve_frequencies,
    verify_orthonormality,
)
from .oracle import (
    ConvergenceError,
    HamiltonianApply,
    build_operator,
    dense_hamiltonian,
    lowest_eigenvalues,
    oracle_spectrum,
    zero_point_convention,
)
from .report import emit_report
from .sweep import ComparisonReport, convergence_study, run_sweep, solve_point

__version__ = "0.1.0"
