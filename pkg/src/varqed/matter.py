"""Tight-binding multi-level emitter.

The emitter is an ``N_a``-site chain with on-site potentials ``V_i`` and a
uniform hopping ``t``.  Its momentum operator is the antisymmetric
nearest-neighbour combination ``p = (-i/R) sum_i (|i><i+1| - |i+1><i|)``,
where the site length ``R`` is normally fixed by the Thomas-Reiche-Kuhn sum
rule so that the ground state saturates it exactly.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from .units import ELECTRON_MASS_EV, ELEMENTARY_CHARGE

__all__ = [
    "EmitterSpec",
    "MatterEigensystem",
    "MatterError",
    "build_matter_hamiltonian",
    "diagonalize_matter",
    "momentum_matrix",
    "trk_sum",
    "calibrate_site_length",
    "solve_matter",
]

DEGENERACY_RTOL = 1e-10


class MatterError(ValueError):
    """Raised for invalid emitter definitions or ill-posed sum rules."""


@dataclass(frozen=True)
class EmitterSpec:
    """Definition of the tight-binding emitter.

    Parameters
    ----------
    n_levels : int
        Number of sites (and levels), at least 2.
    site_potentials : sequence of float, optional
        One on-site potential per site in eV.  A shorter sequence is padded
        with zeros, so the usual ``N_a - 1`` potentials leave the last site
        at zero.
    hopping : float
        Nearest-neighbour hopping ``t`` in eV, nonzero.
    site_length : float or "auto"
        ``R`` in 1/eV, or ``"auto"`` to fix it by the TRK sum rule.
    mass : float
        Particle mass as a rest energy in eV.
    charge : float
        Charge in natural units (the electron has ``ELEMENTARY_CHARGE``).
    """

    n_levels: int
    site_potentials: tuple = ()
    hopping: float = -1.0
    site_length: object = "auto"
    mass: float = ELECTRON_MASS_EV
    charge: float = ELEMENTARY_CHARGE

    def __post_init__(self):
        if int(self.n_levels) != self.n_levels or self.n_levels < 2:
            raise MatterError(f"n_levels must be an integer >= 2, got {self.n_levels!r}")
        pots = tuple(float(v) for v in self.site_potentials)
        if len(pots) > self.n_levels:
            raise MatterError(
                f"got {len(pots)} site potentials for {self.n_levels} sites"
            )
        pots = pots + (0.0,) * (self.n_levels - len(pots))
        object.__setattr__(self, "n_levels", int(self.n_levels))
        object.__setattr__(self, "site_potentials", pots)
        if not np.isfinite(self.hopping) or self.hopping == 0:
            raise MatterError("hopping must be finite and nonzero")
        if not self.mass > 0:
            raise MatterError("mass must be positive")
        if self.site_length != "auto":
            if not (isinstance(self.site_length, (int, float)) and self.site_length > 0):
                raise MatterError(f"site_length must be 'auto' or > 0, got {self.site_length!r}")
            object.__setattr__(self, "site_length", float(self.site_length))

    @property
    def auto_length(self):
        return self.site_length == "auto"

    def with_charge(self, charge):
        return replace(self, charge=float(charge))


@dataclass(frozen=True)
class MatterEigensystem:
    """Diagonalized emitter: levels, eigenvectors and momentum elements.

    ``momentum[a, b] = <a|p|b>`` in the energy eigenbasis.  It is Hermitian,
    purely imaginary and has a zero diagonal.
    """

    energies: np.ndarray
    vectors: np.ndarray
    momentum: np.ndarray
    site_length: float
    mass: float
    charge: float = ELEMENTARY_CHARGE
    spec: EmitterSpec = field(default=None, compare=False, repr=False)

    @property
    def n_levels(self):
        return len(self.energies)

    def trk_sum(self, ground=0):
        return trk_sum(self.energies, self.momentum, self.mass, ground)


def build_matter_hamiltonian(spec):
    n = spec.n_levels
    H = np.diag(np.asarray(spec.site_potentials, dtype=float))
    idx = np.arange(n - 1)
    H[idx, idx + 1] = spec.hopping
    H[idx + 1, idx] = spec.hopping
    return H


def diagonalize_matter(H):
    """Dense symmetric eigensolve with a reproducible sign convention.

    Each eigenvector is flipped so that its largest-magnitude component is
    positive (the first one, when several tie to 1e-8 relative).

    Returns
    -------
    energies : (N,) ndarray
        Ascending eigenvalues.
    vectors : (N, N) ndarray
        Orthonormal eigenvectors in columns.
    """
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise MatterError(f"expected a square matrix, got shape {H.shape}")
    if not np.allclose(H, H.T, rtol=0, atol=1e-14 * max(1.0, np.abs(H).max())):
        raise MatterError("matter Hamiltonian is not symmetric")
    try:
        energies, vectors = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise MatterError(f"eigensolver failed to converge: {exc}") from exc
    for k in range(vectors.shape[1]):
        col = vectors[:, k]
        mag = np.abs(col)
        lead = np.flatnonzero(mag >= mag.max() * (1 - 1e-8))[0]
        if col[lead] < 0:
            vectors[:, k] = -col
    return energies, vectors


def momentum_matrix(vectors, site_length):
    """Momentum operator in the energy eigenbasis, ``V^T p_site V``."""
    n = vectors.shape[0]
    hop = np.zeros((n, n))
    idx = np.arange(n - 1)
    hop[idx, idx + 1] = 1.0
    hop[idx + 1, idx] = -1.0
    # p_site = (-i/R) * hop; real eigenvectors keep the result purely imaginary
    a = vectors.T @ hop @ vectors
    # exact antisymmetry, so p is exactly Hermitian with a zero diagonal
    a = 0.5 * (a - a.T)
    return (-1j / site_length) * a


def trk_sum(energies, momentum, mass, ground=0):
    """Thomas-Reiche-Kuhn sum ``(2/m) sum_{i != g} |p_ig|^2 / (E_i - E_g)``."""
    energies = np.asarray(energies, dtype=float)
    gaps = energies - energies[ground]
    scale = np.abs(energies).max()
    others = np.arange(len(energies)) != ground
    if np.any(np.abs(gaps[others]) < DEGENERACY_RTOL * scale):
        raise MatterError(f"level {ground} is degenerate; the TRK sum is undefined")
    weights = np.abs(momentum[others, ground]) ** 2
    return float(2.0 / mass * np.sum(weights / gaps[others]))


def calibrate_site_length(spec, ground=0):
    """Site length ``R`` for which the TRK sum equals one.

    The sum scales as ``1/R^2``, so a single evaluation at ``R = 1`` fixes it.
    """
    energies, vectors = diagonalize_matter(build_matter_hamiltonian(spec))
    s = trk_sum(energies, momentum_matrix(vectors, 1.0), spec.mass, ground)
    if not s > 0:
        raise MatterError(f"TRK sum at reference length is {s:g}; cannot calibrate")
    return float(np.sqrt(s))


def solve_matter(spec):
    """Diagonalize the emitter and attach momentum elements.

    ``site_length="auto"`` triggers TRK calibration; an explicit value is
    used as given.
    """
    energies, vectors = diagonalize_matter(build_matter_hamiltonian(spec))
    if spec.auto_length:
        s = trk_sum(energies, momentum_matrix(vectors, 1.0), spec.mass)
        if not s > 0:
            raise MatterError(f"TRK sum at reference length is {s:g}; cannot calibrate")
        R = float(np.sqrt(s))
    else:
        R = spec.site_length
    return MatterEigensystem(
        energies=energies,
        vectors=vectors,
        momentum=momentum_matrix(vectors, R),
        site_length=R,
        mass=spec.mass,
        charge=spec.charge,
        spec=spec,
    )
