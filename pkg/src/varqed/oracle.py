"""Exact diagonalization of the dipole cavity Hamiltonian in a truncated Fock space.

The Hamiltonian, in the bare cavity modes and measured from the bare photon
vacuum, is::

    H = sum_a E_a |a><a| + sum_i w_i n_i + sqrt(lam/m) X p + (lam/2) P X^2 P

with ``X = sum_i h_i (a_i + a_i^dag)`` and ``h_i = F_i^0(d) / sqrt(2 w_i)``
the vector potential at the emitter per unit ``1/sqrt(S)``.  ``P`` is the
projector onto the truncated basis, i.e. matrix elements of the quadratic
term that leave the truncation are dropped.
"""
from dataclasses import dataclass
import logging

import numpy as np
import scipy.sparse as sp

from . import kernels
from .fock import enumerate_basis

__all__ = [
    "HamiltonianApply",
    "ConvergenceError",
    "build_operator",
    "dense_hamiltonian",
    "lowest_eigenvalues",
    "zero_point_convention",
    "oracle_spectrum",
]

log = logging.getLogger(__name__)


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class HamiltonianApply:
    """Precomputed data for applying the truncated Hamiltonian."""

    basis: object
    matter_energies: np.ndarray
    momentum: np.ndarray
    bare_omegas: np.ndarray
    amplitudes: np.ndarray
    coupling: float
    mass: float
    diagonal: np.ndarray
    threads: int = 1
    backend: str = kernels.BACKEND

    @property
    def size(self):
        return self.basis.size

    @property
    def linear_coefficient(self):
        return float(np.sqrt(self.coupling / self.mass))

    @property
    def quadratic_coefficient(self):
        return 0.5 * self.coupling

    def pair_coefficients(self):
        """``(lam/2) h_i h_j``, the quadratic-term weight of each mode pair."""
        return self.quadratic_coefficient * np.outer(self.amplitudes, self.amplitudes)

    def apply(self, v):
        """``H v`` for a flat vector or an ``(N, k)`` block of vectors."""
        v = np.asarray(v)
        single = v.ndim == 1
        block = v[:, None] if single else v
        fn = kernels.BACKENDS[self.backend]
        out = np.empty(block.shape, dtype=np.complex128)
        D, Na = self.basis.n_occupations, self.basis.n_matter
        for k in range(block.shape[1]):
            out[:, k] = fn(
                block[:, k].reshape(D, Na).astype(np.complex128, copy=False),
                self.diagonal,
                self.basis.raise_index,
                self.basis.lower_index,
                self.basis.occupations,
                self.amplitudes,
                self.momentum,
                self.linear_coefficient,
                self.quadratic_coefficient,
                self.threads,
            ).ravel()
        return out[:, 0] if single else out

    __call__ = apply


def build_operator(eigensystem, cavity, n_modes, max_photons, truncation="total",
                   threads=1, backend=None, max_states=None):
    """Assemble :class:`HamiltonianApply` for the given emitter and cavity."""
    kwargs = {} if max_states is None else {"max_states": max_states}
    basis = enumerate_basis(eigensystem.n_levels, n_modes, max_photons, truncation, **kwargs)
    L = cavity.length
    omegas = cavity.bare_omegas(n_modes)
    amps = np.sqrt(2.0 / L) * np.sin(omegas * cavity.emitter_position) / np.sqrt(2.0 * omegas)
    lam = cavity.coupling
    # normal ordering of X^2 leaves the constant sum_i h_i^2
    const = 0.5 * lam * float(np.sum(amps**2))
    diag = (
        basis.photon_energies(omegas)[:, None]
        + np.asarray(eigensystem.energies)[None, :]
        + const
    )
    return HamiltonianApply(
        basis=basis,
        matter_energies=np.asarray(eigensystem.energies, dtype=float),
        momentum=np.asarray(eigensystem.momentum, dtype=np.complex128),
        bare_omegas=omegas,
        amplitudes=amps,
        coupling=lam,
        mass=eigensystem.mass,
        diagonal=diag,
        threads=threads,
        backend=backend or kernels.BACKEND,
    )


def _ladder_matrices(occ, lookup, n_modes):
    """Sparse annihilation operators on an enumerated occupation set."""
    D = len(occ)
    ops = []
    for i in range(n_modes):
        rows, cols, vals = [], [], []
        for k, row in enumerate(occ):
            if row[i] > 0:
                lowered = list(row)
                lowered[i] -= 1
                rows.append(lookup[tuple(lowered)])
                cols.append(k)
                vals.append(np.sqrt(row[i]))
        ops.append(sp.csr_matrix((vals, (rows, cols)), shape=(D, D)))
    return ops


def dense_hamiltonian(op, sparse=False):
    """Explicit matrix of the truncated Hamiltonian.

    Built independently of the ladder tables: the field operator ``X`` is
    assembled as a sparse matrix on the basis plus every state one photon
    above it, squared there, and only then projected, which realises
    ``P X^2 P`` without normal ordering.  Works for either truncation since
    both bases are closed under lowering.  ``sparse=True`` returns a CSR
    matrix instead of a dense array.
    """
    basis = op.basis
    M, Na = basis.n_modes, basis.n_matter
    inner = [tuple(int(x) for x in row) for row in basis.occupations]
    occ = list(inner)
    lookup = {row: k for k, row in enumerate(occ)}
    for row in inner:
        for i in range(M):
            up = row[:i] + (row[i] + 1,) + row[i + 1:]
            if up not in lookup:
                lookup[up] = len(occ)
                occ.append(up)
    ann = _ladder_matrices(occ, lookup, M)
    X = sum(h * (a + a.T) for h, a in zip(op.amplitudes, ann)).tocsr()
    keep = np.arange(len(inner))
    X_small = X[keep][:, keep]
    X2_small = (X @ X).tocsr()[keep][:, keep]
    photon = sp.diags(basis.occupations.astype(float) @ op.bare_omegas)
    eye_m = sp.identity(Na)
    H = sp.kron(photon, eye_m) + sp.kron(sp.identity(len(keep)), sp.diags(op.matter_energies))
    H = H.astype(np.complex128)
    H = H + op.linear_coefficient * sp.kron(X_small, sp.csr_matrix(op.momentum))
    H = H + op.quadratic_coefficient * sp.kron(X2_small, eye_m)
    H = H.tocsr()
    return H if sparse else H.toarray()


def _orthonormalize(block, basis_vectors=None, drop=1e-8):
    """Orthonormal directions of ``block`` outside ``span(basis_vectors)``.

    Columns are scaled to unit norm first; a direction whose remainder after
    two projection passes is below ``drop`` is discarded.
    """
    norms = np.linalg.norm(block, axis=0)
    block = block[:, norms > 0] / norms[norms > 0]
    for _ in range(2):
        if basis_vectors is not None and basis_vectors.shape[1]:
            block = block - basis_vectors @ (basis_vectors.conj().T @ block)
    q, r = np.linalg.qr(block)
    q = q[:, np.abs(np.diag(r)) > drop]
    if basis_vectors is not None and basis_vectors.shape[1] and q.shape[1]:
        q = q - basis_vectors @ (basis_vectors.conj().T @ q)
        q, _ = np.linalg.qr(q)
    return q


def lowest_eigenvalues(op, k=5, tol=1e-10, seed=1234, max_dim=None, max_iter=500,
                       return_vectors=False, block_size=None):
    """``k`` lowest eigenvalues by thick-restart block Lanczos.

    The Krylov basis is kept fully orthogonal (two Gram-Schmidt passes per
    block).  Converged means every residual ``|H v - E v|`` is at most
    ``tol * max(|E|, 1)``; residuals are computed explicitly from stored
    ``H V`` products, not from recurrence estimates.  The start block is
    drawn from ``numpy.random.default_rng(seed)``.

    Raises
    ------
    ConvergenceError
        If the residuals are not met within ``max_iter`` block steps.
    """
    n = op.size
    apply = op.apply if hasattr(op, "apply") else op
    k = min(k, n)
    if n <= 400:
        H = apply(np.eye(n, dtype=np.complex128))
        H = 0.5 * (H + H.conj().T)
        vals, vecs = np.linalg.eigh(H)
        return (vals[:k], vecs[:, :k]) if return_vectors else vals[:k]

    b = block_size or min(n, k + 2)
    max_dim = max_dim or min(n, max(6 * b + 2 * k, 60))
    rng = np.random.default_rng(seed)
    start = rng.standard_normal((n, b)) + 1j * rng.standard_normal((n, b))
    V = _orthonormalize(start)
    W = apply(V)
    residual = np.inf
    for it in range(max_iter):
        T = V.conj().T @ W
        T = 0.5 * (T + T.conj().T)
        theta, S = np.linalg.eigh(T)
        Y = V @ S[:, :k]
        HY = W @ S[:, :k]
        R = HY - Y * theta[:k]
        res = np.linalg.norm(R, axis=0)
        residual = res / np.maximum(np.abs(theta[:k]), 1.0)
        if np.all(residual <= tol):
            log.debug("block Lanczos converged after %d steps, dim %d", it, V.shape[1])
            return (theta[:k], Y) if return_vectors else theta[:k]
        # residuals of the lowest Ritz vectors extend the Krylov space
        m = min(b, S.shape[1])
        new = W @ S[:, :m] - (V @ S[:, :m]) * theta[:m]
        if V.shape[1] + b > max_dim:
            keep = max(k + b, max_dim // 2)
            V = V @ S[:, :keep]
            W = W @ S[:, :keep]
        new = _orthonormalize(new, V)
        if new.shape[1] == 0:
            # Krylov space exhausted: current Ritz values are exact
            return (theta[:k], Y) if return_vectors else theta[:k]
        V = np.hstack([V, new])
        W = np.hstack([W, apply(new)])
    raise ConvergenceError(
        f"block Lanczos did not converge in {max_iter} steps; "
        f"relative residuals {np.array2string(residual, precision=2)}"
    )


def zero_point_convention(op_or_omegas):
    """``(1/2) sum_i w_i^0`` over the oracle's bare modes.

    Oracle eigenvalues are measured from the bare photon vacuum, as are the
    variational totals; adding this constant gives absolute energies that
    include the bare zero-point sum.
    """
    omegas = getattr(op_or_omegas, "bare_omegas", op_or_omegas)
    return 0.5 * float(np.sum(omegas))


def oracle_spectrum(eigensystem, cavity, n_modes, max_photons, k=5, tol=1e-10,
                    truncation="total", seed=1234, threads=1):
    """Convenience: build the operator and return its ``k`` lowest levels."""
    op = build_operator(eigensystem, cavity, n_modes, max_photons, truncation, threads)
    return lowest_eigenvalues(op, k=k, tol=tol, seed=seed)
