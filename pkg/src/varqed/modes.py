"""Plasma-screened modes of a one-dimensional cavity with a point emitter.

In the dipole approximation the emitter enters the photon wave equation as a
delta-function plasma term at ``z = d``::

    F'' + omega^2 F = lam * delta(z - d) F,     F(0) = F(L) = 0

so the profile is a sine on each side of the emitter, continuous at ``d``
with a derivative jump ``lam * F(d)``.  The allowed frequencies are the roots
of ``cot(omega d) + cot(omega (L - d)) + lam / omega``.  Natural units
(c = 1) throughout.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .units import coupling_constant

__all__ = [
    "CavityGeometry",
    "InteractingModeSet",
    "ModeError",
    "bare_mode",
    "mode_residual",
    "solve_frequencies",
    "interacting_profile",
    "gram_matrix",
    "verify_orthonormality",
]

POLE_EPS = 1e-14
MERGE_RTOL = 1e-12


class ModeError(ValueError):
    pass


@dataclass(frozen=True)
class CavityGeometry:
    """Cavity of length ``L`` with the emitter at ``0 < d < L``.

    ``coupling`` is ``lam = q^2 / (m eps0 S)`` in eV^3; use
    :meth:`from_charge` to build it from charge, mass and cross-section.
    """

    length: float
    emitter_position: float
    coupling: float = 0.0
    area: float = 1.0

    def __post_init__(self):
        if not self.length > 0:
            raise ModeError("cavity length must be positive")
        if not 0 < self.emitter_position < self.length:
            raise ModeError(
                f"emitter_position must lie strictly inside (0, {self.length}), "
                f"got {self.emitter_position}"
            )
        if not self.area > 0:
            raise ModeError("area must be positive")
        if not (np.isfinite(self.coupling) and self.coupling >= 0):
            raise ModeError("coupling must be finite and non-negative")

    @classmethod
    def from_charge(cls, length, emitter_position, area, charge, mass):
        return cls(length, emitter_position, coupling_constant(charge, mass, area), area)

    def with_coupling(self, coupling):
        return CavityGeometry(self.length, self.emitter_position, coupling, self.area)

    def bare_omegas(self, n_modes):
        return np.arange(1, n_modes + 1) * np.pi / self.length


def bare_mode(cavity, n):
    """Frequency and profile of the ``n``-th (1-based) empty-cavity mode."""
    if n < 1:
        raise ModeError("mode number must be >= 1")
    L = cavity.length
    k = n * np.pi / L
    norm = np.sqrt(2.0 / L)

    def profile(z):
        return norm * np.sin(k * np.asarray(z, dtype=float))

    return k, profile


def mode_residual(cavity, omega):
    """``cot(omega d) + cot(omega (L - d)) + lam / omega``.

    Returns ``nan`` where either sine falls below 1e-14 (at a pole).
    """
    omega = np.asarray(omega, dtype=float)
    d = cavity.emitter_position
    sl = np.sin(omega * d)
    sr = np.sin(omega * (cavity.length - d))
    with np.errstate(divide="ignore", invalid="ignore"):
        res = np.cos(omega * d) / sl + np.cos(omega * (cavity.length - d)) / sr
        res = res + cavity.coupling / omega
    at_pole = (np.abs(sl) < POLE_EPS) | (np.abs(sr) < POLE_EPS)
    res = np.where(at_pole, np.nan, res)
    return res if res.ndim else float(res)


@dataclass(frozen=True, eq=False)
class InteractingModeSet:
    """Lowest ``M`` interacting modes.

    Profiles are stored through per-mode branch constants: on the left of the
    emitter ``F = left * sin(omega z)``, on the right
    ``F = right * sin(omega (L - z))``.  Decoupled modes (node at the
    emitter) keep their bare frequency and profile.
    """

    cavity: CavityGeometry
    omegas: np.ndarray
    bare_omegas: np.ndarray
    left: np.ndarray
    right: np.ndarray
    decoupled: np.ndarray

    @property
    def n_modes(self):
        return len(self.omegas)

    def profile(self, i, z):
        """Profile of mode ``i`` (0-based) at positions ``z``."""
        return interacting_profile(self, i, z)

    @cached_property
    def at_emitter(self):
        """``F_i(d)`` for every mode."""
        d = self.cavity.emitter_position
        vals = self.left * np.sin(self.omegas * d)
        vals[self.decoupled] = 0.0
        return vals

    @cached_property
    def bare_at_emitter(self):
        """``F_i^0(d)`` of the empty cavity for every mode."""
        L = self.cavity.length
        return np.sqrt(2.0 / L) * np.sin(self.bare_omegas * self.cavity.emitter_position)

    def suppression(self, i=0):
        """``|F_i(d)| / |F_i^0(d)|``; nan when the bare mode has a node at d."""
        bare = abs(self.bare_at_emitter[i])
        if bare < 1e-300:
            return float("nan")
        return float(abs(self.at_emitter[i]) / bare)


def _poles(cavity, bound):
    d = cavity.emitter_position
    rest = cavity.length - d
    k_left = np.arange(1, int(bound * d / np.pi) + 2)
    k_right = np.arange(1, int(bound * rest / np.pi) + 2)
    poles = np.concatenate([k_left * np.pi / d, k_right * np.pi / rest])
    order = np.argsort(poles, kind="stable")
    poles = poles[order]
    is_left = np.concatenate([np.ones(len(k_left), bool), np.zeros(len(k_right), bool)])[order]
    # poles of the two families closer than MERGE_RTOL host a decoupled mode
    merged = []
    coincident = []
    i = 0
    while i < len(poles):
        if (
            i + 1 < len(poles)
            and is_left[i] != is_left[i + 1]
            and poles[i + 1] - poles[i] <= MERGE_RTOL * poles[i + 1]
        ):
            merged.append(poles[i])
            coincident.append(True)
            i += 2
        else:
            merged.append(poles[i])
            coincident.append(False)
            i += 1
    return np.array(merged), np.array(coincident, dtype=bool)


def _bisect(cavity, lo, hi):
    """Vectorised bisection of the residual on open pole intervals.

    The residual falls monotonically from +inf to -inf on every interval,
    so its sign alone decides which half keeps the root.
    """
    d = cavity.emitter_position
    rest = cavity.length - d
    lam = cavity.coupling
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.all((mid == lo) | (mid == hi)):
            break
        r = np.cos(mid * d) / np.sin(mid * d) + np.cos(mid * rest) / np.sin(mid * rest) + lam / mid
        go_right = r > 0
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    return 0.5 * (lo + hi)


def solve_frequencies(cavity, n_modes, max_tries=20):
    """Lowest ``n_modes`` interacting frequencies and profile constants.

    Every inter-pole interval of the residual holds exactly one root, found
    by bisection to machine precision.  Coincident poles of the two
    cotangents (rational ``d/L``) carry a decoupled mode pinned to the bare
    frequency.
    """
    if n_modes < 1:
        raise ModeError("need at least one mode")
    L = cavity.length
    d = cavity.emitter_position
    bare = cavity.bare_omegas(n_modes)
    if cavity.coupling == 0.0:
        omegas = bare.copy()
        decoupled = np.abs(np.sin(bare * d)) < 1e-12
    else:
        bound = (n_modes + 2) * np.pi / L
        for _ in range(max_tries):
            poles, coincident = _poles(cavity, bound)
            poles = poles[poles <= bound]
            coincident = coincident[: len(poles)]
            edges = np.concatenate([[0.0], poles])
            roots = _bisect(cavity, edges[:-1], edges[1:])
            n_here = np.rint(poles[coincident] * L / np.pi)
            pinned = n_here * np.pi / L
            omegas = np.concatenate([roots, pinned])
            decoupled = np.concatenate(
                [np.zeros(len(roots), bool), np.ones(len(pinned), bool)]
            )
            if len(omegas) >= n_modes:
                break
            bound *= 1.5
        else:
            raise ModeError(f"found only {len(omegas)} of {n_modes} modes below {bound:g}")
        order = np.argsort(omegas, kind="stable")[:n_modes]
        omegas = omegas[order]
        decoupled = decoupled[order]

    left = np.empty(n_modes)
    right = np.empty(n_modes)
    for i, (w, dec) in enumerate(zip(omegas, decoupled)):
        if dec or cavity.coupling == 0.0:
            left[i] = right[i] = np.sqrt(2.0 / L)
            # bare profile written as right * sin(w (L - z)) picks up (-1)^(n+1)
            n = i + 1 if not dec else int(round(w * L / np.pi))
            right[i] *= (-1) ** (n + 1)
            continue
        sl = np.sin(w * d)
        sr = np.sin(w * (L - d))
        if abs(sr) < POLE_EPS or abs(sl) < POLE_EPS:
            raise ModeError(f"mode {i} sits on a pole at omega={w!r}; degenerate geometry")
        int_left = d / 2 - np.sin(2 * w * d) / (4 * w)
        int_right = (L - d) / 2 - np.sin(2 * w * (L - d)) / (4 * w)
        norm = 1.0 / np.sqrt(sr * sr * int_left + sl * sl * int_right)
        sign = 1.0 if sr > 0 else -1.0
        left[i] = sign * norm * sr
        right[i] = sign * norm * sl
    return InteractingModeSet(
        cavity=cavity,
        omegas=omegas,
        bare_omegas=bare,
        left=left,
        right=right,
        decoupled=np.asarray(decoupled, dtype=bool),
    )


def interacting_profile(mode_set, i, z):
    """Normalized interacting profile ``F_i(z)`` for ``0 <= z <= L``."""
    z = np.asarray(z, dtype=float)
    L = mode_set.cavity.length
    d = mode_set.cavity.emitter_position
    w = mode_set.omegas[i]
    if np.any((z < 0) | (z > L)):
        raise ModeError("z outside the cavity")
    out = np.where(
        z <= d,
        mode_set.left[i] * np.sin(w * z),
        mode_set.right[i] * np.sin(w * (L - z)),
    )
    return out if out.ndim else float(out)


def _gl_nodes(mode_set, panels_per_halfwave, n_points):
    """Composite Gauss-Legendre nodes on [0, d] and [d, L]."""
    x, wts = np.polynomial.legendre.leggauss(n_points)
    L = mode_set.cavity.length
    d = mode_set.cavity.emitter_position
    kmax = mode_set.omegas.max()
    nodes, weights = [], []
    for a, b in ((0.0, d), (d, L)):
        halfwaves = max(1, int(np.ceil(kmax * (b - a) / np.pi)))
        n_pan = halfwaves * panels_per_halfwave
        edges = np.linspace(a, b, n_pan + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        nodes.append((mid[:, None] + half[:, None] * x[None, :]).ravel())
        weights.append((half[:, None] * wts[None, :]).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def gram_matrix(mode_set, panels_per_halfwave=1, n_points=64):
    z, w = _gl_nodes(mode_set, panels_per_halfwave, n_points)
    F = np.array([mode_set.profile(i, z) for i in range(mode_set.n_modes)])
    return (F * w) @ F.T


def verify_orthonormality(mode_set, n_points=64, tol=1e-8, max_doublings=6):
    """Max ``|G - I|`` of the profile Gram matrix.

    Panels are split at the emitter (the profile has a kink there) and
    doubled until two successive Gram matrices agree to ``tol``.
    """
    panels = 1
    G = gram_matrix(mode_set, panels, n_points)
    for _ in range(max_doublings):
        panels *= 2
        G2 = gram_matrix(mode_set, panels, n_points)
        change = np.abs(G2 - G).max()
        G = G2
        if change <= tol:
            break
    return float(np.abs(G - np.eye(mode_set.n_modes)).max())
