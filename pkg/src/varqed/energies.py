"""Variational quasiparticle energies and the bare perturbation-theory baseline.

A quasiparticle state is a matter level ``a`` times an occupation of the
interacting photon modes.  Its energy is the bare level, plus the zero-point
shift of the screened modes (the single-emitter Casimir energy), plus the
occupied quasiparticle frequencies, plus the second-order shift of the
linear ``A.p`` coupling evaluated with the screened modes.  All energies
are in eV and measured from the bare photon vacuum.
"""
from dataclasses import dataclass, field
import itertools

import numpy as np

__all__ = [
    "EnergyBreakdown",
    "ResonanceError",
    "casimir_energy",
    "correlation_shift",
    "variational_energy",
    "bare_pt_energy",
    "spectrum",
    "normalize_occupations",
]

RESONANCE_ATOL = 1e-10


class ResonanceError(ArithmeticError):
    """An energy denominator of second-order perturbation theory vanished."""


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy of one state split into its parts.

    ``total`` is ``((bare_matter_energy + casimir_term) + photon_term) +
    correlation_term`` evaluated in that order.
    """

    matter_state: int
    occupations: tuple
    bare_matter_energy: float
    casimir_term: float
    photon_term: float
    correlation_term: float
    total: float
    mode_cutoff: int
    cutoff_sensitivity: float = float("nan")
    method: str = "variational"
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def label(self):
        occ = ",".join(f"{i + 1}^{n}" if n > 1 else f"{i + 1}" for i, n in self.occupations)
        return f"{self.matter_state}|{occ}" if occ else f"{self.matter_state}|vac"

    def as_dict(self):
        return {
            "method": self.method,
            "label": self.label,
            "matter_state": self.matter_state,
            "occupations": [list(x) for x in self.occupations],
            "bare_matter_energy": self.bare_matter_energy,
            "casimir_term": self.casimir_term,
            "photon_term": self.photon_term,
            "correlation_term": self.correlation_term,
            "total": self.total,
            "mode_cutoff": self.mode_cutoff,
            "cutoff_sensitivity": self.cutoff_sensitivity,
        }


def normalize_occupations(occupations, n_modes):
    """Canonical sparse form ``((mode, count), ...)`` sorted by mode.

    Accepts a mapping ``{mode: count}``, a sequence of ``(mode, count)``
    pairs, or a dense sequence of counts.  Modes are 0-based.
    """
    if occupations is None:
        return ()
    if isinstance(occupations, dict):
        pairs = occupations.items()
    else:
        occupations = list(occupations)
        if occupations and not isinstance(occupations[0], (tuple, list)):
            pairs = enumerate(occupations)
        else:
            pairs = occupations
    out = {}
    for i, n in pairs:
        i, n = int(i), int(n)
        if n < 0 or not 0 <= i < n_modes:
            raise ValueError(f"invalid occupation ({i}, {n}) for {n_modes} modes")
        if n:
            out[i] = out.get(i, 0) + n
    return tuple(sorted(out.items()))


def _dense(occupations, n_modes):
    n = np.zeros(n_modes)
    for i, k in occupations:
        n[i] = k
    return n


def casimir_energy(mode_set):
    """Half the summed frequency shift of the screened modes.

    Returns
    -------
    value : float
        ``(1/2) sum_n (w_n - w_n^0)`` over the mode set.
    tail : float
        First-order estimate of what modes ``M+1 .. 2M`` would add.  The
        sum grows logarithmically with the cutoff, so no infinite-cutoff
        tail is quoted.
    """
    value = 0.5 * float(np.sum(mode_set.omegas - mode_set.bare_omegas))
    cav = mode_set.cavity
    M = mode_set.n_modes
    n = np.arange(M + 1, 2 * M + 1)
    w0 = n * np.pi / cav.length
    # first-order shift dw_n = lam F_n^0(d)^2 / (2 w_n^0)
    f2 = 2.0 / cav.length * np.sin(w0 * cav.emitter_position) ** 2
    tail = 0.5 * float(np.sum(cav.coupling * f2 / (2.0 * w0)))
    return value, tail


def _second_order(energies, momentum, mass, coupling, omegas, f2, state, n, n_modes=None):
    """Second-order ``A.p`` shift of ``|a, n>`` with the given mode data.

    ``f2`` holds ``F_i(d)^2``.  Emission into mode ``i`` carries ``n_i + 1``
    and absorption ``n_i``.
    """
    if coupling == 0.0:
        return 0.0
    if n_modes is not None:
        omegas, f2, n = omegas[:n_modes], f2[:n_modes], n[:n_modes]
    dE = energies[state] - energies
    p2 = np.abs(momentum[:, state]) ** 2
    others = np.arange(len(energies)) != state
    dE, p2 = dE[others], p2[others]
    # parity-forbidden elements come out at roundoff level; make them exact zeros
    p2 = np.where(p2 <= 1e-20 * np.abs(momentum).max() ** 2, 0.0, p2)
    prefactor = coupling * f2 / (2.0 * mass * omegas)
    emit_den = dE[None, :] - omegas[:, None]
    absorb_den = dE[None, :] + omegas[:, None]
    active = (prefactor[:, None] != 0) & (p2[None, :] != 0)
    for den, weight, kind in ((emit_den, n[:, None] + 1, "emission"), (absorb_den, n[:, None], "absorption")):
        hit = active & (weight != 0) & (np.abs(den) < RESONANCE_ATOL)
        if np.any(hit):
            i, j = np.argwhere(hit)[0]
            b = int(np.flatnonzero(others)[j])
            raise ResonanceError(
                f"{kind} from level {state} to level {b} via mode {i + 1} is resonant "
                f"(denominator {den[i, j]:.3g} eV)"
            )
    # denominators that survive the check above are nonzero unless unused
    with np.errstate(divide="ignore", invalid="ignore"):
        emit = np.where(emit_den == 0, 0.0, (n[:, None] + 1) / emit_den)
        absorb = np.where(absorb_den == 0, 0.0, n[:, None] / absorb_den)
    terms = emit + absorb
    return float(np.sum(prefactor[:, None] * p2[None, :] * terms))


def correlation_shift(eigensystem, mode_set, state=0, occupations=(), n_modes=None):
    """Second-order ``A.p`` correction with the screened modes.

    For the photon vacuum this is
    ``sum_i sum_{b != a} lam F_i(d)^2 |p_ba|^2 / (2 m w_i (E_a - E_b - w_i))``.
    With quasiparticles present, emission into an occupied mode is enhanced
    by ``n_i + 1`` and absorption from it (``n_i``) adds terms with
    denominator ``E_a - E_b + w_i``.

    Raises
    ------
    ResonanceError
        If any contributing denominator is below 1e-10 eV.
    """
    occ = normalize_occupations(occupations, mode_set.n_modes)
    return _second_order(
        np.asarray(eigensystem.energies),
        eigensystem.momentum,
        eigensystem.mass,
        mode_set.cavity.coupling,
        mode_set.omegas,
        mode_set.at_emitter**2,
        state,
        _dense(occ, mode_set.n_modes),
        n_modes,
    )


def _assemble(method, state, occ, E0, cas, photon, corr, M, sensitivity):
    total = ((E0 + cas) + photon) + corr
    return EnergyBreakdown(
        matter_state=int(state),
        occupations=occ,
        bare_matter_energy=float(E0),
        casimir_term=float(cas),
        photon_term=float(photon),
        correlation_term=float(corr),
        total=float(total),
        mode_cutoff=int(M),
        cutoff_sensitivity=float(sensitivity),
        method=method,
    )


def _variational_parts(eigensystem, mode_set, state, occ, n_modes, correlation):
    omegas = mode_set.omegas[:n_modes]
    cas = 0.5 * float(np.sum(omegas - mode_set.bare_omegas[:n_modes]))
    photon = float(sum(k * mode_set.omegas[i] for i, k in occ))
    corr = correlation_shift(eigensystem, mode_set, state, occ, n_modes) if correlation else 0.0
    return cas, photon, corr


def variational_energy(eigensystem, mode_set, state=0, occupations=(), correlation=True):
    """Quasiparticle energy of ``|state, occupations>``.

    ``cutoff_sensitivity`` compares against the same state evaluated with
    the lowest ``M // 2`` modes.
    """
    if not 0 <= state < eigensystem.n_levels:
        raise IndexError(f"matter state {state} out of range")
    M = mode_set.n_modes
    occ = normalize_occupations(occupations, M)
    E0 = float(eigensystem.energies[state])
    cas, photon, corr = _variational_parts(eigensystem, mode_set, state, occ, M, correlation)
    total = ((E0 + cas) + photon) + corr
    sensitivity = float("nan")
    half = M // 2
    if half >= 1 and all(i < half for i, _ in occ):
        c2, p2, r2 = _variational_parts(eigensystem, mode_set, state, occ, half, correlation)
        sensitivity = abs(total - (((E0 + c2) + p2) + r2))
    return _assemble("variational", state, occ, E0, cas, photon, corr, M, sensitivity)


def _bare_parts(eigensystem, cavity, n_modes, state, occ):
    L = cavity.length
    w0 = cavity.bare_omegas(n_modes)
    f2 = 2.0 / L * np.sin(w0 * cavity.emitter_position) ** 2
    n = _dense(occ, n_modes)
    a2 = float(np.sum(cavity.coupling * f2 * (2.0 * n + 1.0) / (4.0 * w0)))
    photon = float(np.sum(n * w0))
    corr = _second_order(
        np.asarray(eigensystem.energies), eigensystem.momentum, eigensystem.mass,
        cavity.coupling, w0, f2, state, n,
    )
    return a2, photon, corr


def bare_pt_energy(eigensystem, cavity, n_modes, state=0, occupations=()):
    """Perturbation theory in the bare levels and bare cavity modes.

    First order in the ``A^2`` term, ``sum_i lam F_i^0(d)^2 (2 n_i + 1) /
    (4 w_i^0)``, plus second order in ``A.p`` with bare frequencies.  The
    ``A^2`` shift is reported in ``casimir_term`` so that rows line up with
    the variational breakdown.
    """
    occ = normalize_occupations(occupations, n_modes)
    E0 = float(eigensystem.energies[state])
    a2, photon, corr = _bare_parts(eigensystem, cavity, n_modes, state, occ)
    total = ((E0 + a2) + photon) + corr
    sensitivity = float("nan")
    half = n_modes // 2
    if half >= 1 and all(i < half for i, _ in occ):
        b = _bare_parts(eigensystem, cavity, half, state, occ)
        sensitivity = abs(total - (((E0 + b[0]) + b[1]) + b[2]))
    return _assemble("bare_pt", state, occ, E0, a2, photon, corr, n_modes, sensitivity)


def candidate_states(n_levels, n_modes, max_quanta=2, photon_modes=10):
    """Matter level times every occupation of at most ``max_quanta`` quanta."""
    modes = range(min(photon_modes, n_modes))
    occs = [()]
    for q in range(1, max_quanta + 1):
        for combo in itertools.combinations_with_replacement(modes, q):
            counts = {}
            for i in combo:
                counts[i] = counts.get(i, 0) + 1
            occs.append(tuple(sorted(counts.items())))
    return [(a, occ) for occ in occs for a in range(n_levels)]


def spectrum(eigensystem, mode_set, k=5, max_quanta=2, photon_modes=10, method="variational",
             correlation=True):
    """``k`` lowest quasiparticle levels, ascending.

    Candidates are every matter level with up to ``max_quanta`` photon
    quasiparticles in the lowest ``photon_modes`` modes.  ``method`` selects
    the variational energies or the bare perturbative baseline.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    M = mode_set.n_modes
    rows = []
    for a, occ in candidate_states(eigensystem.n_levels, M, max_quanta, photon_modes):
        if method == "variational":
            rows.append(variational_energy(eigensystem, mode_set, a, occ, correlation))
        elif method == "bare_pt":
            rows.append(bare_pt_energy(eigensystem, mode_set.cavity, M, a, occ))
        else:
            raise ValueError(f"unknown method {method!r}")
    rows.sort(key=lambda r: (r.total, r.matter_state, r.occupations))
    return rows[:k]

