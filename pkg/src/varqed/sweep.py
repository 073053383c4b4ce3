"""Sweep orchestration, method comparison and cutoff convergence studies."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging
import time

import numpy as np

from .energies import spectrum, variational_energy, bare_pt_energy
from .matter import solve_matter
from .modes import solve_frequencies
from .oracle import build_operator, lowest_eigenvalues

__all__ = [
    "EnergyRow",
    "PointResult",
    "ComparisonReport",
    "normalized_coupling",
    "solve_point",
    "run_sweep",
    "ConvergenceRow",
    "convergence_study",
    "CONVERGENCE_CUTOFFS",
    "CONVERGENCE_PHOTON_CAPS",
]

log = logging.getLogger(__name__)

CONVERGENCE_CUTOFFS = (10, 20, 50, 100)
CONVERGENCE_PHOTON_CAPS = (2, 3, 4)


@dataclass(frozen=True)
class EnergyRow:
    """One level from one method at one truncation.

    ``breakdown`` is the :class:`~varqed.energies.EnergyBreakdown` for the
    quasiparticle methods and ``None`` for the oracle, which only has a
    total.  ``max_photons`` is ``None`` for methods without a Fock cap.
    """

    method: str
    level: int
    mode_cutoff: int
    total: float
    breakdown: object = None
    max_photons: int = None
    truncation: str = ""

    @property
    def label(self):
        return self.breakdown.label if self.breakdown is not None else f"#{self.level}"

    def truncation_key(self):
        return (self.mode_cutoff, self.max_photons, self.truncation)


@dataclass
class PointResult:
    index: int
    value: float
    coupling: float = float("nan")
    eta: float = float("nan")
    omega_1: float = float("nan")
    bare_omega_1: float = float("nan")
    suppression_1: float = float("nan")
    site_length: float = float("nan")
    status: str = "ok"
    errors: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    @property
    def failed(self):
        return self.status != "ok"

    def rows_for(self, method, mode_cutoff=None):
        return [
            r for r in self.rows
            if r.method == method and (mode_cutoff is None or r.mode_cutoff == mode_cutoff)
        ]

    def reference(self, row):
        """Oracle total at the same level when the row's mode cutoff matches it."""
        for r in self.rows:
            if r.method == "oracle" and r.level == row.level and r.mode_cutoff == row.mode_cutoff:
                return r.total
        return None


@dataclass
class ComparisonReport:
    config: object
    points: list

    @property
    def failed_points(self):
        return [p for p in self.points if p.failed]


def normalized_coupling(eigensystem, cavity):
    """``g / w`` for the lowest transition and the first bare mode that sees the emitter.

    ``g = sqrt(lam/m) |F_n^0(d)| / sqrt(2 w_n) |p_10|`` is the single-mode
    Rabi coupling of the linear term.  Returns 0 if the first 100 modes all
    have a node at the emitter.
    """
    L, d = cavity.length, cavity.emitter_position
    for n in range(1, 101):
        w = n * np.pi / L
        f = np.sqrt(2.0 / L) * np.sin(w * d)
        if abs(f) > 1e-12 * np.sqrt(2.0 / L):
            g = np.sqrt(cavity.coupling / eigensystem.mass) * abs(f) / np.sqrt(2.0 * w)
            return float(g * abs(eigensystem.momentum[1, 0]) / w)
    return 0.0


def _timed(timings, key, fn):
    t0 = time.perf_counter()
    try:
        return fn()
    finally:
        timings[key] = time.perf_counter() - t0


def solve_point(config, value, index=0, kernel_threads=1):
    """Evaluate every enabled method at one sweep value.

    Failures of individual methods are recorded on the result instead of
    raised; ``status`` is ``"failed"`` if any method failed.
    """
    res = PointResult(index=index, value=float(value))
    k = config.levels
    try:
        emitter, cavity = config.point(value)
        eig = _timed(res.timings, "matter", lambda: solve_matter(emitter))
        res.coupling = cavity.coupling
        res.site_length = eig.site_length
        res.eta = normalized_coupling(eig, cavity)
        ms = _timed(res.timings, "modes", lambda: solve_frequencies(cavity, config.modes))
    except Exception as exc:  # noqa: BLE001 - recorded per point
        res.status = "failed"
        res.errors.append(f"setup: {type(exc).__name__}: {exc}")
        return res
    res.omega_1 = float(ms.omegas[0])
    res.bare_omega_1 = float(ms.bare_omegas[0])
    res.suppression_1 = ms.suppression(0)

    cutoffs = [config.modes]
    orc = config.oracle
    if orc.enabled and orc.modes != config.modes:
        cutoffs.append(orc.modes)

    for M in cutoffs:
        mode_set = ms if M == config.modes else solve_frequencies(cavity, M)
        for method in ("variational", "bare_pt"):
            key = f"{method}_M{M}"
            try:
                levels = _timed(
                    res.timings, key,
                    lambda: spectrum(eig, mode_set, k, config.max_quanta, config.photon_modes, method),
                )
            except Exception as exc:  # noqa: BLE001
                res.status = "failed"
                res.errors.append(f"{method} (M={M}): {type(exc).__name__}: {exc}")
                continue
            res.rows.extend(
                EnergyRow(method, j, M, b.total, breakdown=b) for j, b in enumerate(levels)
            )

    if orc.enabled:
        key = f"oracle_M{orc.modes}_P{orc.max_photons}"
        try:
            def run():
                op = build_operator(eig, cavity, orc.modes, orc.max_photons, orc.truncation,
                                    threads=kernel_threads)
                return lowest_eigenvalues(op, k=k, tol=orc.tolerance, seed=config.seed)
            vals = _timed(res.timings, key, run)
        except Exception as exc:  # noqa: BLE001
            res.status = "failed"
            res.errors.append(f"oracle: {type(exc).__name__}: {exc}")
        else:
            res.rows.extend(
                EnergyRow("oracle", j, orc.modes, float(v), max_photons=orc.max_photons,
                          truncation=orc.truncation)
                for j, v in enumerate(vals)
            )
    return res


def run_sweep(config, threads=None):
    """Run every sweep point and collect a :class:`ComparisonReport`.

    Points are independent and run on a pool of ``threads`` workers
    (default ``config.threads``); results are assembled in sweep order.
    """
    threads = threads or config.threads
    values = config.sweep.values()
    kernel_threads = threads if len(values) == 1 else 1
    if threads == 1 or len(values) <= 1:
        points = [solve_point(config, v, i, kernel_threads) for i, v in enumerate(values)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(solve_point, config, v, i, 1) for i, v in enumerate(values)]
            points = [f.result() for f in futures]
    for p in points:
        if p.failed:
            log.warning("sweep point %d (%s=%g) failed: %s", p.index, config.sweep.parameter,
                        p.value, "; ".join(p.errors))
    return ComparisonReport(config, points)


@dataclass(frozen=True)
class ConvergenceRow:
    method: str
    quantity: str
    mode_cutoff: int
    max_photons: int
    value: float


def convergence_study(config, value=None, cutoffs=CONVERGENCE_CUTOFFS,
                      photon_caps=CONVERGENCE_PHOTON_CAPS):
    """Ground-state energy terms against the mode cutoff at one sweep point.

    The point defaults to the last sweep value (the strongest coupling of a
    charge sweep).  Variational and bare perturbative terms are tabulated
    for every ``M`` in ``cutoffs``; with the oracle enabled its lowest level
    is added for every photon cap in ``photon_caps`` at the oracle's mode
    cutoff.
    """
    if value is None:
        values = config.sweep.values()
        value = values[-1] if values else 1.0
    emitter, cavity = config.point(value)
    eig = solve_matter(emitter)
    rows = []
    for M in cutoffs:
        ms = solve_frequencies(cavity, M)
        v = variational_energy(eig, ms, 0, ())
        b = bare_pt_energy(eig, cavity, M, 0, ())
        for method, br in (("variational", v), ("bare_pt", b)):
            for q in ("casimir_term", "correlation_term", "total"):
                rows.append(ConvergenceRow(method, q, M, None, getattr(br, q)))
    if config.oracle.enabled:
        orc = config.oracle
        for P in photon_caps:
            op = build_operator(eig, cavity, orc.modes, P, orc.truncation, threads=config.threads)
            val = lowest_eigenvalues(op, k=1, tol=orc.tolerance, seed=config.seed)[0]
            rows.append(ConvergenceRow("oracle", "total", orc.modes, P, float(val)))
    return rows
