"""CSV and JSON writers for sweep reports, convergence tables and mode dumps.

CSV numbers carry 12 significant digits and rows follow sweep order, so a
rerun with the same config and seed reproduces the file byte for byte.
Wall-clock timings are therefore written to JSON only.  JSON floats use the
shortest representation that round-trips exactly.
"""
import csv
import dataclasses
import io
import json
import math
import os

import numpy as np

from .units import natural_to_nm

__all__ = [
    "CSV_COLUMNS",
    "CONVERGENCE_COLUMNS",
    "emit_report",
    "report_rows",
    "report_to_json",
    "write_convergence",
    "write_modes",
    "write_text",
    "csv_text",
    "format_number",
]

#: Fixed schema of the sweep CSV.  Unit suffixes: ``_eV`` energies,
#: ``_eV3`` the coupling constant; the unit of ``sweep_value`` is given in
#: ``sweep_unit``.
CSV_COLUMNS = (
    "scenario",
    "point",
    "status",
    "sweep_parameter",
    "sweep_value",
    "sweep_unit",
    "coupling_eV3",
    "eta",
    "omega1_eV",
    "bare_omega1_eV",
    "suppression1",
    "method",
    "mode_cutoff",
    "max_photons",
    "truncation",
    "level",
    "label",
    "matter_state",
    "occupations",
    "bare_matter_energy_eV",
    "casimir_term_eV",
    "photon_term_eV",
    "correlation_term_eV",
    "total_eV",
    "cutoff_sensitivity_eV",
    "oracle_total_eV",
    "oracle_deviation_eV",
    "oracle_truncation_match",
    "error",
)

CONVERGENCE_COLUMNS = ("method", "quantity", "mode_cutoff", "max_photons", "value_eV")

_UNITS = {"charge_scale": "1", "emitter_position": "nm", "cavity_length": "nm"}


def format_number(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "yes" if x else "no"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return ""
    return f"{x:.12g}"


_f = format_number


def _occ(occupations):
    return " ".join(f"{i + 1}:{n}" for i, n in occupations)


def report_rows(report):
    """CSV rows (lists of strings) for every point, state and method."""
    cfg = report.config
    param = cfg.sweep.parameter
    oracle_on = cfg.oracle.enabled
    out = []
    for p in report.points:
        head = [
            cfg.name, str(p.index), p.status, param, _f(p.value), _UNITS[param],
            _f(p.coupling), _f(p.eta), _f(p.omega_1), _f(p.bare_omega_1),
            _f(p.suppression_1),
        ]
        error = "; ".join(p.errors)
        if not p.rows:
            out.append(head + [""] * (len(CSV_COLUMNS) - len(head) - 1) + [error])
            continue
        for r in p.rows:
            b = r.breakdown
            ref = p.reference(r)
            if not oracle_on:
                match = ""
            else:
                match = "yes" if ref is not None else "no"
            parts = (
                [b.matter_state, _occ(b.occupations), b.bare_matter_energy, b.casimir_term,
                 b.photon_term, b.correlation_term]
                if b is not None else [None, "", None, None, None, None]
            )
            out.append(head + [
                r.method, _f(r.mode_cutoff), _f(r.max_photons), r.truncation,
                _f(r.level), r.label, _f(parts[0]), parts[1],
                _f(parts[2]), _f(parts[3]), _f(parts[4]), _f(parts[5]),
                _f(r.total), _f(b.cutoff_sensitivity if b is not None else None),
                _f(ref), _f(None if ref is None else r.total - ref), match, error,
            ])
    return out


def csv_text(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def _clean(obj):
    """JSON-safe copy: nan becomes null, numpy scalars become Python ones."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return None if not math.isfinite(obj) else obj
    return obj


def _config_dict(cfg):
    d = dataclasses.asdict(cfg)
    d["length_nm"] = natural_to_nm(cfg.length)
    d["emitter_position_nm"] = natural_to_nm(cfg.emitter_position)
    return d


def report_to_json(report, timings=True):
    """Nested report document as a string."""
    points = []
    for p in report.points:
        rows = []
        for r in p.rows:
            row = {
                "method": r.method,
                "level": r.level,
                "label": r.label,
                "mode_cutoff": r.mode_cutoff,
                "max_photons": r.max_photons,
                "truncation": r.truncation,
                "total": r.total,
                "oracle_total": p.reference(r),
            }
            if r.breakdown is not None:
                row["breakdown"] = r.breakdown.as_dict()
            rows.append(row)
        entry = {
            "index": p.index,
            "value": p.value,
            "coupling_eV3": p.coupling,
            "eta": p.eta,
            "site_length": p.site_length,
            "omega1_eV": p.omega_1,
            "bare_omega1_eV": p.bare_omega_1,
            "suppression1": p.suppression_1,
            "status": p.status,
            "errors": list(p.errors),
            "rows": rows,
        }
        if timings:
            entry["timings_s"] = dict(sorted(p.timings.items()))
        points.append(entry)
    doc = {
        "schema": "varqed-report/1",
        "scenario": report.config.name,
        "sweep_parameter": report.config.sweep.parameter,
        "sweep_unit": _UNITS[report.config.sweep.parameter],
        "config": _config_dict(report.config),
        "points": points,
    }
    return json.dumps(_clean(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_text(path, text):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def emit_report(report, out_dir=None, formats=None, stem=None):
    """Write ``<stem>.csv`` and/or ``<stem>.json``; returns the paths written."""
    out_dir = out_dir or report.config.output_directory
    formats = formats or report.config.formats
    stem = stem or report.config.name
    paths = []
    if "csv" in formats:
        paths.append(write_text(os.path.join(out_dir, f"{stem}.csv"),
                            csv_text(CSV_COLUMNS, report_rows(report))))
    if "json" in formats:
        paths.append(write_text(os.path.join(out_dir, f"{stem}.json"), report_to_json(report)))
    return paths


def write_convergence(rows, path):
    body = [[r.method, r.quantity, _f(r.mode_cutoff), _f(r.max_photons), _f(r.value)] for r in rows]
    return write_text(path, csv_text(CONVERGENCE_COLUMNS, body))


def write_modes(mode_set, directory, stem, n_samples=512, n_profiles=None, eps=None):
    """Dump frequencies and sampled profiles for plotting.

    ``<stem>_modes.csv`` lists every mode; ``<stem>_profiles.csv`` samples
    the first ``n_profiles`` profiles on ``n_samples`` uniform points plus
    the pair ``d - eps, d + eps`` that brackets the kink at the emitter.
    """
    cav = mode_set.cavity
    L, d = cav.length, cav.emitter_position
    eps = eps if eps is not None else 1e-9 * L
    n_profiles = mode_set.n_modes if n_profiles is None else min(n_profiles, mode_set.n_modes)
    table = [
        [_f(i + 1), _f(w), _f(w0), _f(f), _f(f0), _f(mode_set.suppression(i)),
         _f(bool(dec))]
        for i, (w, w0, f, f0, dec) in enumerate(zip(
            mode_set.omegas, mode_set.bare_omegas, mode_set.at_emitter,
            mode_set.bare_at_emitter, mode_set.decoupled))
    ]
    modes_path = write_text(
        os.path.join(directory, f"{stem}_modes.csv"),
        csv_text(("mode", "omega_eV", "bare_omega_eV", "F_at_emitter", "bare_F_at_emitter",
                   "suppression", "decoupled"), table),
    )
    z = np.concatenate([np.linspace(0.0, L, n_samples), [d - eps, d + eps]])
    z = np.sort(z, kind="stable")
    F = np.array([mode_set.profile(i, z) for i in range(n_profiles)])
    rows = [[_f(natural_to_nm(zz)), _f(zz)] + [_f(v) for v in F[:, k]] for k, zz in enumerate(z)]
    cols = ("z_nm", "z_inv_eV") + tuple(f"F{i + 1}" for i in range(n_profiles))
    prof_path = write_text(os.path.join(directory, f"{stem}_profiles.csv"), csv_text(cols, rows))
    return [modes_path, prof_path]
