"""Scenario configuration: JSON ingestion, validation and unit conversion.

Configs are JSON documents.  Physical inputs use laboratory units (nm, nm^2,
eV, charge in units of e) and are converted to natural units here.  See
``docs/config.md`` for the schema.
"""
from dataclasses import dataclass, field, replace
import json
import math
import os

from .matter import EmitterSpec, MatterError
from .modes import CavityGeometry
from .units import ELECTRON_MASS_EV, ELEMENTARY_CHARGE, coupling_constant, nm2_to_natural, nm_to_natural

__all__ = [
    "ConfigError",
    "OracleSettings",
    "SweepSettings",
    "ScenarioConfig",
    "load_config",
    "config_from_dict",
    "SWEEP_PARAMETERS",
    "bundled_scenarios",
    "resolve_config_path",
]

SWEEP_PARAMETERS = ("charge_scale", "emitter_position", "cavity_length")
FORMATS = ("csv", "json")
DEFAULT_AREA_NM2 = 1.0


class ConfigError(ValueError):
    """Invalid configuration.  ``field`` is the dotted path of the culprit."""

    def __init__(self, field, reason):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}" if field else reason)


@dataclass(frozen=True)
class SweepSettings:
    parameter: str = "charge_scale"
    start: float = 0.0
    stop: float = 1.0
    points: int = 20

    def values(self):
        """Sweep values in input units (nm for lengths)."""
        if self.points == 0:
            return []
        if self.points == 1:
            return [float(self.start)]
        step = (self.stop - self.start) / (self.points - 1)
        return [float(self.start + k * step) for k in range(self.points - 1)] + [float(self.stop)]


@dataclass(frozen=True)
class OracleSettings:
    enabled: bool = False
    modes: int = 16
    max_photons: int = 3
    tolerance: float = 1e-10
    truncation: str = "total"


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario, lengths already in natural units (1/eV).

    Exactly one of ``area`` and ``coupling`` is set.  With ``area`` the
    coupling is ``(s q)^2 / (m S)`` at charge scale ``s``; with ``coupling``
    given directly it is ``coupling * s^2``.
    """

    name: str
    emitter: EmitterSpec
    length: float
    emitter_position: float
    area: float = None
    coupling: float = None
    sweep: SweepSettings = field(default_factory=SweepSettings)
    modes: int = 50
    levels: int = 5
    max_quanta: int = 2
    photon_modes: int = 10
    oracle: OracleSettings = field(default_factory=OracleSettings)
    output_directory: str = "."
    formats: tuple = FORMATS
    seed: int = 1234
    threads: int = 1

    def point(self, value):
        """Emitter and cavity at sweep value ``value`` (input units)."""
        p = self.sweep.parameter
        scale, L, d = 1.0, self.length, self.emitter_position
        if p == "charge_scale":
            scale = value
        elif p == "emitter_position":
            d = nm_to_natural(value)
        else:
            # the emitter keeps its fractional position
            L = nm_to_natural(value)
            d = self.emitter_position / self.length * L
        if self.coupling is not None:
            lam = self.coupling * scale * scale
            area = 1.0
        else:
            lam = coupling_constant(scale * self.emitter.charge, self.emitter.mass, self.area)
            area = self.area
        emitter = self.emitter.with_charge(scale * self.emitter.charge)
        return emitter, CavityGeometry(L, d, lam, area)

    def with_oracle(self, enabled=True):
        return replace(self, oracle=replace(self.oracle, enabled=enabled))


def _take(section, key, path, kind, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"{path}.{key}" if path else key, "required field missing")
        return default
    value = section[key]
    where = f"{path}.{key}" if path else key
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(where, f"expected a finite number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(where, f"expected an integer, got {value!r}")
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(where, f"expected true or false, got {value!r}")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(where, f"expected a string, got {value!r}")
        return value
    if kind is dict:
        if not isinstance(value, dict):
            raise ConfigError(where, "expected an object")
        return value
    if kind is list:
        if not isinstance(value, list):
            raise ConfigError(where, "expected a list")
        return value
    raise TypeError(kind)


def _no_extra(section, allowed, path):
    extra = sorted(set(section) - set(allowed))
    if extra:
        raise ConfigError(f"{path}.{extra[0]}" if path else extra[0], "unknown field")


def _emitter(data):
    path = "emitter"
    sec = _take(data, "emitter", "", dict, required=True)
    _no_extra(sec, ("n_levels", "site_potentials", "hopping", "site_length_nm", "mass_ev", "charge_e"), path)
    n = _take(sec, "n_levels", path, int, required=True)
    if n < 2:
        raise ConfigError(f"{path}.n_levels", "must be at least 2")
    pots = _take(sec, "site_potentials", path, list, default=[])
    for k, v in enumerate(pots):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ConfigError(f"{path}.site_potentials[{k}]", f"expected a finite number, got {v!r}")
    if len(pots) > n:
        raise ConfigError(f"{path}.site_potentials", f"{len(pots)} values for {n} sites")
    hopping = _take(sec, "hopping", path, float, default=-0.5)
    if hopping == 0:
        raise ConfigError(f"{path}.hopping", "must be nonzero")
    length = sec.get("site_length_nm", "auto")
    if length != "auto":
        length = _take(sec, "site_length_nm", path, float)
        if length <= 0:
            raise ConfigError(f"{path}.site_length_nm", "must be 'auto' or positive")
        length = nm_to_natural(length)
    mass = _take(sec, "mass_ev", path, float, default=ELECTRON_MASS_EV)
    if mass <= 0:
        raise ConfigError(f"{path}.mass_ev", "must be positive")
    charge = _take(sec, "charge_e", path, float, default=1.0)
    if charge < 0:
        raise ConfigError(f"{path}.charge_e", "must be non-negative")
    try:
        spec = EmitterSpec(n, tuple(pots), hopping, length, mass, charge * ELEMENTARY_CHARGE)
    except MatterError as exc:
        raise ConfigError(path, str(exc)) from None
    return spec, "charge_e" in sec


def _sweep(data, length_nm, position_nm):
    path = "sweep"
    sec = _take(data, "sweep", "", dict, default={})
    _no_extra(sec, ("parameter", "start", "stop", "points"), path)
    param = _take(sec, "parameter", path, str, default="charge_scale")
    if param not in SWEEP_PARAMETERS:
        raise ConfigError(f"{path}.parameter", f"must be one of {', '.join(SWEEP_PARAMETERS)}")
    if param == "charge_scale":
        lo_default, hi_default = 0.0, 1.0
    elif param == "emitter_position":
        lo_default, hi_default = 0.05 * length_nm, 0.95 * length_nm
    else:
        lo_default, hi_default = 0.5 * length_nm, 2.0 * length_nm
    start = _take(sec, "start", path, float, default=lo_default)
    stop = _take(sec, "stop", path, float, default=hi_default)
    points = _take(sec, "points", path, int, default=20)
    if points < 0:
        raise ConfigError(f"{path}.points", "must be non-negative")
    for key, value in (("start", start), ("stop", stop)):
        where = f"{path}.{key}"
        if param == "charge_scale" and value < 0:
            raise ConfigError(where, "charge scale must be non-negative")
        if param == "emitter_position" and not 0 < value < length_nm:
            raise ConfigError(where, f"emitter_position must lie strictly inside (0, {length_nm:g}) nm")
        if param == "cavity_length" and not value > 0:
            raise ConfigError(where, "cavity length must be positive")
    if param == "cavity_length" and points and not 0 < position_nm < length_nm:
        raise ConfigError("cavity.emitter_position_nm", "must lie strictly inside the cavity")
    return SweepSettings(param, start, stop, points)


def _oracle(data):
    path = "oracle"
    sec = _take(data, "oracle", "", dict, default={})
    _no_extra(sec, ("enabled", "modes", "max_photons", "tolerance", "truncation"), path)
    out = OracleSettings(
        enabled=_take(sec, "enabled", path, bool, default=False),
        modes=_take(sec, "modes", path, int, default=16),
        max_photons=_take(sec, "max_photons", path, int, default=3),
        tolerance=_take(sec, "tolerance", path, float, default=1e-10),
        truncation=_take(sec, "truncation", path, str, default="total"),
    )
    if out.modes < 1:
        raise ConfigError(f"{path}.modes", "must be at least 1")
    if out.max_photons < 0:
        raise ConfigError(f"{path}.max_photons", "must be non-negative")
    if not out.tolerance > 0:
        raise ConfigError(f"{path}.tolerance", "must be positive")
    if out.truncation not in ("total", "per_mode"):
        raise ConfigError(f"{path}.truncation", "must be 'total' or 'per_mode'")
    return out


def config_from_dict(data, name="scenario", base_dir="."):
    """Validate a parsed config document and apply defaults."""
    if not isinstance(data, dict):
        raise ConfigError("", "top level must be an object")
    _no_extra(
        data,
        ("name", "description", "emitter", "cavity", "sweep", "modes", "levels", "candidates",
         "oracle", "output", "seed", "threads"),
        "",
    )
    name = _take(data, "name", "", str, default=name)
    emitter, charge_given = _emitter(data)

    path = "cavity"
    cav = _take(data, "cavity", "", dict, required=True)
    _no_extra(cav, ("length_nm", "emitter_position_nm", "area_nm2", "coupling_ev3"), path)
    length_nm = _take(cav, "length_nm", path, float, required=True)
    if length_nm <= 0:
        raise ConfigError(f"{path}.length_nm", "must be positive")
    position_nm = _take(cav, "emitter_position_nm", path, float, default=0.5 * length_nm)
    if not 0 < position_nm < length_nm:
        raise ConfigError(
            f"{path}.emitter_position_nm",
            f"emitter_position must lie strictly inside (0, {length_nm:g}) nm, got {position_nm:g}",
        )
    area = coupling = None
    if "coupling_ev3" in cav:
        clash = [k for k in ("area_nm2",) if k in cav] + (["emitter.charge_e"] if charge_given else [])
        if clash:
            raise ConfigError(
                f"{path}.coupling_ev3",
                f"over-specified coupling: lambda given together with {', '.join(clash)}",
            )
        coupling = _take(cav, "coupling_ev3", path, float)
        if coupling < 0:
            raise ConfigError(f"{path}.coupling_ev3", "must be non-negative")
    else:
        area_nm2 = _take(cav, "area_nm2", path, float, default=DEFAULT_AREA_NM2)
        if area_nm2 <= 0:
            raise ConfigError(f"{path}.area_nm2", "must be positive")
        area = nm2_to_natural(area_nm2)

    sweep = _sweep(data, length_nm, position_nm)
    modes = _take(data, "modes", "", int, default=50)
    if modes < 1:
        raise ConfigError("modes", "must be at least 1")
    levels = _take(data, "levels", "", int, default=5)
    if levels < 1:
        raise ConfigError("levels", "must be at least 1")
    cand = _take(data, "candidates", "", dict, default={})
    _no_extra(cand, ("max_quanta", "photon_modes"), "candidates")
    max_quanta = _take(cand, "max_quanta", "candidates", int, default=2)
    photon_modes = _take(cand, "photon_modes", "candidates", int, default=10)
    if max_quanta < 0 or photon_modes < 1:
        raise ConfigError("candidates", "max_quanta must be >= 0 and photon_modes >= 1")

    out = _take(data, "output", "", dict, default={})
    _no_extra(out, ("directory", "formats"), "output")
    directory = _take(out, "directory", "output", str, default=".")
    if not os.path.isabs(directory):
        directory = os.path.normpath(os.path.join(base_dir, directory))
    formats = _take(out, "formats", "output", list, default=list(FORMATS))
    for k, f in enumerate(formats):
        if f not in FORMATS:
            raise ConfigError(f"output.formats[{k}]", f"unknown format {f!r}")
    seed = _take(data, "seed", "", int, default=1234)
    threads = _take(data, "threads", "", int, default=1)
    if threads < 1:
        raise ConfigError("threads", "must be at least 1")

    return ScenarioConfig(
        name=name,
        emitter=emitter,
        length=nm_to_natural(length_nm),
        emitter_position=nm_to_natural(position_nm),
        area=area,
        coupling=coupling,
        sweep=sweep,
        modes=modes,
        levels=levels,
        max_quanta=max_quanta,
        photon_modes=photon_modes,
        oracle=_oracle(data),
        output_directory=directory,
        formats=tuple(dict.fromkeys(formats)),
        seed=seed,
        threads=threads,
    )


def bundled_scenarios():
    """Names and paths of the scenario files shipped with the package."""
    here = os.path.join(os.path.dirname(__file__), "scenarios")
    return {
        os.path.splitext(f)[0]: os.path.join(here, f)
        for f in sorted(os.listdir(here)) if f.endswith(".json")
    }


def resolve_config_path(path):
    """``path`` itself if it exists, else the bundled scenario of that name."""
    if os.path.exists(path):
        return path
    return bundled_scenarios().get(path, path)


def load_config(path):
    """Read, validate and convert a JSON scenario file.

    ``path`` may also name a bundled scenario (see :func:`bundled_scenarios`).

    Raises
    ------
    ConfigError
        On unreadable or malformed files and on invalid fields; the error
        carries the dotted field path.
    """
    path = resolve_config_path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        where = f"line {exc.lineno} column {exc.colno}"
        raise ConfigError("", f"parse error in {path} at {where}: {exc.msg}") from None
    stem = os.path.splitext(os.path.basename(path))[0]
    # relative output directories are taken from the working directory
    return config_from_dict(data, name=stem, base_dir=".")
