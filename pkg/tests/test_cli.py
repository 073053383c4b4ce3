import csv
import io
import json
import os

import numpy as np
import pytest

from varqed import cli, sweep as sweep_mod
from varqed.config import ConfigError, bundled_scenarios, config_from_dict, load_config
from varqed.report import CONVERGENCE_COLUMNS, CSV_COLUMNS, emit_report, report_rows, report_to_json
from varqed.sweep import convergence_study, run_sweep
from varqed.units import ELECTRON_MASS_EV, ELEMENTARY_CHARGE, HBARC_EV_NM

L_NM = np.pi * HBARC_EV_NM  # first bare mode at 1 eV


def small(**over):
    doc = {
        "name": "small",
        "emitter": {"n_levels": 2, "hopping": -0.25},
        "cavity": {"length_nm": L_NM, "emitter_position_nm": 0.3 * L_NM, "area_nm2": 0.0364},
        "sweep": {"parameter": "charge_scale", "start": 0.0, "stop": 1.0, "points": 3},
        "modes": 12,
        "oracle": {"enabled": True, "modes": 8, "max_photons": 2},
    }
    for key, value in over.items():
        if isinstance(value, dict) and isinstance(doc.get(key), dict):
            doc[key] = {**doc[key], **value}
        else:
            doc[key] = value
    return doc


def write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


# configuration ---------------------------------------------------------------


def test_minimal_config_defaults(tmp_path):
    cfg = load_config(write(tmp_path, {"emitter": {"n_levels": 2}, "cavity": {"length_nm": 500.0}}))
    assert cfg.modes == 50
    assert not cfg.oracle.enabled
    assert cfg.sweep.parameter == "charge_scale"
    assert cfg.sweep.values() == pytest.approx(np.linspace(0.0, 1.0, 20))
    assert cfg.name == "cfg"
    assert cfg.length == pytest.approx(500.0 / HBARC_EV_NM)
    assert cfg.emitter_position == pytest.approx(250.0 / HBARC_EV_NM)
    assert cfg.emitter.charge == ELEMENTARY_CHARGE


def test_unit_conversion_and_coupling():
    cfg = config_from_dict(small())
    emitter, cav = cfg.point(0.5)
    area = 0.0364 / HBARC_EV_NM**2
    assert cav.coupling == pytest.approx((0.5 * ELEMENTARY_CHARGE) ** 2 / (ELECTRON_MASS_EV * area), rel=1e-14)
    assert cav.length == pytest.approx(np.pi, rel=1e-14)
    assert emitter.charge == pytest.approx(0.5 * ELEMENTARY_CHARGE)


def test_direct_coupling_scales_quadratically():
    doc = small(cavity={"length_nm": L_NM, "coupling_ev3": 0.4})
    del doc["cavity"]["area_nm2"]
    cfg = config_from_dict(doc)
    assert cfg.point(0.5)[1].coupling == pytest.approx(0.1)


@pytest.mark.parametrize("pos", [L_NM, 2 * L_NM, 0.0, -1.0])
def test_emitter_outside_cavity(pos):
    with pytest.raises(ConfigError, match="emitter_position") as info:
        config_from_dict(small(cavity={"emitter_position_nm": pos}))
    assert info.value.field == "cavity.emitter_position_nm"


def test_over_specified_coupling():
    with pytest.raises(ConfigError, match="over-specified"):
        config_from_dict(small(cavity={"coupling_ev3": 0.1}))
    doc = small(emitter={"n_levels": 2, "charge_e": 1.0}, cavity={"length_nm": L_NM, "coupling_ev3": 0.1})
    doc["cavity"].pop("area_nm2")
    with pytest.raises(ConfigError, match="over-specified"):
        config_from_dict(doc)


@pytest.mark.parametrize(
    "over, field",
    [
        ({"modes": 0}, "modes"),
        ({"modes": "many"}, "modes"),
        ({"sweep": {"parameter": "temperature"}}, "sweep.parameter"),
        ({"sweep": {"parameter": "emitter_position", "start": 10.0, "stop": 2 * L_NM}}, "sweep.stop"),
        ({"sweep": {"parameter": "cavity_length", "start": -5.0, "stop": 10.0}}, "sweep.start"),
        ({"sweep": {"start": -1.0}}, "sweep.start"),
        ({"oracle": {"truncation": "box"}}, "oracle.truncation"),
        ({"oracle": {"enabled": "yes"}}, "oracle.enabled"),
        ({"emitter": {"n_levels": 1}}, "emitter.n_levels"),
        ({"emitter": {"n_levels": 2, "hopping": 0}}, "emitter.hopping"),
        ({"emitter": {"n_levels": 2, "site_potentials": [0.1, "x"]}}, "emitter.site_potentials[1]"),
        ({"output": {"formats": ["xml"]}}, "output.formats[0]"),
        ({"colour": "blue"}, "colour"),
    ],
)
def test_validation_errors_name_the_field(over, field):
    with pytest.raises(ConfigError) as info:
        config_from_dict(small(**over))
    assert info.value.field == field


def test_parse_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{ not json")
    with pytest.raises(ConfigError, match="parse error"):
        load_config(str(path))
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(str(tmp_path / "missing.json"))


def test_bundled_scenarios_load():
    names = bundled_scenarios()
    assert set(names) == {f"{n}level_{g}" for n in (2, 3, 4) for g in ("center", "offcenter")}
    for name in names:
        cfg = load_config(name)
        assert cfg.oracle.enabled and cfg.oracle.modes == 16 and cfg.oracle.max_photons == 3
        assert cfg.point(0.0)[1].bare_omegas(1)[0] == pytest.approx(1.0, rel=1e-10)


def test_position_and_length_sweeps():
    cfg = config_from_dict(small(sweep={"parameter": "emitter_position", "start": 100.0, "stop": 300.0}))
    assert cfg.point(200.0)[1].emitter_position == pytest.approx(200.0 / HBARC_EV_NM)
    cfg = config_from_dict(small(sweep={"parameter": "cavity_length", "start": 300.0, "stop": 900.0}))
    cav = cfg.point(900.0)[1]
    assert cav.length == pytest.approx(900.0 / HBARC_EV_NM)
    assert cav.emitter_position / cav.length == pytest.approx(0.3)


# sweeps ------------------------------------------------------------------------


@pytest.fixture(scope="module")
def small_report():
    return run_sweep(config_from_dict(small()))


def test_uncoupled_endpoint_agrees(small_report):
    p = small_report.points[0]
    assert p.coupling == 0.0
    for method in ("variational", "bare_pt"):
        for r in p.rows_for(method, 8):
            ref = p.reference(r)
            assert abs(r.total - ref) <= 1e-9


def test_rows_carry_truncation(small_report):
    p = small_report.points[-1]
    assert {r.mode_cutoff for r in p.rows_for("variational")} == {12, 8}
    for r in p.rows_for("oracle"):
        assert r.truncation_key() == (8, 2, "total")
    assert all(p.reference(r) is None for r in p.rows_for("variational", 12))


def test_frequency_rises_along_charge_sweep(small_report):
    w = [p.omega_1 for p in small_report.points]
    assert np.all(np.diff(w) >= 0)
    s = [p.suppression_1 for p in small_report.points]
    assert np.all(np.diff(s) <= 0)


def test_failed_points_do_not_abort(monkeypatch):
    real = sweep_mod.solve_frequencies

    def flaky(cavity, n):
        if 0 < cavity.coupling < 0.1:
            raise RuntimeError("boom")
        return real(cavity, n)

    monkeypatch.setattr(sweep_mod, "solve_frequencies", flaky)
    report = run_sweep(config_from_dict(small(sweep={"points": 5})))
    status = [p.status for p in report.points]
    assert status[0] == "ok" and "failed" in status and status[-1] == "ok"
    bad = report.failed_points[0]
    assert "boom" in bad.errors[0]
    rows = report_rows(report)
    assert any(r[2] == "failed" and "boom" in r[-1] for r in rows)


def test_resonant_baseline_marks_point_failed():
    doc = small(emitter={"n_levels": 2, "hopping": -0.5})  # gap equals the first mode
    doc["oracle"] = {"enabled": False}
    report = run_sweep(config_from_dict(doc))
    assert report.points[0].status == "ok"
    assert all(p.failed for p in report.points[1:])
    assert all(p.rows_for("variational") for p in report.points)


# reports -------------------------------------------------------------------------


def test_csv_schema(tmp_path, small_report):
    path = emit_report(small_report, str(tmp_path), ("csv",))[0]
    rows = list(csv.reader(open(path)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert all(len(r) == len(CSV_COLUMNS) for r in rows)
    n_rows = sum(len(p.rows) for p in small_report.points)
    assert len(rows) == n_rows + 1
    totals = [r[CSV_COLUMNS.index("total_eV")] for r in rows[1:]]
    assert all(len(t.replace("-", "").replace(".", "").lstrip("0")) <= 12 for t in totals if "e" not in t)


def test_empty_sweep_writes_header_only(tmp_path):
    report = run_sweep(config_from_dict(small(sweep={"points": 0})))
    path = emit_report(report, str(tmp_path), ("csv",))[0]
    assert open(path).read() == ",".join(CSV_COLUMNS) + "\n"


def test_json_round_trip_is_exact(small_report):
    doc = json.loads(report_to_json(small_report))
    totals = [row["total"] for p in doc["points"] for row in p["rows"]]
    expected = [r.total for p in small_report.points for r in p.rows]
    assert totals == expected
    first = doc["points"][-1]["rows"][0]
    assert first["breakdown"]["total"] == first["total"]


def test_output_is_deterministic(tmp_path):
    cfg = config_from_dict(small())
    a = emit_report(run_sweep(cfg), str(tmp_path / "a"), ("csv",))[0]
    b = emit_report(run_sweep(cfg, threads=2), str(tmp_path / "b"), ("csv",))[0]
    assert open(a, "rb").read() == open(b, "rb").read()


# convergence study -----------------------------------------------------------------


def test_convergence_uncoupled_rows_identical():
    cfg = config_from_dict(small())
    rows = convergence_study(cfg, value=0.0, photon_caps=(2, 3))
    by = {}
    for r in rows:
        by.setdefault((r.method, r.quantity), set()).add(r.value)
    assert all(len(v) == 1 for v in by.values())


@pytest.fixture(scope="module")
def study():
    cfg = load_config("2level_center")
    return convergence_study(cfg)


def _series(rows, quantity):
    return [r.value for r in rows if r.method == "variational" and r.quantity == quantity]


def test_convergence_table_layout(study):
    oracle = [r for r in study if r.method == "oracle"]
    assert [r.max_photons for r in oracle] == [2, 3, 4]
    assert {r.mode_cutoff for r in study if r.method != "oracle"} == {10, 20, 50, 100}


def test_correlation_differences_halve_on_study_grid(study):
    # each successive difference at least halves along M = 10, 20, 50, 100
    d = np.abs(np.diff(_series(study, "correlation_term")))
    assert np.all(d[1:] <= d[:-1] / 2), f"successive differences {d}"


def test_correlation_tail_is_inverse_cutoff():
    # summand ~ 1/n^2, so the change per doubling of M tends to halve
    cfg = load_config("2level_center")
    rows = convergence_study(cfg, cutoffs=(20, 40, 80, 160, 320))
    d = np.abs(np.diff(_series(rows, "correlation_term")))
    np.testing.assert_allclose(d[:-1] / d[1:], 2.0, rtol=0.03)


def test_casimir_rows_reported(study):
    cas = _series(study, "casimir_term")
    assert len(cas) == 4 and np.all(np.diff(cas) > 0)


# command line ---------------------------------------------------------------------


def run_cli(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_sweep_and_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, small())
    code, out, _ = run_cli(["sweep", "--config", cfg, "--out", str(tmp_path / "o"), "--format", "both"], capsys)
    assert code == 0
    assert os.path.exists(tmp_path / "o" / "small.csv")
    assert os.path.exists(tmp_path / "o" / "small.json")


def test_cli_config_error(tmp_path, capsys):
    cfg = write(tmp_path, small(cavity={"emitter_position_nm": 2 * L_NM}))
    code, _, err = run_cli(["sweep", "--config", cfg], capsys)
    assert code == cli.EXIT_CONFIG
    summary = json.loads(err.strip().splitlines()[-1])
    assert summary["field"] == "cavity.emitter_position_nm"
    assert summary["status"] == "error"


def test_cli_failed_points(tmp_path, capsys):
    doc = small(emitter={"n_levels": 2, "hopping": -0.5})
    doc["oracle"] = {"enabled": False}
    code, out, err = run_cli(["sweep", "--config", write(tmp_path, doc), "--out", str(tmp_path)], capsys)
    assert code == cli.EXIT_SOLVER
    summary = json.loads(err.strip().splitlines()[-1])
    assert [p["index"] for p in summary["failed_points"]] == [1, 2]
    assert os.path.exists(tmp_path / "small.csv")


def test_cli_solve_and_oracle(tmp_path, capsys):
    cfg = write(tmp_path, small())
    code, out, _ = run_cli(["solve", "--config", cfg, "--out", str(tmp_path), "--value", "0.5"], capsys)
    assert code == 0 and "oracle" in out
    code, out, _ = run_cli(["oracle", "--config", cfg, "--out", str(tmp_path)], capsys)
    assert code == 0
    rows = list(csv.reader(open(tmp_path / "small_oracle.csv")))
    assert len(rows) == 6 and rows[0][0] == "level"


def test_cli_converge(tmp_path, capsys):
    code, _, _ = run_cli(["converge", "--config", write(tmp_path, small()), "--out", str(tmp_path)], capsys)
    assert code == 0
    rows = list(csv.reader(open(tmp_path / "small_convergence.csv")))
    assert tuple(rows[0]) == CONVERGENCE_COLUMNS


def test_cli_modes_dump(tmp_path, capsys):
    code, _, _ = run_cli(["modes", "--config", write(tmp_path, small()), "--out", str(tmp_path)], capsys)
    assert code == 0
    rows = list(csv.reader(open(tmp_path / "small_profiles.csv")))
    assert len(rows) == 1 + 512 + 2
    z = np.array([float(r[0]) for r in rows[1:]])
    d = 0.3 * L_NM
    left, right = z[z < d].max(), z[z > d].min()
    assert d - left < 1e-6 and right - d < 1e-6
    modes = list(csv.reader(open(tmp_path / "small_modes.csv")))
    assert len(modes) == 13


def test_thread_count_from_environment(tmp_path, monkeypatch):
    cfg = write(tmp_path, small())
    monkeypatch.setenv(cli.THREADS_ENV, "3")
    args = cli._parser().parse_args(["sweep", "--config", cfg])
    assert cli._configure(args).threads == 3
    args = cli._parser().parse_args(["sweep", "--config", cfg, "--threads", "2"])
    assert cli._configure(args).threads == 2
    monkeypatch.setenv(cli.THREADS_ENV, "many")
    with pytest.raises(cli.CliError):
        cli._configure(cli._parser().parse_args(["sweep", "--config", cfg]))


def test_cli_oracle_flag_and_seed(tmp_path):
    doc = small()
    doc["oracle"] = {"enabled": False}
    args = cli._parser().parse_args(["sweep", "--config", write(tmp_path, doc), "--oracle", "--seed", "9"])
    cfg = cli._configure(args)
    assert cfg.oracle.enabled and cfg.seed == 9
