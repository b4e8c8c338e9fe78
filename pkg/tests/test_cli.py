import json

import numpy as np
import pytest

from spadesign.cli import EXIT_INFEASIBLE, EXIT_NUMERIC, EXIT_OK, EXIT_VALIDATION, main
from spadesign.data import parse_table, samples_to_dataset, save_dataset
from spadesign.material import GentMaterial, uniaxial_stress
from spadesign.synthetic import random_family_dataset


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == EXIT_OK, err
    return json.loads(out)


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    s = random_family_dataset(4, seed=0, heights=(0.0, 20.0, 40.0), pressures=np.linspace(0, 7, 8))
    save_dataset(samples_to_dataset(s), d / "ds.json")
    assert main(["--seed", "1", "train", "--data", str(d / "ds.json"), "--iterations", "300",
                 "--out", str(d / "model.bin")]) == EXIT_OK
    assert main(["train", "--data", str(d / "ds.json"), "--iterations", "50", "--members", "2",
                 "--out", str(d / "ens")]) == EXIT_OK
    return d


def test_help_and_bad_arguments(capsys):
    assert run(capsys, "--help")[0] == EXIT_OK
    assert run(capsys, "no-such-command")[0] == EXIT_VALIDATION
    assert run(capsys, "gear", "--zs", "abc")[0] == EXIT_VALIDATION


def test_valve_reference(capsys):
    out = run_json(capsys, "valve")
    assert out["units"] == "kPa"
    assert out["crack_pressure"] == pytest.approx(1.4662e9, rel=1e-4)
    si = run_json(capsys, "--units", "si", "valve")
    assert si["crack_pressure"] == pytest.approx(out["crack_pressure"] * 1e3, rel=1e-12)


def test_gear_standard(capsys):
    out = run_json(capsys, "gear", "--standard", "--mu-g", "0.1")
    assert out["ratio_exact"] == "62/5967"
    assert out["backdrive_efficiency"] == pytest.approx(0.79248, abs=5e-5)
    assert run(capsys, "gear", "--p1-offset", "3", "--p2-offset", "-2")[0] == EXIT_INFEASIBLE


def test_stage_drop_threshold(capsys):
    out = run_json(capsys, "--units", "si", "stage-drop", "--zeta", "0.32", "--threshold")
    assert out["units"] == "m"
    assert out["threshold_zeta"] == pytest.approx(0.32, abs=0.03)
    code, text, _ = run(capsys, "stage-drop", "--sweep", "5")
    cols, rows = parse_table(text)
    assert code == EXIT_OK and cols == ["zeta", "displacement", "oscillates"] and len(rows) == 5
    d = [r[1] for r in rows]
    assert all(b <= a for a, b in zip(d, d[1:]))


def test_clutch_force(capsys):
    a = run_json(capsys, "clutch-force", "--mu-f", "0.5", "--eps-r", "3", "--area", "900", "--gap", "0.1",
                 "--voltage", "1000", "--model", "ideal")
    b = run_json(capsys, "clutch-force", "--mu-f", "0.5", "--eps-r", "3", "--area", "900", "--gap", "0.1",
                 "--voltage", "1000", "--model", "airgap")
    assert b["friction_force_n"] == pytest.approx(3 * a["friction_force_n"], rel=1e-12)


def test_solve_bvp_exit_codes(capsys, tmp_path):
    out = run_json(capsys, "solve-bvp", "--pressure", "3", "--force", "20")
    assert out["height"] > 0 and abs(out["residual"]) < 1e-6
    assert run(capsys, "solve-bvp", "--pressure", "4", "--force", "60")[0] == EXIT_NUMERIC
    p = tmp_path / "prof.csv"
    assert main(["--out", str(p), "solve-bvp", "--pressure", "3", "--force", "20", "--profile"]) == EXIT_OK
    cols, rows = parse_table(p.read_text())
    assert cols[0] == "r" and len(rows) == 201


def test_sweep_flags_failures(capsys):
    code, text, _ = run(capsys, "sweep", "--pressures", "3,4", "--forces", "20,60")
    cols, rows = parse_table(text)
    assert code == EXIT_OK and len(rows) == 4
    conv = {(r[0], r[1]): r[4] for r in rows}
    assert conv[(3.0, 20.0)] is True and conv[(4.0, 60.0)] is False
    assert run(capsys, "sweep", "--pressures", "a:b", "--forces", "1")[0] == EXIT_VALIDATION


def test_fit_material_recovers_parameters(capsys, tmp_path):
    m = GentMaterial.from_kpa(31.7, 39.6)
    rows = "\n".join(f"{float(lam)!r},{uniaxial_stress(float(lam), m) / 1e3!r}" for lam in np.linspace(1.05, 5.0, 30))
    p = tmp_path / "uni.csv"
    p.write_text("stretch,stress_kpa\n" + rows + "\n")
    out = run_json(capsys, "fit-material", "--data", str(p))
    assert out["mu"] == pytest.approx(31.7, rel=1e-6) and out["jm"] == pytest.approx(39.6, rel=1e-6)


def test_data_commands(capsys, work, tmp_path):
    out = run_json(capsys, "data", "validate", str(work / "ds.json"))
    assert out["valid"] and out["membranes"] == 4
    trimmed = tmp_path / "t.json"
    assert run(capsys, "--out", str(trimmed), "data", "trim", str(work / "ds.json"))[0] == EXIT_OK
    assert json.loads(trimmed.read_text())["format"] == "spadesign-lift-dataset"
    assert run(capsys, "data", "trim", str(work / "ds.json"))[0] == EXIT_VALIDATION
    code, text, _ = run(capsys, "data", "convert-info")
    assert code == EXIT_OK and "spadesign data validate" in text
    bad = tmp_path / "bad.json"
    bad.write_text('{"format": "other", "version": 1, "membranes": {}}')
    code, _, err = run(capsys, "data", "validate", str(bad))
    assert code == EXIT_VALIDATION and "format" in err
    assert run(capsys, "data", "validate", str(tmp_path / "missing.json"))[0] == EXIT_VALIDATION


def test_kfold(capsys, work):
    out = run_json(capsys, "kfold", "--data", str(work / "ds.json"), "--k", "2", "--iterations", "20")
    assert len(out["fold_rmse_n"]) == 2
    assert run(capsys, "kfold", "--data", str(work / "ds.json"), "--k", "9")[0] == EXIT_VALIDATION


def test_optimize(capsys, work, tmp_path):
    t = tmp_path / "targets.json"
    t.write_text(json.dumps({"targets": [{"pressure_kpa": 5.0, "force_n": 5.0}]}))
    out = run_json(capsys, "optimize", "--model", str(work / "model.bin"), "--targets", str(t), "--starts", "3")
    assert np.isfinite(out["posterior"]) and out["top"][0]["posterior"] == out["posterior"]
    code, text, _ = run(capsys, "optimize", "--model", str(work / "model.bin"), "--targets", str(t),
                        "--starts", "2", "--csv")
    cols, rows = parse_table(text)
    assert code == EXIT_OK and cols[0] == "thickness_mm" and cols[-1] == "posterior"
    t.write_text(json.dumps({"targets": [{"pressure_kpa": 5.0}]}))
    assert run(capsys, "optimize", "--model", str(work / "model.bin"), "--targets", str(t))[0] == EXIT_VALIDATION


def test_codesign(capsys, work, tmp_path):
    b = tmp_path / "body.json"
    body = {"mass": 0.2, "com_arm": 0.1, "arm_a": 0.2, "arm_b": None, "theta_max": 0.2}
    b.write_text(json.dumps({"body": body, "bounds_a": {"ring_counts": [0]}}))
    out = run_json(capsys, "codesign", "--model", str(work / "model.bin"), "--body", str(b), "--starts", "2")
    assert out["design_b"] is None and out["peak_force_n"] > 0
    body["mass"] = 1e4
    b.write_text(json.dumps({"body": body}))
    assert run(capsys, "codesign", "--model", str(work / "model.bin"), "--body", str(b),
               "--starts", "1")[0] == EXIT_INFEASIBLE


def test_acquire_and_uncertainty(capsys, work):
    out = run_json(capsys, "acquire", "--ensemble", str(work / "ens"), "--q", "2", "--starts", "2")
    assert len(out) == 2 and out[0]["alpha"] >= 0
    u = run_json(capsys, "uncertainty", "--ensemble", str(work / "ens"), "--samples", "20")
    assert u["mean_std_n"] >= 0 and u["samples"] == 20
    assert run(capsys, "acquire", "--ensemble", str(work))[0] == EXIT_VALIDATION
