import csv
import io
import json

import numpy as np
import pytest

from conftest import indicator_fn
from lplab import io as lio
from lplab.cli import main
from lplab.presets import DEFAULT_PRESET, PRESETS, TARGETS
from lplab.sets import DiscreteSet


def run(*argv, env=None):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), environ=env or {}, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_verify_functional_lp_bm_preset():
    code, out, _ = run("verify", "--target", "functional_lp_bm", "--preset", "indicator-equal", "--seed", "7")
    report = json.loads(out)
    assert code == 0
    assert abs(report["margin"]) < 5e-3 and report["lhs"] == pytest.approx(2.0)


def test_demo_list():
    code, out, _ = run("demo", "--list")
    assert code == 0
    names = [line.split()[0] for line in out.splitlines()]
    assert names == list(PRESETS)


def test_small_p_is_configuration_error():
    code, out, err = run("verify", "--target", "lp_bm", "--p", "0.5")
    assert code == 1 and out == ""
    assert "p must be >= 1" in err


def test_unknown_target():
    code, _, err = run("verify", "--target", "nonsense")
    assert code == 1 and "unknown verifier" in err


def test_preset_target_mismatch():
    code, _, err = run("verify", "--target", "pl", "--preset", "indicator-equal")
    assert code == 1 and "is for target" in err


def test_every_target_has_a_default_preset():
    assert set(DEFAULT_PRESET) == set(TARGETS)
    for target, preset in DEFAULT_PRESET.items():
        assert PRESETS[preset].target == target


def test_violation_exits_2(tmp_path):
    f = indicator_fn(0, 1, 33)
    lio.write_grid_function(tmp_path / "f.txt", f)
    lio.write_grid_function(tmp_path / "h.txt", indicator_fn(0, 1, 33, height=1e-3))
    code, out, _ = run("verify", "--target", "pl", "--f", str(tmp_path / "f.txt"), "--g", str(tmp_path / "f.txt"),
                       "--h", str(tmp_path / "h.txt"), "--resolution", "33")
    assert code == 2
    assert json.loads(out)["verdict"] == "hypothesis_failed"


def test_sweep_segment_lp_bm():
    code, out, _ = run("sweep", "--preset", "segment-lp-bm", "--vary", "p=3,1,2,1.5", "--lambda-resolution", "1000")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert [float(r["p"]) for r in rows] == [1.0, 1.5, 2.0, 3.0]
    for r in rows:
        p = float(r["p"])
        assert abs(float(r["lhs"]) - (1 + 2**p)) <= 1e-3
        assert r["verdict"] in ("holds", "holds_with_tolerance")
    assert list(rows[0]) == ["p", "name", "lhs", "rhs", "margin", "tolerance", "verdict", "inputs_digest"]


def test_sweep_resolution_on_functional_lp_bm():
    code, out, _ = run("sweep", "--preset", "indicator-unequal", "--vary", "resolution=65,33")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [int(r["resolution"]) for r in rows] == [33, 65]
    margins = [float(r["margin"]) for r in rows]
    assert margins[1] >= margins[0] - 1e-12


def test_sweep_empty_range():
    code, _, err = run("sweep", "--preset", "segment-lp-bm", "--vary", "p=")
    assert code == 1 and "empty range" in err


def test_sweep_without_vary():
    code, _, err = run("sweep", "--preset", "segment-lp-bm")
    assert code == 1


def test_sweep_json(tmp_path):
    code, out, _ = run("sweep", "--preset", "segment-bm", "--vary", "lam=0.25,0.5", "--format", "json")
    records = json.loads(out)
    assert code == 0 and [r["parameters"]["lam"] for r in records] == [0.25, 0.5]


def test_output_file_and_csv(tmp_path):
    target = tmp_path / "out.csv"
    code, out, _ = run("verify", "--preset", "segment-bm", "--format", "csv", "--output", str(target))
    assert code == 0 and out == ""
    rows = list(csv.DictReader(target.open()))
    assert rows[0]["lhs"] == "2.0"


def test_emit_profile(tmp_path):
    target = tmp_path / "h.csv"
    code, _, _ = run("verify", "--preset", "indicator-equal", "--resolutions", "33", "--emit-profile", str(target))
    lines = target.read_text().splitlines()
    assert code == 0 and lines[0] == "x0,value"
    assert np.allclose([float(line.split(",")[1]) for line in lines[1:]], np.sqrt(2))


def test_emit_profile_without_function(tmp_path):
    code, _, err = run("verify", "--preset", "segment-bm", "--emit-profile", str(tmp_path / "h.csv"))
    assert code == 1 and "no function" in err


def test_config_file_and_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("preset = lift-interval\nseed = 3\nsamples = 20000\n")
    _, from_file, _ = run("verify", "--config", str(cfg))
    _, from_env, _ = run("verify", "--config", str(cfg), env={"LPLAB_SEED": "4"})
    _, from_flag, _ = run("verify", "--config", str(cfg), "--seed", "5", env={"LPLAB_SEED": "4"})
    seeds = [json.loads(text)["metadata"]["seed"] for text in (from_file, from_env, from_flag)]
    assert seeds == [3, 4, 5]
    assert json.loads(from_file)["metadata"]["samples"] == 20000


def test_config_inputs_relative_to_file(tmp_path):
    lio.write_point_set(tmp_path / "K.csv", DiscreteSet([[0.0], [1.0]]))
    lio.write_point_set(tmp_path / "L.csv", DiscreteSet([[0.0], [3.0]]))
    (tmp_path / "run.cfg").write_text("target = bm\nK = K.csv\nL = L.csv\nlam = 0.5\n")
    code, out, _ = run("verify", "--config", str(tmp_path / "run.cfg"))
    assert code == 0 and json.loads(out)["lhs"] == 2.0


def test_config_errors_name_line(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("preset = segment-bm\nlam = half\n")
    code, _, err = run("verify", "--config", str(cfg))
    assert code == 1 and "run.cfg:2" in err
    cfg.write_text("preset = segment-bm\nbogus = 1\n")
    code, _, err = run("verify", "--config", str(cfg))
    assert code == 1 and "unknown key" in err


def test_malformed_input_file(tmp_path):
    bad = tmp_path / "f.txt"
    bad.write_text('{"box": {"lo": [0], "hi": [1]}, "shape": [2]}\n1\nx\n')
    code, _, err = run("verify", "--target", "lift_volume", "--f", str(bad))
    assert code == 1 and "f.txt:3" in err


def test_deterministic_output(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for target in (a, b):
        run("verify", "--preset", "lift-inclusion-indicator", "--samples", "5000", "--seed", "11", "--output", str(target))
    assert a.read_bytes() == b.read_bytes()


def test_demo_runs_preset():
    code, out, _ = run("demo", "square-bm")
    assert code == 0 and json.loads(out)["verdict"] == "holds"


def test_demo_needs_name():
    code, _, err = run("demo")
    assert code == 1 and "--list" in err
