import copy
import csv
import hashlib
import json

import pytest
from click.testing import CliRunner

from softring.cli import main
from softring.config import DEFAULTS


@pytest.fixture(autouse=True)
def restore_defaults():
    saved = copy.deepcopy(DEFAULTS)
    yield
    DEFAULTS.clear()
    DEFAULTS.update(saved)


@pytest.fixture
def run(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("SOFTRING_CONFIG", raising=False)
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(main, [str(a) for a in args], catch_exceptions=False)

    return invoke


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def manifest(path):
    with open(f"{path}.manifest.json") as fh:
        return json.load(fh)


def sha(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def test_single_point_sweep(run):
    r = run("sweep", "--metric", "sqt", "--grid", "1x1", "--m", 0.405, "--k", 0.1, "--out", "h.csv")
    assert r.exit_code == 0, r.output
    (row,) = rows("h.csv")
    assert list(row) == ["M_kg", "k_N_per_mm", "value", "flag"]
    assert float(row["value"]) == 1.0
    assert row["flag"] == "SelfContact"


def test_csv_full_precision(run):
    run("sweep", "--metric", "sqt", "--grid", "1x1", "--m", 0.405, "--k", 100, "--out", "h.csv")
    with open("h.csv") as fh:
        line = fh.read().splitlines()[1]
    mantissa = line.split(",")[2].split("e")[0]
    assert len(mantissa.replace(".", "").lstrip("-")) == 17


def test_manifest_lists_outputs(run):
    run("sweep", "--metric", "sqt", "--grid", "1x1", "--m", 0.405, "--k", 0.1, "--out", "h.csv")
    mf = manifest("h.csv")
    assert mf["schema_version"] == 1
    assert mf["outputs"] == {"h.csv": sha("h.csv")}
    assert mf["config"]["material"]["flexural_modulus_pa"] == DEFAULTS["material"]["flexural_modulus_pa"]
    assert mf["absent_points"] == []
    assert mf["wall_clock_s"] >= 0


def test_sweep_is_deterministic_and_thread_independent(run):
    args = ["sweep", "--metric", "sqt", "--grid", "loglog", "--m-range", 0.1, 1.0,
            "--k-range", 0.01, 10.0, "--n", 3, 3]
    run(*args, "--out", "a.csv")
    run(*args, "--out", "b.csv")
    run("--threads", 2, *args, "--out", "c.csv")
    assert sha("a.csv") == sha("b.csv") == sha("c.csv")
    assert len(rows("a.csv")) == 9


def test_bad_ranges_rejected(run):
    r = CliRunner().invoke(main, ["sweep", "--metric", "sqt", "--grid", "loglog", "--m-range", "1", "0.1",
                                  "--k-range", "0.01", "1", "--n", "2", "2", "--out", "x.csv"])
    assert r.exit_code != 0
    assert "increasing" in r.output


def test_squeeze_stress_limit(run):
    r = run("squeeze", "--m", 0.405, "--k", 100, "--out", "s.json")
    assert r.exit_code == 0
    with open("s.json") as fh:
        d = json.load(fh)
    assert d["limiting"] == "StressLimit"
    assert 0.0 <= d["sqt"] < 1.0


def test_config_file_and_infeasible_exit(run, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"sizing": {"twr": 8.0}}))
    r = CliRunner().invoke(main, ["--config", str(cfg), "squeeze", "--m", "0.02", "--k", "100"])
    assert r.exit_code == 2
    assert "infeasible" in r.output


def test_config_from_environment(run, tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"sizing": {"twr": 8.0}}))
    monkeypatch.setenv("SOFTRING_CONFIG", str(cfg))
    r = CliRunner().invoke(main, ["squeeze", "--m", "0.02", "--k", "100"])
    assert r.exit_code == 2


def test_curves_export(run):
    r = run("curves", "--out", "c.csv")
    assert r.exit_code == 0
    data = rows("c.csv")
    assert len(data) == 1001
    assert float(data[-1]["delta_tilde"]) == pytest.approx(2.0)
    assert "c.csv" in manifest("c.csv")["outputs"]


def test_radius_law_fit(run):
    r = run("fit", "--target", "radius-law", "--out", "f.json")
    assert r.exit_code == 0
    with open("f.json") as fh:
        d = json.load(fh)
    assert d["target"] == "radius-law"
    assert d["units"] == {"x": "kg", "y": "m"}


def test_boundary_fit_from_heatmap(run):
    run("sweep", "--metric", "sqt", "--grid", "table1", "--out", "h.csv")
    r = run("fit", "--target", "sqt-boundary", "--input", "h.csv", "--out", "f.json")
    assert r.exit_code == 0
    assert manifest("f.json")["inputs"] == {"h.csv": sha("h.csv")}
    with open("f.json") as fh:
        d = json.load(fh)
    assert d["coefficient"] == pytest.approx(0.55, rel=0.15)
    assert d["exponents"][0] == pytest.approx(0.35, abs=0.03)


def test_fit_on_empty_region_is_an_error(run, tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("M_kg,k_N_per_mm,value,flag\n")
    r = CliRunner().invoke(main, ["fit", "--target", "sqt-boundary", "--input", str(empty)])
    assert r.exit_code != 0
    assert "Error" in r.output


def test_collide_outputs(run):
    r = run("collide", "--m", 0.405, "--k", 0.1, "--v0", 3, "--out", "t.csv")
    assert r.exit_code == 0
    with open("t.json") as fh:
        d = json.load(fh)
    assert d["a_CU_max_g"] > 0 and d["a_CU_peaks"] >= 1
    assert set(manifest("t.csv")["outputs"]) == {"t.csv", "t.json"}
