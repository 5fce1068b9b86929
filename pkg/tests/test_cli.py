import json
import math

import pytest

from qgabor.cli import main


def _gen(out, kind, *extra, file="ps.json"):
    assert main(["--out", str(out), "generate", kind, "--file", file, *extra]) == 0
    return str(out / file)


def _report(out, stem):
    return json.loads((out / f"{stem}.json").read_text())


def test_generate_and_rerun_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        _gen(out, "poisson", "--side", "10", "--intensity", "2")
        assert main(["--out", str(out), "--seed", "0", "analyze", str(out / "ps.json"), "--rel", "--density", "4,8"]) == 0
    for name in ("ps.json", "analyze.json", "density.csv", "density.gp"):
        assert (a / name).read_bytes().replace(str(a).encode(), b"") == (b / name).read_bytes().replace(str(b).encode(), b"")


def test_seed_changes_poisson(tmp_path):
    main(["--out", str(tmp_path), "--seed", "1", "generate", "poisson", "--file", "one.json"])
    main(["--out", str(tmp_path), "--seed", "2", "generate", "poisson", "--file", "two.json"])
    assert (tmp_path / "one.json").read_bytes() != (tmp_path / "two.json").read_bytes()


def test_run_config_embedded(tmp_path):
    _gen(tmp_path, "lattice", "--side", "4")
    rc = _report(tmp_path, "generate")["run_config"]
    assert rc["command"] == "generate"
    assert rc["grid"] == {"n": 512, "L": 16.0}
    assert rc["tolerance"] == 1e-6
    assert rc["params"]["kind"] == "lattice"


def test_lattice_count(tmp_path):
    _gen(tmp_path, "lattice", "--matrix", "0.5,0,0,0.5")
    assert _report(tmp_path, "generate")["points"] == 41 * 41


def test_analyze_hole_and_patches(tmp_path):
    f = _gen(tmp_path, "lattice", "--side", "20")
    assert main(["--out", str(tmp_path), "analyze", f, "--hole", "--patches", "1", "--rel"]) == 0
    rep = _report(tmp_path, "analyze")
    assert rep["hole"]["lower"] <= math.sqrt(2) / 2 + 1e-12 <= rep["hole"]["upper"]
    assert rep["rel"] == 4
    assert rep["patches"]["classes"] == 1
    assert (tmp_path / "patches.csv").exists()


def test_analyze_sturmian_density(tmp_path):
    f = _gen(tmp_path, "sturmian", "--side", "104")
    assert main(["--out", str(tmp_path), "analyze", f, "--density", "50,80,100"]) == 0
    assert _report(tmp_path, "analyze")["density"]["estimate"] == pytest.approx(0.5, rel=0.02)
    gp = (tmp_path / "density.gp").read_text()
    assert "density.csv" in gp and gp.startswith("set datafile separator")


def test_holefill(tmp_path):
    f = _gen(tmp_path, "lattice", "--side", "24", "--matrix", "2,0,0,2")
    assert main(["--out", str(tmp_path), "holefill", f, "--eps", "0.8"]) == 0
    res = _report(tmp_path, "holefill")["result"]
    assert res["hole_sequence"][-1]["upper"] < 0.8
    assert (tmp_path / "holefill.csv").exists()


def test_frame_and_trace_on_half_lattice(tmp_path):
    f = _gen(tmp_path, "lattice", "--side", "40", "--matrix", "0.5,0,0,0.5")
    assert main(["--out", str(tmp_path), "frame", f, "--bounds", "--dual"]) == 0
    rep = _report(tmp_path, "frame")
    assert rep["box_covered"]
    assert rep["frame"]["A"] == pytest.approx(3.9739166, rel=1e-6)
    assert (tmp_path / "dual.csv").exists()
    assert main(["--out", str(tmp_path), "trace", f, "--k-ladder", "8"]) == 0
    row = _report(tmp_path, "trace")["frame_measure"]["rows"][0]
    assert row["unnormalized"] == pytest.approx(0.25, rel=0.02)


def test_frame_uncovered_box_fails(tmp_path):
    f = _gen(tmp_path, "lattice", "--side", "20", "--matrix", "0.5,0,0,0.5")
    assert main(["--out", str(tmp_path), "frame", f, "--dual"]) == 1


def test_gaplabel(tmp_path):
    f = _gen(tmp_path, "marked", "--side", "68")
    assert main(["--out", str(tmp_path), "gaplabel", f, "--theta", "0.7", "--side", "64"]) == 0
    rep = _report(tmp_path, "gaplabel")["report"]
    assert rep["twisted_generator"] == pytest.approx(0.7)
    assert len(rep["frequency_generators"]) == 6


def test_gaplabel_rejects_half_lattice(tmp_path):
    f = _gen(tmp_path, "lattice", "--side", "8", "--matrix", "0.5,0,0,0.5")
    assert main(["--out", str(tmp_path), "gaplabel", f]) == 1


def test_config_overrides_flags(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"side": 4, "matrix": [2, 0, 0, 2]}))
    _gen(tmp_path, "lattice", "--side", "40")
    assert main(["--out", str(tmp_path), "--config", str(cfg), "generate", "lattice", "--side", "40"]) == 0
    rep = _report(tmp_path, "generate")
    assert rep["points"] == 9
    assert rep["run_config"]["params"]["side"] == 4


@pytest.mark.parametrize("argv", [
    ["generate", "penrose"],
    ["frobnicate"],
    ["analyze", "does-not-exist.json", "--rel"],
    ["acceptance", "--only", "99"],
])
def test_usage_errors(tmp_path, argv):
    assert main(["--out", str(tmp_path), *argv]) == 2


def test_bad_config_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"no_such_flag": 1}))
    assert main(["--out", str(tmp_path), "--config", str(cfg), "generate", "lattice"]) == 2


@pytest.mark.parametrize("value,code", [("0", 2), ("lots", 2), ("1", 0)])
def test_thread_env(tmp_path, monkeypatch, value, code):
    monkeypatch.setenv("QG_THREADS", value)
    assert main(["--out", str(tmp_path), "generate", "lattice", "--side", "4"]) == code


def test_acceptance_subset(tmp_path, capsys):
    assert main(["--out", str(tmp_path), "acceptance", "--only", "1,3"]) == 0
    lines = [ln for ln in capsys.readouterr().out.splitlines() if ln.startswith("[")]
    assert len(lines) == 2 and all(ln.startswith("[PASS]") for ln in lines)
    assert _report(tmp_path, "acceptance")["passed"] == 2
