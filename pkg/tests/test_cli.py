import csv
import json
import os
from pathlib import Path

import numpy as np
import pytest

from releq.branch_analysis import Branch, make_point
from releq.cli import main
from releq.export import branch_header, monitor, write_branch_csv, write_svg
from releq.models import default_wave_params, wave_reference, wave_system

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

RUNS = [
    ("find-re", "wave_find_re.json"),
    ("reduce", "wave_reduce.json"),
    ("stability", "wave_stability.json"),
    ("persist", "wave_persist.json"),
    ("continue", "wave_continue_xi2.json"),
]


def run_cli(analysis, config, out, seed=0):
    return main([analysis, "--config", str(config), "--out", str(out), "--seed", str(seed)])


def load(path):
    with open(path) as fh:
        return json.load(fh)


def all_drifts(obj):
    if isinstance(obj, dict):
        for k, v in obj.items():
            if k == "drift":
                yield v
            else:
                yield from all_drifts(v)
    elif isinstance(obj, list):
        for v in obj:
            yield from all_drifts(v)


@pytest.fixture(scope="module")
def bifurcate_out(tmp_path_factory):
    out = tmp_path_factory.mktemp("bif")
    assert run_cli("bifurcate", CONFIGS / "wave_bifurcate.json", out) == 0
    return out


@pytest.mark.parametrize("analysis,name", RUNS)
def test_modes_succeed_and_pass_drift(analysis, name, tmp_path):
    assert run_cli(analysis, CONFIGS / name, tmp_path) == 0
    man = load(tmp_path / "manifest.json")
    assert man["status"] == "ok" and man["error"] is None
    assert man["analysis"] == analysis and len(man["config_hash"]) == 64
    for f in man["files"]:
        assert (tmp_path / f).exists()
        if f.endswith(".json"):
            for d in all_drifts(load(tmp_path / f)):
                assert d <= 1e-5


def test_reruns_are_byte_identical(tmp_path):
    for analysis, name in (("persist", "wave_persist.json"), ("continue", "wave_continue_xi2.json")):
        a, b = tmp_path / f"{analysis}_a", tmp_path / f"{analysis}_b"
        assert run_cli(analysis, CONFIGS / name, a, seed=7) == 0
        assert run_cli(analysis, CONFIGS / name, b, seed=7) == 0
        names = sorted(os.listdir(a))
        assert names == sorted(os.listdir(b))
        for f in names:
            assert (a / f).read_bytes() == (b / f).read_bytes(), f


def test_bifurcate_finds_one_pitchfork(bifurcate_out):
    ev = load(bifurcate_out / "events.json")["events"]
    assert len(ev) == 1
    assert ev[0]["kind"] == "pitchfork"
    assert abs(ev[0]["z"][4] - 1.0) < 1e-6
    man = load(bifurcate_out / "manifest.json")
    assert {"branch_b0.csv", "branch_b1.csv", "events.json", "diagram.svg"} <= set(man["files"])
    assert man["max_drift"] <= 1e-5
    b1 = load(bifurcate_out / "branch_b1.json")
    assert b1["kind"] == "pitchfork" and b1["parent"][0] == "b0"
    for rec in b1["points"]:
        assert rec["residual"] <= 1e-9


def test_branch_csv_header(bifurcate_out):
    with open(bifurcate_out / "branch_b0.csv") as fh:
        header = next(csv.reader(fh))
    assert header == branch_header(8, 2, 6)
    assert header[0] == "arclength" and header[-2:] == ["isotropy", "stability"]


def test_svg_styles(bifurcate_out):
    svg = (bifurcate_out / "diagram.svg").read_text()
    assert svg.startswith("<svg") and "stroke-dasharray" in svg
    assert "<line" in svg


def test_empty_seed_list_exit_2_no_files(tmp_path):
    out = tmp_path / "never"
    assert run_cli("find-re", CONFIGS / "find_re_empty.json", out) == 2
    assert not out.exists()


def test_config_errors_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_cli("reduce", bad, tmp_path / "o1") == 2
    doc = load(CONFIGS / "wave_reduce.json")
    doc["numeric"] = {"tol_rank": -1}
    neg = tmp_path / "neg.json"
    neg.write_text(json.dumps(doc))
    assert run_cli("reduce", neg, tmp_path / "o2") == 2
    assert run_cli("continue", CONFIGS / "wave_reduce.json", tmp_path / "o3") == 2
    assert main(["reduce", "--config", str(CONFIGS / "wave_reduce.json"), "--seed", "-1"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["nonsense", "--config", "x"])
    assert exc.value.code == 2


def test_analysis_failure_exit_1(tmp_path):
    doc = load(CONFIGS / "wave_reduce.json")
    doc["base"] = {"z": [0, 0, 0, 0, 1.0, 0, 0, 0], "xi": [0.3, 0.0]}
    cfg = tmp_path / "not_re.json"
    cfg.write_text(json.dumps(doc))
    out = tmp_path / "out"
    assert run_cli("reduce", cfg, out) == 1
    man = load(out / "manifest.json")
    assert man["status"] == "failed"
    assert man["error"]["type"] == "AnalysisFailed"
    assert man["error"]["inner"] == "NotARelativeEquilibrium"


def test_reduce_reports_nondegeneracy(tmp_path):
    assert run_cli("reduce", CONFIGS / "wave_reduce.json", tmp_path) == 0
    spec = load(tmp_path / "spectrum.json")
    nd = spec["wave_reference"]["nondegeneracy"]
    assert set(nd) == {"a2_minus_a4", "f2_denominator"}
    np.testing.assert_allclose(spec["eigenvalues"], spec["wave_reference"]["eigenvalues"],
                               atol=1e-12)


def test_export_helpers(tmp_path):
    p = default_wave_params(0.8)
    s = wave_system(p)
    ref = wave_reference(p, 0.3)
    pts = [make_point(s, ref.base_point, ref.generator, 0.0)]
    write_branch_csv(tmp_path / "b.csv", pts)
    rows = list(csv.reader(open(tmp_path / "b.csv")))
    assert len(rows) == 2 and float(rows[1][5]) == 0.8
    assert monitor("abs[2]")(pts[0]) == 0.8
    with pytest.raises(ValueError):
        monitor("q[1]")
    write_svg(tmp_path / "d.svg", [Branch(pts, "persistence_sigma")], "xi[1]", "abs[2]")
    assert (tmp_path / "d.svg").read_text().count("<svg") == 1
