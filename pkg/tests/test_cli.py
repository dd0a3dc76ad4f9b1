from __future__ import annotations

import io
import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

from heightlab.cache import Cache, cache_key, resolve_cache_dir
from heightlab.cli import run

CONIC = {"degree": 2, "nvars": 3, "terms": [[[0, 0, 2], -1], [[1, 1, 0], 1]]}


def call(*argv: str) -> tuple[int, str, str]:
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, data in {
        "conic": CONIC,
        "p1": {"projective_space": 1},
        "pyth3": {"degree": 2, "nvars": 3, "terms": [[[2, 0, 0], 1], [[0, 2, 0], 1], [[0, 0, 2], -3]]},
        "square": {"name": "P1xP1", "vertices": [[-1, -1], [1, -1], [-1, 1], [1, 1]]},
        "lines": [{"name": "L", "equations": [[1, 0, 0]]}],
    }.items():
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(data))
        paths[name] = str(p)
    return paths


@pytest.fixture(autouse=True)
def no_env_cache(monkeypatch, tmp_path):
    monkeypatch.delenv("HEIGHTLAB_CACHE", raising=False)
    monkeypatch.chdir(tmp_path)


def test_height_point():
    code, out, _ = call("height-point", "--coords", "1,1/2", "--metric", "weil")
    assert code == 0 and json.loads(out)["H"] == 2
    code, out, _ = call("height-point", "--coords", "1+i,2", "--metric", "weil")
    assert code == 0 and json.loads(out)["point"] == ["1", "1-1i"]


def test_p1_masses():
    code, out, _ = call("p1", "masses", "--metric", "fs")
    res = json.loads(out)
    assert code == 0
    assert res["complex"] == pytest.approx(math.pi, abs=1e-8)
    assert res["real"] == pytest.approx(math.pi, abs=1e-8)


def test_p1_other_commands():
    assert json.loads(call("p1", "energy", "--metric", "fs")[1])["value"] == pytest.approx(0.5, abs=1e-8)
    assert call("p1", "mt", "--fourier", "0,1")[0] == 0
    assert call("p1", "real-theorem", "--route", "circle")[0] == 0


def test_exit_codes():
    code, _, err = call("height-point", "--bogus")
    assert code == 2 and json.loads(err)["exit_code"] == 2
    assert call("no-such-command")[0] == 2
    assert call("height-point", "--coords", "0,0")[0] == 2
    assert call("localdensity", "--form", "missing.json", "--p", "3")[0] == 2
    code, _, err = call("check", "--what", "zhang", "--inputs", "e=1;3,h_hat=2")
    assert code == 2 and json.loads(err)["error"] == "OrderViolation"


def test_budget_exit_code(files):
    code, _, err = call("count", "--variety", files["p1"], "--B", "1e6", "--budget", "10")
    assert code == 3 and json.loads(err)["exit_code"] == 3


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "heightlab.cli", "height-point", "--coords", "3,4"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["H"] == 4


def test_eulerprod_csv_and_cache(files, tmp_path):
    cache = tmp_path / "cache"
    args = ("eulerprod", "--form", files["conic"], "--pmax", "30", "--cache-dir", str(cache))
    c1, o1, _ = call(*args)
    c2, o2, _ = call(*args)
    c3, o3, _ = call(*args[:-2], "--no-cache")
    assert c1 == c2 == c3 == 0 and o1 == o2 == o3
    entries = list(cache.rglob("*.json"))
    assert len(entries) == 1
    _, csv_out, _ = call(*args, "--format", "csv")
    lines = csv_out.splitlines()
    assert lines[0] == "p,factor,factor_float,partial_product"
    assert lines[1].startswith("2,3/4,0.75,")
    # corrupted entry: recomputed and overwritten
    entries[0].write_text("{not json")
    c4, o4, _ = call(*args)
    assert c4 == 0 and o4 == o1
    assert json.loads(entries[0].read_text())["value"] == json.loads(o1)


def test_env_cache_dir(files, tmp_path, monkeypatch):
    env_dir = tmp_path / "envcache"
    flag_dir = tmp_path / "flagcache"
    monkeypatch.setenv("HEIGHTLAB_CACHE", str(env_dir))
    call("localdensity", "--form", files["conic"], "--p", "3")
    assert list(env_dir.rglob("*.json"))
    call("localdensity", "--form", files["conic"], "--p", "5", "--cache-dir", str(flag_dir))
    assert list(flag_dir.rglob("*.json"))
    assert resolve_cache_dir(None, disabled=True) is None


def test_cache_unit(tmp_path):
    c = Cache(tmp_path)
    calls = []
    f = lambda: calls.append(1) or {"x": [1, 2.5]}
    assert c.get_put("op", {"a": 1}, f) == {"x": [1, 2.5]}
    assert c.get_put("op", {"a": 1}, f) == {"x": [1, 2.5]}
    assert len(calls) == 1 and c.hits == 1
    assert cache_key("op", {"a": 1, "b": 2}) == cache_key("op", {"b": 2, "a": 1})
    assert cache_key("op", {"a": 1}) != cache_key("op2", {"a": 1})
    off = Cache(None)
    off.get_put("op", {"a": 1}, f)
    assert len(calls) == 2


def test_count_outputs(files, tmp_path):
    code, out, _ = call("count", "--variety", files["p1"], "--B", "4", "--grid", "1")
    assert code == 0 and json.loads(out)["counts"] == [8]
    code, out, _ = call("count", "--variety", files["p1"], "--B", "100", "--grid", "4",
                        "--format", "csv", "--plot")
    assert out.splitlines()[0] == "B,N" and len(out.splitlines()) == 5
    svg = Path("heightlab-count.svg").read_text()
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    code, out, _ = call("count", "--variety", files["conic"], "--B", "50", "--grid", "1",
                        "--exclude", files["lines"])
    code2, out2, _ = call("count", "--variety", files["conic"], "--B", "50", "--grid", "1")
    assert json.loads(out)["counts"][0] <= json.loads(out2)["counts"][0]


def test_out_directory_manifest(files, tmp_path):
    d = tmp_path / "run"
    code, out, _ = call("count", "--variety", files["p1"], "--B", "64", "--grid", "4",
                        "--plot", "--out", str(d))
    assert code == 0
    assert {p.name for p in d.iterdir()} == {"result.json", "manifest.json", "grid.csv", "plot.svg"}
    man = json.loads((d / "manifest.json").read_text())
    assert man["command"] == "count" and len(man["inputs_hash"]) == 64
    assert "variety" in man["input_files_sha256"] and man["versions"]["numpy"]
    # identical run config gives identical bytes
    d2 = tmp_path / "run2"
    call("count", "--variety", files["p1"], "--B", "64", "--grid", "4", "--plot", "--out", str(d2))
    for name in ("result.json", "grid.csv", "plot.svg"):
        assert (d / name).read_bytes() == (d2 / name).read_bytes()
    assert json.loads((d2 / "manifest.json").read_text())["inputs_hash"] == man["inputs_hash"]


def test_config_file(files, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# defaults\nvariety = {files['p1']}\nB = 4\ngrid = 1\n")
    code, out, _ = call("count", "--config", str(cfg))
    assert code == 0 and json.loads(out)["counts"] == [8]
    code, out, _ = call("count", "--config", str(cfg), "--B", "9")
    assert json.loads(out)["counts"] == [16]
    cfg.write_text("nonsense_key = 1\n")
    assert call("count", "--config", str(cfg), "--variety", files["p1"], "--B", "4")[0] == 2


def test_minpoint_toric_check_peyre(files):
    code, out, _ = call("minpoint", "--variety", files["pyth3"], "--cap", "1e4")
    res = json.loads(out)
    assert code == 0 and res["point"] is None and res["certificate"]["p"] == 3
    code, out, _ = call("toric", "--polytope", files["square"])
    res = json.loads(out)
    assert res["degree"] == "8" and res["binomials"] == ["x1*x4 - x2*x3"] and res["kps"]
    code, out, _ = call("check", "--what", "main", "--inputs", "h=2,mu_C=3.141592653589793,vol=2,n=1")
    assert code == 0 and abs(json.loads(out)["slack"]) < 1e-12
    code, out, _ = call("check", "--what", "zhang", "--inputs", '{"e": [0, 0], "h_hat": 0}')
    assert json.loads(out)["verdict"] == "satisfied"
    code, out, _ = call("check", "--what", "diagonal", "--inputs", "d=2,a=2;1;1;1")
    assert json.loads(out)["rhs"] == pytest.approx(json.loads(out)["c_n"] - 4 * math.log(2))
    code, out, _ = call("peyre", "--eta", "0.5", "--mu-r", "4")
    assert json.loads(out)["theta"] == 2.0
    assert call("peyre", "--eta", "1", "--mu-c", "1", "--field", "1,1,2")[0] == 2


def test_mahler_and_localdensity(files):
    code, out, _ = call("mahler", "--form", files["conic"])
    assert code == 0 and "m" in json.loads(out)
    code, out, _ = call("localdensity", "--form", files["conic"], "--p", "5")
    assert json.loads(out)["mu_p"] == "6/5"
