import json
import os
import subprocess
import sys

import pytest

from arlasso.cli import _workers, main

SMALL = """[benchmark]
methods = cvlasso, arl
reps = 2
seed = 3

[arl]
m = 4

[data.small]
example = 1-desk
n_samples = 240
"""


@pytest.fixture
def small_cfg(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL)
    return path


def run_json(argv, capsys):
    assert main(argv) == 0
    return json.loads(capsys.readouterr().out)


def test_generate_example1_three_files_and_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["generate", "--out", str(a), "--seed", "5"]) == 0
    assert main(["generate", "--out", str(b), "--seed", "5"]) == 0
    assert sorted(p.name for p in a.iterdir()) == ["X.csv", "truth.json", "y.csv"]
    assert len((a / "X.csv").read_text().splitlines()) == 1001
    for name in ("X.csv", "y.csv", "truth.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_generate_invalid_key_exit_2(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[data.x]\nexample = 1\nsamples = 10\n")
    assert main(["generate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "samples" in capsys.readouterr().err


def test_unknown_method_exit_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["select", "--method", "lars"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["benchmark", "--out", str(tmp_path), "--methods", "cvlasso,lars"])
    assert exc.value.code == 2


def test_missing_out_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["generate"])
    assert exc.value.code == 2


def test_missing_data_is_runtime_error(tmp_path):
    assert main(["select", "--data", str(tmp_path / "nowhere")]) == 1


def test_select_arl_rescue_disabled_equals_cvlasso(small_cfg, tmp_path, capsys):
    base = run_json(["select", "--config", str(small_cfg), "--method", "cvlasso"], capsys)
    arl = run_json(["select", "--config", str(small_cfg), "--method", "arl", "--tau-co", "4"], capsys)
    assert base["support"]
    assert arl["report"]["tau_co"] >= arl["report"]["m_effective"]
    assert arl["support"] == base["support"]
    assert set(base["coefficients"]) == {str(j) for j in base["support"]}


def test_select_from_data_dir_and_csv(small_cfg, tmp_path, capsys):
    d = tmp_path / "d"
    assert main(["generate", "--config", str(small_cfg), "--out", str(d)]) == 0
    a = run_json(["select", "--data", str(d), "--seed", "3"], capsys)
    ev = run_json(["evaluate", "--data", str(d), "--seed", "3"], capsys)
    assert ev["n_selected"] == len(a["support"])
    assert 0 <= ev["f1"] <= 1
    # raw CSV path: the y column appended to X
    lines = (d / "X.csv").read_text().splitlines()
    ys = (d / "y.csv").read_text().splitlines()
    raw = tmp_path / "raw.csv"
    raw.write_text("\n".join(f"{x},{t}" for x, t in zip(lines, ys)) + "\n")
    out = run_json(["evaluate", "--csv", str(raw), "--target", "y"], capsys)
    assert out["normalized_rmse"] > 0


@pytest.mark.slow
def test_select_cvlasso_example1_support_size(tmp_path, capsys):
    d = tmp_path / "e1"
    assert main(["generate", "--out", str(d), "--seed", "1"]) == 0
    out = run_json(["select", "--data", str(d), "--method", "cvlasso", "--seed", "1"], capsys)
    assert 20 <= len(out["support"]) <= 400
    assert out["lambda"] > 0


def test_benchmark_rows_and_resume(small_cfg, tmp_path):
    out = tmp_path / "bench"
    assert main(["benchmark", "--config", str(small_cfg), "--out", str(out), "--workers", "1"]) == 0
    table = (out / "table.csv").read_text().splitlines()
    assert len(table) == 1 + 2
    assert table[1].startswith("small,cvlasso,2,0,")
    detail = json.loads((out / "detail.json").read_text())
    assert len(detail["rows"]) == 4
    stamps = {p.name: p.stat().st_mtime_ns for p in (out / "reps").iterdir()}
    # rerun with one more rep: the two finished units are reused untouched
    assert main(["benchmark", "--config", str(small_cfg), "--out", str(out), "--reps", "3",
                 "--workers", "1"]) == 0
    for name, t in stamps.items():
        assert (out / "reps" / name).stat().st_mtime_ns == t
    assert len(list((out / "reps").iterdir())) == 3
    again = (out / "table.csv").read_text().splitlines()
    assert again[1].startswith("small,cvlasso,3,0,")


def test_benchmark_config_change_invalidates_cache(small_cfg, tmp_path):
    out = tmp_path / "bench"
    assert main(["benchmark", "--config", str(small_cfg), "--out", str(out), "--reps", "1",
                 "--methods", "cvlasso", "--workers", "1"]) == 0
    first = (out / "reps" / "small__0000.json").read_text()
    assert main(["benchmark", "--config", str(small_cfg), "--out", str(out), "--reps", "1",
                 "--methods", "cvlasso,arl", "--workers", "1"]) == 0
    assert (out / "reps" / "small__0000.json").read_text() != first


def test_workers_env_fallback(monkeypatch):
    monkeypatch.setenv("ARL_WORKERS", "3")
    assert _workers(None) == 3
    assert _workers(2) == 2
    monkeypatch.delenv("ARL_WORKERS")
    assert _workers(None) == (os.cpu_count() or 1)


def test_console_entry_point_help():
    res = subprocess.run([sys.executable, "-m", "arlasso.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("generate", "select", "benchmark", "evaluate"):
        assert cmd in res.stdout
