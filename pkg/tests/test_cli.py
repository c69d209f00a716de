import json
import subprocess
import sys

import numpy as np
import pytest

from liverseg.cli import main
from liverseg.imgio import GrayImage, load_pgm, save_pgm


def make_corpus(directory, seeds, size=96, sigma=0.0):
    directory.mkdir(parents=True, exist_ok=True)
    for seed in seeds:
        args = ["phantom", "--width", str(size), "--height", str(size), "--seed", str(seed),
                "--sigma", str(sigma), "--out", str(directory / f"case{seed:02d}")]
        assert main(args) == 0
    return directory


@pytest.fixture
def blank(tmp_path):
    path = tmp_path / "blank.pgm"
    save_pgm(GrayImage(np.zeros((64, 64))), path)
    return path


def test_phantom_files_and_determinism(tmp_path):
    assert main(["phantom", "--width", "96", "--height", "80", "--out", str(tmp_path / "a")]) == 0
    assert main(["phantom", "--width", "96", "--height", "80", "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a.pgm").read_bytes() == (tmp_path / "b.pgm").read_bytes()
    assert (tmp_path / "a_truth.pgm").read_bytes() == (tmp_path / "b_truth.pgm").read_bytes()
    img = load_pgm(tmp_path / "a.pgm")
    assert (img.width, img.height) == (96, 80)


def test_phantom_defaults(tmp_path):
    assert main(["phantom", "--out", str(tmp_path / "d")]) == 0
    assert load_pgm(tmp_path / "d.pgm").shape == (512, 512)


def test_phantom_too_small(tmp_path, capsys):
    assert main(["phantom", "--width", "16", "--out", str(tmp_path / "x")]) == 1
    assert "at least 64" in capsys.readouterr().err


def test_segment_success(tmp_path):
    make_corpus(tmp_path / "c", [1])
    out = tmp_path / "seg"
    assert main(["segment", str(tmp_path / "c" / "case01.pgm"), "--out", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["result.json", "runs.jsonl"] + [f"stage_{c}.pgm" for c in "abcdef"] + ["stage_g.ppm"]


def test_segment_blank_exits_2(tmp_path, blank, capsys):
    out = tmp_path / "seg"
    assert main(["segment", str(blank), "--out", str(out)]) == 2
    assert sorted(p.name for p in out.glob("stage_*")) == ["stage_a.pgm", "stage_b.pgm", "stage_c.pgm"]
    assert not (out / "result.json").exists()
    captured = capsys.readouterr()
    assert captured.out == "" and "liver not found" in captured.err


def test_segment_bad_band(tmp_path, blank, capsys):
    assert main(["segment", str(blank), "--s1", "200", "--s2", "100", "--out", str(tmp_path / "o")]) == 1
    assert "s1 must be ≤ s2" in capsys.readouterr().err


@pytest.mark.parametrize("flags", [["--median", "4"], ["--se-shape", "disk"], ["--min-area", "1.5"], ["--bogus"]])
def test_segment_bad_flags(tmp_path, blank, flags):
    assert main(["segment", str(blank), "--out", str(tmp_path / "o"), *flags]) == 1


def test_segment_missing_input(tmp_path):
    assert main(["segment", str(tmp_path / "nope.pgm"), "--out", str(tmp_path / "o")]) == 1


def test_config_precedence(tmp_path):
    make_corpus(tmp_path / "c", [1])
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# calibrated\ns1 = 80\ns2=160\nmedian=5\nmean_dice=1.0\n")
    out = tmp_path / "seg"
    img = str(tmp_path / "c" / "case01.pgm")
    assert main(["segment", img, "--config", str(cfg), "--s2", "170", "--out", str(out)]) == 0
    config = json.loads((out / "result.json").read_text())["config"]
    assert config == {
        "thresholds": {"s1": 80, "s2": 170},
        "median_window": 5,
        "se_shape": "square",
        "se_radius": 2,
        "min_area_fraction": 0.02,
    }


def test_manifest_line_per_run(tmp_path):
    manifest = tmp_path / "m.jsonl"
    make_corpus(tmp_path / "c", [1])
    img = str(tmp_path / "c" / "case01.pgm")
    for _ in range(2):
        main(["--manifest", str(manifest), "segment", img, "--out", str(tmp_path / "s")])
    lines = [json.loads(x) for x in manifest.read_text().splitlines()]
    assert len(lines) == 2
    assert lines[0]["command"] == "segment" and lines[0]["inputs"] == [img]
    assert lines[0]["config"]["thresholds"] == {"s1": 90, "s2": 150}
    assert {"version", "duration_s", "exit_code"} <= set(lines[0])


def test_eval_noise_free(tmp_path, capsys):
    corpus = make_corpus(tmp_path / "c", range(10))
    capsys.readouterr()
    assert main(["eval", "--corpus", str(corpus)]) == 0
    assert capsys.readouterr().out.strip() == "mean_dice=1.000 n_failed=0"
    doc = json.loads((corpus / "report.json").read_text())
    assert len(doc["rows"]) == 10
    assert (corpus / "report.csv").read_text().startswith("id,dice,jaccard,area_auto,area_truth,verdict\n")


def test_eval_blank_pair(tmp_path, capsys):
    corpus = tmp_path / "c"
    corpus.mkdir()
    save_pgm(GrayImage(np.zeros((64, 64))), corpus / "blank.pgm")
    save_pgm(GrayImage(np.zeros((64, 64))), corpus / "blank_truth.pgm")
    assert main(["eval", "--corpus", str(corpus)]) == 0
    assert "n_failed=1" in capsys.readouterr().out


def test_eval_empty_dir(tmp_path):
    (tmp_path / "empty").mkdir()
    assert main(["eval", "--corpus", str(tmp_path / "empty")]) == 1
    assert main(["eval", "--corpus", str(tmp_path / "missing")]) == 1


def test_calibrate(tmp_path):
    corpus = make_corpus(tmp_path / "c", [1, 2], size=80)
    out = tmp_path / "cal.cfg"
    assert main(["calibrate", "--corpus", str(corpus), "--step", "10", "--out", str(out)]) == 0
    first = out.read_text()
    values = dict(line.split("=") for line in first.splitlines())
    assert set(values) == {"s1", "s2", "mean_dice"}
    assert float(values["mean_dice"]) == 1.0
    assert main(["calibrate", "--corpus", str(corpus), "--step", "10", "--out", str(out)]) == 0
    assert out.read_text() == first
    # the written file is a valid config for segment
    assert main(["segment", str(corpus / "case01.pgm"), "--config", str(out), "--out", str(tmp_path / "s")]) == 0


@pytest.mark.parametrize("step", ["0", "65"])
def test_calibrate_bad_step(tmp_path, step):
    corpus = make_corpus(tmp_path / "c", [1], size=64)
    assert main(["calibrate", "--corpus", str(corpus), "--step", step, "--out", str(tmp_path / "x")]) == 1


def test_calibrate_empty(tmp_path):
    (tmp_path / "e").mkdir()
    assert main(["calibrate", "--corpus", str(tmp_path / "e"), "--out", str(tmp_path / "x")]) == 1


def test_histogram(tmp_path):
    path = tmp_path / "seven.pgm"
    save_pgm(GrayImage(np.full((4, 4), 7)), path)
    out = tmp_path / "h.csv"
    assert main(["histogram", str(path), "--out", str(out)]) == 0
    rows = [tuple(map(int, line.split(","))) for line in out.read_text().splitlines()]
    assert len(rows) == 256
    assert rows[7] == (7, 16)
    assert sum(c for _, c in rows) == 16
    assert [v for v, _ in rows] == list(range(256))


def test_histogram_unreadable(tmp_path):
    assert main(["histogram", str(tmp_path / "missing.pgm")]) == 1
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P2 1 1 255\n0")
    assert main(["histogram", str(bad)]) == 1


def test_module_entry_point_exit_codes(tmp_path, blank):
    run = lambda *a: subprocess.run([sys.executable, "-m", "liverseg", *a], capture_output=True, text=True)
    assert run("segment", str(blank), "--out", str(tmp_path / "o")).returncode == 2
    usage = run("segment")
    assert usage.returncode == 1 and usage.stdout == ""
    assert run("--version").stdout.startswith("liverseg ")
