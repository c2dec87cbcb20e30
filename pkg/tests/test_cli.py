import json
import subprocess
import sys

import pytest

from newtonmaps import cli, suites
from newtonmaps.suites import ConfigError, ExperimentConfig, VerificationReport

Z3 = '{"kind": "poly", "coeffs": [[-1, 0], [0, 0], [0, 0], [1, 0]]}'
QUAD = '{"kind": "poly", "coeffs": [-1, 0, 1]}'


@pytest.fixture
def docs_dir(tmp_path):
    (tmp_path / "z3.json").write_text(Z3)
    (tmp_path / "quad.json").write_text(QUAD)
    (tmp_path / "m4z2.json").write_text('{"kind": "rational", "num": [0, 0, 4], "den": [1]}')
    (tmp_path / "half.json").write_text('{"kind": "rational", "num": [0, 0, 0.5], "den": [1]}')
    (tmp_path / "path.json").write_text(
        '{"anchor": [0, 2], "waypoints": [[1, 2]], "targets": [[0, 3], [0, 4], [2, 2]]}')
    (tmp_path / "bad.json").write_text('{"kind": "poly",\n "coeffs": [[1, 0], "x"]}')
    return tmp_path


def _run(*args):
    return cli.main([str(a) for a in args])


def _report(out):
    return json.loads((out / "report.json").read_text())


def test_classify(docs_dir):
    out = docs_dir / "o"
    assert _run("classify", "--spec", docs_dir / "z3.json", "--out", out) == 0
    rep = _report(out)
    assert rep["summary"]["case_count"] >= 3 and rep["summary"]["fail_count"] == 0
    s = rep["summary"]
    assert s["pass_count"] + s["fail_count"] + s["skipped"] == s["case_count"]
    assert all(c["provenance"] in {"PAPER", "TRIVIAL", "DERIVED"} for c in rep["cases"])
    classes = json.loads((out / "classify.json").read_text())
    assert len(classes) == 3


def test_reconstruct(docs_dir):
    out = docs_dir / "o"
    assert _run("reconstruct", "--spec", docs_dir / "quad.json", "--path", docs_dir / "path.json",
                "--out", out) == 0
    assert (out / "reconstruct.csv").read_text().count("\n") >= 4


def test_lefschetz(docs_dir):
    out = docs_dir / "o"
    assert _run("lefschetz", "--spec", docs_dir / "m4z2.json", "--out", out) == 0
    body = json.loads((out / "lefschetz.json").read_text())
    assert body["L"] == body["sum_indices"] == 2 and body["verdict"]
    assert [c["degree"] for c in body["components"]] == [2]


def test_lefschetz_condition_violation(docs_dir, capsys):
    assert _run("lefschetz", "--spec", docs_dir / "half.json", "--out", docs_dir / "o") == 2
    assert "Lefschetz-map conditions" in capsys.readouterr().err


def test_channels(docs_dir):
    out = docs_dir / "o"
    assert _run("channels", "--spec", docs_dir / "z3.json", "--samples", 1024, "--out", out) == 0
    assert _report(out)["summary"]["pass_count"] >= 3


def test_render_is_byte_deterministic(docs_dir):
    a, b = docs_dir / "a", docs_dir / "b"
    for out in (a, b):
        assert _run("render", "--spec", docs_dir / "z3.json", "--width", 48, "--height", 32,
                    "--window=-1.5,-1,1.5,1", "--out", out) == 0
    assert (a / "render.ppm").read_bytes() == (b / "render.ppm").read_bytes()
    assert (a / "render.ppm").read_bytes().startswith(b"P6\n48 32\n255\n")
    ra, rb = _report(a), _report(b)
    assert ra["body_sha256"] == rb["body_sha256"]
    ra.pop("wall_time"), rb.pop("wall_time")
    assert ra == rb


@pytest.mark.parametrize("args, msg", [
    (["classify"], "needs --spec"),
    (["classify", "--spec", "{d}/bad.json"], "line 2"),
    (["classify", "--spec", "{d}/missing.json"], "missing.json"),
    (["reconstruct", "--spec", "{d}/quad.json"], "needs --path"),
])
def test_configuration_errors(docs_dir, capsys, args, msg):
    args = [a.format(d=docs_dir) for a in args] + ["--out", str(docs_dir / "o")]
    assert cli.main(args) == 2
    assert msg in capsys.readouterr().err


def test_argument_errors(docs_dir):
    assert _run("nonsense") == 2
    assert _run("render", "--window", "1,2,3") == 2


def test_failures_exit_one(docs_dir, monkeypatch):
    def fake(cfg):
        rep = VerificationReport(cfg.suite, cfg.seed)
        rep.add("x", {}, 1, 2, "TRIVIAL", 0, False)
        return rep
    monkeypatch.setattr(cli, "run_suite", fake)
    assert _run("classify", "--out", docs_dir) == 1


class TestConfig:
    def test_aliases(self):
        assert ExperimentConfig("figure2").suite == "figure2-style"
        assert ExperimentConfig("verify-corollary").suite == "corollary"

    @pytest.mark.parametrize("kw", [dict(suite="x"), dict(suite="render", seed=-1),
                                    dict(suite="render", overrides={"zoom": 2})])
    def test_rejects(self, kw):
        with pytest.raises(ConfigError):
            ExperimentConfig(**kw)

    def test_figure2_polynomial_is_seeded(self):
        a, b = suites.figure2_polynomial(7), suites.figure2_polynomial(7)
        assert a == b and a.degree == 9 and a != suites.figure2_polynomial(8)


def test_console_module(docs_dir):
    proc = subprocess.run([sys.executable, "-m", "newtonmaps.cli", "classify", "--spec",
                           str(docs_dir / "quad.json"), "--out", str(docs_dir / "o")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "classify:" in proc.stdout
