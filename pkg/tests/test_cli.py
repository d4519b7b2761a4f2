import argparse
import csv
import json
import math
from pathlib import Path

import pytest

from conestokes import CircularCone, neumann_spectrum
from conestokes.cli import (
    EXIT_FAIL,
    EXIT_INVALID,
    EXIT_NUMERIC,
    EXIT_OK,
    _complex,
    _dyadic_exponents,
    parse,
    run,
)

CONST = ["--lambda1", "1", "--mu2", "1"]


def _load(d, name):
    return json.loads((Path(d) / f"{name}.json").read_text())


def _snapshot(d):
    return {p.name: p.read_bytes() for p in sorted(Path(d).iterdir())}


class TestParsing:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("2^-4..2^-12", list(range(-4, -13, -1))),
            ("2^3..2^10", list(range(3, 11))),
            ("2^-4,2^-6", [-4, -6]),
            ("0.25,0.0625", [-2, -4]),
            ("8", [3]),
        ],
    )
    def test_dyadic_exponents(self, text, expected):
        assert _dyadic_exponents(text) == expected

    @pytest.mark.parametrize("text", ["3", "0", "-4", "abc"])
    def test_dyadic_exponents_rejects(self, text):
        with pytest.raises((argparse.ArgumentTypeError, ValueError)):
            _dyadic_exponents(text)

    @pytest.mark.parametrize("text,val", [("i", 1j), ("1j", 1j), ("-i", -1j), ("2+3i", 2 + 3j), ("4", 4)])
    def test_complex(self, text, val):
        assert _complex(text) == val

    def test_negative_values_reach_options(self):
        cfg = parse(["classify", "--beta", "-0.3", *CONST])
        assert cfg.options["beta"] == -0.3
        cfg = parse(["norms", "--field", "one", "--kind", "V", "--beta", "-1", "--window", "-3,3"])
        assert cfg.options["window"] == (-3, 3)

    def test_default_s_per_experiment(self):
        assert parse(["sharpness", "l6a", "--theta0", "1"]).options["s"] == "1j"
        assert parse(["sharpness", "scaling"]).options["s"] == "4"

    def test_config_file_and_precedence(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("# comment\nbeta = 0.25\nlambda1 = 1\nmu2 = 1\n")
        cfg = parse(["classify", "--config", str(cfg_file)])
        assert cfg.options["beta"] == 0.25 and cfg.options["lambda1"] == 1.0
        cfg = parse(["classify", "--config", str(cfg_file), "--beta", "0.1"])
        assert cfg.options["beta"] == 0.1


class TestExitCodes:
    def test_intervals_ok(self, tmp_path):
        assert run(["intervals", *CONST, "--outdir", str(tmp_path)]) == EXIT_OK
        doc = _load(tmp_path, "intervals")
        assert doc["intervals"]["isomorphism"] == [-0.5, 0.5]
        assert doc["intervals"]["isomorphism_onto_mean_zero"] == [0.5, 1.5]
        assert doc["schema"] == 1 and isinstance(doc["pencil_digest"], str)

    @pytest.mark.parametrize(
        "argv",
        [
            ["pencil", "stokes"],
            ["pencil", "stokes", "--theta0", "4.0"],
            ["pencil", "neumann", "--theta0", "1", "--window", "1,0"],
            ["classify", *CONST],
            ["classify", "--beta", "0", "--lambda1", "1"],
            ["classify", "--beta", "0", "--lambda1", "1.5", "--mu2", "1"],
            ["norms", "--field", "nope", "--kind", "V", "--beta", "0"],
            ["sharpness", "l6b", "--theta0", "1.5707963267948966", "--eps", "2^-1..2^-4"],
            ["frobnicate"],
            ["intervals", *CONST, "--workers", "0"],
        ],
    )
    def test_invalid_input(self, argv, tmp_path, capsys):
        assert run([*argv, "--outdir", str(tmp_path)]) == EXIT_INVALID
        assert "error" in capsys.readouterr().err

    def test_unknown_config_key(self, tmp_path):
        f = tmp_path / "bad.cfg"
        f.write_text("colour = red\n")
        assert run(["intervals", *CONST, "--config", str(f), "--outdir", str(tmp_path)]) == EXIT_INVALID

    def test_numerical_failure(self, tmp_path, capsys):
        argv = ["sharpness", "l6a", "--theta0", "1.5707963267948966", "--mu", "0.37", "--m", "1", "--outdir", str(tmp_path)]
        assert run(argv) == EXIT_NUMERIC
        assert "numerical failure" in capsys.readouterr().err

    def test_failed_verdict(self, tmp_path):
        # the undamped Parseval defect is gamma/(1+gamma), far above 1e-6
        argv = ["parseval", "--profile", "exp", "--beta", "0", "--field", "gauss", "--outdir", str(tmp_path)]
        assert run(argv) == EXIT_FAIL
        doc = _load(tmp_path, "parseval")
        assert doc["result"]["verdict"] == "FAIL" and doc["result"]["monotone"]
        with open(tmp_path / "parseval.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert len({len(r) for r in rows}) == 1 and len(rows) == 4


class TestOutputs:
    def test_norms_value(self, tmp_path):
        assert run(["norms", "--field", "one", "--kind", "V", "--beta", "0", "--outdir", str(tmp_path)]) == EXIT_OK
        doc = _load(tmp_path, "norms")
        assert doc["result"]["value"] == pytest.approx(math.sqrt(14 * math.pi / 3), rel=1e-13)

    def test_classify_sweep_csv(self, tmp_path):
        assert run(["classify", "--sweep=-1,2,0.25", *CONST, "--outdir", str(tmp_path)]) == EXIT_OK
        with open(tmp_path / "classify.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0][:2] == ["beta", "classification"] and len(rows) == 14
        assert {r[0]: r[1] for r in rows[1:]}["0.5"] == "NotFredholm"

    def test_shift(self, tmp_path):
        assert run(["shift", "--beta", "0", "--gamma", "1", "--mean-zero", *CONST, "--outdir", str(tmp_path)]) == EXIT_OK
        assert _load(tmp_path, "shift")["allowed"] is True

    def test_scaling_defaults_to_half_space(self, tmp_path):
        assert run(["sharpness", "scaling", "--s", "16", "--outdir", str(tmp_path)]) == EXIT_OK
        assert _load(tmp_path, "sharpness_scaling")["result"]["verdict"] == "PASS"

    def test_pencil_digest_recorded(self, tmp_path):
        argv = ["pencil", "neumann", "--theta0", "1.2", "--m-max", "2", "--window=-1.5,1", "--outdir", str(tmp_path)]
        assert run(argv) == EXIT_OK
        direct = neumann_spectrum(CircularCone(1.2), 2, (-1.5, 1.0), 1e-10)
        assert _load(tmp_path, "pencil_neumann")["pencil_digest"] == direct.digest()


class TestDeterminism:
    @pytest.mark.parametrize(
        "argv",
        [
            ["pencil", "stokes", "--theta0", "2.0943951023931953", "--window=-2,-1.4", "--m-max", "3"],
            ["sharpness", "l6a", "--theta0", "1.5707963267948966", "--N", "2^3..2^5", "--no-layer-ratio"],
            ["sharpness", "l12c", "--theta0", "2.0943951023931953", "--points", "30"],
        ],
    )
    def test_worker_count_does_not_change_bytes(self, argv, tmp_path):
        outs = []
        for w in ("1", "4"):
            d = tmp_path / f"w{w}"
            code = run([*argv, "--workers", w, "--outdir", str(d)])
            assert code in (EXIT_OK, EXIT_FAIL)
            outs.append(_snapshot(d))
        assert outs[0] == outs[1]
