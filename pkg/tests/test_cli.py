"""Command-line interface: subcommands, files, exit codes, seeding."""

import json

import numpy as np
import pytest

from rotcode.cli import EXIT_IO, EXIT_OK, EXIT_SOLVER, EXIT_USAGE, main
from rotcode.noise_channel import clear_channel_cache


@pytest.fixture(autouse=True)
def _fresh_cache():
    clear_channel_cache()
    yield
    clear_channel_cache()


def _codegen(tmp_path, *extra):
    path = tmp_path / "code.json"
    assert main(["codegen", *extra, "--out", str(path)]) == EXIT_OK
    with open(path) as handle:
        return path, json.load(handle)


class TestCodegen:
    def test_smallest_binomial_code_amplitudes(self, tmp_path):
        _, payload = _codegen(tmp_path, "--family", "bin", "--N", "2", "--K", "1")
        assert payload["family"] == "BIN"
        assert payload["cutoff_D"] == 5
        assert abs(payload["nbar_code"] - 2.0) < 1e-12
        inv_sqrt2 = 1 / np.sqrt(2)
        assert abs(payload["zero_word"]["0"][0] - inv_sqrt2) < 1e-12
        assert abs(payload["zero_word"]["4"][0] - inv_sqrt2) < 1e-12
        assert payload["one_word"] == {"2": [1.0, 0.0]}

    def test_family_is_case_insensitive(self, tmp_path):
        _, payload = _codegen(tmp_path, "--family", "TrIv")
        assert payload["family"] == "TRIV"

    def test_random_code_reruns_identically(self, tmp_path):
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        args = ["codegen", "--family", "rand2", "--N", "3", "--K", "2", "--seed", "7"]
        assert main(args + ["--out", str(a)]) == EXIT_OK
        assert main(args + ["--out", str(b)]) == EXIT_OK
        assert a.read_text() == b.read_text()
        payload = json.loads(a.read_text())
        assert len(payload["seeds"]) == 2

    def test_seed_changes_random_codes(self, tmp_path):
        _, one = _codegen(tmp_path, "--family", "rand1", "--N", "2", "--K", "1", "--seed", "1")
        _, two = _codegen(tmp_path, "--family", "rand1", "--N", "2", "--K", "1", "--seed", "2")
        assert one["seeds"] == two["seeds"]  # stream key depends on the label only
        assert one["zero_word"] != two["zero_word"]  # master seed moved the draw

    def test_env_seed_is_honored(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ROTCODE_SEED", "31")
        _, via_env = _codegen(tmp_path, "--family", "rand1", "--N", "2", "--K", "1")
        monkeypatch.delenv("ROTCODE_SEED")
        _, via_flag = _codegen(
            tmp_path, "--family", "rand1", "--N", "2", "--K", "1", "--seed", "31"
        )
        assert via_env["zero_word"] == via_flag["zero_word"]

    def test_missing_ladder_parameter_is_usage_error(self, tmp_path, capsys):
        code = main(["codegen", "--family", "bin", "--N", "2", "--out", str(tmp_path / "x.json")])
        assert code == EXIT_USAGE
        assert "--K" in capsys.readouterr().err

    def test_unknown_family_is_usage_error(self, tmp_path):
        code = main(["codegen", "--family", "gkp", "--out", str(tmp_path / "x.json")])
        assert code == EXIT_USAGE


class TestEvaluate:
    def test_reports_fidelity_json(self, tmp_path, capsys):
        path, _ = _codegen(tmp_path, "--family", "bin", "--N", "2", "--K", "1")
        capsys.readouterr()
        code = main(["evaluate", "--code-file", str(path), "--kl", "1e-2", "--kphi", "1e-3"])
        assert code == EXIT_OK
        result = json.loads(capsys.readouterr().out)
        assert result["solver_status"] in ("optimal", "near-optimal")
        assert 0.99 < result["fidelity"] < 1.0
        assert result["support_dim"] == 5
        assert abs(result["fidelity"] + result["infidelity"] - 1) < 1e-12

    def test_missing_file_is_io_error(self):
        code = main(["evaluate", "--code-file", "/nonexistent/c.json", "--kl", "0.01", "--kphi", "0.01"])
        assert code == EXIT_IO

    def test_malformed_json_is_usage_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{this is not json")
        code = main(["evaluate", "--code-file", str(bad), "--kl", "0.01", "--kphi", "0.01"])
        assert code == EXIT_USAGE

    def test_wrong_schema_is_usage_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"schema_version": 99}))
        code = main(["evaluate", "--code-file", str(bad), "--kl", "0.01", "--kphi", "0.01"])
        assert code == EXIT_USAGE

    def test_corrupted_words_are_usage_error(self, tmp_path):
        path, payload = _codegen(tmp_path, "--family", "bin", "--N", "2", "--K", "1")
        payload["zero_word"]["0"] = [0.9, 0.0]  # breaks normalization
        path.write_text(json.dumps(payload))
        code = main(["evaluate", "--code-file", str(path), "--kl", "0.01", "--kphi", "0.01"])
        assert code == EXIT_USAGE

    def test_negative_noise_is_usage_error(self, tmp_path):
        path, _ = _codegen(tmp_path, "--family", "triv")
        code = main(["evaluate", "--code-file", str(path), "--kl", "-0.01", "--kphi", "0.0"])
        assert code == EXIT_USAGE


class TestWignerCommand:
    def test_vacuum_word_peaks_at_inverse_pi(self, tmp_path, capsys):
        path, _ = _codegen(tmp_path, "--family", "triv")
        out = tmp_path / "w.csv"
        code = main([
            "wigner", "--code-file", str(path), "--word", "zero",
            "--grid=-2:2:41", "--out", str(out),
        ])
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# convention")
        header_index = next(i for i, l in enumerate(lines) if l == "x,p,W")
        rows = [line.split(",") for line in lines[header_index + 1 :]]
        assert len(rows) == 41 * 41
        values = {(float(x), float(p)): float(w) for x, p, w in rows}
        assert abs(values[(0.0, 0.0)] - 1 / np.pi) < 1e-12

    def test_dual_words_map_differently(self, tmp_path):
        path, _ = _codegen(tmp_path, "--family", "bin", "--N", "2", "--K", "1")
        plus_csv = tmp_path / "plus.csv"
        minus_csv = tmp_path / "minus.csv"
        assert main(["wigner", "--code-file", str(path), "--word", "plus",
                     "--grid=-2:2:11", "--out", str(plus_csv)]) == EXIT_OK
        assert main(["wigner", "--code-file", str(path), "--word", "minus",
                     "--grid=-2:2:11", "--out", str(minus_csv)]) == EXIT_OK
        assert plus_csv.read_text() != minus_csv.read_text()

    def test_unknown_word_is_usage_error(self, tmp_path):
        path, _ = _codegen(tmp_path, "--family", "triv")
        code = main(["wigner", "--code-file", str(path), "--word", "both",
                     "--grid=-1:1:5", "--out", str(tmp_path / "w.csv")])
        assert code == EXIT_USAGE

    def test_malformed_grid_is_usage_error(self, tmp_path):
        path, _ = _codegen(tmp_path, "--family", "triv")
        for bad in ("1:2", "2:1:5", "0:1:1", "a:b:c"):
            code = main(["wigner", "--code-file", str(path), f"--grid={bad}",
                         "--out", str(tmp_path / "w.csv")])
            assert code == EXIT_USAGE, bad


class TestSweepCommand:
    def test_tiny_sweep_writes_all_outputs(self, tmp_path, capsys):
        out = tmp_path / "sweep"
        code = main([
            "sweep", "--families", "TRIV", "BIN", "--N-set", "2",
            "--bin-K-min", "1", "--bin-K-max", "1",
            "--kl", "1e-3", "--kphi", "1e-3", "--out", str(out),
        ])
        assert code == EXIT_OK
        for name in ("records.csv", "summary.csv", "manifest.json", "compare_BIN_vs_TRIV.csv"):
            assert (out / name).exists(), name
        stdout = capsys.readouterr().out
        assert "2 evaluations" in stdout

    def test_rerun_appends_records(self, tmp_path):
        out = tmp_path / "sweep"
        args = ["sweep", "--families", "TRIV", "--kl", "1e-3", "--kphi", "1e-3",
                "--out", str(out)]
        assert main(args) == EXIT_OK
        n_first = len((out / "records.csv").read_text().splitlines())
        assert main(args) == EXIT_OK
        n_second = len((out / "records.csv").read_text().splitlines())
        assert n_second == 2 * n_first - 1  # header written once


class TestTopLevel:
    def test_version_flag(self, capsys):
        assert main(["--version"]) == EXIT_OK
        assert "rotcode" in capsys.readouterr().out

    def test_no_subcommand_is_usage_error(self):
        assert main([]) == EXIT_USAGE

    def test_unwritable_output_is_io_error(self, tmp_path):
        code = main(["codegen", "--family", "triv", "--out",
                     str(tmp_path / "missing-dir" / "x.json")])
        assert code == EXIT_IO
