"""Tests for the command-line front end."""

from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest

from levybreak.cli import main


def run(*argv: str) -> int:
    return main(list(argv))


@pytest.fixture
def h0_csv(tmp_path):
    p = tmp_path / "h0.csv"
    assert run("simulate", "--beta", "1", "--kn", "10", "--dninv", "100", "--seed", "3", "--out", str(p)) == 0
    return p


class TestSimulate:
    def test_row_count(self, tmp_path) -> None:
        out = tmp_path / "x.csv"
        code = run("simulate", "--b", "0", "--sigma", "0", "--beta", "1", "--kn", "50", "--dninv", "450", "--seed", "7", "--out", str(out))
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "# delta_n=0.0022222222222222222 n=22500 seed=7"
        assert len(lines) - 2 == 22500

    def test_byte_identical(self, tmp_path) -> None:
        args = ["simulate", "--beta", "2", "--beta2", "3", "--theta0", "0.4", "--b", "1", "--sigma", "1", "--kn", "5", "--dninv", "90", "--seed", "11"]
        assert run(*args, "--out", str(tmp_path / "a.csv")) == 0
        assert run(*args, "--out", str(tmp_path / "b.csv")) == 0
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_missing_beta(self, capsys) -> None:
        assert run("simulate", "--kn", "50", "--dninv", "450") == 2
        assert "--beta" in capsys.readouterr().err

    def test_break_flags_together(self, capsys) -> None:
        assert run("simulate", "--beta", "1", "--beta2", "2", "--kn", "5", "--dninv", "10") == 2

    def test_non_integral_n(self) -> None:
        assert run("simulate", "--beta", "1", "--kn", "0.5", "--dninv", "3") == 2

    def test_exact_stable(self, tmp_path) -> None:
        out = tmp_path / "x.csv"
        assert run("simulate", "--beta", "1", "--kn", "1", "--dninv", "90", "--method", "exact-stable", "--out", str(out)) == 0

    def test_manifest(self, tmp_path) -> None:
        out = tmp_path / "x.csv"
        run("simulate", "--beta", "1", "--kn", "1", "--dninv", "90", "--seed", "4", "--out", str(out))
        m = json.loads((tmp_path / "x.csv.manifest.json").read_text())
        assert m["subcommand"] == "simulate" and m["seed"] == 4
        assert m["config"]["n"] == 90
        assert {"version", "started_at", "elapsed_seconds", "argv", "output"} <= set(m)

    def test_rerun_reproduces(self, tmp_path, monkeypatch) -> None:
        monkeypatch.chdir(tmp_path)
        run("simulate", "--beta", "1", "--kn", "2", "--dninv", "90", "--seed", "4", "--out", "x.csv")
        first = (tmp_path / "x.csv").read_bytes()
        (tmp_path / "x.csv").unlink()
        assert run("rerun", "x.csv.manifest.json") == 0
        assert (tmp_path / "x.csv").read_bytes() == first


class TestTest:
    def test_kscp1_no_jumps(self, tmp_path, capsys) -> None:
        p = tmp_path / "flat.csv"
        p.write_text("# delta_n=0.01\nj,increment\n" + "".join(f"{j},0.001\n" for j in range(1, 101)))
        assert run("test", "--method", "kscp1", "--z0", "1", "--in", str(p), "--out", str(tmp_path / "o.json")) == 0
        out = json.loads((tmp_path / "o.json").read_text())
        assert out["reject"] is False and out["statistic"] == 0.0

    @pytest.mark.parametrize("method", ["kscp2", "cp"])
    def test_bootstrap_methods(self, h0_csv, tmp_path, method: str) -> None:
        target = ["--z0", "0.5"] if method == "kscp2" else ["--grid-preset", "pure-jump"]
        out = tmp_path / "o.json"
        assert run("test", "--method", method, *target, "--B", "30", "--seed", "2", "--in", str(h0_csv), "--out", str(out)) == 0
        d = json.loads(out.read_text())
        assert d["B"] == 30 and d["config"]["seed"] == 2
        assert d["reject"] == (d["statistic"] >= d["critical_value"] and d["statistic"] > 0)

    def test_invalid_method(self, h0_csv) -> None:
        assert run("test", "--method", "ks", "--z0", "1", "--in", str(h0_csv)) == 2

    def test_missing_target(self, h0_csv) -> None:
        assert run("test", "--method", "kscp1", "--in", str(h0_csv)) == 2
        assert run("test", "--method", "cp", "--in", str(h0_csv)) == 2

    def test_grid_file(self, h0_csv, tmp_path) -> None:
        g = tmp_path / "grid.txt"
        g.write_text("z\n0.2\n# comment\n0.6\n")
        out = tmp_path / "o.json"
        assert run("test", "--method", "cp", "--grid-file", str(g), "--B", "20", "--in", str(h0_csv), "--out", str(out)) == 0
        assert json.loads(out.read_text())["config"]["grid"] == [0.2, 0.6]

    def test_bad_grid_file(self, h0_csv, tmp_path, capsys) -> None:
        g = tmp_path / "grid.txt"
        g.write_text("0.2\nabc\n")
        assert run("test", "--method", "cp", "--grid-file", str(g), "--in", str(h0_csv)) == 1
        assert ":2:" in capsys.readouterr().err

    def test_bad_csv_row_numbered(self, tmp_path, capsys) -> None:
        p = tmp_path / "bad.csv"
        p.write_text("# delta_n=0.1\nj,increment\n1,0.5\n2,nan\n")
        assert run("test", "--method", "kscp1", "--z0", "1", "--in", str(p)) == 1
        err = capsys.readouterr().err.strip().splitlines()
        assert len(err) == 1 and ":4:" in err[0]

    def test_missing_delta(self, tmp_path, capsys) -> None:
        p = tmp_path / "bad.csv"
        p.write_text("j,increment\n1,0.5\n2,0.1\n")
        assert run("test", "--method", "kscp1", "--z0", "1", "--in", str(p)) == 1
        assert "delta_n" in capsys.readouterr().err

    def test_from_prices(self, tmp_path) -> None:
        p = tmp_path / "prices.csv"
        prices = np.cumsum(np.r_[0.0, np.random.default_rng(1).exponential(0.1, 200)])
        p.write_text("t,price\n" + "".join(f"{i * 0.01},{v}\n" for i, v in enumerate(prices)))
        out = tmp_path / "o.json"
        assert run("test", "--method", "kscp1", "--z0", "0.2", "--from-prices", "--in", str(p), "--out", str(out)) == 0

    def test_stdout_and_manifest_on_stderr(self, h0_csv, capsys) -> None:
        assert run("test", "--method", "kscp1", "--z0", "1", "--in", str(h0_csv)) == 0
        cap = capsys.readouterr()
        assert json.loads(cap.out)["method"] == "kscp1"
        assert json.loads(cap.err)["subcommand"] == "test"

    def test_consistent_against_break(self, tmp_path) -> None:
        rejections = 0
        for seed in range(20):
            p = tmp_path / f"h1_{seed}.csv"
            assert run("simulate", "--beta", "1", "--beta2", "4", "--theta0", "0.5", "--kn", "250", "--dninv", "90", "--seed", str(seed), "--out", str(p)) == 0
            out = tmp_path / f"o_{seed}.json"
            assert run("test", "--method", "cp", "--grid-preset", "pure-jump", "--B", "200", "--in", str(p), "--out", str(out)) == 0
            rejections += json.loads(out.read_text())["reject"]
        assert rejections / 20 >= 0.95


class TestEstimate:
    def test_toy(self, tmp_path) -> None:
        p = tmp_path / "toy.csv"
        p.write_text("# delta_n=0.25\nj,increment\n1,2\n2,0\n3,2\n4,0\n")
        out = tmp_path / "e.json"
        assert run("estimate", "--z0", "1", "--in", str(p), "--out", str(out)) == 0
        d = json.loads(out.read_text())
        assert d["theta_hat"] == 0.25 and d["achieved_value"] == 0.5 and d["mode"] == "fixed-z0"

    def test_degenerate(self, tmp_path, capsys) -> None:
        p = tmp_path / "flat.csv"
        p.write_text("# delta_n=0.25\nj,increment\n1,0\n2,0\n3,0\n")
        out = tmp_path / "e.json"
        assert run("estimate", "--grid-preset", "pure-jump", "--in", str(p), "--out", str(out)) == 0
        d = json.loads(out.read_text())
        assert d["degenerate"] is True and d["theta_hat"] == 0.0
        assert "warning" in capsys.readouterr().err

    def test_needs_one_target(self, tmp_path) -> None:
        p = tmp_path / "toy.csv"
        p.write_text("# delta_n=0.25\nj,increment\n1,2\n2,0\n")
        assert run("estimate", "--in", str(p)) == 2
        assert run("estimate", "--z0", "1", "--grid-preset", "pure-jump", "--in", str(p)) == 2


class TestMc:
    def config(self, tmp_path, **kw):
        cfg = {"k_n": 10, "delta_n_inv": 100, "z_grid": "coarse-pure-jump", "z0_list": [0.25], "B": 20, "replications": 4, "master_seed": 1}
        cfg.update(kw)
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps(cfg))
        return p

    def test_rejection(self, tmp_path) -> None:
        out = tmp_path / "t.csv"
        assert run("mc", "--config", str(self.config(tmp_path)), "--out", str(out)) == 0
        assert out.read_text().splitlines()[0] == "k_n,cp,test,z0=0.25"
        m = json.loads((tmp_path / "t.csv.manifest.json").read_text())
        assert m["config"]["designs"][0]["replications"] == 4

    def test_rejection_reproducible(self, tmp_path) -> None:
        cfg = self.config(tmp_path)
        run("mc", "--config", str(cfg), "--long", "--out", str(tmp_path / "a.csv"))
        run("mc", "--config", str(cfg), "--long", "--out", str(tmp_path / "b.csv"))
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_multiple_designs(self, tmp_path) -> None:
        cfg = self.config(tmp_path, k_n=[50, 100], delta_n_inv=None, replications=2, B=10)
        cfg_d = json.loads(cfg.read_text())
        del cfg_d["delta_n_inv"]
        cfg.write_text(json.dumps(cfg_d))
        out = tmp_path / "t.csv"
        assert run("mc", "--config", str(cfg), "--out", str(out)) == 0
        assert [line.split(",")[0] for line in out.read_text().splitlines()[1:]] == ["50", "50", "100", "100"]

    def test_estimator(self, tmp_path) -> None:
        out = tmp_path / "e.csv"
        cfg = self.config(tmp_path, beta_post=4.0, theta0=0.5)
        assert run("mc", "--config", str(cfg), "--study", "estimator", "--out", str(out)) == 0
        assert out.read_text().splitlines()[0].startswith("replicate,theta_hat,mode")

    def test_estimator_without_break(self, tmp_path) -> None:
        assert run("mc", "--config", str(self.config(tmp_path)), "--study", "estimator") == 1

    def test_covariance(self, tmp_path) -> None:
        out = tmp_path / "c.json"
        cfg = self.config(tmp_path, points=[[0.5, 0.3]], replications=20)
        assert run("mc", "--config", str(cfg), "--study", "covariance", "--out", str(out)) == 0
        d = json.loads(out.read_text())
        assert d["k_n=10"][0]["theoretical"] > 0

    def test_small_time(self, tmp_path) -> None:
        cfg = tmp_path / "s.json"
        cfg.write_text(json.dumps({"z_list": [1.0], "t_list": [0.0625, 0.03125, 0.015625], "reps": 10000, "method": "exact-stable"}))
        out = tmp_path / "s_out.json"
        assert run("mc", "--config", str(cfg), "--study", "small-time", "--out", str(out)) == 0
        assert "exponent" in json.loads(out.read_text())[0]

    def test_invalid_json(self, tmp_path) -> None:
        p = tmp_path / "cfg.json"
        p.write_text("{not json")
        assert run("mc", "--config", str(p)) == 1

    def test_invalid_design(self, tmp_path) -> None:
        assert run("mc", "--config", str(self.config(tmp_path, k_n=10.5, delta_n_inv=3))) == 1


def test_console_script(tmp_path) -> None:
    res = subprocess.run(
        [sys.executable, "-m", "levybreak.cli", "simulate", "--kn", "1", "--dninv", "10"],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 2
    assert "--beta" in res.stderr
