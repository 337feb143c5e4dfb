"""Command-line interface: exit codes, flag handling and written artifacts."""

import shutil
import subprocess
import sys

import pytest

from crm_transport import cli
from crm_transport.experiments import NumericalFailure


def run_cli(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestRun:
    def test_deterministic_experiment(self, tmp_path, capsys):
        code, out, _ = run_cli(["run", "--experiment", "latent_phase", "--n-grid", "16, 64", "--out", str(tmp_path)], capsys)
        assert code == 0
        assert "overall: PASS" in out
        assert (tmp_path / "summary.txt").read_text().startswith("experiment: latent_phase")
        assert (tmp_path / "latent_critical.csv").read_text().startswith("x,value\n")

    def test_config_file_with_flag_override(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("experiment = posterior_dp_atoms_same_base\nseed = 4\nn_grid = 1:30\nalpha2_grid = 50\n")
        code, out, _ = run_cli(["run", "--config", str(cfg), "--seed", "5", "--out", str(tmp_path / "o")], capsys)
        assert code in (0, 1)
        assert "seed: 5" in out and "note: seed: flag 5 overrides file 4" in out
        assert (tmp_path / "o" / "data.csv").exists()

    def test_set_flag(self, tmp_path, capsys):
        code, out, _ = run_cli(
            ["run", "--experiment", "latent_phase", "--set", "n_grid=16", "--set", "lam=2", "--out", str(tmp_path)], capsys
        )
        assert code == 0 and "param lam = 2  [flag]" in out

    @pytest.mark.parametrize(
        "argv",
        [
            ["run", "--experiment", "bound_check"],
            ["run", "--experiment", "missing"],
            ["run", "--experiment", "latent_phase", "--mc-budget", "3"],
            ["run", "--experiment", "latent_phase", "--n-grid", "5:1"],
            ["run", "--experiment", "latent_phase", "--set", "oops"],
            ["run", "--config", "/nonexistent/file.cfg"],
        ],
    )
    def test_usage_errors_exit_2(self, argv, capsys):
        code, _, err = run_cli(argv, capsys)
        assert code == 2 and err.startswith("crm-transport: error:")

    def test_argparse_errors_exit_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["run", "--no-such-flag"])
        assert exc.value.code == 2

    def test_numerical_failure_exit_3(self, monkeypatch, tmp_path, capsys):
        def boom(cfg):
            raise NumericalFailure("non-finite row")

        monkeypatch.setattr(cli, "run", boom)
        code, _, err = run_cli(["run", "--experiment", "latent_phase", "--out", str(tmp_path)], capsys)
        assert code == 3 and "numerical failure" in err


class TestListAndVerify:
    def test_list(self, capsys):
        code, out, _ = run_cli(["list"], capsys)
        assert code == 0 and "bound_check" in out and "stochastic" in out
        code, out, _ = run_cli(["list", "latent_phase"], capsys)
        assert code == 0 and "experiment = latent_phase" in out

    def test_verify_subset(self, tmp_path, capsys):
        code, out, _ = run_cli(["verify", "--only", "1", "2", "--out", str(tmp_path)], capsys)
        assert code == 0
        assert "[PASS]  1." in out and "2/2 criteria passed" in out
        assert (tmp_path / "criterion_01.csv").exists()

    def test_verify_reports_failure(self, monkeypatch, capsys):
        from crm_transport import acceptance

        def failing(seed, out_dir=None, only=None, echo=print):
            return [acceptance.CriterionResult(1, "x", False, "forced", 0.0, 1.0)]

        monkeypatch.setattr(acceptance, "run_acceptance", failing)
        code, out, _ = run_cli(["verify"], capsys)
        assert code == 1 and "0/1" in out


@pytest.mark.skipif(shutil.which("crm-transport") is None, reason="console script not installed")
def test_console_script(tmp_path):
    proc = subprocess.run(
        ["crm-transport", "run", "--experiment", "prior_gengamma_jump", "--sigma-grid", "0.2, 0.4", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "jump.csv").exists()


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "crm_transport.cli", "list"], capture_output=True, text=True, timeout=120
    )
    assert proc.returncode == 0 and "latent_phase" in proc.stdout
