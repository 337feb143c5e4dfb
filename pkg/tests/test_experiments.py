"""Experiment harness: configuration merging, small runs, determinism and CSV hygiene."""

import math

import numpy as np
import pytest

from crm_transport.config import ConfigError
from crm_transport.experiments import (
    EXPERIMENTS,
    Curve,
    NumericalFailure,
    format_defaults,
    parse_config,
    run,
    summary_text,
    write_outputs,
)
from crm_transport.simulate import DataSequence

SMALL = {
    "prior_gamma_jump": {"alpha2_grid": "1:3:0.5"},
    "prior_gengamma_jump": {"sigma_grid": "0.1, 0.5"},
    "posterior_dp_jump": {"alpha2_grid": "2, 5", "n_grid": "0:20:5"},
    "posterior_dp_atoms_same_alpha": {"alpha_grid": "1, 10", "n_grid": "0:20:10"},
    "posterior_dp_atoms_same_base": {"alpha2_grid": "50", "n_grid": "1:40"},
    "latent_phase": {"n_grid": "16, 256"},
    "merging_dp_data": {"sigma_grid": "0.5", "n_grid": "2, 8, 32", "mc_budget": "5"},
    "merging_py_data": {"sigma_grid": "0.5", "n_grid": "2, 8, 32", "mc_budget": "5"},
    "continuous_limit": {"sigma_grid": "0.5", "n_grid": "50, 100", "mc_budget": "5"},
    "bound_check": {"replicates": "2", "mc_budget": "200"},
}


def small_config(name, seed=3, **extra):
    over = dict(SMALL[name], **extra)
    return parse_config(name, seed if EXPERIMENTS[name].stochastic else None, None, over)


@pytest.fixture(scope="module")
def small_runs():
    return {name: run(small_config(name)) for name in EXPERIMENTS}


class TestConfig:
    def test_defaults_applied(self):
        cfg = parse_config("latent_phase")
        assert cfg.params["sigma"] == 0.3
        assert cfg.sources["n_grid"] == "default"
        assert cfg.seed is None

    def test_flag_overrides_file_and_is_noted(self):
        text = "experiment = latent_phase\nsigma = 0.5\nalpha = 2.0\n"
        cfg = parse_config(None, None, text, {"sigma": "0.25"})
        assert cfg.params["sigma"] == 0.25 and cfg.params["alpha"] == 2.0
        assert cfg.sources == {**cfg.sources, "sigma": "flag", "alpha": "file"}
        assert any("sigma" in n for n in cfg.notes)
        assert "note: sigma" in summary_text(cfg, run(parse_config(None, None, text, {"sigma": "0.25", "n_grid": "16"})))

    def test_seed_from_file(self):
        cfg = parse_config("bound_check", None, "seed = 17\n")
        assert cfg.seed == 17

    @pytest.mark.parametrize(
        "kwargs,match",
        [
            ({"experiment": "bound_check"}, "needs --seed"),
            ({"experiment": "nope"}, "unknown experiment"),
            ({"experiment": "latent_phase", "overrides": {"mc_budget": "4"}}, "unknown parameter"),
            ({"experiment": "latent_phase", "overrides": {"n_grid": "16, 4"}}, "increasing"),
            ({"experiment": "latent_phase", "overrides": {"sigma": "1.5"}}, "sigma"),
            ({"experiment": "prior_gengamma_jump", "overrides": {"sigma_grid": ""}}, "empty"),
            ({"experiment": "bound_check", "seed": "-1"}, "unsigned"),
            ({"experiment": "bound_check", "seed": "x"}, "integer"),
            ({}, "no experiment"),
        ],
    )
    def test_errors(self, kwargs, match):
        with pytest.raises(ConfigError, match=match):
            parse_config(**kwargs)

    def test_format_defaults_parses_back(self):
        for name in EXPERIMENTS:
            seed = 0 if EXPERIMENTS[name].stochastic else None
            cfg = parse_config(None, seed, format_defaults(name))
            assert cfg.experiment == name
            assert all(src == "file" for k, src in cfg.sources.items() if k != "workers")


class TestRuns:
    @pytest.mark.parametrize("name", list(EXPERIMENTS))
    def test_curves_have_schema_and_finite_rows(self, small_runs, name):
        res = small_runs[name]
        assert res.curves and res.checks
        for curve in res.curves.values():
            assert curve.columns[:2] == ("x", "value")
            assert set(curve.columns) <= {"x", "value", "std_error", "bound"}
            assert curve.rows and np.all(np.isfinite(np.array(curve.rows, dtype=float)))

    @pytest.mark.parametrize(
        "name", ["prior_gamma_jump", "prior_gengamma_jump", "posterior_dp_jump", "posterior_dp_atoms_same_alpha", "latent_phase"]
    )
    def test_builtin_checks_pass(self, small_runs, name):
        failed = [c for c in small_runs[name].checks if not c.passed]
        assert not failed, failed

    def test_prior_gamma_curve_below_bound(self, small_runs):
        curve = small_runs["prior_gamma_jump"].curves["jump.csv"]
        assert np.all(curve.column("value") <= curve.column("bound") + 1e-12)

    def test_same_base_equals_bound(self, small_runs):
        res = small_runs["posterior_dp_atoms_same_base"]
        eq = [c for c in res.checks if "bound" in c.name]
        assert eq and all(c.passed for c in eq)


class TestDeterminism:
    @pytest.mark.parametrize("name", ["merging_py_data", "continuous_limit", "posterior_dp_atoms_same_base", "bound_check"])
    def test_same_seed_same_bytes(self, tmp_path, name):
        a = write_outputs(small_config(name), run(small_config(name)), tmp_path / "a")
        b = write_outputs(small_config(name), run(small_config(name)), tmp_path / "b")
        files = sorted(p.name for p in a.iterdir())
        assert files == sorted(p.name for p in b.iterdir())
        for f in files:
            assert (a / f).read_bytes() == (b / f).read_bytes()

    def test_workers_do_not_change_output(self, tmp_path):
        name = "merging_dp_data"
        one = run(small_config(name))
        four = run(small_config(name, workers="4"))
        for key in one.curves:
            assert one.curves[key].to_csv() == four.curves[key].to_csv()

    def test_different_seed_changes_data(self):
        a = run(small_config("posterior_dp_atoms_same_base", seed=1)).data["data.csv"]
        b = run(small_config("posterior_dp_atoms_same_base", seed=2)).data["data.csv"]
        assert a != b


class TestDataFile:
    def test_imported_data_is_used(self, tmp_path):
        seq = DataSequence([0.0, 1.0, 1.0, 2.0] * 10)
        seq.to_csv(tmp_path / "obs.csv")
        cfg = small_config("posterior_dp_atoms_same_base", data_file=str(tmp_path / "obs.csv"))
        assert run(cfg).data["data.csv"] == seq

    def test_short_data_file_is_an_error(self, tmp_path):
        DataSequence([0.0, 1.0]).to_csv(tmp_path / "obs.csv")
        cfg = small_config("posterior_dp_atoms_same_base", data_file=str(tmp_path / "obs.csv"))
        with pytest.raises(ConfigError):
            run(cfg)


class TestCurve:
    def test_csv_uses_repr(self):
        c = Curve(("x", "value"))
        c.add(1, 1.0 / 3.0)
        assert c.to_csv() == "x,value\n1.0,0.3333333333333333\n"

    def test_non_finite_rows_are_refused(self):
        c = Curve(("x", "value"))
        c.add(1, math.nan)
        with pytest.raises(NumericalFailure):
            c.to_csv()
