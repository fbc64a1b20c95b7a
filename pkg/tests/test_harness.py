import json

import numpy as np
import pytest

from locfront.bandwidth import AdaptiveConfig
from locfront.harness import (
    BandwidthRule,
    ConfigError,
    ExperimentSpec,
    build_adaptive_config,
    build_experiment_spec,
    default_workers,
    evaluation_grid,
    parse_config,
    resolve_bandwidth,
    run_adaptive,
    run_mse_center,
    run_mse_grid,
    run_rate_study,
    write_adaptive_csv,
    write_adaptive_diagnostics_csv,
    write_result_csv,
    write_result_json,
)
from locfront.synthetic import ErrorSpec, ModelSpec


def small_center_spec(**overrides):
    kwargs = dict(
        q=2,
        n_list=(100, 196),
        beta_star_list=(0, 1),
        replications=8,
        master_seed=99,
        evaluation="center",
    )
    kwargs.update(overrides)
    return ExperimentSpec(**kwargs)


class TestSpecValidation:
    def test_rejects_bad_fields(self):
        with pytest.raises(ValueError):
            small_center_spec(n_list=())
        with pytest.raises(ValueError):
            small_center_spec(replications=0)
        with pytest.raises(ValueError):
            small_center_spec(master_seed=-1)
        with pytest.raises(ValueError):
            small_center_spec(evaluation="pointwise")
        with pytest.raises(ValueError):
            small_center_spec(design="clustered")

    def test_bandwidth_rule_validation(self):
        with pytest.raises(ValueError):
            BandwidthRule("fixed")
        with pytest.raises(ValueError):
            BandwidthRule("fixed", h=1.5)
        with pytest.raises(ValueError):
            BandwidthRule("balanced", alpha=1.0)
        with pytest.raises(ValueError):
            BandwidthRule("magic")

    def test_resolve_bandwidth(self):
        assert resolve_bandwidth(BandwidthRule("fixed", h=0.3), 100, 2, 1) == 0.3
        sim = resolve_bandwidth(BandwidthRule("simulation"), 100, 2, 3)
        assert sim == pytest.approx(0.4642, abs=1e-4)
        bal = resolve_bandwidth(BandwidthRule("balanced", alpha=1.0, beta=2.0), 1000, 2, 1)
        assert bal == pytest.approx(0.288, abs=1e-3)
        with pytest.raises(ValueError):
            resolve_bandwidth(BandwidthRule("adaptive"), 100, 2, 1)


class TestCenterRuns:
    def test_determinism_across_workers(self):
        spec = small_center_spec()
        serial = run_mse_center(spec, workers=1)
        parallel = run_mse_center(spec, workers=2)
        assert serial.cells == parallel.cells

    def test_cell_independence(self):
        full = run_mse_center(small_center_spec(), workers=1)
        single = run_mse_center(
            small_center_spec(n_list=(196,), beta_star_list=(1,)), workers=1
        )
        assert full.cells[(1, 196)] == single.cells[(1, 196)]

    def test_tallies_sum_to_replications(self):
        table = run_mse_center(small_center_spec(), workers=1)
        for cell in table.cells.values():
            assert cell.n_exact + cell.n_degraded + cell.n_expanded == cell.replications == 8
            assert cell.mse >= 0

    def test_fixed_design_supported(self):
        spec = small_center_spec(design="equidistant_grid", n_list=(100,))
        table = run_mse_center(spec, workers=1)
        assert table.cells[(0, 100)].mse >= 0

    def test_noiseless_polynomial_boundary_recovered_exactly(self):
        # cubic boundary, zero errors, beta_star=3: the fit reproduces the
        # boundary up to LP tolerance
        spec = ExperimentSpec(
            q=1,
            n_list=(40,),
            beta_star_list=(3,),
            replications=4,
            master_seed=12,
            error=ErrorSpec("zero"),
            model=ModelSpec("cubic_1d"),
            bandwidth=BandwidthRule("fixed", h=0.2),
        )
        table = run_mse_center(spec, workers=1)
        assert table.cells[(3, 40)].mse <= 1e-14


class TestGridRuns:
    def test_grid_mse_and_tallies(self):
        spec = small_center_spec(
            evaluation="grid", grid_points_per_axis=4, replications=5, n_list=(100,)
        )
        table = run_mse_grid(spec, workers=1)
        for cell in table.cells.values():
            assert cell.mse >= 0
            assert cell.n_exact + cell.n_degraded + cell.n_expanded == 5

    def test_single_point_grid_equals_center(self):
        base = small_center_spec(n_list=(100,), beta_star_list=(1,), replications=6)
        center = run_mse_center(base, workers=1)
        grid_spec = small_center_spec(
            n_list=(100,),
            beta_star_list=(1,),
            replications=6,
            evaluation="grid",
            grid_points_per_axis=1,
        )
        grid = run_mse_grid(grid_spec, workers=1)
        assert grid.cells == center.cells

    def test_determinism_across_workers(self):
        spec = small_center_spec(
            evaluation="grid", grid_points_per_axis=3, replications=6, n_list=(100,)
        )
        assert run_mse_grid(spec, workers=1).cells == run_mse_grid(spec, workers=2).cells

    def test_wrong_evaluation_mode_rejected(self):
        with pytest.raises(ValueError):
            run_mse_grid(small_center_spec(), workers=1)
        with pytest.raises(ValueError):
            run_mse_center(small_center_spec(evaluation="grid"), workers=1)


class TestEvaluationGrid:
    def test_includes_boundary(self):
        grid = evaluation_grid(2, 3)
        assert grid.shape == (9, 2)
        assert [0.0, 0.0] in grid.tolist()
        assert [1.0, 1.0] in grid.tolist()

    def test_single_point_is_center(self):
        grid = evaluation_grid(3, 1)
        assert grid.tolist() == [[0.5, 0.5, 0.5]]


class TestRateStudy:
    def test_validations(self):
        spec = small_center_spec(
            q=1,
            n_list=(50, 100, 200, 400),
            beta_star_list=(1,),
            bandwidth=BandwidthRule("balanced", alpha=1.0, beta=2.0),
        )
        with pytest.raises(ValueError, match="balanced"):
            run_rate_study(small_center_spec(q=1, n_list=(50, 100, 200, 400), beta_star_list=(1,)))
        with pytest.raises(ValueError, match="4 sample"):
            run_rate_study(
                small_center_spec(
                    q=1,
                    n_list=(50, 100),
                    beta_star_list=(1,),
                    bandwidth=BandwidthRule("balanced", alpha=1.0, beta=2.0),
                )
            )
        with pytest.raises(ValueError, match="one beta_star"):
            run_rate_study(
                small_center_spec(
                    q=1,
                    n_list=(50, 100, 200, 400),
                    bandwidth=BandwidthRule("balanced", alpha=1.0, beta=2.0),
                )
            )
        result = run_rate_study(spec, eval_grid_size=9, workers=1)
        assert result.expected_slope == pytest.approx(-2.0 / 3.0)
        assert len(result.median_sup_errors) == 4
        assert all(e > 0 for e in result.median_sup_errors)

    def test_errors_decrease_overall(self):
        spec = ExperimentSpec(
            q=1,
            n_list=(100, 200, 400, 800),
            beta_star_list=(1,),
            replications=6,
            master_seed=5,
            model=ModelSpec("cubic_1d"),
            bandwidth=BandwidthRule("balanced", alpha=1.0, beta=2.0),
        )
        result = run_rate_study(spec, eval_grid_size=9, workers=1)
        assert result.median_sup_errors[-1] < result.median_sup_errors[0]
        assert result.slope < 0


class TestAdaptiveRuns:
    def test_smoke_and_outputs(self, tmp_path):
        spec = ExperimentSpec(
            q=1,
            n_list=(150,),
            beta_star_list=(1,),
            replications=3,
            master_seed=17,
            bandwidth=BandwidthRule("adaptive"),
        )
        cfg = AdaptiveConfig(grid=np.linspace(0.1, 0.9, 7)[:, None])
        runs = run_adaptive(spec, cfg, workers=1)
        assert len(runs) == 3
        for run in runs:
            res = run.result
            assert res.bandwidths[0] <= res.h_selected <= 1.0
            assert np.isfinite(res.h_selected)
        csv_path = tmp_path / "selections.csv"
        write_adaptive_csv(runs, csv_path)
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "n,replication,k_hat,h_selected,alpha_hat,trigger_k,trigger_l"
        assert len(lines) == 4
        diag_path = tmp_path / "diag.csv"
        write_adaptive_diagnostics_csv(runs[0].result, diag_path)
        assert diag_path.read_text().startswith("k,h_k,zeta_k,max_delta_next")


class TestOutputs:
    def test_csv_and_json(self, tmp_path):
        spec = small_center_spec(replications=3)
        table = run_mse_center(spec, workers=1)
        csv_path = tmp_path / "results.csv"
        write_result_csv(table, csv_path)
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "beta_star,n,mse,mc_stderr,n_exact,n_degraded,n_expanded"
        assert len(lines) == 1 + len(table.cells)
        json_path = tmp_path / "results.json"
        write_result_json(table, spec, json_path)
        payload = json.loads(json_path.read_text())
        assert payload["master_seed"] == 99
        assert payload["experiment"]["q"] == 2
        assert len(payload["results"]) == len(table.cells)
        mse_from_csv = float(lines[1].split(",")[2])
        assert mse_from_csv == payload["results"][0]["mse"]


class TestConfigParsing:
    GOOD = """
        # comment
        q = 2
        n = 100, 400
        beta_star = 0, 1
        replications = 5
        seed = 7
        design = random_uniform
        error = weibull:2.0
        model = sine_sum
        bandwidth = balanced:1,2
        evaluation = grid:6
        fallback = degrade_degree
        empty_window = expand
    """

    def test_round_trip(self):
        spec = build_experiment_spec(parse_config(self.GOOD))
        assert spec.q == 2
        assert spec.n_list == (100, 400)
        assert spec.beta_star_list == (0, 1)
        assert spec.error == ErrorSpec("weibull", alpha=2.0)
        assert spec.bandwidth == BandwidthRule("balanced", alpha=1.0, beta=2.0)
        assert spec.evaluation == "grid"
        assert spec.grid_points_per_axis == 6

    def test_defaults(self):
        spec = build_experiment_spec(
            parse_config("q=1\nn=50\nbeta_star=1\nreplications=2\nseed=0")
        )
        assert spec.design == "random_uniform"
        assert spec.error == ErrorSpec("exponential_unit")
        assert spec.bandwidth == BandwidthRule("simulation")
        assert spec.evaluation == "center"

    @pytest.mark.parametrize(
        "text,match",
        [
            ("shape = 2", "unknown key"),
            ("q = 2\nq = 3", "duplicate"),
            ("q =", "empty value"),
            ("just some words", "expected"),
        ],
    )
    def test_parse_errors(self, text, match):
        with pytest.raises(ConfigError, match=match):
            parse_config(text)

    @pytest.mark.parametrize(
        "overrides,match",
        [
            ({"error": "weibull:zero"}, "weibull"),
            ({"error": "gaussian"}, "error"),
            ({"bandwidth": "balanced:1"}, "balanced"),
            ({"bandwidth": "tiny"}, "bandwidth"),
            ({"evaluation": "grid:x"}, "grid size"),
            ({"model": "quartic"}, "model"),
        ],
    )
    def test_build_errors(self, overrides, match):
        base = {
            "q": "1",
            "n": "50",
            "beta_star": "1",
            "replications": "2",
            "seed": "0",
        }
        base.update(overrides)
        with pytest.raises(ConfigError, match=match):
            build_experiment_spec(base)

    def test_missing_required(self):
        with pytest.raises(ConfigError, match="missing required"):
            build_experiment_spec(parse_config("q = 2"))

    def test_adaptive_config(self):
        cfg = build_adaptive_config(
            {"adaptive_s": "0.4", "adaptive_rho": "1.5", "adaptive_grid": "5"}, q=1
        )
        assert cfg.s == 0.4
        assert cfg.rho == 1.5
        assert cfg.grid.shape == (5, 1)


class TestWorkers:
    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("LOCFRONT_WORKERS", "3")
        assert default_workers() == 3
        monkeypatch.setenv("LOCFRONT_WORKERS", "zero")
        with pytest.raises(ConfigError):
            default_workers()
        monkeypatch.delenv("LOCFRONT_WORKERS")
        assert default_workers() >= 1
