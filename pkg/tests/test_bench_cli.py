"""Benchmark harness and CLI: metrics, arm parsing, experiment plumbing,
timing summaries, score-field dumps, and exit codes."""
import numpy as np
import pytest

from gpseq.bench import (ArmSpec, ExperimentConfig, ResultRow, ResultTable,
                         clustered_grid_scenario, lhd_candidate_scenario,
                         parse_arm, rmspe, run_experiment, score_field_dump,
                         timing_report)
from gpseq.cli import build_parser, default_checkpoints, main
from gpseq.exceptions import ConfigError
from gpseq.seq_design import RunRecord, StepRecord


class TestRmspe:
    def test_perfect_predictions(self):
        assert rmspe([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_constant_residual(self):
        assert rmspe([3.0, 3.0, 3.0], [1.0, 1.0, 1.0]) == pytest.approx(2.0)

    def test_hand_arithmetic(self):
        assert rmspe([1.0, 2.0, 2.0], [0.0, 0.0, 0.0]) == pytest.approx(
            np.sqrt(3.0), abs=1e-12)

    def test_normalized_divides_by_range(self):
        val = rmspe([1.0, 2.0], [0.0, 4.0], normalized=True)
        assert val == pytest.approx(np.sqrt((1.0 + 4.0) / 2.0) / 4.0)

    def test_zero_range_rejected(self):
        with pytest.raises(ValueError):
            rmspe([1.0, 2.0], [3.0, 3.0], normalized=True)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            rmspe([1.0], [1.0, 2.0])


class TestParseArm:
    def test_criterion_with_candidate_count(self):
        arm = parse_arm("mice-300", tau2_s=0.5)
        assert arm.criterion == "mice"
        assert arm.n_cand == 300
        assert arm.tau2_s == 0.5

    def test_default_candidate_count(self):
        assert parse_arm("alm").n_cand == 150

    def test_one_shot_baselines(self):
        assert parse_arm("maximinlhd").criterion == "maximinlhd"
        assert parse_arm("minimaxlhd").criterion == "minimaxlhd"

    def test_unknown_method_rejected(self):
        with pytest.raises(ConfigError):
            parse_arm("eigf-150")


class TestExperimentConfig:
    def test_checkpoints_beyond_budget_rejected(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(objective="branin", methods=[parse_arm("alm")],
                             budget_n=10, checkpoints=(20,))

    def test_zero_replicates_rejected(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(objective="branin", methods=[], replicates=0)


class TestRunExperiment:
    def _tiny(self, methods, **kw):
        cfg = ExperimentConfig(
            objective="branin", methods=methods, replicates=1, budget_n=5,
            validation_size=20, checkpoints=(5,), base_seed=1, tau2=1e-6,
            mle_budget=16, mle_every=1, **kw)
        return run_experiment(cfg)

    def test_single_random_row(self):
        arm = ArmSpec(name="random", criterion="random", n_cand=10,
                      use_mle=False)
        table = self._tiny([arm])
        assert len(table.rows) == 1
        row = table.rows[0]
        assert row.method == "random" and row.checkpoint_n == 5
        assert row.rmspe_normalized >= 0

    def test_rows_have_cumulative_buckets(self):
        arm = ArmSpec(name="mice-10", criterion="mice", n_cand=10,
                      use_mle=False)
        table = self._tiny([arm])
        row = table.rows[0]
        assert row.t_select > 0 and row.t_cand > 0

    def test_csv_deterministic_rerun(self):
        arm = ArmSpec(name="random", criterion="random", n_cand=10,
                      use_mle=False)
        a = self._tiny([arm]).to_csv(include_timing=False)
        b = self._tiny([arm]).to_csv(include_timing=False)
        assert a == b
        assert a.splitlines()[0] == ("method,replicate,checkpoint_n,"
                                     "rmspe_normalized,max_abs_error")

    def test_mean_accessors(self):
        arm = ArmSpec(name="random", criterion="random", n_cand=10,
                      use_mle=False)
        table = self._tiny([arm])
        assert table.mean_rmspe("random", 5) == \
            table.rows[0].rmspe_normalized
        with pytest.raises(KeyError):
            table.mean_rmspe("alm", 5)


class TestTimingReport:
    def _record(self, ks, ts):
        rec = RunRecord()
        for k, t in zip(ks, ts):
            rec.steps.append(StepRecord(k=k, x=np.zeros(2), y=0.0, score=0.0,
                                        lengthscales=(1.0, 1.0), t_mle=0.1,
                                        t_cand=0.2, t_select=t))
        return rec

    def test_single_step_totals(self):
        rep = timing_report({"m": [self._record([2], [0.5])]})
        assert rep["m"]["t_select"] == pytest.approx(0.5)
        assert rep["m"]["t_mle"] == pytest.approx(0.1)
        assert rep["m"]["t_total"] == pytest.approx(0.8)
        assert np.isnan(rep["m"]["select_growth_exponent"])

    def test_growth_exponent_recovered(self):
        ks = np.arange(10, 60)
        ts = 1e-6 * ks.astype(float) ** 2
        rep = timing_report({"m": [self._record(ks, ts)]})
        assert rep["m"]["select_growth_exponent"] == pytest.approx(2.0,
                                                                  abs=1e-6)


class TestScoreField:
    def test_plain_grid_field_symmetric(self):
        # symmetric design on a symmetric grid: mirrored candidates score
        # identically
        model, pool = clustered_grid_scenario(extra_point=False)
        sheet = score_field_dump(model, pool, "mi")
        cand = pool.candidates
        mirrored = np.column_stack([1.0 - cand[:, 0], cand[:, 1]])
        from scipy.spatial.distance import cdist

        match = np.argmin(cdist(mirrored, cand), axis=1)
        assert np.allclose(sheet.scores, sheet.scores[match], rtol=1e-6)

    def test_csv_written(self, tmp_path):
        model, pool = clustered_grid_scenario()
        path = tmp_path / "field.csv"
        score_field_dump(model, pool, "mice", path=path)
        assert path.read_text().startswith("x1,x2,score,excluded_flag")

    def test_non_2d_rejected(self, rng):
        from gpseq.gp import Design, fit
        from gpseq.kernels import Family, KernelSpec
        from gpseq.sampling import CandidatePool

        X = rng.random((3, 3))
        model = fit(Design(X, rng.standard_normal(3)),
                    KernelSpec(Family.MATERN, (1.0,) * 3, nugget=1e-6))
        pool = CandidatePool(design_points=X, complement=rng.random((4, 3)),
                             candidate_idx=np.arange(4))
        with pytest.raises(ConfigError):
            score_field_dump(model, pool, "alm")

    def test_unknown_criterion_rejected(self):
        model, pool = clustered_grid_scenario()
        with pytest.raises(ConfigError):
            score_field_dump(model, pool, "entropy")

    def test_lhd_candidate_scenario_shapes(self):
        model, pool = lhd_candidate_scenario(seed=0)
        assert model.design.n == 5
        assert pool.n_candidates == 100


class TestCli:
    def test_parser_defaults(self):
        args = build_parser().parse_args([])
        assert args.objective == "oscillatory4d"
        assert args.replicates == 10

    def test_default_checkpoints(self):
        cps = default_checkpoints(30)
        assert cps == (5, 10, 15, 20, 25, 30)
        assert 120 in default_checkpoints(150)
        assert 75 in default_checkpoints(150)

    def test_score_field_mode(self, tmp_path):
        code = main(["--score-field", "mice", "--out", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "field_mice_plain.csv").exists()
        assert (tmp_path / "field_mice_clustered.csv").exists()

    def test_small_experiment(self, tmp_path):
        code = main(["--objective", "branin", "--methods", "random-10",
                     "--replicates", "1", "--budget", "5", "--checkpoints",
                     "5", "--validate-size", "20", "--mle-budget", "32",
                     "--out", str(tmp_path)])
        assert code == 0
        text = (tmp_path / "results.csv").read_text()
        assert text.splitlines()[0].startswith("method,replicate")

    def test_unknown_objective_exit_code(self, tmp_path, capsys):
        code = main(["--objective", "ackley", "--out", str(tmp_path)])
        assert code == 2

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("objective = branin\nreplicates = 1\nbudget = 5\n"
                       "validate-size = 20\nmethods = random-10\n"
                       "checkpoints = 5\nmle-budget = 32\n")
        out = tmp_path / "results"
        code = main(["--config", str(cfg), "--out", str(out)])
        assert code == 0
        assert (out / "results.csv").exists()

    def test_bad_config_line_exit_code(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("this is not a key value pair\n")
        assert main(["--config", str(cfg), "--out", str(tmp_path)]) == 2
