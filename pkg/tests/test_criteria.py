"""Selection criteria: ALM/ALC/MI/MICE scoring, the shared-factorization
denominator against per-point refit oracles, the ratio criteria's
exclusion policy, and argmax invariances."""
import logging

import numpy as np
import pytest

import gpseq.criteria as criteria
from gpseq.criteria import (CriterionScoreSheet, complement_variances,
                            score_alc, score_alm, score_mi, score_mice)
from gpseq.exceptions import EmptyPool
from gpseq.gp import Design, fit
from gpseq.kernels import (Family, KernelSpec, correlation_matrix,
                           cross_correlation_vector)
from gpseq.sampling import CandidatePool, candidate_pool_for_step

SE2 = KernelSpec(Family.SQUARED_EXPONENTIAL, (0.5, 0.5))


def _model_and_pool(rng, n=6, m=12, nugget=1e-6, n_cand=None):
    X = rng.random((n, 2))
    y = rng.standard_normal(n)
    model = fit(Design(X, y), SE2.with_nugget(nugget))
    comp = rng.random((m, 2))
    idx = np.arange(m if n_cand is None else n_cand)
    pool = CandidatePool(design_points=X, complement=comp, candidate_idx=idx,
                         reference=rng.random((5, 2)))
    return model, pool


def refit_variance_oracle(spec, pts, exclude_j, x):
    """Variance at x for a GP over pts minus row j, via explicit inverse."""
    keep = np.arange(len(pts)) != exclude_j
    Z = pts[keep]
    K = correlation_matrix(spec, Z)
    Ki = np.linalg.inv(K)
    ones = np.ones(len(Z))
    k = cross_correlation_vector(spec, Z, x)
    gls = (1.0 - float(ones @ Ki @ k)) ** 2 / float(ones @ Ki @ ones)
    return spec.process_variance * (1.0 - float(k @ Ki @ k) + gls)


class TestScoreAlm:
    def test_single_candidate_chosen(self, rng):
        model, pool = _model_and_pool(rng, m=1)
        sheet = score_alm(model, pool)
        assert sheet.chosen_index == 0

    def test_design_coincident_candidate_never_chosen(self, rng):
        X = rng.random((4, 2))
        model = fit(Design(X, rng.standard_normal(4)), SE2)  # zero nugget
        comp = np.vstack([X[0], rng.random((3, 2))])
        pool = CandidatePool(design_points=X, complement=comp,
                             candidate_idx=np.arange(4))
        sheet = score_alm(model, pool)
        assert sheet.scores[0] < 1e-8
        assert sheet.chosen_index != 0

    def test_far_corner_beats_interior(self):
        X = np.array([[0.4, 0.4], [0.6, 0.6]])
        model = fit(Design(X, np.array([1.0, 2.0])), SE2.with_nugget(1e-8))
        comp = np.array([[0.5, 0.5], [1.0, 0.0]])
        pool = CandidatePool(design_points=X, complement=comp,
                             candidate_idx=np.arange(2))
        sheet = score_alm(model, pool)
        assert np.allclose(sheet.chosen, [1.0, 0.0])

    def test_scores_are_predictive_variances(self, rng):
        model, pool = _model_and_pool(rng)
        sheet = score_alm(model, pool)
        assert np.allclose(sheet.scores,
                           model.predict_variance(pool.candidates))

    def test_empty_pool(self, rng):
        model, pool = _model_and_pool(rng, n_cand=0)
        with pytest.raises(EmptyPool):
            score_alm(model, pool)


class TestScoreAlc:
    def test_self_reference_reduces_to_alm(self, rng):
        model, pool = _model_and_pool(rng, m=4)
        for j in range(4):
            single = CandidatePool(design_points=pool.design_points,
                                   complement=pool.complement,
                                   candidate_idx=np.array([j]),
                                   reference=pool.complement[j][None, :])
            sheet = score_alc(model, single)
            # V(x, x) = s2(x), so the score collapses to s2(x)
            assert sheet.scores[0] == pytest.approx(
                float(model.predict_variance(pool.complement[j])), rel=1e-10)

    def test_degenerate_candidate_excluded(self, rng, caplog):
        X = rng.random((4, 2))
        model = fit(Design(X, rng.standard_normal(4)), SE2)  # zero nugget
        comp = np.vstack([X[0], rng.random((2, 2))])
        pool = CandidatePool(design_points=X, complement=comp,
                             candidate_idx=np.arange(3),
                             reference=rng.random((4, 2)))
        with caplog.at_level(logging.WARNING):
            sheet = score_alc(model, pool)
        assert sheet.excluded[0]
        assert sheet.chosen_index != 0
        assert "skipped" in caplog.text

    def test_argmax_matches_refit_oracle(self, rng):
        # brute-force oracle: for each candidate, refit with that point
        # appended (dummy output) and measure the average variance drop
        # over the references
        for trial in range(5):
            g = np.random.default_rng(100 + trial)
            n, nc, nr = g.integers(3, 9), g.integers(2, 7), g.integers(2, 7)
            X = g.random((n, 2))
            y = g.standard_normal(n)
            spec = SE2.with_nugget(1e-8)
            model = fit(Design(X, y), spec)
            cand = g.random((nc, 2))
            refs = g.random((nr, 2))
            pool = CandidatePool(design_points=X, complement=cand,
                                 candidate_idx=np.arange(nc), reference=refs)
            sheet = score_alc(model, pool)

            drops = []
            base = model.predict_variance(refs)
            for x in cand:
                d2 = Design(np.vstack([X, x]), np.append(y, 0.0))
                aug = fit(d2, spec)
                drops.append(float(np.mean(base - aug.predict_variance(refs))))
            assert sheet.chosen_index == int(np.argmax(drops))


class TestComplementVariances:
    def test_matches_refit_oracle(self, rng):
        model, pool = _model_and_pool(rng, m=10)
        nug = 0.3
        got = complement_variances(model, pool, nug)
        spec = model.kernel.with_nugget(nug)
        for j in range(10):
            oracle = refit_variance_oracle(spec, pool.complement, j,
                                           pool.complement[j])
            assert got[j] == pytest.approx(oracle, abs=1e-10)

    def test_subset_indices(self, rng):
        model, pool = _model_and_pool(rng, m=10)
        full = complement_variances(model, pool, 0.5)
        sub = complement_variances(model, pool, 0.5,
                                   indices=np.array([1, 4, 8]))
        assert np.allclose(sub, full[[1, 4, 8]])

    def test_requires_two_members(self, rng):
        model, pool = _model_and_pool(rng, m=1)
        with pytest.raises(EmptyPool):
            complement_variances(model, pool, 1.0)


class TestRatioCriteria:
    def test_mi_equals_mice_with_matching_nugget(self, rng):
        for _ in range(10):
            model, pool = _model_and_pool(rng, nugget=1e-4)
            mi = score_mi(model, pool, 1e-4)
            mice = score_mice(model, pool, 1e-4, tau2_s=1e-4)
            assert np.array_equal(mi.scores, mice.scores)
            assert mi.chosen_index == mice.chosen_index

    def test_mice_uses_larger_nugget_in_denominator(self, rng):
        model, pool = _model_and_pool(rng)
        num = model.predict_variance(pool.candidates)
        den = complement_variances(model, pool, 1.0,
                                   indices=pool.candidate_idx)
        sheet = score_mice(model, pool, 1e-6, tau2_s=1.0)
        assert np.allclose(sheet.scores, num / den)

    def test_mice_denominator_floor(self, rng):
        # smoothing nugget 1 keeps every denominator above sigma^2 tau_s^2 / m
        for _ in range(20):
            model, pool = _model_and_pool(rng, n=int(rng.integers(3, 8)),
                                          m=int(rng.integers(4, 15)))
            m = len(pool.complement)
            den = complement_variances(model, pool, 1.0)
            sigma2 = model.kernel.process_variance
            assert np.all(den >= sigma2 * 1.0 / m)

    def test_underflow_candidates_excluded_not_infinite(self, rng, caplog,
                                                        monkeypatch):
        model, pool = _model_and_pool(rng, m=4)
        fake = np.array([0.2, 1e-15, 0.3, 0.4])

        def stub(model_, pool_, nugget, indices=None):
            return fake if indices is None else fake[indices]

        monkeypatch.setattr(criteria, "complement_variances", stub)
        with caplog.at_level(logging.WARNING):
            sheet = score_mi(model, pool, 1e-6, keep_raw=True)
        assert sheet.excluded[1]
        assert sheet.scores[1] == 0.0
        assert np.all(np.isfinite(sheet.scores))
        assert sheet.chosen_index != 1
        assert np.isfinite(sheet.raw_scores[1]) or sheet.raw_scores[1] == np.inf
        assert "excluded" in caplog.text

    def test_all_excluded_raises(self, rng, monkeypatch):
        model, pool = _model_and_pool(rng, m=3)
        monkeypatch.setattr(
            criteria, "complement_variances",
            lambda *a, **k: np.zeros(3))
        with pytest.raises(EmptyPool):
            score_mi(model, pool, 1e-6)

    def test_nonpositive_smoothing_nugget_rejected(self, rng):
        model, pool = _model_and_pool(rng)
        with pytest.raises(ValueError):
            score_mice(model, pool, 1e-6, tau2_s=0.0)


class TestArgmaxInvariances:
    def test_scale_equivariance(self, rng):
        X = rng.random((5, 2))
        y = rng.standard_normal(5)
        comp = rng.random((8, 2))
        refs = rng.random((5, 2))
        for c in (0.5, 4.0):
            base_spec = SE2.with_nugget(1e-4)
            scaled_spec = base_spec.with_process_variance(c)
            m1 = fit(Design(X, y), base_spec)
            m2 = fit(Design(X, y), scaled_spec)
            p1 = CandidatePool(X, comp, np.arange(8), refs)
            p2 = CandidatePool(X, comp, np.arange(8), refs)
            alm1, alm2 = score_alm(m1, p1), score_alm(m2, p2)
            assert np.allclose(alm2.scores, c * alm1.scores)
            assert alm1.chosen_index == alm2.chosen_index
            alc1, alc2 = score_alc(m1, p1), score_alc(m2, p2)
            assert np.allclose(alc2.scores, c * alc1.scores)
            assert alc1.chosen_index == alc2.chosen_index
            mi1, mi2 = score_mi(m1, p1, 1e-4), score_mi(m2, p2, 1e-4)
            assert np.allclose(mi2.scores, mi1.scores)
            assert mi1.chosen_index == mi2.chosen_index
            mc1 = score_mice(m1, p1, 1e-4, 1.0)
            mc2 = score_mice(m2, p2, 1e-4, 1.0)
            assert np.allclose(mc2.scores, mc1.scores)
            assert mc1.chosen_index == mc2.chosen_index

    def test_tie_breaks_to_lowest_index(self):
        # a symmetric two-candidate layout produces an exact score tie
        X = np.array([[0.5, 0.5]])
        model = fit(Design(X, np.array([1.0])), SE2.with_nugget(1e-8))
        comp = np.array([[0.2, 0.5], [0.8, 0.5]])
        pool = CandidatePool(design_points=X, complement=comp,
                             candidate_idx=np.arange(2))
        sheet = score_alm(model, pool)
        assert sheet.scores[0] == sheet.scores[1]
        assert sheet.chosen_index == 0
        assert sheet.tie_policy_applied

    def test_determinism(self, rng):
        model, pool = _model_and_pool(rng)
        a = score_mice(model, pool, 1e-6, 1.0)
        b = score_mice(model, pool, 1e-6, 1.0)
        assert np.array_equal(a.scores, b.scores)
        assert a.chosen_index == b.chosen_index


def test_score_sheet_csv(tmp_path, rng):
    X = rng.random((4, 2))
    model = fit(Design(X, rng.standard_normal(4)), SE2.with_nugget(1e-6))
    pool = CandidatePool(design_points=X, complement=rng.random((5, 2)),
                         candidate_idx=np.arange(5))
    sheet = score_alm(model, pool)
    path = tmp_path / "sheet.csv"
    sheet.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "x1,x2,score,excluded_flag"
    assert len(lines) == 6
