"""Next-point selection criteria: ALM, ALC (fast form), MI, and MICE.

Each scorer maps a fitted model plus candidate pool to per-candidate
scores and a deterministic argmax (ties break to the lowest candidate
index).  MI and MICE share one implementation: both are the ratio of the
current-design predictive variance to the predictive variance under the
grid complement, differing only in the complement-system nugget.

The complement variances for all candidates are obtained from a single
factorization of the complement correlation matrix: removing a
candidate's own row/column is a bordered-block deletion applied to the
full inverse, so no per-candidate refactorization is needed.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .exceptions import CholeskyFailure, EmptyPool
from .gp import GpModel, deletion_inverse_update
from .kernels import correlation_matrix
from .sampling import CandidatePool

logger = logging.getLogger(__name__)

_VARIANCE_FLOOR = 1e-14


@dataclass
class CriterionScoreSheet:
    candidates: np.ndarray
    scores: np.ndarray
    chosen_index: int
    excluded: np.ndarray
    tie_policy_applied: bool
    raw_scores: np.ndarray | None = None

    @property
    def chosen(self) -> np.ndarray:
        return self.candidates[self.chosen_index]

    def to_csv(self, path) -> None:
        p = self.candidates.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{i + 1}" for i in range(p)] + ["score", "excluded_flag"])
            for row, s, ex in zip(self.candidates, self.scores, self.excluded):
                w.writerow([f"{v:.17g}" for v in row] + [f"{s:.17g}", int(ex)])


def _finalize(candidates: np.ndarray, scores: np.ndarray,
              excluded: np.ndarray, raw=None) -> CriterionScoreSheet:
    if np.all(excluded):
        raise EmptyPool("all candidates excluded or pool empty")
    masked = np.where(excluded, -np.inf, scores)
    chosen = int(np.argmax(masked))
    ties = int(np.sum(masked == masked[chosen])) > 1
    return CriterionScoreSheet(candidates=candidates, scores=scores,
                               chosen_index=chosen, excluded=excluded,
                               tie_policy_applied=ties, raw_scores=raw)


def score_alm(model: GpModel, pool: CandidatePool) -> CriterionScoreSheet:
    """Maximize the predictive variance over the candidates."""
    cand = pool.candidates
    if len(cand) == 0:
        raise EmptyPool("no candidates")
    scores = model.predict_variance(cand)
    return _finalize(cand, scores, np.zeros(len(cand), dtype=bool))


def score_alc(model: GpModel, pool: CandidatePool) -> CriterionScoreSheet:
    """Average variance reduction over the reference points (fast form).

    score(x) = mean_i V(x, r_i)^2 / s2(x); candidates whose own variance
    underflows are excluded with a logged warning.
    """
    cand = pool.candidates
    refs = pool.reference
    if len(cand) == 0:
        raise EmptyPool("no candidates")
    if refs is None or refs.size == 0:
        raise EmptyPool("ALC requires reference points")
    scores = np.zeros(len(cand))
    excluded = np.zeros(len(cand), dtype=bool)
    s2 = model.predict_variance(cand)
    for j, x in enumerate(cand):
        if s2[j] <= _VARIANCE_FLOOR:
            excluded[j] = True
            logger.warning("ALC: candidate %d skipped (variance %.3e)", j, s2[j])
            continue
        v = model.predict_covariance_vector(x, refs)
        scores[j] = float(np.mean(v * v)) / s2[j]
    return _finalize(cand, scores, excluded)


def complement_variances(model: GpModel, pool: CandidatePool,
                         nugget: float, indices=None) -> np.ndarray:
    """Leave-self-out predictive variance on the grid complement.

    For every complement member x_j (or just the rows in ``indices``),
    returns the constant-mean predictive variance at x_j of a GP over
    the complement minus x_j, using the model's correlation parameters
    and the given nugget.  One Cholesky of the full complement system
    serves all members; each member's own row/column is then removed by
    a bordered-block deletion of the inverse.
    """
    pts = pool.complement
    m = len(pts)
    if m < 2:
        raise EmptyPool("complement must contain at least two points")
    if indices is None:
        indices = np.arange(m)
    spec = model.kernel.with_nugget(nugget)
    K = correlation_matrix(spec, pts)
    try:
        cf = cho_factor(K, lower=True)
    except Exception as exc:
        raise CholeskyFailure(str(exc)) from exc
    Kinv = cho_solve(cf, np.eye(m))
    out = np.empty(len(indices))
    for pos, j in enumerate(indices):
        A = deletion_inverse_update(Kinv, j)
        keep = np.concatenate([np.arange(j), np.arange(j + 1, m)])
        kv = K[keep, j]  # off-diagonal entries carry no nugget
        Ak = A @ kv
        rs = A.sum(axis=1)
        denom = float(rs.sum())
        gls = (1.0 - float(rs @ kv)) ** 2 / denom
        out[pos] = 1.0 - float(kv @ Ak) + gls
    return model.kernel.process_variance * out


def _score_ratio(model: GpModel, pool: CandidatePool, nugget_den: float,
                 keep_raw: bool = False) -> CriterionScoreSheet:
    cand = pool.candidates
    if len(cand) == 0:
        raise EmptyPool("no candidates")
    s2_num = model.predict_variance(cand)
    s2_den = complement_variances(model, pool, nugget_den,
                                  indices=pool.candidate_idx)
    excluded = s2_den <= _VARIANCE_FLOOR
    if np.any(excluded):
        logger.warning("ratio criterion: %d candidate(s) excluded "
                       "(denominator underflow)", int(np.sum(excluded)))
    raw = np.divide(s2_num, s2_den,
                    out=np.full(len(cand), np.inf), where=s2_den > 0)
    scores = np.where(excluded, 0.0, raw)
    return _finalize(cand, scores, excluded, raw=raw if keep_raw else None)


def score_mi(model: GpModel, pool: CandidatePool, tau2: float,
             keep_raw: bool = False) -> CriterionScoreSheet:
    """Greedy mutual-information criterion (same nugget in both GPs)."""
    return _score_ratio(model, pool, tau2, keep_raw=keep_raw)


def score_mice(model: GpModel, pool: CandidatePool, tau2: float,
               tau2_s: float = 1.0, keep_raw: bool = False) -> CriterionScoreSheet:
    """MI ratio with a smoothing nugget max(tau2, tau2_s) in the denominator."""
    if tau2_s <= 0:
        raise ValueError("tau2_s must be positive")
    return _score_ratio(model, pool, max(tau2, tau2_s), keep_raw=keep_raw)
