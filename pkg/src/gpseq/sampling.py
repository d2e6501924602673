"""Space-filling point sets: Latin hypercubes, maximin/minimax selection,
regular grids, per-step candidate pools, and stationary-GRF realizations.

All generators are deterministic given their seed and produce points in
the closed unit cube.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky
from scipy.spatial.distance import cdist, pdist

from .exceptions import CholeskyFailure, SizeOverflow
from .kernels import KernelSpec, correlation_matrix

_GRID_CAP = 10**6
_DUPLICATE_TOL = 1e-12
_GRF_JITTER = 1e-10


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


@dataclass
class CandidatePool:
    """Discretization and candidate subset for one selection step.

    ``grid`` is the union of the current design and the fresh complement;
    ``complement`` holds the fresh (non-design) grid points, of which
    ``candidates`` (indexed into the complement by ``candidate_idx``) are
    available for selection.  ``reference`` points are used by ALC.
    """

    design_points: np.ndarray
    complement: np.ndarray
    candidate_idx: np.ndarray
    reference: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))

    @property
    def grid(self) -> np.ndarray:
        if self.design_points.size == 0:
            return self.complement
        return np.vstack([self.design_points, self.complement])

    @property
    def candidates(self) -> np.ndarray:
        return self.complement[self.candidate_idx]

    @property
    def n_candidates(self) -> int:
        return len(self.candidate_idx)


def latin_hypercube(n: int, p: int, seed=None) -> np.ndarray:
    """n-point LHD on [0,1]^p: one point per axis stratum per dimension."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = _rng(seed)
    cols = []
    for _ in range(p):
        perm = rng.permutation(n)
        cols.append((perm + rng.uniform(size=n)) / n)
    return np.column_stack(cols)


def maximin_lhd(n: int, p: int, pool_size: int = 1000, seed=None) -> np.ndarray:
    """Best-of-pool LHD under the maximin pairwise-distance score."""
    if n < 2:
        raise ValueError("n must be >= 2 for a pairwise-distance score")
    rng = _rng(seed)
    best, best_score = None, -np.inf
    for _ in range(pool_size):
        X = latin_hypercube(n, p, rng)
        score = float(np.min(pdist(X)))
        if score > best_score:
            best, best_score = X, score
    return best


def minimax_lhd(n: int, p: int, pool_size: int = 1000, n_ref: int = 1000,
                seed=None) -> np.ndarray:
    """Best-of-pool LHD minimizing the max distance from reference points."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = _rng(seed)
    ref = latin_hypercube(n_ref, p, rng)
    best, best_score = None, np.inf
    for _ in range(pool_size):
        X = latin_hypercube(n, p, rng)
        score = float(np.max(np.min(cdist(ref, X), axis=1)))
        if score < best_score:
            best, best_score = X, score
    return best


def regular_grid(p: int, points_per_axis: int, cap: int = _GRID_CAP) -> np.ndarray:
    """Full-factorial equidistant grid on [0,1]^p."""
    if points_per_axis < 2:
        raise ValueError("points_per_axis must be >= 2")
    total = points_per_axis**p
    if total > cap:
        raise SizeOverflow(f"grid of {total} points exceeds cap {cap}")
    axes = [np.linspace(0.0, 1.0, points_per_axis)] * p
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def candidate_pool_for_step(current_design: np.ndarray, n_grid: int,
                            n_cand: int, lhd_pool: int = 100, seed=None,
                            n_ref: int | None = None) -> CandidatePool:
    """Fresh discretization and candidate set for one selection step.

    Draws ``lhd_pool`` LHDs of ``n_grid`` points and keeps the one whose
    minimum distance to the current design is largest; the grid is the
    union of that winner with the design.  When ``n_cand < n_grid`` the
    candidates are the subset farthest from the design.
    """
    if n_cand > n_grid:
        raise ValueError("n_cand must be <= n_grid")
    rng = _rng(seed)
    design = np.atleast_2d(np.asarray(current_design, dtype=float))
    k = design.shape[0]
    p = _require_dim(design)

    best, best_score = None, -np.inf
    for _ in range(lhd_pool):
        X = latin_hypercube(n_grid, p, rng)
        if k:
            score = float(np.min(cdist(X, design)))
        else:
            score = float(np.min(pdist(X))) if n_grid > 1 else 1.0
        if score > best_score:
            best, best_score = X, score

    fresh = best
    if k:
        dist = np.min(cdist(fresh, design), axis=1)
        keep = dist > _DUPLICATE_TOL
        fresh, dist = fresh[keep], dist[keep]
    else:
        dist = np.full(len(fresh), np.inf)

    if n_cand >= len(fresh):
        cand_idx = np.arange(len(fresh))
    else:
        cand_idx = np.sort(np.argsort(dist)[::-1][:n_cand])

    n_ref = n_cand if n_ref is None else n_ref
    ref = latin_hypercube(n_ref, fresh.shape[1], rng)
    return CandidatePool(design_points=design if k else np.empty((0, fresh.shape[1])),
                         complement=fresh, candidate_idx=cand_idx, reference=ref)


def _require_dim(design) -> int:
    arr = np.asarray(design)
    if arr.ndim == 2 and arr.shape[1] > 0:
        return arr.shape[1]
    raise ValueError("cannot infer dimension from an empty design; "
                     "pass a (0, p) array")


def fixed_grid_pool(grid: np.ndarray, candidate_subset: np.ndarray,
                    design: np.ndarray, reference: np.ndarray | None = None) -> CandidatePool:
    """Pool over a fixed discretization, excluding current design members.

    Used by fixed-grid experiments where the grid is not resampled: the
    complement is the grid minus design rows (matched within 1e-12) and the
    candidates are the non-design members of ``candidate_subset``.
    """
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    design = np.atleast_2d(np.asarray(design, dtype=float))
    if design.size == 0:
        design = np.empty((0, grid.shape[1]))
    if design.shape[0]:
        d = np.min(cdist(grid, design), axis=1)
        keep = d > _DUPLICATE_TOL
    else:
        keep = np.ones(len(grid), dtype=bool)
    complement = grid[keep]
    cand = np.atleast_2d(np.asarray(candidate_subset, dtype=float))
    if design.shape[0]:
        cand = cand[np.min(cdist(cand, design), axis=1) > _DUPLICATE_TOL]
    # map candidates to complement rows
    idx = np.argmin(cdist(cand, complement), axis=1)
    if np.any(np.linalg.norm(cand - complement[idx], axis=1) > _DUPLICATE_TOL):
        raise ValueError("candidate subset must be contained in the grid")
    ref = cand if reference is None else np.atleast_2d(reference)
    return CandidatePool(design_points=design, complement=complement,
                         candidate_idx=np.unique(idx), reference=ref)


def sample_grf_realization(grid: np.ndarray, kernel: KernelSpec, seed=None) -> np.ndarray:
    """One realization of a zero-mean stationary GRF on the given points."""
    rng = _rng(seed)
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    K = correlation_matrix(kernel.with_nugget(_GRF_JITTER), grid)
    try:
        L = cholesky(K, lower=True)
    except np.linalg.LinAlgError as exc:
        raise CholeskyFailure(str(exc)) from exc
    z = rng.standard_normal(len(grid))
    return np.sqrt(kernel.process_variance) * (L @ z)


def save_points_csv(path, X: np.ndarray) -> None:
    """One row per point, full double precision."""
    np.savetxt(path, np.atleast_2d(X), delimiter=",", fmt="%.17g")
