"""BLUP prediction with a constant mean, plus fast inverse updates.

The model is the classic kriging setup: given training pairs (X, y) and a
correlation matrix K (nugget included on the diagonal), the predictor is

    yhat(x) = beta + k(x)' K^-1 (y - beta 1)

with beta the GLS estimate under the all-ones basis, and the predictive
variance carries the GLS correction term.  All fitting and prediction runs
in normalized output units; de-normalization is opt-in.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, cholesky, solve_triangular

from .exceptions import CholeskyFailure, NumericalBreakdown, DegenerateAugmentation
from .kernels import KernelSpec, correlation_matrix, cross_correlation_matrix

logger = logging.getLogger(__name__)

# Negative variances larger than this indicate genuine breakdown rather
# than round-off (about 100x double-precision noise for 50x50 systems).
_VAR_CLAMP = -1e-12
_DUPLICATE_TOL = 1e-12
_JITTER = 1e-8


@dataclass
class Design:
    """Input points (scaled to the unit cube) with observed outputs.

    ``outputs`` stores raw simulator values; ``output_shift`` and
    ``output_scale`` hold the zero-mean unit-variance normalization state,
    refreshed on every append.
    """

    inputs: np.ndarray
    outputs: np.ndarray
    input_bounds: np.ndarray | None = None
    output_shift: float = 0.0
    output_scale: float = 1.0

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        self.outputs = np.asarray(self.outputs, dtype=float).ravel()
        if self.inputs.shape[0] != self.outputs.shape[0]:
            raise ValueError("inputs and outputs disagree on n")
        self.refresh_normalization()

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def dim(self) -> int:
        return self.inputs.shape[1]

    def refresh_normalization(self) -> None:
        if self.n >= 2:
            self.output_shift = float(np.mean(self.outputs))
            sd = float(np.std(self.outputs))
            self.output_scale = sd if sd > 1e-12 else 1.0
        else:
            self.output_shift = 0.0
            self.output_scale = 1.0

    def normalized_outputs(self) -> np.ndarray:
        return (self.outputs - self.output_shift) / self.output_scale

    def min_distance_to(self, x) -> float:
        if self.n == 0:
            return np.inf
        d = self.inputs - np.asarray(x, dtype=float)[None, :]
        return float(np.sqrt(np.min(np.sum(d * d, axis=1))))

    def append(self, x, y: float) -> None:
        x = np.asarray(x, dtype=float).ravel()
        if self.n and self.min_distance_to(x) <= _DUPLICATE_TOL:
            raise ValueError("duplicate design point (within 1e-12)")
        self.inputs = np.vstack([self.inputs, x[None, :]])
        self.outputs = np.append(self.outputs, float(y))
        self.refresh_normalization()

    def copy(self) -> "Design":
        return Design(self.inputs.copy(), self.outputs.copy(),
                      None if self.input_bounds is None else self.input_bounds.copy())


def _chol(K: np.ndarray):
    try:
        return cho_factor(K, lower=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - scipy raises LinAlgError
        raise CholeskyFailure(str(exc)) from exc
    except Exception as exc:
        raise CholeskyFailure(str(exc)) from exc


class GpModel:
    """A fitted GP emulator; immutable after construction."""

    def __init__(self, design: Design, kernel: KernelSpec, jitter_retry: bool = True):
        if design.n < 1:
            raise ValueError("need at least one design point")
        if design.dim != kernel.dim:
            raise ValueError("kernel dimension does not match design")
        self.design = design
        K = correlation_matrix(kernel, design.inputs)
        try:
            cf = _chol(K)
        except CholeskyFailure:
            if not jitter_retry:
                raise
            jitter = max(kernel.nugget, _JITTER)
            logger.warning("Cholesky failed at nugget %.3g; retrying with %.3g",
                           kernel.nugget, jitter)
            kernel = kernel.with_nugget(jitter)
            K = correlation_matrix(kernel, design.inputs)
            cf = _chol(K)
        self.kernel = kernel
        self._cf = cf
        self._K = K
        y = design.normalized_outputs()
        ones = np.ones(design.n)
        self._Kinv_ones = cho_solve(cf, ones)
        self._ones_Kinv_ones = float(ones @ self._Kinv_ones)
        self.beta_hat = float(self._Kinv_ones @ y / self._ones_Kinv_ones)
        self.weights = cho_solve(cf, y - self.beta_hat * ones)

    # -- internals -------------------------------------------------------

    @property
    def chol(self) -> np.ndarray:
        """Lower-triangular Cholesky factor of K + nugget I."""
        L = np.tril(self._cf[0])
        return L

    def _cross(self, Q) -> np.ndarray:
        return cross_correlation_matrix(self.kernel, self.design.inputs, np.atleast_2d(Q))

    # -- prediction ------------------------------------------------------

    def predict_mean(self, Q, denormalize: bool = False):
        """BLUP mean at query points Q ((m, p) or a single point)."""
        Q = np.asarray(Q, dtype=float)
        single = Q.ndim == 1
        Kq = self._cross(Q)
        mean = self.beta_hat + Kq.T @ self.weights
        if denormalize:
            mean = self.design.output_shift + self.design.output_scale * mean
        return float(mean[0]) if single else mean

    def predict_variance(self, Q):
        """Predictive variance (MSPE) at query points, nugget-in-K form."""
        Q = np.asarray(Q, dtype=float)
        single = Q.ndim == 1
        Kq = self._cross(Q)
        v = cho_solve(self._cf, Kq)
        quad = np.sum(Kq * v, axis=0)
        gls = (1.0 - self._Kinv_ones @ Kq) ** 2 / self._ones_Kinv_ones
        s2 = self.kernel.process_variance * (1.0 - quad + gls)
        if np.any(s2 < _VAR_CLAMP):
            raise NumericalBreakdown(
                f"predictive variance {s2.min():.3e} below clamp threshold")
        s2 = np.maximum(s2, 0.0)
        return float(s2[0]) if single else s2

    def predict_covariance(self, x, x_other) -> float:
        """Predictive covariance V(x, x') between two query points."""
        return float(self.predict_covariance_vector(x, np.atleast_2d(x_other))[0])

    def predict_covariance_vector(self, x, R) -> np.ndarray:
        """Predictive covariances V(x, r) against each row r of R."""
        x = np.asarray(x, dtype=float).ravel()
        R = np.atleast_2d(np.asarray(R, dtype=float))
        kx = self._cross(x[None, :])[:, 0]
        Kr = self._cross(R)
        ax = cho_solve(self._cf, kx)
        cross = self._kxx(x[None, :], R)  # prior correlations k(x, r)
        quad = Kr.T @ ax
        hx = 1.0 - float(self._Kinv_ones @ kx)
        hr = 1.0 - self._Kinv_ones @ Kr
        gls = hx * hr / self._ones_Kinv_ones
        return self.kernel.process_variance * (cross - quad + gls)

    def _kxx(self, A, B) -> np.ndarray:
        return cross_correlation_matrix(self.kernel, A, B)[0, :]

    # -- identities ------------------------------------------------------

    def nugget_variance_identity(self, i: int) -> float:
        """Closed-form predictive variance at design point i.

        Valid for constant-mean models with a positive nugget; used to
        cross-check ``predict_variance`` at design points.
        """
        n = self.design.n
        if not 0 <= i < n:
            raise IndexError("design-point index out of range")
        t2 = self.kernel.nugget
        e = np.zeros(n)
        e[i] = 1.0
        Ae = cho_solve(self._cf, e)
        term1 = t2 - t2 * t2 * float(e @ Ae)
        term2 = t2 * t2 * float(e @ self._Kinv_ones) ** 2 / self._ones_Kinv_ones
        return self.kernel.process_variance * (term1 + term2)


def fit(design: Design, kernel: KernelSpec, jitter_retry: bool = True) -> GpModel:
    """Fit a constant-mean GP emulator to the design."""
    return GpModel(design, kernel, jitter_retry=jitter_retry)


def entropy(K: np.ndarray) -> float:
    """Gaussian entropy in bits of a vector with correlation matrix K."""
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    try:
        L = cholesky(K, lower=True)
    except np.linalg.LinAlgError as exc:
        raise CholeskyFailure(str(exc)) from exc
    logdet2 = 2.0 * np.sum(np.log2(np.diag(L)))
    return 0.5 * (n * np.log2(2.0 * np.pi * np.e) + logdet2)


def rank_one_inverse_update(Kinv: np.ndarray, k_vec: np.ndarray, diag: float) -> np.ndarray:
    """(k+1) x (k+1) inverse after appending one point, in O(k^2).

    ``Kinv`` is the current inverse, ``k_vec`` the correlations between the
    new point and the current ones, ``diag`` the new diagonal entry
    (1 + nugget for a correlation system).
    """
    Kinv = np.asarray(Kinv, dtype=float)
    k_vec = np.asarray(k_vec, dtype=float).ravel()
    u = Kinv @ k_vec
    c = float(diag - k_vec @ u)
    if c <= 1e-12:
        raise DegenerateAugmentation(
            f"Schur complement {c:.3e} <= 1e-12 (numerically duplicate point)")
    k = Kinv.shape[0]
    out = np.empty((k + 1, k + 1))
    out[:k, :k] = Kinv + np.outer(u, u) / c
    out[:k, k] = -u / c
    out[k, :k] = -u / c
    out[k, k] = 1.0 / c
    return out


def deletion_inverse_update(Kinv_full: np.ndarray, j: int) -> np.ndarray:
    """(m-1) x (m-1) inverse after dropping row/column j, in O(m^2)."""
    Kinv_full = np.asarray(Kinv_full, dtype=float)
    m = Kinv_full.shape[0]
    if not 0 <= j < m:
        raise IndexError("deletion index out of range")
    if m < 2:
        raise ValueError("need at least a 2x2 system to delete from")
    keep = np.arange(m) != j
    B = Kinv_full[np.ix_(keep, keep)]
    b12 = Kinv_full[keep, j]
    b = Kinv_full[j, j]
    return B - np.outer(b12, b12) / b


def variance_bound_constants(K_grid: np.ndarray, tau2: float) -> tuple[float, float]:
    """Constants (b1, b2) of the grid variance bounds.

    ``K_grid`` is the nugget-free correlation matrix over the grid;
    b1 = max_i e_i' (K + tau2 I)^-1 e_i and
    b2 = max_i (e_i' (K + tau2 I)^-1 1)^2 / (1' (K + tau2 I)^-1 1).
    """
    K = np.asarray(K_grid, dtype=float) + tau2 * np.eye(K_grid.shape[0])
    cf = _chol(K)
    A = cho_solve(cf, np.eye(K.shape[0]))
    u = A @ np.ones(K.shape[0])
    b1 = float(np.max(np.diag(A)))
    b2 = float(np.max(u**2) / np.sum(u))
    return b1, b2


def solve_lower(L: np.ndarray, b: np.ndarray) -> np.ndarray:
    return solve_triangular(L, b, lower=True)
