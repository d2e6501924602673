"""Stationary correlation functions and correlation-matrix assembly.

Correlations are products of one-dimensional stationary correlations, one
factor per input dimension (anisotropic lengthscales).  The nugget is added
only to the diagonal of an assembled correlation matrix, never to
cross-correlation vectors.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.special import gammaln, logsumexp

# Below this value a correlation is clamped to exactly zero (avoids
# denormal slowdowns; unobservable at test tolerances).
_CORR_FLOOR = 1e-300


class Family(str, Enum):
    SQUARED_EXPONENTIAL = "se"
    MATERN = "matern"


@dataclass(frozen=True)
class KernelSpec:
    """Correlation family plus its parameters.

    ``lengthscales`` has one strictly positive entry per input dimension.
    ``smoothness`` is the Matern order (half-integer required); ignored for
    the squared-exponential family.  ``process_variance`` scales the
    correlation into a covariance; ``nugget`` is added to matrix diagonals.
    """

    family: Family
    lengthscales: tuple[float, ...]
    smoothness: float = 2.5
    process_variance: float = 1.0
    nugget: float = 0.0

    def __post_init__(self):
        ls = tuple(float(v) for v in self.lengthscales)
        object.__setattr__(self, "lengthscales", ls)
        if any(v <= 0.0 for v in ls):
            raise ValueError("lengthscales must be strictly positive")
        if self.process_variance <= 0.0:
            raise ValueError("process_variance must be positive")
        if self.nugget < 0.0:
            raise ValueError("nugget must be non-negative")
        if self.family == Family.MATERN:
            if self.smoothness <= 0.0:
                raise ValueError("smoothness must be positive")
            q = self.smoothness - 0.5
            if abs(q - round(q)) > 1e-12:
                raise ValueError(
                    "only half-integer Matern smoothness is supported"
                )

    @property
    def dim(self) -> int:
        return len(self.lengthscales)

    def with_lengthscales(self, ls) -> "KernelSpec":
        return replace(self, lengthscales=tuple(float(v) for v in ls))

    def with_nugget(self, nugget: float) -> "KernelSpec":
        return replace(self, nugget=float(nugget))

    def with_process_variance(self, s2: float) -> "KernelSpec":
        return replace(self, process_variance=float(s2))


def _matern_half_integer_1d(u: np.ndarray, nu: float) -> np.ndarray:
    """One-dimensional Matern correlation with half-integer order.

    ``u = sqrt(2 nu) r / ell``.  Uses the closed forms for nu in
    {1/2, 3/2, 5/2} and a log-space polynomial sum for larger orders.
    """
    if nu == 0.5:
        return np.exp(-u)
    if nu == 1.5:
        return (1.0 + u) * np.exp(-u)
    if nu == 2.5:
        return (1.0 + u + u * u / 3.0) * np.exp(-u)
    # General half-integer order q + 1/2:
    #   k(u) = exp(-u) * (q! / (2q)!) * sum_i (q+i)!/(i!(q-i)!) (2u)^(q-i)
    q = int(round(nu - 0.5))
    i = np.arange(q + 1)
    log_coef = (
        gammaln(q + 1) - gammaln(2 * q + 1)
        + gammaln(q + i + 1) - gammaln(i + 1) - gammaln(q - i + 1)
    )
    with np.errstate(divide="ignore"):
        log_2u = np.log(np.maximum(2.0 * u, 1e-320))
    # shape (..., q+1)
    terms = log_coef + (q - i) * log_2u[..., None]
    out = np.exp(logsumexp(terms, axis=-1) - u)
    return np.minimum(out, 1.0)


def _corr_from_sqdiff(spec: KernelSpec, sq_or_abs: np.ndarray) -> np.ndarray:
    """Correlation from per-dimension |dx| (Matern) or dx^2 (SE).

    Input shape (..., p); output shape (...).
    """
    ls = np.asarray(spec.lengthscales)
    if spec.family == Family.SQUARED_EXPONENTIAL:
        val = np.exp(-0.5 * np.sum(sq_or_abs / ls**2, axis=-1))
    elif spec.smoothness == 2.5:
        # product of (1 + u + u^2/3) exp(-u); exponentials collapsed
        u = (np.sqrt(5.0) / ls) * sq_or_abs
        poly = np.prod(1.0 + u * (1.0 + u / 3.0), axis=-1)
        val = poly * np.exp(-np.sum(u, axis=-1))
    else:
        u = np.sqrt(2.0 * spec.smoothness) * sq_or_abs / ls
        val = np.prod(_matern_half_integer_1d(u, spec.smoothness), axis=-1)
    return np.where(val < _CORR_FLOOR, 0.0, val)


def _pairwise_parts(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-dimension dx^2 (SE) or |dx| (Matern) between row sets a and b."""
    diff = a[:, None, :] - b[None, :, :]
    if spec.family == Family.SQUARED_EXPONENTIAL:
        return diff * diff
    return np.abs(diff)


def correlation(spec: KernelSpec, x, x_other) -> float:
    """Correlation between two points; 1 at zero distance."""
    x = np.asarray(x, dtype=float)
    x_other = np.asarray(x_other, dtype=float)
    if x.shape != (spec.dim,) or x_other.shape != (spec.dim,):
        raise ValueError("point dimension does not match lengthscales")
    d = x - x_other
    part = d * d if spec.family == Family.SQUARED_EXPONENTIAL else np.abs(d)
    return float(_corr_from_sqdiff(spec, part))


def correlation_matrix(spec: KernelSpec, X) -> np.ndarray:
    """n x n correlation matrix with the nugget on the diagonal."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] < 1:
        raise ValueError("need at least one point")
    if X.shape[1] != spec.dim:
        raise ValueError("point dimension does not match lengthscales")
    K = _corr_from_sqdiff(spec, _pairwise_parts(spec, X, X))
    K[np.diag_indices_from(K)] = 1.0 + spec.nugget
    return K


def cross_correlation_matrix(spec: KernelSpec, X, Q) -> np.ndarray:
    """n x m matrix of correlations between design X and query points Q.

    No nugget is added (the nugget applies only to matrix diagonals).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if X.shape[1] != spec.dim or Q.shape[1] != spec.dim:
        raise ValueError("point dimension does not match lengthscales")
    return _corr_from_sqdiff(spec, _pairwise_parts(spec, X, Q))


def cross_correlation_vector(spec: KernelSpec, X, x) -> np.ndarray:
    """n-vector of correlations between each design point and x."""
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.dim,):
        raise ValueError("point dimension does not match lengthscales")
    return cross_correlation_matrix(spec, X, x[None, :])[:, 0]
