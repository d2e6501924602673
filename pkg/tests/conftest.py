"""Shared oracles for the test suite.

Every oracle here is an independent dense-linear-algebra implementation of
the quantity under test: explicit matrix inverses, per-point refits, and
scalar loops.  They are deliberately slow and simple.
"""
import numpy as np
import pytest

from gpseq.kernels import (KernelSpec, correlation_matrix,
                           cross_correlation_vector)


def dense_blup(spec: KernelSpec, X, y, x):
    """Constant-mean BLUP mean/variance via an explicit matrix inverse."""
    X = np.atleast_2d(X)
    y = np.asarray(y, dtype=float)
    K = correlation_matrix(spec, X)
    Ki = np.linalg.inv(K)
    ones = np.ones(len(X))
    beta = float(ones @ Ki @ y) / float(ones @ Ki @ ones)
    k = cross_correlation_vector(spec, X, np.asarray(x, dtype=float))
    mean = beta + float(k @ Ki @ (y - beta * ones))
    gls = (1.0 - float(ones @ Ki @ k)) ** 2 / float(ones @ Ki @ ones)
    var = spec.process_variance * (1.0 - float(k @ Ki @ k) + gls)
    return mean, var


def dense_covariance(spec: KernelSpec, X, x, x2):
    """Constant-mean predictive covariance via an explicit inverse."""
    from gpseq.kernels import correlation

    X = np.atleast_2d(X)
    K = correlation_matrix(spec, X)
    Ki = np.linalg.inv(K)
    ones = np.ones(len(X))
    ka = cross_correlation_vector(spec, X, np.asarray(x, dtype=float))
    kb = cross_correlation_vector(spec, X, np.asarray(x2, dtype=float))
    ha = 1.0 - float(ones @ Ki @ ka)
    hb = 1.0 - float(ones @ Ki @ kb)
    prior = correlation(spec, x, x2)
    return spec.process_variance * (
        prior - float(ka @ Ki @ kb) + ha * hb / float(ones @ Ki @ ones))


def scalar_correlation_oracle(spec: KernelSpec, x, x2):
    """Product of one-dimensional correlations, computed one axis at a time."""
    from gpseq.kernels import Family, _matern_half_integer_1d

    out = 1.0
    for i, ell in enumerate(spec.lengthscales):
        d = abs(float(x[i]) - float(x2[i]))
        if spec.family == Family.SQUARED_EXPONENTIAL:
            out *= np.exp(-0.5 * (d / ell) ** 2)
        else:
            u = np.sqrt(2.0 * spec.smoothness) * d / ell
            out *= float(_matern_half_integer_1d(np.array(u), spec.smoothness))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
