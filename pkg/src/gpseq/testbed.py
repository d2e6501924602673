"""Closed-form objective functions standing in for computer simulators.

Every objective is exposed in two coordinate systems: its natural box and
the scaled unit cube (the sequential-design loop always works on the unit
cube).  The Gaussian-random-field objective is a table lookup over a fixed
grid realization.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .exceptions import NonGridQuery
from .kernels import Family, KernelSpec
from .sampling import regular_grid, sample_grf_realization

_GRID_MATCH_TOL = 1e-9


@dataclass(frozen=True)
class BoxDomain:
    """Affine map between a natural box and the unit cube."""

    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        for lo, hi in self.bounds:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValueError("bounds must be finite with lo < hi")

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def from_unit(self, u):
        u = np.asarray(u, dtype=float)
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        return lo + u * (hi - lo)

    def to_unit(self, x):
        x = np.asarray(x, dtype=float)
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        return (x - lo) / (hi - lo)


BRANIN_DOMAIN = BoxDomain(((-5.0, 10.0), (0.0, 15.0)))

PISTON_DOMAIN = BoxDomain((
    (30.0, 60.0),        # piston weight, kg
    (1000.0, 5000.0),    # spring coefficient, N/m
    (0.005, 0.020),      # piston surface area, m^2
    (90000.0, 110000.0),  # atmospheric pressure, N/m^2
    (0.002, 0.010),      # initial gas volume, m^3
    (340.0, 360.0),      # filling gas temperature, K
    (290.0, 296.0),      # ambient temperature, K
))

OSC4_C = np.array([1.85, 2.51, 1.94, 2.70])
OSC4_W = 0.43
OSC8_C = np.array([0.14, 1.69, 0.81, 1.73, 2.10, 0.42, 0.14, 1.97])
OSC8_W = 0.4


def _check_box(x, domain: BoxDomain, tol: float = 1e-9):
    x = np.asarray(x, dtype=float)
    for v, (lo, hi) in zip(x, domain.bounds):
        if v < lo - tol or v > hi + tol:
            raise ValueError(f"input {v} outside [{lo}, {hi}]")
    return x


def eval_branin(x) -> float:
    """Branin function on [-5, 10] x [0, 15]."""
    x = _check_box(x, BRANIN_DOMAIN)
    x1, x2 = x
    return float(
        (x2 - 5.1 * x1**2 / (4 * np.pi**2) + (5 / np.pi) * x1 - 6) ** 2
        + 10 * (1 - 1 / (8 * np.pi)) * np.cos(x1) + 10
    )


def eval_oscillatory(x, c, w: float) -> float:
    """Genz oscillatory: cos(c . x + 2 pi w) on the unit cube."""
    x = np.asarray(x, dtype=float)
    c = np.asarray(c, dtype=float)
    if x.shape != c.shape:
        raise ValueError("c must match the input dimension")
    return float(np.cos(c @ x + 2.0 * np.pi * w))


def eval_piston(x) -> float:
    """Piston cycle time (s) over the 7-D natural box."""
    x = _check_box(x, PISTON_DOMAIN)
    x1, x2, x3, x4, x5, x6, x7 = x
    g2 = x3 * x4 + 19.62 * x1 - x2 * x5 / x3
    inner = g2 * g2 + 4.0 * x2 * (x4 * x5 / x6) * x7
    if inner < 0:
        raise ValueError("non-physical input: negative sqrt argument")
    g1 = (x3 / (2.0 * x2)) * (np.sqrt(inner) - g2)
    denom = x2 + x3**2 * (x4 * x5 / x6) * (x7 / g1)
    if x1 / denom < 0:
        raise ValueError("non-physical input: negative sqrt argument")
    return float(2.0 * np.pi * np.sqrt(x1 / denom))


class GridLookupObjective:
    """Exact-lookup objective over a fixed point set.

    Built from one GRF realization; querying any point not on the grid is
    an error (matching the fixed-grid experimental protocol).
    """

    def __init__(self, grid: np.ndarray, values: np.ndarray):
        self.grid = np.atleast_2d(np.asarray(grid, dtype=float))
        self.values = np.asarray(values, dtype=float).ravel()
        if len(self.grid) != len(self.values):
            raise ValueError("grid and values disagree on size")

    def __call__(self, x) -> float:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        d = cdist(x, self.grid)
        j = np.argmin(d, axis=1)
        if np.any(d[np.arange(len(x)), j] > _GRID_MATCH_TOL):
            raise NonGridQuery("query point is not a grid member")
        out = self.values[j]
        return float(out[0]) if len(out) == 1 else out

    def lookup_many(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        d = cdist(X, self.grid)
        j = np.argmin(d, axis=1)
        if np.any(d[np.arange(len(X)), j] > _GRID_MATCH_TOL):
            raise NonGridQuery("query point is not a grid member")
        return self.values[j]


def make_grf_objective(grid: np.ndarray, kernel: KernelSpec, seed=0) -> GridLookupObjective:
    """Sample one stationary-GRF realization and expose it as a lookup."""
    values = sample_grf_realization(grid, kernel, seed)
    return GridLookupObjective(grid, values)


def grf2d_default_kernel() -> KernelSpec:
    """Zero-mean SE field with unit variance and lengthscales (0.8, 0.5)."""
    return KernelSpec(Family.SQUARED_EXPONENTIAL, (0.8, 0.5), process_variance=1.0)


@dataclass(frozen=True)
class Objective:
    """A unit-cube objective with metadata for the benchmark harness."""

    name: str
    dim: int
    func: object  # callable on unit-cube points

    def __call__(self, u) -> float:
        return self.func(u)


def _branin_unit(u) -> float:
    return eval_branin(BRANIN_DOMAIN.from_unit(u))


def _piston_unit(u) -> float:
    return eval_piston(PISTON_DOMAIN.from_unit(u))


def make_objective(name: str, seed: int = 0) -> Objective:
    """Objective registry addressable by name (unit-cube inputs)."""
    name = name.lower()
    if name == "branin":
        return Objective("branin", 2, _branin_unit)
    if name in ("oscillatory4d", "osc4"):
        return Objective("oscillatory4d", 4,
                         lambda u: eval_oscillatory(u, OSC4_C, OSC4_W))
    if name in ("oscillatory8d", "osc8"):
        return Objective("oscillatory8d", 8,
                         lambda u: eval_oscillatory(u, OSC8_C, OSC8_W))
    if name == "piston":
        return Objective("piston", 7, _piston_unit)
    if name == "grf2d":
        grid = regular_grid(2, 21)
        lookup = make_grf_objective(grid, grf2d_default_kernel(), seed=seed)
        return Objective("grf2d", 2, lookup)
    raise KeyError(f"unknown objective {name!r}")
