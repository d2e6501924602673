"""The sequential-design driver.

One loop serves all criteria: (optionally) refresh the lengthscale MLEs,
fit the emulator, build a candidate pool (fresh LHD-based by default, or a
slice of a fixed grid), score candidates, evaluate the objective at the
winner, and append.  Wall clock is split into the MLE/fit, candidate
generation, and selection buckets.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import criteria
from .exceptions import ConfigError, EmptyPool
from .gp import Design, GpModel, fit
from .kernels import KernelSpec
from .likelihood import MleConfig, maximize_likelihood, should_update
from .sampling import (CandidatePool, candidate_pool_for_step,
                       fixed_grid_pool, minimax_lhd)

CRITERIA = ("alm", "alc", "mi", "mice", "random")


@dataclass
class FixedPool:
    """A discretization that is reused (not resampled) at every step.

    ``reference`` optionally overrides the averaging set used by the
    variance-reduction criterion; by default it is the candidate subset.
    """

    grid: np.ndarray
    candidates: np.ndarray
    reference: np.ndarray | None = None


@dataclass
class SequentialConfig:
    criterion: str
    budget_n: int
    kernel: KernelSpec
    n_grid: int = 150
    n_cand: int = 150
    n_ref: int | None = None
    tau2_s: float = 1.0
    mle: MleConfig | None = None
    initial_design_size: int = 2
    seed: int = 0
    lhd_pool: int = 100
    fixed_pool: FixedPool | None = None

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise ConfigError(f"unknown criterion {self.criterion!r}")
        if self.budget_n <= self.initial_design_size:
            raise ConfigError("budget_n must exceed initial_design_size")
        if self.n_cand > self.n_grid:
            raise ConfigError("n_cand must be <= n_grid")


@dataclass
class StepRecord:
    k: int
    x: np.ndarray
    y: float
    score: float
    lengthscales: tuple[float, ...]
    t_mle: float
    t_cand: float
    t_select: float


@dataclass
class RunRecord:
    steps: list[StepRecord] = field(default_factory=list)
    final_design: Design | None = None
    final_kernel: KernelSpec | None = None
    checkpoint_metrics: list[tuple[int, float, float]] = field(default_factory=list)
    failed: bool = False
    error: str | None = None

    def totals(self) -> dict[str, float]:
        return {
            "t_mle": sum(s.t_mle for s in self.steps),
            "t_cand": sum(s.t_cand for s in self.steps),
            "t_select": sum(s.t_select for s in self.steps),
        }

    def to_csv(self, path, method: str = "", replicate: int = 0) -> None:
        import csv

        p = len(self.steps[0].x) if self.steps else 0
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["replicate", "method", "k"]
                       + [f"x{i + 1}" for i in range(p)]
                       + ["y", "score", "t_mle_ms", "t_cand_ms", "t_select_ms"])
            for s in self.steps:
                w.writerow([replicate, method, s.k]
                           + [f"{v:.17g}" for v in s.x]
                           + [f"{s.y:.17g}", f"{s.score:.17g}",
                              f"{s.t_mle * 1e3:.6g}", f"{s.t_cand * 1e3:.6g}",
                              f"{s.t_select * 1e3:.6g}"])

    def to_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            for s in self.steps:
                fh.write(json.dumps({
                    "k": s.k, "x": list(map(float, s.x)), "y": s.y,
                    "score": s.score, "lengthscales": list(s.lengthscales),
                    "t_mle": s.t_mle, "t_cand": s.t_cand,
                    "t_select": s.t_select}) + "\n")


def _rmspe_metrics(model: GpModel, X_val, y_val) -> tuple[float, float]:
    pred = model.predict_mean(X_val, denormalize=True)
    resid = pred - y_val
    rmspe = float(np.sqrt(np.mean(resid**2)))
    span = float(np.max(y_val) - np.min(y_val))
    if span <= 0:
        raise ValueError("validation outputs have zero range")
    return rmspe / span, float(np.max(np.abs(resid)))


def _build_pool(config: SequentialConfig, design: Design,
                rng: np.random.Generator) -> CandidatePool:
    if config.fixed_pool is not None:
        return fixed_grid_pool(config.fixed_pool.grid,
                               config.fixed_pool.candidates, design.inputs,
                               reference=config.fixed_pool.reference)
    return candidate_pool_for_step(design.inputs, config.n_grid,
                                   config.n_cand, lhd_pool=config.lhd_pool,
                                   seed=rng, n_ref=config.n_ref)


def _select(config: SequentialConfig, model: GpModel, pool: CandidatePool,
            rng: np.random.Generator) -> tuple[np.ndarray, float]:
    crit = config.criterion
    if crit == "random":
        cand = pool.candidates
        if len(cand) == 0:
            raise EmptyPool("no candidates")
        j = int(rng.integers(len(cand)))
        return cand[j], float("nan")
    if crit == "alm":
        sheet = criteria.score_alm(model, pool)
    elif crit == "alc":
        sheet = criteria.score_alc(model, pool)
    elif crit == "mi":
        sheet = criteria.score_mi(model, pool, config.kernel.nugget)
    else:
        sheet = criteria.score_mice(model, pool, config.kernel.nugget,
                                    config.tau2_s)
    return sheet.chosen, float(sheet.scores[sheet.chosen_index])


def run_sequential(objective, p: int, config: SequentialConfig,
                   initial_design: Design | None = None,
                   validation: tuple[np.ndarray, np.ndarray] | None = None,
                   checkpoints=()) -> RunRecord:
    """Grow a design one point at a time up to the budget.

    ``objective`` is evaluated on unit-cube points.  If ``validation``
    (X_val, y_val) is given, normalized RMSPE and max error are recorded
    at every design size in ``checkpoints`` using the model state as of
    that size.
    """
    rng = np.random.default_rng(config.seed)
    record = RunRecord()
    checkpoints = set(checkpoints)

    if initial_design is None:
        X0 = minimax_lhd(config.initial_design_size, p, pool_size=1000,
                         seed=rng)
        y0 = np.array([objective(x) for x in X0])
        design = Design(X0, y0)
    else:
        design = initial_design.copy()

    kernel = config.kernel
    tentative = kernel.with_lengthscales(np.ones(p))
    last_xi = None

    try:
        while design.n <= config.budget_n:
            k = design.n
            t0 = time.perf_counter()
            if config.mle is not None:
                if should_update(k, config.mle, p):
                    res = maximize_likelihood(design, kernel, config.mle)
                    last_xi = res.xi_hat
                    kernel = (kernel.with_lengthscales(res.xi_hat)
                              .with_process_variance(res.sigma2_hat))
                elif last_xi is None:
                    kernel = tentative
            model = fit(design, kernel)
            t_mle = time.perf_counter() - t0

            if validation is not None and k in checkpoints:
                record.checkpoint_metrics.append(
                    (k, *_rmspe_metrics(model, *validation)))
            if k == config.budget_n:
                break

            t0 = time.perf_counter()
            pool = _build_pool(config, design, rng)
            t_cand = time.perf_counter() - t0

            t0 = time.perf_counter()
            x_next, score = _select(config, model, pool, rng)
            t_select = time.perf_counter() - t0

            y_next = float(objective(x_next))
            design.append(x_next, y_next)
            record.steps.append(StepRecord(
                k=k, x=np.asarray(x_next, dtype=float), y=y_next, score=score,
                lengthscales=kernel.lengthscales,
                t_mle=t_mle, t_cand=t_cand, t_select=t_select))
    except Exception as exc:
        # preserve the partial trajectory; callers inspect `failed`
        record.failed = True
        record.error = f"{type(exc).__name__}: {exc}"
        record.final_design = design
        record.final_kernel = kernel
        return record

    record.final_design = design
    record.final_kernel = kernel
    return record


def run_one_shot(objective, p: int, design_type: str, sizes,
                 kernel: KernelSpec, mle: MleConfig | None = None, seed: int = 0,
                 validation: tuple[np.ndarray, np.ndarray] | None = None) -> RunRecord:
    """Non-adaptive baseline: fresh space-filling design at each size."""
    from .sampling import maximin_lhd

    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise ConfigError("sizes must be ascending")
    if design_type not in ("maximin-lhd", "minimax-lhd"):
        raise ConfigError(f"unknown one-shot design type {design_type!r}")
    rng = np.random.default_rng(seed)
    record = RunRecord()
    for size in sizes:
        if design_type == "maximin-lhd":
            X = maximin_lhd(size, p, pool_size=1000, seed=rng)
        else:
            X = minimax_lhd(size, p, pool_size=1000, seed=rng)
        y = np.array([objective(x) for x in X])
        design = Design(X, y)
        kern = kernel
        if mle is not None:
            res = maximize_likelihood(design, kernel, mle)
            kern = (kernel.with_lengthscales(res.xi_hat)
                    .with_process_variance(res.sigma2_hat))
        model = fit(design, kern)
        if validation is not None:
            record.checkpoint_metrics.append(
                (size, *_rmspe_metrics(model, *validation)))
        record.final_design = design
        record.final_kernel = kern
    return record
