"""Profile-likelihood evaluation and its maximization with a real-coded GA.

The process variance and trend coefficient are concentrated out in closed
form, leaving only the lengthscales.  The optimizer is derivative-free:
blend crossover, per-gene Gaussian mutation, binary tournament selection,
elitism of one, all in log10-lengthscale space.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .exceptions import AllInfeasible
from .gp import Design
from .kernels import Family, KernelSpec

_SENTINEL = np.inf
_DEFAULT_BOX = (-2.0, 1.0)  # log10 lengthscale per scaled dimension


def default_freeze_until(p: int) -> int:
    """Design size below which lengthscales stay at their tentative values."""
    return 20 if p > 4 else 10


@dataclass
class MleConfig:
    budget: int = 1024
    population: int = 32
    seed: int = 0
    update_schedule: int = 1
    freeze_until: int | None = None
    search_box: tuple[float, float] = _DEFAULT_BOX
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    mutation_sigma_frac: float = 0.1

    def __post_init__(self):
        if self.population < 2 or self.budget < self.population:
            raise ValueError("require budget >= population >= 2")
        if self.search_box[0] >= self.search_box[1]:
            raise ValueError("search box must satisfy lo < hi")

    def resolved_freeze_until(self, p: int) -> int:
        return default_freeze_until(p) if self.freeze_until is None else self.freeze_until


@dataclass
class MleResult:
    xi_hat: np.ndarray
    sigma2_hat: float
    neg_loglik: float
    evals_used: int


def should_update(k: int, config: MleConfig, p: int) -> bool:
    """Whether to rerun the MLE at design size k."""
    freeze = config.resolved_freeze_until(p)
    if k < freeze:
        return False
    return (k - freeze) % config.update_schedule == 0


class ProfileLikelihood:
    """Profile negative log-likelihood over lengthscales for a fixed design.

    Caches the per-dimension displacement tensor so repeated evaluations
    (as in the GA) only pay for the kernel exponentials and the Cholesky.
    """

    def __init__(self, design: Design, kernel_template: KernelSpec):
        if design.n < 1:
            raise ValueError("empty design")
        self.n = design.n
        self.template = kernel_template
        X = design.inputs
        diff = X[:, None, :] - X[None, :, :]
        if kernel_template.family == Family.SQUARED_EXPONENTIAL:
            self._parts = diff * diff
        else:
            self._parts = np.abs(diff)
        self._y = design.normalized_outputs()

    def _matrix(self, lengthscales: np.ndarray) -> np.ndarray:
        from .kernels import _corr_from_sqdiff  # shared kernel math

        spec = self.template.with_lengthscales(lengthscales)
        K = _corr_from_sqdiff(spec, self._parts)
        K[np.diag_indices_from(K)] = 1.0 + spec.nugget
        return K

    def __call__(self, lengthscales) -> float:
        """n ln sigma2_hat + ln det K; +inf sentinel on any degeneracy."""
        ls = np.asarray(lengthscales, dtype=float)
        K = self._matrix(ls)
        try:
            cf = cho_factor(K, lower=True)
        except Exception:
            return _SENTINEL
        n, y = self.n, self._y
        ones = np.ones(n)
        Ki_ones = cho_solve(cf, ones)
        denom = float(ones @ Ki_ones)
        if denom <= 0:
            return _SENTINEL
        beta = float(Ki_ones @ y) / denom
        r = y - beta * ones
        sigma2 = float(r @ cho_solve(cf, r)) / n
        if not np.isfinite(sigma2) or sigma2 <= 1e-300:
            return _SENTINEL
        logdet = 2.0 * float(np.sum(np.log(np.diag(cf[0]))))
        val = n * np.log(sigma2) + logdet
        return val if np.isfinite(val) else _SENTINEL

    def sigma2_hat(self, lengthscales) -> float:
        ls = np.asarray(lengthscales, dtype=float)
        K = self._matrix(ls)
        cf = cho_factor(K, lower=True)
        ones = np.ones(self.n)
        Ki_ones = cho_solve(cf, ones)
        beta = float(Ki_ones @ self._y) / float(ones @ Ki_ones)
        r = self._y - beta * ones
        return float(r @ cho_solve(cf, r)) / self.n


def profile_negloglik(design: Design, kernel: KernelSpec) -> float:
    """Profile negative log-likelihood for the kernel's lengthscales."""
    return ProfileLikelihood(design, kernel)(kernel.lengthscales)


def maximize_likelihood(design: Design, kernel_template: KernelSpec,
                        config: MleConfig) -> MleResult:
    """Real-coded GA maximization of the profile likelihood.

    Deterministic given the config seed; elitism guarantees the returned
    candidate is the best evaluated over the whole budget.
    """
    if design.n < 2:
        raise ValueError("need at least two points for likelihood estimation")
    p = design.dim
    pl = ProfileLikelihood(design, kernel_template)
    rng = np.random.default_rng(config.seed)
    lo, hi = config.search_box
    width = hi - lo
    pop_size = config.population
    generations = config.budget // pop_size

    def evaluate(pop: np.ndarray) -> np.ndarray:
        return np.array([pl(10.0**g) for g in pop])

    pop = rng.uniform(lo, hi, size=(pop_size, p))
    fit_vals = evaluate(pop)
    evals = pop_size
    best_i = int(np.argmin(fit_vals))
    best_g, best_f = pop[best_i].copy(), fit_vals[best_i]

    for _ in range(1, generations):
        children = np.empty_like(pop)
        # binary tournaments to pick parents
        for c in range(pop_size):
            i, j = rng.integers(pop_size, size=2)
            a = pop[i] if fit_vals[i] <= fit_vals[j] else pop[j]
            i, j = rng.integers(pop_size, size=2)
            b = pop[i] if fit_vals[i] <= fit_vals[j] else pop[j]
            if rng.uniform() < config.crossover_rate:
                # blend crossover with +/- 0.5 extension per gene
                gamma = rng.uniform(-0.5, 1.5, size=p)
                child = gamma * a + (1.0 - gamma) * b
            else:
                child = a.copy()
            mutate = rng.uniform(size=p) < config.mutation_rate
            noise = rng.normal(0.0, config.mutation_sigma_frac * width, size=p)
            child = np.where(mutate, child + noise, child)
            children[c] = np.clip(child, lo, hi)
        child_fit = evaluate(children)
        evals += pop_size
        pop, fit_vals = children, child_fit
        # elitism: re-insert the best-so-far over the worst child
        worst = int(np.argmax(fit_vals))
        if best_f < fit_vals[worst]:
            pop[worst], fit_vals[worst] = best_g, best_f
        gen_best = int(np.argmin(fit_vals))
        if fit_vals[gen_best] < best_f:
            best_g, best_f = pop[gen_best].copy(), fit_vals[gen_best]

    if not np.isfinite(best_f):
        raise AllInfeasible("every likelihood evaluation hit the sentinel")
    xi = 10.0**best_g
    return MleResult(xi_hat=xi, sigma2_hat=pl.sigma2_hat(xi),
                     neg_loglik=float(best_f), evals_used=evals)
