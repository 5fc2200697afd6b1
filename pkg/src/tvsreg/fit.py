"""Parameter fit: differential evolution over (beta, intercept, sigma_eps, lambda_tau).

Each candidate is scored by the joint log-likelihood reached by the shift
search at that candidate. The search consumes one fixed set of random
numbers for every candidate (common random numbers), so the objective is a
deterministic function of the parameters for the duration of a fit.
Optimisation runs on standardized data; results are mapped back.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import differential_evolution
from scipy.stats import qmc

from . import _kernels
from ._accel import configure_threads
from .likelihood import JointLogLik, joint_loglik
from .model import (DegenerateInputError, ImpulseSet, ModelParams, ShiftVector, TimeSeries,
                    TVSError, apply_shifts, as_series, decompose, sparsity_check)
from .ols import OlsResult, ols_fit
from .search import Prepared, SearchConfig, default_tau_max, prepare, run_prepared

log = logging.getLogger(__name__)

PARAM_NAMES = ("beta", "intercept", "sigma_eps", "lambda_tau")


@dataclass(frozen=True)
class ScalingRecord:
    """``y_s = (y - y_min) / y_range`` and ``x_s = x / x_scale``."""

    y_min: float
    y_range: float
    x_scale: float

    def to_dict(self) -> dict:
        return {"y_min": self.y_min, "y_range": self.y_range, "x_scale": self.x_scale}


IDENTITY_SCALING = ScalingRecord(0.0, 1.0, 1.0)


def standardize(x, y) -> tuple[TimeSeries, TimeSeries, ScalingRecord]:
    x = as_series(x).values
    y = as_series(y).values
    y_min, y_max = float(y.min()), float(y.max())
    if y_max == y_min:
        raise DegenerateInputError("y is constant")
    x_scale = float(np.abs(x).max())
    if x_scale == 0:
        raise DegenerateInputError("x has no nonzero entries")
    rec = ScalingRecord(y_min, y_max - y_min, x_scale)
    return TimeSeries(x / x_scale), TimeSeries((y - y_min) / rec.y_range), rec


def destandardize(xs, ys, rec: ScalingRecord) -> tuple[TimeSeries, TimeSeries]:
    xs = as_series(xs).values
    ys = as_series(ys).values
    return TimeSeries(xs * rec.x_scale), TimeSeries(ys * rec.y_range + rec.y_min)


def destandardize_params(p: ModelParams, rec: ScalingRecord) -> ModelParams:
    return ModelParams(beta=p.beta * rec.y_range / rec.x_scale,
                       intercept=p.intercept * rec.y_range + rec.y_min,
                       sigma_eps=p.sigma_eps * rec.y_range,
                       lambda_tau=p.lambda_tau)


def standardize_params(p: ModelParams, rec: ScalingRecord) -> ModelParams:
    return ModelParams(beta=p.beta * rec.x_scale / rec.y_range,
                       intercept=(p.intercept - rec.y_min) / rec.y_range,
                       sigma_eps=p.sigma_eps / rec.y_range,
                       lambda_tau=p.lambda_tau)


@dataclass(frozen=True)
class FitConfig:
    """Bounds apply in standardized space."""

    beta_bounds: tuple[float, float] = (-10.0, 10.0)
    intercept_bounds: tuple[float, float] = (-1.0, 2.0)
    sigma_eps_bounds: tuple[float, float] = (1e-4, 1.0)
    lambda_tau_bounds: tuple[float, float] = (0.0, 10.0)
    population_size: int = 15 * len(PARAM_NAMES)
    max_generations: int = 200
    mutation: float = 0.8
    crossover: float = 0.9
    tol: float = 1e-8
    inner: SearchConfig = field(default_factory=SearchConfig)
    rng_seed: int = 0

    def __post_init__(self):
        for name, (lo, hi) in zip(PARAM_NAMES, self.bounds):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise TVSError(f"{name} bounds must be finite with lower < upper")
        if self.sigma_eps_bounds[0] <= 0:
            raise TVSError("sigma_eps lower bound must be > 0")
        if self.lambda_tau_bounds[0] < 0:
            raise TVSError("lambda_tau lower bound must be >= 0")
        if self.population_size < 5:
            raise TVSError("population_size must be >= 5")
        if self.max_generations < 1:
            raise TVSError("max_generations must be positive")
        if not 0 < self.mutation < 2:
            raise TVSError("mutation must lie in (0, 2)")
        if not 0 < self.crossover < 1:
            raise TVSError("crossover must lie in (0, 1)")

    @property
    def bounds(self) -> list[tuple[float, float]]:
        return [tuple(map(float, b)) for b in (self.beta_bounds, self.intercept_bounds,
                                               self.sigma_eps_bounds, self.lambda_tau_bounds)]

    def resolved_inner(self) -> SearchConfig:
        """Inner config with tau_max filled in from the lambda upper bound."""
        if self.inner.tau_max is not None:
            return self.inner
        return replace(self.inner, tau_max=default_tau_max(self.lambda_tau_bounds[1]))


@dataclass(frozen=True)
class FitResult:
    params: ModelParams
    shifts: ShiftVector
    loglik: JointLogLik
    trace: np.ndarray  # rows of (generation, best objective in standardized space)
    scaling: ScalingRecord
    scaled_params: ModelParams
    objective: float
    ols: OlsResult
    converged: bool
    message: str = ""

    @property
    def generations(self) -> int:
        return int(self.trace[-1, 0]) if len(self.trace) else 0


def _seed(base: int, stream: int) -> int:
    return int(np.random.SeedSequence([int(base), stream]).generate_state(1)[0])


def objective(theta, prep: Prepared) -> float:
    """Joint log-likelihood after inner search at ``theta`` (standardized space)."""
    row = np.ascontiguousarray(np.asarray(theta, dtype=np.float64).reshape(1, 4))
    return float(_kernels.population_objective(
        row, prep.y, prep.pos, prep.amp, prep.ub, prep.block_bounds,
        prep.iter_bounds, prep.tau_max, prep.sel_u, prep.shift_u, prep.m)[0])


def _population(thetas: np.ndarray, prep: Prepared) -> np.ndarray:
    return _kernels.population_objective(
        np.ascontiguousarray(thetas), prep.y, prep.pos, prep.amp, prep.ub,
        prep.block_bounds, prep.iter_bounds, prep.tau_max, prep.sel_u,
        prep.shift_u, prep.m)


def prepare_fit(x, y, cfg: FitConfig):
    x = as_series(x)
    y = as_series(y)
    if x.n != y.n:
        raise TVSError(f"x and y differ in length: {x.n} vs {y.n}")
    imp = decompose(x)
    if imp.k == 0:
        raise DegenerateInputError("x has no nonzero entries")
    sparsity_check(imp)
    xs, ys, rec = standardize(x, y)
    imp_s = decompose(xs)
    inner = replace(cfg.resolved_inner(), rng_seed=_seed(cfg.rng_seed, 1))
    return imp, imp_s, ys, rec, inner, prepare(ys, imp_s, inner)


def fit(x, y, cfg: FitConfig = FitConfig()) -> FitResult:
    """Maximum-likelihood fit of slope, intercept, noise level and delay mean."""
    x = as_series(x)
    y = as_series(y)
    imp, imp_s, ys, rec, inner, prep = prepare_fit(x, y, cfg)
    configure_threads()

    bounds = cfg.bounds
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    sampler = qmc.LatinHypercube(d=len(bounds), rng=np.random.default_rng(_seed(cfg.rng_seed, 3)))
    init = qmc.scale(sampler.random(cfg.population_size), lo, hi)

    trace = []
    best = [-np.inf]

    def energies(X):
        # scipy hands over one whole generation as columns of X
        vals = _population(np.asarray(X).T, prep)
        best[0] = max(best[0], float(vals.max()))
        trace.append((len(trace), best[0]))
        return -vals

    res = differential_evolution(
        energies, bounds, strategy="rand1bin", maxiter=cfg.max_generations,
        popsize=1, tol=cfg.tol, atol=0.0, mutation=cfg.mutation,
        recombination=cfg.crossover, rng=np.random.default_rng(_seed(cfg.rng_seed, 0)),
        polish=False, init=init, updating="deferred", vectorized=True)
    theta = np.clip(res.x, lo, hi)
    scaled = ModelParams(*theta)
    best_obj = -float(res.fun)
    log.debug("differential evolution: %s (%d generations)", res.message, len(trace) - 1)

    # report shifts from a longer search with a fresh stream, unless it does worse
    crn_shifts, _ = run_prepared(prep, scaled)
    final_cfg = replace(inner, rng_seed=_seed(cfg.rng_seed, 2))
    final_shifts, _ = run_prepared(prepare(ys, imp_s, final_cfg, iter_scale=2), scaled)
    ll_crn = joint_loglik(ys, imp_s, crn_shifts, scaled).total
    ll_final = joint_loglik(ys, imp_s, final_shifts, scaled).total
    shifts = ShiftVector(final_shifts if ll_final >= ll_crn else crn_shifts)

    params = destandardize_params(scaled, rec)
    return FitResult(
        params=params,
        shifts=shifts,
        loglik=joint_loglik(y, imp, shifts, params),
        trace=np.array(trace, dtype=np.float64).reshape(-1, 2),
        scaling=rec,
        scaled_params=scaled,
        objective=best_obj,
        ols=ols_fit(x, y),
        converged=bool(res.success),
        message=str(res.message),
    )


def predict(x, shifts: ShiftVector, params: ModelParams) -> TimeSeries:
    """Fitted output series for ``x`` under the given shifts."""
    imp: ImpulseSet = decompose(x)
    return apply_shifts(imp, shifts, params)
