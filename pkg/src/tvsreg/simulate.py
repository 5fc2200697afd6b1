"""Synthetic data: sparse normal impulses, Poisson delays, linear effect plus noise."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .model import ModelParams, ShiftVector, TimeSeries, TVSError, apply_shifts, decompose


class SimConfigError(TVSError):
    pass


@dataclass(frozen=True)
class SimConfig:
    n: int = 400
    k: int = 20
    beta: float = 2.0
    intercept: float = 6.5
    sigma_eps: float = 0.2
    lambda_tau: float = 2.0
    min_gap: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise SimConfigError("n must be >= 1")
        if self.k < 0:
            raise SimConfigError("k must be >= 0")
        if self.min_gap < 1:
            raise SimConfigError("min_gap must be >= 1")
        if self.k * self.min_gap > self.n:
            raise SimConfigError(
                f"cannot place {self.k} impulses {self.min_gap} apart in {self.n} steps")
        if self.sigma_eps < 0 or self.lambda_tau < 0:
            raise SimConfigError("sigma_eps and lambda_tau must be >= 0")
        if not (np.isfinite(self.beta) and np.isfinite(self.intercept)):
            raise SimConfigError("beta and intercept must be finite")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        d = dict(d)
        if "lambda" in d:
            d["lambda_tau"] = d.pop("lambda")
        if "seed" in d:
            d["rng_seed"] = d.pop("seed")
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise SimConfigError(f"unknown simulation config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class SimOutput:
    """Simulated dataset and its ground truth.

    ``true_params.sigma_eps`` is the configured noise level, except that a
    noise-free run stores the smallest positive float there (ModelParams
    requires a positive value).
    """

    x: TimeSeries
    y: TimeSeries
    true_shifts: ShiftVector
    true_params: ModelParams
    shifted_effect: TimeSeries
    config: SimConfig

    @property
    def realized_shift_mean(self) -> float:
        return float(self.true_shifts.shifts.mean()) if len(self.true_shifts) else 0.0


def place_impulses(rng: np.random.Generator, n: int, k: int, min_gap: int) -> np.ndarray:
    """Uniformly random sorted positions with consecutive gaps >= min_gap."""
    slots = n - (k - 1) * (min_gap - 1) if k else n
    picks = np.sort(rng.choice(slots, size=k, replace=False))
    return picks + np.arange(k) * (min_gap - 1)


def draw_amplitudes(rng: np.random.Generator, k: int) -> np.ndarray:
    amp = rng.standard_normal(k)
    small = np.abs(amp) < 1e-9
    while np.any(small):
        amp[small] = rng.standard_normal(int(small.sum()))
        small = np.abs(amp) < 1e-9
    return amp


def draw_shifts(rng: np.random.Generator, lam: float, max_shift: np.ndarray) -> np.ndarray:
    """Poisson(lam) delays, redrawn wherever they would pass the series end."""
    tau = rng.poisson(lam, size=max_shift.size)
    bad = tau > max_shift
    while np.any(bad):
        tau[bad] = rng.poisson(lam, size=int(bad.sum()))
        bad = tau > max_shift
    return tau.astype(np.int64)


def simulate(cfg: SimConfig) -> SimOutput:
    pos_rng, amp_rng, shift_rng, noise_rng = (
        np.random.default_rng(s) for s in np.random.SeedSequence(cfg.rng_seed).spawn(4))
    pos = place_impulses(pos_rng, cfg.n, cfg.k, cfg.min_gap)
    amp = draw_amplitudes(amp_rng, cfg.k)
    x = np.zeros(cfg.n)
    x[pos] = amp
    x = TimeSeries(x)
    imp = decompose(x)
    tau = ShiftVector(draw_shifts(shift_rng, cfg.lambda_tau, imp.max_shifts()))
    sigma = cfg.sigma_eps if cfg.sigma_eps > 0 else np.finfo(np.float64).tiny
    params = ModelParams(cfg.beta, cfg.intercept, sigma, cfg.lambda_tau)
    effect = apply_shifts(imp, tau, params)
    noise = noise_rng.normal(0.0, cfg.sigma_eps, cfg.n) if cfg.sigma_eps > 0 else np.zeros(cfg.n)
    y = TimeSeries(effect.values + noise)
    return SimOutput(x, y, tau, params, effect, cfg)
