"""Joint log-likelihood: Gaussian residuals plus Poisson delays."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .model import (ImpulseSet, InvalidParameterError, ModelParams, ShiftVector,
                    TVSError, apply_shifts, as_series)

# Stand-in for log(0): ordered below every attainable log-likelihood while
# staying finite, so sums and comparisons never produce nan.
LOGLIK_FLOOR = -np.finfo(np.float64).max

_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass(frozen=True)
class JointLogLik:
    l1: float
    l2: float
    total: float

    @classmethod
    def from_terms(cls, l1: float, l2: float) -> "JointLogLik":
        return cls(float(l1), float(l2), float(l1) + float(l2))

    def to_dict(self) -> dict:
        return {"l1": self.l1, "l2": self.l2, "total": self.total}


def gaussian_loglik(y, yhat, sigma_eps: float) -> float:
    y = as_series(y).values
    yhat = as_series(yhat).values
    if y.shape != yhat.shape:
        raise TVSError(f"length mismatch: {y.size} vs {yhat.size}")
    if not sigma_eps > 0:
        raise InvalidParameterError(f"sigma_eps must be > 0, got {sigma_eps}")
    r = y - yhat
    n = y.size
    return float(-n * (_HALF_LOG_2PI + np.log(sigma_eps))
                 - np.dot(r, r) / (2.0 * sigma_eps * sigma_eps))


def poisson_logpmf(tau, lambda_tau: float) -> np.ndarray:
    """Elementwise Poisson log-pmf, with LOGLIK_FLOOR for zero-probability shifts."""
    if not lambda_tau >= 0:
        raise InvalidParameterError(f"lambda_tau must be >= 0, got {lambda_tau}")
    t = np.asarray(tau, dtype=np.float64)
    if lambda_tau == 0:
        return np.where(t == 0, 0.0, LOGLIK_FLOOR)
    return t * np.log(lambda_tau) - lambda_tau - gammaln(t + 1.0)


def poisson_loglik(tau, lambda_tau: float) -> float:
    if not isinstance(tau, ShiftVector):
        tau = ShiftVector(tau)
    if not lambda_tau >= 0:
        raise InvalidParameterError(f"lambda_tau must be >= 0, got {lambda_tau}")
    if len(tau) == 0:
        return 0.0
    if lambda_tau == 0:
        return 0.0 if not np.any(tau.shifts) else LOGLIK_FLOOR
    return float(np.sum(poisson_logpmf(tau.shifts, lambda_tau)))


def joint_loglik(y, imp: ImpulseSet, tau, params: ModelParams) -> JointLogLik:
    y = as_series(y)
    if y.n != imp.source_length:
        raise TVSError(f"y has length {y.n}, impulses come from length {imp.source_length}")
    if not isinstance(tau, ShiftVector):
        tau = ShiftVector(tau)
    yhat = apply_shifts(imp, tau, params)
    l1 = gaussian_loglik(y, yhat, params.sigma_eps)
    l2 = poisson_loglik(tau, params.lambda_tau)
    return JointLogLik.from_terms(l1, l2)


__all__ = ["LOGLIK_FLOOR", "JointLogLik", "gaussian_loglik", "poisson_logpmf",
           "poisson_loglik", "joint_loglik"]
