"""Ordinary least squares of y on the observed, unshifted x."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DegenerateInputError, TVSError, as_series


@dataclass(frozen=True)
class OlsResult:
    beta: float
    intercept: float
    sigma: float
    r_squared: float

    def to_dict(self) -> dict:
        return {"beta": self.beta, "intercept": self.intercept,
                "sigma": self.sigma, "r_squared": self.r_squared}


def ols_fit(x, y) -> OlsResult:
    """Slope ``cov(x, y)/var(x)``; ``sigma`` uses the n-2 denominator."""
    x = as_series(x).values
    y = as_series(y).values
    if x.size != y.size:
        raise TVSError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise TVSError("need at least two points")
    xc = x - x.mean()
    sxx = np.dot(xc, xc)
    if sxx == 0:
        raise DegenerateInputError("x is constant")
    yc = y - y.mean()
    beta = np.dot(xc, yc) / sxx
    intercept = y.mean() - beta * x.mean()
    resid = y - intercept - beta * x
    ssr = np.dot(resid, resid)
    sigma = np.sqrt(ssr / (x.size - 2)) if x.size > 2 else 0.0
    syy = np.dot(yc, yc)
    r2 = 1.0 - ssr / syy if syy > 0 else float("nan")
    r2 = min(max(r2, 0.0), 1.0) if syy > 0 else r2
    return OlsResult(float(beta), float(intercept), float(sigma), float(r2))
