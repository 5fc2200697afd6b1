"""Domain types and the shift-and-sum forward model.

An input series ``x`` is split into impulses (its nonzero entries). Each
impulse reaches the output after its own nonnegative integer delay; delayed
amplitudes landing on the same time step add up before the linear link
``beta * u + intercept`` is applied.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

DEFAULT_SPARSITY_THRESHOLD = 0.2


class TVSError(ValueError):
    """Base class for invalid inputs to the library."""


class InvalidShiftError(TVSError):
    """A shift vector violates length, sign or boundary constraints."""


class InvalidParameterError(TVSError):
    """A model parameter is outside its admissible range."""


class DegenerateInputError(TVSError):
    """Input data carries no usable variation (constant series, empty support)."""


class SparsityWarning(UserWarning):
    """Impulse density is high enough that the shift search may struggle."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TimeSeries:
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64).reshape(-1)
        if v.size < 1:
            raise TVSError("time series must have at least one point")
        if not np.all(np.isfinite(v)):
            raise TVSError("time series values must be finite")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other):
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True)
class ImpulseSet:
    positions: np.ndarray
    amplitudes: np.ndarray
    source_length: int

    def __post_init__(self):
        pos = np.array(self.positions, dtype=np.int64).reshape(-1)
        amp = np.array(self.amplitudes, dtype=np.float64).reshape(-1)
        n = int(self.source_length)
        if pos.shape != amp.shape:
            raise TVSError("positions and amplitudes differ in length")
        if n < 1:
            raise TVSError("source_length must be >= 1")
        if pos.size:
            if pos[0] < 0 or pos[-1] > n - 1:
                raise TVSError("impulse position outside [0, n-1]")
            if np.any(np.diff(pos) <= 0):
                raise TVSError("impulse positions must be strictly increasing")
            if np.any(amp == 0) or not np.all(np.isfinite(amp)):
                raise TVSError("impulse amplitudes must be finite and nonzero")
        object.__setattr__(self, "positions", _frozen(pos))
        object.__setattr__(self, "amplitudes", _frozen(amp))
        object.__setattr__(self, "source_length", n)

    @property
    def k(self) -> int:
        return int(self.positions.size)

    def __len__(self) -> int:
        return self.k

    def max_shifts(self) -> np.ndarray:
        """Largest admissible shift per impulse (keeps the effect inside the series)."""
        return self.source_length - 1 - self.positions

    def to_series(self) -> TimeSeries:
        out = np.zeros(self.source_length)
        out[self.positions] = self.amplitudes
        return TimeSeries(out)

    def __eq__(self, other):
        if not isinstance(other, ImpulseSet):
            return NotImplemented
        return (self.source_length == other.source_length
                and np.array_equal(self.positions, other.positions)
                and np.array_equal(self.amplitudes, other.amplitudes))

    __hash__ = None


@dataclass(frozen=True)
class ShiftVector:
    """Per-impulse delays, in the impulse order of an :class:`ImpulseSet`.

    Only sign is checked here; bounds against a particular impulse set are
    checked by :meth:`validate_for`.
    """

    shifts: np.ndarray

    def __post_init__(self):
        s = np.array(self.shifts).reshape(-1)
        if s.size and not np.all(np.equal(np.mod(s, 1), 0)):
            raise InvalidShiftError("shifts must be integers")
        s = s.astype(np.int64)
        if np.any(s < 0):
            raise InvalidShiftError("shifts must be nonnegative")
        object.__setattr__(self, "shifts", _frozen(s))

    def __len__(self) -> int:
        return int(self.shifts.size)

    def validate_for(self, imp: ImpulseSet) -> None:
        if len(self) != imp.k:
            raise InvalidShiftError(
                f"shift vector has length {len(self)}, impulse set has {imp.k}")
        bad = np.nonzero(self.shifts > imp.max_shifts())[0]
        if bad.size:
            j = int(bad[0])
            raise InvalidShiftError(
                f"shift {int(self.shifts[j])} moves impulse at t={int(imp.positions[j])} "
                f"past the series end (n={imp.source_length})")

    def tolist(self) -> list[int]:
        return [int(v) for v in self.shifts]

    def __eq__(self, other):
        if not isinstance(other, ShiftVector):
            return NotImplemented
        return np.array_equal(self.shifts, other.shifts)

    __hash__ = None


@dataclass(frozen=True)
class ModelParams:
    beta: float
    intercept: float
    sigma_eps: float
    lambda_tau: float

    def __post_init__(self):
        for name in ("beta", "intercept", "sigma_eps", "lambda_tau"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise InvalidParameterError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)
        if self.sigma_eps <= 0:
            raise InvalidParameterError(f"sigma_eps must be > 0, got {self.sigma_eps}")
        if self.lambda_tau < 0:
            raise InvalidParameterError(f"lambda_tau must be >= 0, got {self.lambda_tau}")

    def as_array(self) -> np.ndarray:
        return np.array([self.beta, self.intercept, self.sigma_eps, self.lambda_tau])

    def to_dict(self) -> dict:
        return {"beta": self.beta, "intercept": self.intercept,
                "sigma_eps": self.sigma_eps, "lambda_tau": self.lambda_tau}


@dataclass(frozen=True)
class SparsityReport:
    k: int
    n: int
    density: float
    threshold: float
    warning: bool = field(default=False)


def as_series(x) -> TimeSeries:
    return x if isinstance(x, TimeSeries) else TimeSeries(x)


def decompose(x) -> ImpulseSet:
    """Split a series into its nonzero impulses, in time order."""
    x = as_series(x)
    pos = np.flatnonzero(x.values)
    return ImpulseSet(pos, x.values[pos], x.n)


def effect_series(imp: ImpulseSet, tau: ShiftVector) -> np.ndarray:
    """Sum of impulse amplitudes after shifting, before the linear link."""
    tau.validate_for(imp)
    u = np.zeros(imp.source_length)
    np.add.at(u, imp.positions + tau.shifts, imp.amplitudes)
    return u


def apply_shifts(imp: ImpulseSet, tau, params: ModelParams) -> TimeSeries:
    """Predicted output ``beta * sum_j a_j [t = p_j + tau_j] + intercept``."""
    if not isinstance(tau, ShiftVector):
        tau = ShiftVector(tau)
    u = effect_series(imp, tau)
    return TimeSeries(params.beta * u + params.intercept)


def sparsity_check(imp: ImpulseSet, threshold: float = DEFAULT_SPARSITY_THRESHOLD,
                   warn: bool = True) -> SparsityReport:
    """Impulse density k/n, warning when it exceeds ``threshold``."""
    density = imp.k / imp.source_length
    flagged = density > threshold
    if flagged and warn:
        warnings.warn(
            f"impulse density {density:.3g} exceeds {threshold:.3g}; "
            "shift search may not reach the global optimum",
            SparsityWarning, stacklevel=2)
    return SparsityReport(imp.k, imp.source_length, density, threshold, flagged)
