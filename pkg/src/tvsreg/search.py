"""Shift search at fixed model parameters.

:func:`search_shifts` is the randomized accept-if-better search used inside
the parameter fit. :func:`exhaustive_search` enumerates every shift vector
and exists to check it on small problems.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import poisson

from . import _kernels
from .likelihood import JointLogLik, joint_loglik, poisson_logpmf
from .model import ImpulseSet, ModelParams, ShiftVector, TVSError, as_series

DEFAULT_PROPOSAL_SIZE = 3
ITERS_PER_IMPULSE = 200
DEFAULT_LAMBDA_UPPER = 10.0
TAIL_MASS = 1e-6
EXHAUSTIVE_BUDGET = 10**6


class SearchBudgetError(TVSError):
    """Exhaustive enumeration would exceed the configured budget."""


def default_tau_max(lambda_upper: float = DEFAULT_LAMBDA_UPPER, tail: float = TAIL_MASS) -> int:
    """Smallest cap whose Poisson(lambda_upper) cdf exceeds ``1 - tail``."""
    t = int(max(1, np.floor(lambda_upper)))
    while poisson.cdf(t, lambda_upper) <= 1.0 - tail:
        t += 1
    return max(t, 1)


@dataclass(frozen=True)
class SearchConfig:
    """Inner search settings.

    ``n_iters=None`` means ``ITERS_PER_IMPULSE`` iterations per impulse of
    each block; an integer fixes the iteration count per block.
    ``proposal_size`` is clamped to the block size when a block is smaller.
    """

    n_iters: Optional[int] = None
    proposal_size: int = DEFAULT_PROPOSAL_SIZE
    tau_max: Optional[int] = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_iters is not None and self.n_iters < 1:
            raise TVSError("n_iters must be positive")
        if self.proposal_size < 1:
            raise TVSError("proposal_size must be positive")
        if self.tau_max is not None and self.tau_max < 1:
            raise TVSError("tau_max must be >= 1")

    def resolved_tau_max(self) -> int:
        return default_tau_max() if self.tau_max is None else int(self.tau_max)


@dataclass(frozen=True)
class Block:
    start: int  # first impulse index
    stop: int   # one past the last impulse index
    t_start: int
    t_end: int

    @property
    def indices(self) -> range:
        return range(self.start, self.stop)

    def __len__(self) -> int:
        return self.stop - self.start


def partition_blocks(imp: ImpulseSet, tau_max: int) -> list[Block]:
    """Split impulses wherever the gap to the next one exceeds ``tau_max``.

    Shifts are nonnegative and at most ``tau_max``, so effects of impulses
    in different blocks can never land on the same time step.
    """
    pos = imp.positions
    if pos.size == 0:
        return []
    cuts = np.flatnonzero(np.diff(pos) > tau_max) + 1
    edges = np.concatenate(([0], cuts, [pos.size]))
    return [Block(int(a), int(b), int(pos[a]), int(pos[b - 1]))
            for a, b in zip(edges[:-1], edges[1:])]


@dataclass(frozen=True)
class Prepared:
    """Arrays handed to the compiled search, shared by every evaluation."""

    y: np.ndarray
    pos: np.ndarray
    amp: np.ndarray
    ub: np.ndarray
    block_bounds: np.ndarray
    iter_bounds: np.ndarray
    tau_max: int
    m: int
    sel_u: np.ndarray
    shift_u: np.ndarray


def block_uniforms(n_iters: int, m: int, seed: int, block: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-block random stream; independent of how many other blocks exist."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    return rng.random((n_iters, m)), rng.random((n_iters, m))


def prepare(y, imp: ImpulseSet, cfg: SearchConfig, iter_scale: int = 1) -> Prepared:
    y = np.ascontiguousarray(as_series(y).values)
    if y.size != imp.source_length:
        raise TVSError(f"y has length {y.size}, impulses come from length {imp.source_length}")
    tau_max = cfg.resolved_tau_max()
    blocks = partition_blocks(imp, tau_max)
    m = cfg.proposal_size
    iters = []
    sels, shs = [], []
    for b, blk in enumerate(blocks):
        nb = (cfg.n_iters if cfg.n_iters is not None else ITERS_PER_IMPULSE * len(blk)) * iter_scale
        su, hu = block_uniforms(nb, m, cfg.rng_seed, b)
        iters.append(nb)
        sels.append(su)
        shs.append(hu)
    block_bounds = np.array([0] + [blk.stop for blk in blocks], dtype=np.int64)
    iter_bounds = np.concatenate(([0], np.cumsum(iters, dtype=np.int64))).astype(np.int64)
    if sels:
        sel_u = np.ascontiguousarray(np.vstack(sels))
        shift_u = np.ascontiguousarray(np.vstack(shs))
    else:
        sel_u = shift_u = np.empty((0, m))
    ub = np.minimum(imp.max_shifts(), tau_max).astype(np.int64)
    return Prepared(y, np.ascontiguousarray(imp.positions), np.ascontiguousarray(imp.amplitudes),
                    ub, block_bounds, iter_bounds, tau_max, m, sel_u, shift_u)


def run_prepared(prep: Prepared, params: ModelParams, trace: bool = False):
    """Run the compiled search; returns ``(shifts, trace_gain_or_None)``."""
    shifts = np.empty(prep.pos.size, dtype=np.int64)
    gains = np.zeros(prep.sel_u.shape[0] if trace else 0)
    _kernels.run_search(prep.y, prep.pos, prep.amp, prep.ub, prep.block_bounds,
                        prep.iter_bounds, params.beta, params.intercept,
                        params.sigma_eps, params.lambda_tau, prep.tau_max,
                        prep.sel_u, prep.shift_u, prep.m, shifts, gains)
    return shifts, (gains if trace else None)


def initial_shifts(imp: ImpulseSet, lambda_tau: float, tau_max: int) -> ShiftVector:
    init = int(np.floor(lambda_tau + 0.5))
    return ShiftVector(np.minimum(np.minimum(imp.max_shifts(), tau_max), init))


def search_shifts(y, imp: ImpulseSet, params: ModelParams, cfg: SearchConfig = SearchConfig(),
                  return_trace: bool = False):
    """Randomized search for the shift vector maximizing the joint log-likelihood.

    Shifts start at ``round(lambda_tau)``. Each iteration redraws the shifts of
    ``proposal_size`` distinct impulses of one block from the Poisson prior
    truncated to the admissible range, and keeps the proposal only if the
    joint log-likelihood strictly increases. Blocks (see
    :func:`partition_blocks`) are searched independently with their own
    random streams.

    With ``return_trace=True`` a third value is returned: the incumbent joint
    log-likelihood after every iteration, blocks concatenated in order.
    """
    prep = prepare(y, imp, cfg)
    shifts, gains = run_prepared(prep, params, trace=return_trace)
    tau = ShiftVector(shifts)
    ll = joint_loglik(y, imp, tau, params)
    if not return_trace:
        return tau, ll
    start = joint_loglik(y, imp, initial_shifts(imp, params.lambda_tau, prep.tau_max), params)
    # gains restart at zero in each block; make them cumulative across blocks
    incumbent = gains.copy()
    offset = 0.0
    for b in range(prep.iter_bounds.size - 1):
        lo, hi = prep.iter_bounds[b], prep.iter_bounds[b + 1]
        incumbent[lo:hi] += offset
        if hi > lo:
            offset = incumbent[hi - 1]
    return tau, ll, start.total + incumbent


def exhaustive_search(y, imp: ImpulseSet, params: ModelParams, tau_max: int,
                      budget: int = EXHAUSTIVE_BUDGET, chunk: int = 4096):
    """Global maximizer by full enumeration.

    Ties go to the lexicographically smallest shift vector.
    """
    y = as_series(y).values
    ub = np.minimum(imp.max_shifts(), tau_max)
    count = int(np.prod(ub + 1, dtype=object))
    if count > budget:
        raise SearchBudgetError(f"{count} shift vectors exceed the budget of {budget}")
    k, n = imp.k, imp.source_length
    if k == 0:
        tau = ShiftVector(np.empty(0, dtype=np.int64))
        return tau, joint_loglik(y, imp, tau, params)

    dims = tuple(int(u) + 1 for u in ub)
    inv2var = 1.0 / (2.0 * params.sigma_eps ** 2)
    best_val, best_idx = -np.inf, -1
    for lo in range(0, count, chunk):
        flat = np.arange(lo, min(lo + chunk, count))
        combos = np.stack(np.unravel_index(flat, dims), axis=1)
        effect = np.zeros((flat.size, n))
        rows = np.repeat(np.arange(flat.size), k)
        cols = (imp.positions[None, :] + combos).ravel()
        np.add.at(effect, (rows, cols), np.tile(imp.amplitudes, flat.size))
        resid = y[None, :] - params.beta * effect - params.intercept
        score = -np.einsum("ij,ij->i", resid, resid) * inv2var
        score = score + poisson_logpmf(combos, params.lambda_tau).sum(axis=1)
        j = int(np.argmax(score))
        if score[j] > best_val:
            best_val, best_idx = score[j], int(flat[j])
    tau = ShiftVector(np.array(np.unravel_index(best_idx, dims)))
    return tau, joint_loglik(y, imp, tau, params)


__all__ = ["SearchConfig", "Block", "SearchBudgetError", "partition_blocks", "search_shifts",
           "exhaustive_search", "default_tau_max", "JointLogLik"]
