"""Hot loops of the shift search.

Every function here is numba-compatible Python; :mod:`tvsreg._accel`
compiles them or leaves them interpreted. Randomness never comes from
inside a kernel: callers pass uniforms in ``[0, 1)`` drawn ahead of time,
one row per search iteration.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import njit, prange


@njit(cache=True)
def poisson_tables(lam, tau_max):
    """Log-pmf and running (untruncated) cdf of Poisson(lam) on 0..tau_max."""
    logpmf = np.empty(tau_max + 1)
    cdf = np.empty(tau_max + 1)
    acc = 0.0
    for s in range(tau_max + 1):
        if lam > 0.0:
            lp = s * math.log(lam) - lam - math.lgamma(s + 1.0)
        elif s == 0:
            lp = 0.0
        else:
            lp = -np.inf
        logpmf[s] = lp
        acc += math.exp(lp)
        cdf[s] = acc
    return logpmf, cdf


@njit(cache=True)
def draw_truncated(cdf, upper, u):
    """Inverse-cdf draw from the pmf restricted to 0..upper."""
    target = u * cdf[upper]
    s = 0
    while s < upper and cdf[s] <= target:
        s += 1
    return s


@njit(cache=True)
def fill_residuals(resid, y, pos, amp, shifts, beta, intercept):
    for t in range(y.shape[0]):
        resid[t] = y[t] - intercept
    for i in range(pos.shape[0]):
        resid[pos[i] + shifts[i]] -= beta * amp[i]


@njit(cache=True)
def search_block(resid, pos, amp, ub, lo, hi, beta, inv2var, logpmf, cdf,
                 sel_u, shift_u, it0, it1, m, shifts, trace):
    """Accept-if-better randomized search over impulses ``lo..hi-1``.

    ``resid`` (y minus the current prediction) and ``shifts`` are updated in
    place. Returns the total gain in joint log-likelihood. When ``trace`` is
    non-empty, ``trace[it]`` receives the running gain after iteration ``it``.
    """
    kb = hi - lo
    mm = min(m, kb)
    perm = np.arange(kb)
    chg_idx = np.empty(mm, dtype=np.int64)
    chg_new = np.empty(mm, dtype=np.int64)
    touched = np.empty(2 * mm, dtype=np.int64)
    saved = np.empty(2 * mm)
    record = trace.shape[0] > 0
    gain = 0.0
    for it in range(it0, it1):
        for j in range(mm):
            r = j + int(sel_u[it, j] * (kb - j))
            if r >= kb:
                r = kb - 1
            tmp = perm[j]
            perm[j] = perm[r]
            perm[r] = tmp

        nchg = 0
        dl2 = 0.0
        for j in range(mm):
            i = lo + perm[j]
            s = draw_truncated(cdf, ub[i], shift_u[it, j])
            if s != shifts[i]:
                chg_idx[nchg] = i
                chg_new[nchg] = s
                nchg += 1
                dl2 += logpmf[s] - logpmf[shifts[i]]
        if nchg == 0:
            if record:
                trace[it] = gain
            continue

        nt = 0
        for c in range(nchg):
            i = chg_idx[c]
            for p in (pos[i] + shifts[i], pos[i] + chg_new[c]):
                seen = False
                for q in range(nt):
                    if touched[q] == p:
                        seen = True
                        break
                if not seen:
                    touched[nt] = p
                    saved[nt] = resid[p]
                    nt += 1

        old_ssr = 0.0
        for q in range(nt):
            old_ssr += saved[q] * saved[q]
        for c in range(nchg):
            i = chg_idx[c]
            resid[pos[i] + shifts[i]] += beta * amp[i]
            resid[pos[i] + chg_new[c]] -= beta * amp[i]
        new_ssr = 0.0
        for q in range(nt):
            new_ssr += resid[touched[q]] * resid[touched[q]]

        delta = dl2 - (new_ssr - old_ssr) * inv2var
        if delta > 0.0:
            for c in range(nchg):
                shifts[chg_idx[c]] = chg_new[c]
            gain += delta
        else:
            for q in range(nt):
                resid[touched[q]] = saved[q]
        if record:
            trace[it] = gain
    return gain


@njit(cache=True)
def run_search(y, pos, amp, ub, block_bounds, iter_bounds, beta, intercept,
               sigma, lam, tau_max, sel_u, shift_u, m, shifts, trace):
    """Initialise shifts at round(lam) and search every block.

    Returns ``(ssr, l2)`` for the final shift vector, with ``ssr`` summed
    over the whole series.
    """
    logpmf, cdf = poisson_tables(lam, tau_max)
    init = int(math.floor(lam + 0.5))
    for i in range(pos.shape[0]):
        shifts[i] = min(init, ub[i])
    resid = np.empty(y.shape[0])
    fill_residuals(resid, y, pos, amp, shifts, beta, intercept)
    inv2var = 1.0 / (2.0 * sigma * sigma)
    for b in range(block_bounds.shape[0] - 1):
        search_block(resid, pos, amp, ub, block_bounds[b], block_bounds[b + 1],
                     beta, inv2var, logpmf, cdf, sel_u, shift_u,
                     iter_bounds[b], iter_bounds[b + 1], m, shifts, trace)
    ssr = 0.0
    for t in range(y.shape[0]):
        ssr += resid[t] * resid[t]
    l2 = 0.0
    for i in range(pos.shape[0]):
        l2 += logpmf[shifts[i]]
    return ssr, l2


@njit(cache=True, parallel=True)
def population_objective(thetas, y, pos, amp, ub, block_bounds, iter_bounds,
                         tau_max, sel_u, shift_u, m):
    """Joint log-likelihood after inner search, for each row of ``thetas``.

    Rows are ``(beta, intercept, sigma_eps, lambda_tau)``. All rows share the
    same uniforms, so the result is a deterministic function of each row.
    """
    n = y.shape[0]
    k = pos.shape[0]
    out = np.empty(thetas.shape[0])
    no_trace = np.empty(0)
    for s in prange(thetas.shape[0]):
        beta = thetas[s, 0]
        intercept = thetas[s, 1]
        sigma = thetas[s, 2]
        lam = thetas[s, 3]
        shifts = np.empty(k, dtype=np.int64)
        ssr, l2 = run_search(y, pos, amp, ub, block_bounds, iter_bounds, beta,
                             intercept, sigma, lam, tau_max, sel_u, shift_u, m,
                             shifts, no_trace)
        l1 = -0.5 * n * math.log(2.0 * math.pi * sigma * sigma) - ssr / (2.0 * sigma * sigma)
        out[s] = l1 + l2
    return out
