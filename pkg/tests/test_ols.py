from fractions import Fraction

import numpy as np
import pytest

from tvsreg.model import DegenerateInputError, ModelParams, apply_shifts, decompose
from tvsreg.ols import ols_fit
from tvsreg.simulate import SimConfig, simulate


def test_perfect_line():
    x = np.array([0.0, 1.0, 2.0, 5.0, -1.0])
    r = ols_fit(x, 3 * x + 1)
    assert r.beta == pytest.approx(3.0, abs=1e-12)
    assert r.intercept == pytest.approx(1.0, abs=1e-12)
    assert r.sigma == pytest.approx(0.0, abs=1e-12)
    assert r.r_squared == pytest.approx(1.0)


def test_constant_x_rejected():
    with pytest.raises(DegenerateInputError):
        ols_fit([1.0, 1.0, 1.0], [0.0, 1.0, 2.0])


def _hand_slope(x, y):
    """Closed-form slope in exact rational arithmetic."""
    x = [Fraction(v) for v in x]
    y = [Fraction(v) for v in y]
    n = len(x)
    xb, yb = sum(x) / n, sum(y) / n
    return sum((a - xb) * (b - yb) for a, b in zip(x, y)) / sum((a - xb) ** 2 for a in x)


def test_half_aligned_toy():
    # two unit impulses, first delayed by one step, second on time
    x = [0, 0, 1, 0, 1, 0]
    beta_true = 2.0
    y = apply_shifts(decompose(x), [1, 0], ModelParams(beta_true, 0.0, 1.0, 1.0)).values
    hand = _hand_slope(x, [int(v) for v in y])
    # cov = beta*/3, var = 4/3 on these six points
    assert hand == Fraction(1, 4) * Fraction(beta_true)
    assert ols_fit(x, y).beta == pytest.approx(float(hand), abs=1e-12)
    # the "only one of two outputs aligned" half is the through-origin ratio
    xa, ya = np.asarray(x, float), y
    assert xa @ ya / (xa @ xa) == pytest.approx(0.5 * beta_true)


def test_half_aligned_long_series_tends_to_half():
    x = np.zeros(2000)
    x[[500, 1500]] = 1.0
    y = apply_shifts(decompose(x), [1, 0], ModelParams(2.0, 0.0, 1.0, 1.0)).values
    assert ols_fit(x, y).beta == pytest.approx(1.0, abs=2e-3)


def test_matches_normal_equations():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(3, 200))
        x = rng.normal(size=n)
        y = rng.normal(size=n) + rng.normal() * x
        A = np.column_stack([np.ones(n), x])
        (c, b), *_ = np.linalg.lstsq(A, y, rcond=None)
        r = ols_fit(x, y)
        assert r.beta == pytest.approx(b, abs=1e-10)
        assert r.intercept == pytest.approx(c, abs=1e-10)
        resid = y - A @ np.array([c, b])
        assert r.sigma == pytest.approx(np.sqrt(resid @ resid / (n - 2)), rel=1e-10)
        assert 0.0 <= r.r_squared <= 1.0


def test_attenuation_direction():
    hits = 0
    for seed in range(30):
        sim = simulate(SimConfig(rng_seed=seed))
        b = ols_fit(sim.x, sim.y).beta
        hits += 0 < b < 2.0
    assert hits >= 28
