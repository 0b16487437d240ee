import math

import numpy as np
import pytest

from forecast_verify.kelly import (
    expected_log_growth,
    kelly_fraction,
    optimal_growth,
    simulate_bank,
)

F_GRID = np.round(np.arange(0, 9991) * 1e-4, 10)


def grid_argmax(p):
    vals = p * np.log1p(F_GRID) + (1 - p) * np.log1p(-F_GRID)
    return F_GRID[np.argmax(vals)]


def test_fraction_examples():
    assert kelly_fraction(0.5) == 0.0
    assert kelly_fraction(0.75) == 0.5
    assert kelly_fraction(0.4) == 0.0
    with pytest.raises(ValueError):
        kelly_fraction(1.2)


def test_negative_edge_growth_decreasing():
    growth = [expected_log_growth(0.4, f) for f in F_GRID[::100]]
    assert all(a > b for a, b in zip(growth, growth[1:]))
    assert grid_argmax(0.4) == 0.0


@pytest.mark.parametrize("p", np.round(np.arange(0.5, 0.951, 0.05), 2))
def test_grid_argmax(p):
    assert abs(grid_argmax(p) - max(0.0, 2 * p - 1)) <= 1e-4 + 1e-12


def test_growth_examples():
    assert expected_log_growth(0.3, 0.0) == 0.0
    g = expected_log_growth(0.75, 0.5)
    assert g == pytest.approx(0.75 * math.log(1.5) + 0.25 * math.log(0.5), abs=1e-15)
    assert g == pytest.approx(math.log(2) + 0.75 * math.log(0.75) + 0.25 * math.log(0.25), abs=1e-12)
    assert round(g, 5) == 0.13081
    assert expected_log_growth(0.5, 0.3) == pytest.approx(0.5 * math.log(1 - 0.09), abs=1e-15)
    assert expected_log_growth(0.5, 0.3) < 0
    with pytest.raises(ValueError):
        expected_log_growth(0.7, 1.0)


@pytest.mark.parametrize("p", np.round(np.arange(0.5, 0.951, 0.05), 2))
def test_optimum_is_kl_divergence(p):
    assert abs(expected_log_growth(p, kelly_fraction(p)) - optimal_growth(p)) < 1e-12


@pytest.mark.parametrize("c", [0.25, 0.5, 0.75])
def test_fractional_kelly(c):
    for p in (0.55, 0.7, 0.9):
        f = kelly_fraction(p)
        g = expected_log_growth(p, c * f)
        assert 0 < g < expected_log_growth(p, f)


class TestSimulateBank:
    def test_no_bet(self):
        path = simulate_bank(0.7, 0.0, 50, seed=3)
        np.testing.assert_array_equal(path.multiplier, 1.0)

    def test_sure_wins(self):
        path = simulate_bank(1.0, 0.5, 10, seed=0)
        assert path.multiplier[-1] == pytest.approx(1.5**10, rel=1e-12)
        assert round(path.multiplier[-1], 3) == 57.665

    def test_long_run_growth(self):
        path = simulate_bank(0.75, 0.5, 100_000, seed=11)
        assert abs(path.growth_rate - expected_log_growth(0.75, 0.5)) < 0.01

    def test_deterministic(self):
        a = simulate_bank(0.6, 0.2, 1000, seed=5)
        b = simulate_bank(0.6, 0.2, 1000, seed=5)
        np.testing.assert_array_equal(a.log_multiplier, b.log_multiplier)

    def test_invalid(self):
        with pytest.raises(ValueError):
            simulate_bank(0.6, 1.0, 10)
        with pytest.raises(ValueError):
            simulate_bank(0.6, 0.2, 0)
