"""Kelly betting on an even-odds (double-or-nothing) biased coin."""

from dataclasses import dataclass

import numpy as np


def _check_p(p):
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return p


def _check_fraction(f):
    f = float(f)
    if not 0.0 <= f < 1.0:
        raise ValueError(f"stake fraction must satisfy 0 <= f < 1, got {f}")
    return f


def kelly_fraction(p):
    """Growth-optimal stake ``2p - 1``; zero when there is no edge (``p <= 0.5``)."""
    return max(0.0, 2.0 * _check_p(p) - 1.0)


def expected_log_growth(p, f):
    """Expected log bank multiplier per play, ``p log(1 + f) + (1 - p) log(1 - f)``."""
    p = _check_p(p)
    f = _check_fraction(f)
    return p * np.log1p(f) + (1.0 - p) * np.log1p(-f)


def optimal_growth(p):
    """``p log p + (1 - p) log(1 - p) + log 2``: growth at the Kelly stake for ``p >= 0.5``.

    This is the KL divergence of the coin from the fair coin the bookmaker
    assumes.
    """
    p = _check_p(p)
    h = sum(v * np.log(v) for v in (p, 1.0 - p) if v > 0.0)
    return float(h + np.log(2.0))


@dataclass(frozen=True)
class BankPath:
    """Log bank multiplier after each play; ``log_multiplier[0] == 0``."""

    log_multiplier: np.ndarray

    @property
    def multiplier(self):
        with np.errstate(over="ignore"):
            return np.exp(self.log_multiplier)

    @property
    def growth_rate(self):
        """Realized mean log growth per play."""
        return float(self.log_multiplier[-1] / (self.log_multiplier.size - 1))


def simulate_bank(p, f, n_plays, seed=None):
    """Play the coin game `n_plays` times staking fraction `f` of the bank each time.

    The path is tracked in log space so long runs neither overflow nor
    underflow.  Results are deterministic for a given `seed`.
    """
    p = _check_p(p)
    f = _check_fraction(f)
    n_plays = int(n_plays)
    if n_plays < 1:
        raise ValueError("n_plays must be at least 1")
    rng = np.random.default_rng(seed)
    wins = rng.random(n_plays) < p
    steps = np.where(wins, np.log1p(f), np.log1p(-f))
    return BankPath(np.concatenate([[0.0], np.cumsum(steps)]))
