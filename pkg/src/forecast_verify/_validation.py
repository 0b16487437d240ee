"""Input validation helpers shared by the scoring, verification and simulation code."""

import math

import numpy as np

#: Forecast vectors whose sum is within this distance of one are renormalized.
RENORMALIZE_ATOL = 1e-6


class ForecastError(ValueError):
    """A probability forecast is malformed (out of range, wrong length, bad sum)."""


class CromwellError(ForecastError):
    """A forecast of exactly 0 was given where the rule forbids it."""


def check_forecast(probs, k=None, atol=RENORMALIZE_ATOL):
    """Validate a categorical forecast and return it as a float array summing to one.

    Vectors whose entries sum to within `atol` of one are renormalized exactly;
    larger deviations raise :class:`ForecastError`.
    """
    q = np.asarray(probs, dtype=float)
    if q.ndim != 1 or q.size < 2:
        raise ForecastError(f"forecast must be a vector of at least 2 probabilities, got shape {q.shape}")
    if k is not None and q.size != k:
        raise ForecastError(f"forecast has {q.size} categories, expected {k}")
    if not np.all(np.isfinite(q)):
        raise ForecastError("forecast contains non-finite values")
    if np.any(q < 0.0) or np.any(q > 1.0):
        raise ForecastError(f"forecast entries must lie in [0, 1]: {q.tolist()}")
    total = q.sum()
    if abs(total - 1.0) > atol:
        raise ForecastError(f"forecast sums to {total:.6g}, not 1 (normalization error)")
    return q / total


def check_outcome(outcome, k):
    """Return `outcome` as an int category index in ``[0, k)``."""
    if isinstance(outcome, (bool, np.bool_)) or not float(outcome).is_integer():
        raise ForecastError(f"outcome must be an integer category index, got {outcome!r}")
    idx = int(outcome)
    if not 0 <= idx < k:
        raise ForecastError(f"outcome {idx} outside [0, {k})")
    return idx


def check_probability(q, name="q"):
    """Validate scalar or array probabilities in [0, 1]; returns a float ndarray."""
    arr = np.asarray(q, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ForecastError(f"{name} must lie in [0, 1]")
    return arr


def check_binary_outcomes(x, name="x"):
    """Validate 0/1 outcomes; returns a float ndarray."""
    arr = np.asarray(x, dtype=float)
    if not np.all((arr == 0.0) | (arr == 1.0)):
        raise ValueError(f"{name} must contain only binary outcomes 0 or 1")
    return arr


def check_alpha(alpha):
    """The elliptical-score centre must lie strictly inside (0, 1)."""
    a = float(alpha)
    if not (0.0 < a < 1.0) or math.isnan(a):
        raise ValueError(f"alpha must satisfy 0 < alpha < 1, got {alpha!r}")
    return a


def check_consistent_length(*arrays):
    n = {len(a) for a in arrays}
    if len(n) > 1:
        raise ValueError(f"inputs have inconsistent lengths: {sorted(n)}")
    if n == {0}:
        raise ValueError("inputs are empty")
