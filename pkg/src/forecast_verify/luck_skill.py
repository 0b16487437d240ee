"""Luck versus skill: splitting a Brier score given the true probability, and
comparing two forecasters on common events.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._validation import check_binary_outcomes, check_consistent_length, check_probability


@dataclass(frozen=True)
class LuckSkillSplit:
    """``-(x - q)**2 = entropy + exposure + penalty`` for true probability ``p``.

    ``entropy = -p (1 - p)`` is the savant's expected score, ``exposure =
    (2q - 1)(x - p)`` is the zero-mean luck term and ``penalty = -(p - q)**2``
    is the expected shortfall against the savant (the skill term).
    """

    entropy: float
    exposure: float
    penalty: float

    @property
    def total(self):
        return self.entropy + self.exposure + self.penalty


def split_score(p, q, x):
    """Decompose the binary Brier score of forecast `q` on outcome `x` given truth `p`.

    Broadcasts over arrays, in which case the fields of the returned split are
    arrays.
    """
    p = check_probability(p, "p")
    q = check_probability(q, "q")
    x = check_binary_outcomes(x)
    split = LuckSkillSplit(
        entropy=-p * (1.0 - p),
        exposure=(2.0 * q - 1.0) * (x - p),
        penalty=-((p - q) ** 2),
    )
    if all(np.ndim(v) == 0 for v in (split.entropy, split.exposure, split.penalty)):
        return LuckSkillSplit(float(split.entropy), float(split.exposure), float(split.penalty))
    return split


def exposure_variance(p, q):
    """Variance ``(2q - 1)**2 p (1 - p)`` of the exposure term over outcomes."""
    p = check_probability(p, "p")
    q = check_probability(q, "q")
    v = (2.0 * q - 1.0) ** 2 * p * (1.0 - p)
    return float(v) if np.ndim(v) == 0 else v


@dataclass(frozen=True)
class ComparisonReport:
    """Mean Brier score difference of forecaster ``a`` over forecaster ``b``.

    ``delta > 0`` means ``a`` scored higher.  ``sigma_bound`` bounds the standard
    deviation of ``delta`` without knowledge of the true probabilities;
    ``sigma_exact`` is filled in when hypothesized true probabilities are given.
    ``approximate`` is set when any event has more than two categories, where
    the normal approximation is only heuristic.
    """

    delta: float
    sigma_bound: float
    rms_diff: float
    n: int
    sigma_exact: Optional[float] = None
    approximate: bool = False

    @property
    def z_bound(self):
        if self.sigma_bound == 0.0:
            return 0.0 if self.delta == 0.0 else float(np.copysign(np.inf, self.delta))
        return self.delta / self.sigma_bound

    @property
    def separated(self):
        return is_separated(self.delta, self.sigma_bound)


def is_separated(delta, sigma_bound, n_sigma=2.0):
    """True when ``|delta|`` strictly exceeds ``n_sigma`` standard deviations."""
    return bool(abs(delta) > n_sigma * sigma_bound)


def _as_matrix(qs):
    a = np.asarray(qs, dtype=float)
    if a.ndim == 1:
        return np.column_stack([1.0 - a, a]), True
    if a.ndim == 2 and a.shape[1] >= 2:
        return a, a.shape[1] == 2
    raise ValueError("forecast streams must be 1-D (binary) or 2-D (n_events, K)")


def _onehot(xs, k):
    x = np.asarray(xs)
    if not np.all((x >= 0) & (x < k) & (x == np.floor(x))):
        raise ValueError(f"outcomes must be category indices in [0, {k})")
    out = np.zeros((x.size, k))
    out[np.arange(x.size), x.astype(int)] = 1.0
    return out


def compare_forecasters(qs, qs_other, xs, ps=None):
    """Compare forecaster ``a`` (`qs`) with forecaster ``b`` (`qs_other`) on outcomes `xs`.

    Parameters
    ----------
    qs, qs_other : array_like
        Either 1-D arrays of event probabilities for binary events, or 2-D
        ``(n_events, K)`` arrays of categorical forecasts.
    xs : array_like of shape (n_events,)
        0/1 outcomes for binary streams, category indices otherwise.
    ps : array_like, optional
        Hypothesized true event probabilities (binary streams only); enables
        ``sigma_exact``.

    Returns
    -------
    ComparisonReport
        ``delta`` is ``mean S(a) - mean S(b)`` under the categorical Brier score
        (which equals ``-(x - q)**2`` for binary events).  ``sigma_bound`` is
        ``sqrt(sum_i ((max_k c_ik - min_k c_ik) / 2)**2) / N`` with ``c = b - a``;
        for binary events this is ``sqrt(sum (q'_i - q_i)**2) / N``.
    """
    a, binary = _as_matrix(qs)
    b, binary_b = _as_matrix(qs_other)
    if a.shape != b.shape:
        raise ValueError(f"forecast streams differ in shape: {a.shape} vs {b.shape}")
    check_consistent_length(a, np.atleast_1d(xs))
    check_probability(a, "qs")
    check_probability(b, "qs_other")
    n, k = a.shape
    onehot = _onehot(np.atleast_1d(xs), k)

    c = b - a
    # S(a) - S(b) per event for the halved categorical Brier score
    diffs = 0.5 * np.sum(c * (a + b - 2.0 * onehot), axis=1)
    half_range = 0.5 * (c.max(axis=1) - c.min(axis=1))
    sigma_bound = float(np.sqrt(np.sum(half_range**2)) / n)
    rms = float(np.sqrt(np.sum(half_range**2) / n))

    sigma_exact = None
    if ps is not None:
        if not binary:
            raise ValueError("exact sigma is only available for binary streams")
        _, var = comparison_mean_variance(a[:, 1], b[:, 1], ps)
        sigma_exact = float(np.sqrt(var))
    return ComparisonReport(
        delta=float(np.mean(diffs)),
        sigma_bound=sigma_bound,
        rms_diff=rms,
        n=n,
        sigma_exact=sigma_exact,
        approximate=not binary,
    )


def comparison_mean_variance(qs, qs_other, ps):
    """Mean and variance of the comparison statistic under true probabilities `ps`.

    Mean is ``(1/N) sum (q'_i - q_i)(q'_i + q_i - 2 p_i)`` and variance
    ``(1/N**2) sum 4 p_i (1 - p_i) (q'_i - q_i)**2``.
    """
    q = np.atleast_1d(check_probability(qs, "qs"))
    q2 = np.atleast_1d(check_probability(qs_other, "qs_other"))
    p = np.atleast_1d(check_probability(ps, "ps"))
    check_consistent_length(q, q2, p)
    n = q.size
    mean = float(np.sum((q2 - q) * (q2 + q - 2.0 * p)) / n)
    var = float(np.sum(4.0 * p * (1.0 - p) * (q2 - q) ** 2) / n**2)
    return mean, var
