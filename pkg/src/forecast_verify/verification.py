"""Decompositions of the mean Brier score over a record of binary forecasts.

Every score here is the positively oriented binary Brier score
``-(x - q)**2`` averaged over the record.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from ._validation import (
    check_binary_outcomes,
    check_consistent_length,
    check_forecast,
    check_probability,
)


def _record(forecasts, outcomes):
    q = np.atleast_1d(check_probability(forecasts, "forecasts"))
    x = np.atleast_1d(check_binary_outcomes(outcomes, "outcomes"))
    if q.ndim != 1 or x.ndim != 1:
        raise ValueError("forecasts and outcomes must be one-dimensional")
    check_consistent_length(q, x)
    return q, x


@dataclass(frozen=True)
class BinStats:
    label: str
    forecast: float
    count: int
    frequency: float


@dataclass(frozen=True)
class MurphyReport:
    """Uncertainty, resolution and reliability terms of a mean Brier score.

    ``residual`` is ``mean_score - reconstruction``; it is zero up to rounding
    when every forecast inside a bin is identical (by-value binning).
    """

    uncertainty: float
    resolution: float
    reliability: float
    base_rate: float
    mean_score: float
    n: int
    bins: List[BinStats] = field(default_factory=list)

    @property
    def reconstruction(self):
        return -self.uncertainty + self.resolution - self.reliability

    @property
    def residual(self):
        return self.mean_score - self.reconstruction


def parse_binning(spec):
    """Parse ``"by-value"`` or ``"edges:0,0.2,..."`` into a binning policy."""
    if spec == "by-value":
        return spec
    if isinstance(spec, str) and spec.startswith("edges:"):
        return [float(e) for e in spec[len("edges:"):].split(",") if e.strip()]
    raise ValueError(f"binning must be 'by-value' or 'edges:<comma list>', got {spec!r}")


def _edge_bins(q, edges):
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("bin edges must be a strictly increasing sequence of at least 2 values")
    if np.any(q < edges[0]) or np.any(q > edges[-1]):
        raise ValueError("forecasts fall outside the bin edges")
    # half-open bins [e_i, e_{i+1}); the last bin is closed on the right
    idx = np.searchsorted(edges, q, side="right") - 1
    idx = np.minimum(idx, edges.size - 2)
    labels = [f"[{edges[i]:g}, {edges[i + 1]:g}{']' if i == edges.size - 2 else ')'}" for i in range(edges.size - 1)]
    return idx, labels


def murphy_decompose(forecasts, outcomes, binning: Union[str, Sequence[float]] = "by-value"):
    """Split the mean Brier score into ``-uncertainty + resolution - reliability``.

    Parameters
    ----------
    forecasts : array_like of shape (n,)
        Forecast probabilities of the event.
    outcomes : array_like of shape (n,)
        Realized 0/1 outcomes.
    binning : "by-value" or sequence of float
        ``"by-value"`` puts each distinct forecast in its own bin, which makes
        the decomposition exact.  A sequence of edges bins forecasts into
        ``[e_i, e_{i+1})`` and uses the mean forecast in each bin as its
        representative; the leftover is reported in ``residual``.  Empty bins
        are dropped.

    Returns
    -------
    MurphyReport
    """
    q, x = _record(forecasts, outcomes)
    n = q.size
    f = float(x.mean())
    if isinstance(binning, str):
        binning = parse_binning(binning)
    if isinstance(binning, str):
        values, idx = np.unique(q, return_inverse=True)
        labels = [f"{v:.17g}" for v in values]
    else:
        values = None
        idx, labels = _edge_bins(q, binning)

    bins = []
    resolution = reliability = 0.0
    for b in np.unique(idx):
        mask = idx == b
        n_b = int(mask.sum())
        f_b = float(x[mask].sum()) / n_b
        q_b = float(values[b]) if values is not None else float(q[mask].mean())
        bins.append(BinStats(labels[b], q_b, n_b, f_b))
        resolution += n_b * (f - f_b) ** 2
        reliability += n_b * (q_b - f_b) ** 2

    return MurphyReport(
        uncertainty=f * (1.0 - f),
        resolution=resolution / n,
        reliability=reliability / n,
        base_rate=f,
        mean_score=float(-np.mean((x - q) ** 2)),
        n=n,
        bins=bins,
    )


@dataclass(frozen=True)
class ClimatologyReport:
    """Mean Brier score of forecasts ``q_i = f + eps_i`` split as ``base + gain - stake``.

    ``base`` is the score the constant forecast ``f`` earns on this record.  It
    equals ``expected_base = -f (1 - f)`` when the record's observed frequency
    is exactly ``f``.  ``directions`` and ``optimal_scale`` are ``None`` when all
    departures are zero.
    """

    base_rate: float
    epsilons: np.ndarray
    base: float
    gain: float
    stake: float
    mean_score: float
    expected_base: float
    directions: Optional[np.ndarray]
    optimal_scale: Optional[float]

    @property
    def reconstruction(self):
        return self.base + self.gain - self.stake


def climatology_decompose(forecasts, outcomes, base_rate):
    """Score forecasts as departures from a known historical frequency `base_rate`.

    The departures ``eps_i = q_i - f`` earn ``(2/N) sum eps_i (x_i - f)`` and
    cost ``(1/N) sum eps_i**2``.  `base_rate` is taken as given (for instance from
    training data) and is not re-estimated from the record.
    """
    q, x = _record(forecasts, outcomes)
    f = float(check_probability(base_rate, "base_rate"))
    n = q.size
    eps = q - f
    norm2 = float(np.sum(eps**2))
    if norm2 > 0.0:
        gammas = eps / np.sqrt(norm2)
        r_star = optimal_backing(x, f, gammas)
    else:
        gammas = None
        r_star = None
    return ClimatologyReport(
        base_rate=f,
        epsilons=eps,
        base=float(-np.mean((x - f) ** 2)),
        gain=2.0 / n * float(np.sum(eps * (x - f))),
        stake=norm2 / n,
        mean_score=float(-np.mean((x - q) ** 2)),
        expected_base=climatology_baseline_binary(f),
        directions=gammas,
        optimal_scale=r_star,
    )


def optimal_backing(outcomes, base_rate, directions):
    """Scale ``R`` maximizing the mean Brier score of ``q_i = f + R * gamma_i``.

    `directions` must have unit Euclidean norm.  The optimum is
    ``sum_i gamma_i (x_i - f)``; a negative value means the model is
    anticorrelated with the outcomes.
    """
    x = np.atleast_1d(check_binary_outcomes(outcomes, "outcomes"))
    g = np.atleast_1d(np.asarray(directions, dtype=float))
    check_consistent_length(x, g)
    if abs(float(np.sum(g**2)) - 1.0) > 1e-9:
        raise ValueError("directions must have unit norm (sum of squares 1)")
    return float(np.sum(g * (x - float(base_rate))))


def skill_score(score, baseline_score):
    """``(score - baseline) / |baseline|``; positive iff `score` beats the baseline.

    Against the uniform three-way baseline of -1/3 this is ``3 * score + 1``.
    """
    if baseline_score >= 0:
        raise ValueError("baseline_score must be negative")
    return (score - baseline_score) / abs(baseline_score)


def climatology_baseline_binary(f):
    """Expected binary Brier score ``-f (1 - f)`` of forecasting the base rate."""
    f = float(check_probability(f, "f"))
    return -f * (1.0 - f)


def climatology_baseline_multicat(freqs):
    """Expected categorical Brier score ``-(1 - sum p_k**2) / 2`` of forecasting the climatology."""
    p = check_forecast(freqs)
    return -0.5 * (1.0 - float(np.sum(p**2)))
