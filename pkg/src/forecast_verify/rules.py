"""Proper scoring rules and the entropy-induced (Savage) score construction.

All scores are positively oriented: higher is better, and the best attainable
score for a categorical forecast is 0 for the Brier and log rules.

Binary rules take ``q``, the forecast probability that the event happens, and
``x`` in {0, 1}.  They broadcast over numpy arrays.  The categorical rules
(:func:`brier_score`, :func:`log_score`) take a probability vector over K >= 2
categories and the index of the realized category.  When a K=2 forecast is fed
to a binary-only rule, category 1 is the event ("true") and category 0 its
complement.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._validation import (
    CromwellError,
    ForecastError,
    check_alpha,
    check_binary_outcomes,
    check_forecast,
    check_outcome,
    check_probability,
)

LOG_ZERO_POLICIES = ("inf", "floor", "reject")
#: Probability substituted for 0 under the ``"floor"`` log-zero policy.
LOG_FLOOR_EPS = 1e-12


def _log_with_policy(p, log_zero):
    p = np.asarray(p, dtype=float)
    if log_zero not in LOG_ZERO_POLICIES:
        raise ValueError(f"log_zero must be one of {LOG_ZERO_POLICIES}, got {log_zero!r}")
    if np.any(p == 0.0):
        if log_zero == "reject":
            raise CromwellError("probability 0 assigned to the realized outcome (Cromwell's rule)")
        if log_zero == "floor":
            p = np.maximum(p, LOG_FLOOR_EPS)
    with np.errstate(divide="ignore"):
        return np.log(p)


def _scalar(a):
    return float(a) if np.ndim(a) == 0 else a


# ---------------------------------------------------------------------------
# Categorical rules


def brier_score(forecast, outcome):
    """Halved, negated squared distance between the forecast and the one-hot outcome.

    Ranges from 0 (all mass on the realized category) to -1 (all mass on a
    single wrong category).

    >>> brier_score([0.5, 0.3, 0.2], 0)
    -0.1875
    """
    q = check_forecast(forecast)
    idx = check_outcome(outcome, q.size)
    onehot = np.zeros_like(q)
    onehot[idx] = 1.0
    return -0.5 * float(np.sum((onehot - q) ** 2))


def log_score(forecast, outcome, log_zero="inf"):
    """Natural log of the probability given to the realized category.

    Parameters
    ----------
    forecast : array_like of shape (K,)
    outcome : int
    log_zero : {"inf", "floor", "reject"}
        What to do when the realized category got probability 0: return
        ``-inf``, return ``log(1e-12)``, or raise :class:`CromwellError`.
    """
    q = check_forecast(forecast)
    idx = check_outcome(outcome, q.size)
    return float(_log_with_policy(q[idx], log_zero))


# ---------------------------------------------------------------------------
# Binary rules


def binary_brier_score(q, x):
    """``-(x - q)**2``; agrees with :func:`brier_score` on K=2 forecasts."""
    q = check_probability(q)
    x = check_binary_outcomes(x)
    return _scalar(-((x - q) ** 2))


def binary_log_score(q, x, log_zero="inf"):
    """``x log q + (1 - x) log(1 - q)``."""
    q = check_probability(q)
    x = check_binary_outcomes(x)
    p_realized = np.where(x == 1.0, q, 1.0 - q)
    return _scalar(_log_with_policy(p_realized, log_zero))


def spherical_score(q, x):
    """Projection of ``(q, 1 - q)`` onto the unit circle, read off at the outcome.

    Returns ``q / r`` when ``x == 1`` and ``(1 - q) / r`` otherwise, with
    ``r = sqrt(q**2 + (1 - q)**2)``.
    """
    q = check_probability(q)
    x = check_binary_outcomes(x)
    r = np.sqrt(q**2 + (1.0 - q) ** 2)
    return _scalar(np.where(x == 1.0, q, 1.0 - q) / r)


def elliptical_score(alpha, q, x):
    """Asymmetric generalization of the spherical score, most sensitive near ``alpha``.

    A forecast of ``q == alpha`` scores exactly 1 whatever the outcome.  At
    ``alpha == 0.5`` the score is ``sqrt(2)`` times :func:`spherical_score`.
    """
    a = check_alpha(alpha)
    q = check_probability(q)
    x = check_binary_outcomes(x)
    r = np.sqrt((1.0 - a) * q**2 + a * (1.0 - q) ** 2)
    hit = np.sqrt((1.0 - a) / a) * q / r
    miss = np.sqrt(a / (1.0 - a)) * (1.0 - q) / r
    return _scalar(x * hit + (1.0 - x) * miss)


def poisson_asymmetric_score(q, x):
    """``x log q + 1 - q``: a proper score that treats the event and its absence differently.

    A forecast of exactly 0 is refused with :class:`CromwellError`.
    """
    q = check_probability(q)
    x = check_binary_outcomes(x)
    if np.any(q <= 0.0):
        raise CromwellError("poisson_asymmetric_score requires q > 0 (Cromwell's rule)")
    return _scalar(x * np.log(q) + 1.0 - q)


# ---------------------------------------------------------------------------
# Savage representation


@dataclass(frozen=True)
class RuleTriple:
    """A binary scoring rule given by its convex entropy and two derivatives.

    ``exposure`` is the first derivative of ``entropy`` and ``penalty`` the
    second.  ``open_domain`` marks entropies that are only defined on (0, 1).
    """

    name: str
    entropy: Callable
    exposure: Callable
    penalty: Callable
    open_domain: bool = False


def _xlogx(p):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p > 0.0, p * np.log(np.where(p > 0.0, p, 1.0)), 0.0)


def _r(p):
    return np.sqrt(p**2 + (1.0 - p) ** 2)


def brier_triple():
    return RuleTriple(
        name="brier",
        entropy=lambda p: p * (p - 1.0),
        exposure=lambda p: 2.0 * p - 1.0,
        penalty=lambda p: np.full_like(np.asarray(p, dtype=float), 2.0),
    )


def log_triple():
    return RuleTriple(
        name="log",
        entropy=lambda p: _xlogx(p) + _xlogx(1.0 - p),
        exposure=lambda p: np.log(p / (1.0 - p)),
        penalty=lambda p: 1.0 / (p * (1.0 - p)),
        open_domain=True,
    )


def spherical_triple():
    return RuleTriple(
        name="spherical",
        entropy=_r,
        exposure=lambda p: (2.0 * p - 1.0) / _r(p),
        penalty=lambda p: 1.0 / _r(p) ** 3,
    )


def elliptical_triple(alpha):
    """Entropy ``r / sqrt(alpha (1 - alpha))`` with ``r**2 = (1-alpha) p**2 + alpha (1-p)**2``."""
    a = check_alpha(alpha)
    s = np.sqrt(a * (1.0 - a))

    def r(p):
        return np.sqrt((1.0 - a) * p**2 + a * (1.0 - p) ** 2)

    return RuleTriple(
        name=f"elliptical(alpha={a:g})",
        entropy=lambda p: r(p) / s,
        exposure=lambda p: (p - a) / (s * r(p)),
        penalty=lambda p: s / r(p) ** 3,
    )


def poisson_triple():
    """Entropy ``p log p + 1 - p``, which induces :func:`poisson_asymmetric_score`."""
    return RuleTriple(
        name="poisson",
        entropy=lambda p: _xlogx(p) + 1.0 - p,
        exposure=lambda p: np.log(p),
        penalty=lambda p: 1.0 / p,
        open_domain=True,
    )


def builtin_triples():
    """The Brier, log and spherical triples, keyed by name."""
    return {t.name: t for t in (brier_triple(), log_triple(), spherical_triple())}


def induced_score(triple, q, x):
    """Score ``F(q) + F'(q) (x - q)`` induced by the entropy ``F`` of `triple`.

    This is the tangent line to the entropy at the forecast, evaluated at the
    outcome.  Subtracting it from ``F(x)`` gives the Bregman divergence.
    """
    q = check_probability(q)
    x = check_binary_outcomes(x)
    if triple.open_domain and np.any((q <= 0.0) | (q >= 1.0)):
        raise ForecastError(f"{triple.name} entropy is only defined for 0 < q < 1")
    with np.errstate(divide="ignore", invalid="ignore"):
        return _scalar(triple.entropy(q) + triple.exposure(q) * (x - q))


# ---------------------------------------------------------------------------
# Named rules used by the tournament, simulation and CLI layers

RULE_NAMES = ("brier", "log", "spherical", "elliptical", "poisson")


@dataclass(frozen=True)
class ScoringRule:
    """A named rule with a vectorized binary scorer and, if supported, a K-category one."""

    name: str
    binary: Callable
    categorical: Optional[Callable] = None

    @property
    def multicategory(self):
        return self.categorical is not None

    def score(self, forecast, outcome):
        """Score one categorical forecast; binary-only rules require K=2."""
        q = check_forecast(forecast)
        if self.categorical is not None:
            return self.categorical(q, outcome)
        if q.size != 2:
            raise ForecastError(f"rule {self.name!r} supports only binary events, got K={q.size}")
        return float(self.binary(q[1], float(check_outcome(outcome, 2))))


def get_rule(name, alpha=None, log_zero="inf"):
    """Look up a scoring rule by name.

    `alpha` is required for, and only accepted with, the elliptical rule.
    `log_zero` applies to the log rule only.
    """
    if name not in RULE_NAMES:
        raise ValueError(f"unknown rule {name!r}; choose from {', '.join(RULE_NAMES)}")
    if (name == "elliptical") != (alpha is not None):
        raise ValueError("alpha must be given for the elliptical rule and only for it")
    if log_zero not in LOG_ZERO_POLICIES:
        raise ValueError(f"log_zero must be one of {LOG_ZERO_POLICIES}, got {log_zero!r}")
    if name == "brier":
        return ScoringRule("brier", binary_brier_score, brier_score)
    if name == "log":
        return ScoringRule(
            "log",
            lambda q, x: binary_log_score(q, x, log_zero=log_zero),
            lambda f, o: log_score(f, o, log_zero=log_zero),
        )
    if name == "spherical":
        return ScoringRule("spherical", spherical_score)
    if name == "elliptical":
        a = check_alpha(alpha)
        return ScoringRule(f"elliptical(alpha={a:g})", lambda q, x: elliptical_score(a, q, x))
    return ScoringRule("poisson", poisson_asymmetric_score)
