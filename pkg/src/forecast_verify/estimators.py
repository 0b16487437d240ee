"""scikit-learn compatible wrappers.

* :class:`ClimatologyForecaster` - the lazy baseline that always forecasts the
  training class frequencies.
* :class:`BackedForecaster` - rescales a model's departures from the base rate
  by the Brier-optimal backing factor learned on training data.
* :func:`proper_scorer` - any rule from :mod:`forecast_verify.rules` as a
  scorer for ``cross_val_score``/``GridSearchCV``.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.metrics import make_scorer
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._validation import check_binary_outcomes, check_probability
from .rules import get_rule


class ClimatologyForecaster(ClassifierMixin, BaseEstimator):
    """Forecast the training-set class frequencies for every sample.

    Its expected Brier score, when the frequencies are true, is
    :func:`forecast_verify.verification.climatology_baseline_multicat`.

    Attributes
    ----------
    classes_ : ndarray of shape (n_classes,)
    class_prior_ : ndarray of shape (n_classes,)
    """

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_all_finite=False)
        self.classes_, counts = np.unique(y, return_counts=True)
        self.class_prior_ = counts / counts.sum()
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "class_prior_")
        X = check_array(X, ensure_all_finite=False)
        return np.tile(self.class_prior_, (X.shape[0], 1))

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba, axis=1)]


class BackedForecaster(TransformerMixin, BaseEstimator):
    """Shrink or stretch raw event probabilities toward a base rate.

    Writing the raw forecasts as ``q_i = f + eps_i``, fitting finds the factor
    ``scale_`` that maximizes the training mean Brier score of
    ``f + scale_ * eps_i``; equivalently ``scale_ * ||eps||`` is the optimal
    backing ``R = sum_i gamma_i (x_i - f)`` for directions ``gamma = eps/||eps||``.
    A negative ``scale_`` signals forecasts anticorrelated with the outcomes.

    Parameters
    ----------
    base_rate : float, optional
        Known historical frequency ``f``.  Defaults to the training frequency.
    clip : bool, default=True
        Clip transformed probabilities to [0, 1].
    """

    def __init__(self, base_rate=None, clip=True):
        self.base_rate = base_rate
        self.clip = clip

    def _raw(self, X):
        X = check_array(X, ensure_2d=False)
        if X.ndim == 2:
            if X.shape[1] != 1:
                raise ValueError("BackedForecaster expects a single column of probabilities")
            X = X[:, 0]
        return check_probability(X, "X")

    def fit(self, X, y):
        q = self._raw(X)
        x = check_binary_outcomes(y, "y")
        if q.shape != x.shape:
            raise ValueError("X and y have inconsistent lengths")
        f = float(np.mean(x)) if self.base_rate is None else float(check_probability(self.base_rate))
        eps = q - f
        norm2 = float(np.sum(eps**2))
        self.base_rate_ = f
        self.optimal_backing_ = float(np.sum(eps * (x - f)) / np.sqrt(norm2)) if norm2 > 0 else 0.0
        self.scale_ = float(np.sum(eps * (x - f)) / norm2) if norm2 > 0 else 0.0
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "scale_")
        q = self.base_rate_ + self.scale_ * (self._raw(X) - self.base_rate_)
        return np.clip(q, 0.0, 1.0) if self.clip else q


def _mean_rule_score(y_true, y_prob, rule):
    y_prob = np.asarray(y_prob, dtype=float)
    y_true = np.asarray(y_true)
    if y_prob.ndim == 1:
        return float(np.mean(rule.binary(y_prob, y_true)))
    if not np.issubdtype(y_true.dtype, np.integer):
        raise ValueError("multiclass scoring needs integer labels 0..K-1")
    return float(np.mean([rule.score(p, i) for p, i in zip(y_prob, y_true.tolist())]))


def proper_scorer(rule="brier", alpha=None, log_zero="floor"):
    """A scikit-learn scorer (greater is better) computing a mean proper score.

    Binary problems are scored on the positive-class probability; multiclass
    problems need a categorical rule (``"brier"`` or ``"log"``) and integer
    labels ``0..K-1``.  `log_zero` defaults to ``"floor"`` so cross-validation
    means stay finite.
    """
    r = get_rule(rule, alpha=alpha, log_zero=log_zero)
    return make_scorer(_mean_rule_score, response_method="predict_proba", rule=r)
