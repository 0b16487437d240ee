"""Proper scoring rules, forecast verification and prediction-tournament analysis."""

from ._validation import CromwellError, ForecastError
from .kelly import expected_log_growth, kelly_fraction, simulate_bank
from .luck_skill import compare_forecasters, comparison_mean_variance, exposure_variance, split_score
from .rules import (
    RuleTriple,
    brier_score,
    builtin_triples,
    elliptical_score,
    elliptical_triple,
    get_rule,
    induced_score,
    log_score,
    poisson_asymmetric_score,
    spherical_score,
)
from .simulate import SimConfig, ForecasterSpec, run_simulation, theoretical_beat_probability
from .tournament import ingest, margin_significance, rank_confidence, score_tournament
from .verification import (
    climatology_baseline_binary,
    climatology_baseline_multicat,
    climatology_decompose,
    murphy_decompose,
    optimal_backing,
    skill_score,
)

__version__ = "0.1.0"
