"""Monte Carlo tournaments: how often does a worse forecaster beat a better one?

Seeding
-------
Question probabilities drawn from a generator use
``SeedSequence(seed, spawn_key=(0,))``.  Replicate ``r`` draws from
``SeedSequence(seed, spawn_key=(1, r))``: first the N outcome uniforms, then,
for each forecaster in config order, whatever noise that forecaster needs.
Replicates are therefore independent of chunking and of execution order.
"""

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from .rules import get_rule

FORECASTER_KINDS = ("savant", "offset", "uniform", "constant", "noise")


@dataclass(frozen=True)
class ForecasterSpec:
    """A synthetic forecaster.

    kinds:
      ``savant``    reports the true probability.
      ``offset``    reports ``p + delta`` (``random_sign`` flips the sign per question).
      ``uniform``   always reports 0.5.
      ``constant``  always reports ``value``.
      ``noise``     reports ``p + N(0, sd**2)``.
    Reported probabilities outside [0, 1] are clipped and counted.
    """

    name: str
    kind: str = "savant"
    delta: float = 0.0
    random_sign: bool = False
    value: float = 0.5
    sd: float = 0.0

    def __post_init__(self):
        if self.kind not in FORECASTER_KINDS:
            raise ValueError(f"unknown forecaster kind {self.kind!r}; choose from {FORECASTER_KINDS}")
        if self.kind == "constant" and not 0.0 <= self.value <= 1.0:
            raise ValueError("constant forecaster value must lie in [0, 1]")
        if self.kind == "noise" and self.sd < 0:
            raise ValueError("noise sd must be nonnegative")

    @property
    def needs_rng(self):
        return self.kind == "noise" or (self.kind == "offset" and self.random_sign)


@dataclass
class SimConfig:
    n_questions: int
    n_replicates: int
    forecasters: Sequence[ForecasterSpec]
    true_p: Union[float, Sequence[float], Dict] = 0.5
    rule: str = "brier"
    alpha: Optional[float] = None
    seed: int = 0
    tie_tol: float = 1e-12
    chunk_size: int = 2048
    n_jobs: int = 1

    def __post_init__(self):
        if self.n_questions < 1 or self.n_replicates < 1:
            raise ValueError("n_questions and n_replicates must be at least 1")
        names = [f.name for f in self.forecasters]
        if not names or len(set(names)) != len(names):
            raise ValueError("forecasters must be a nonempty list with unique names")

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["forecasters"] = [ForecasterSpec(**f) for f in d.get("forecasters", [])]
        return cls(**d)


def question_probabilities(config):
    """Resolve ``config.true_p`` to an array of length ``n_questions``."""
    n = config.n_questions
    spec = config.true_p
    if isinstance(spec, dict):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(config.seed, spawn_key=(0,))))
        kind = spec.get("kind")
        if kind == "uniform":
            p = rng.uniform(spec.get("low", 0.0), spec.get("high", 1.0), n)
        elif kind == "beta":
            p = rng.beta(spec["a"], spec["b"], n)
        else:
            raise ValueError(f"unknown true_p generator {kind!r}")
    else:
        p = np.broadcast_to(np.asarray(spec, dtype=float), (n,)).copy()
    if np.any(~np.isfinite(p)) or np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("true probabilities must lie in [0, 1]")
    return p


@dataclass
class SimResult:
    """Per-replicate mean scores and pairwise outcomes.

    ``beat[i, j]`` is the fraction of replicates in which forecaster ``i``'s
    mean score strictly exceeds ``j``'s; ``tie[i, j]`` the fraction in which they
    coincide (within ``tie_tol``).  ``beat[i, j] + beat[j, i] + tie[i, j] == 1``.
    """

    names: List[str]
    mean_scores: np.ndarray
    beat: np.ndarray
    tie: np.ndarray
    true_p: np.ndarray
    clipped: Dict[str, int] = field(default_factory=dict)

    @property
    def n_replicates(self):
        return self.mean_scores.shape[1]

    def _idx(self, name):
        return self.names.index(name)

    def beat_probability(self, a, b, ties="exclude"):
        """Probability that `a` finishes ahead of `b`.

        ``ties="split"`` credits half of each tie to `a`, as if ties were
        settled by a fair coin; that is the quantity a continuous normal
        approximation predicts when scores live on a lattice.
        """
        i, j = self._idx(a), self._idx(b)
        if ties == "exclude":
            return float(self.beat[i, j])
        if ties == "split":
            return float(self.beat[i, j] + 0.5 * self.tie[i, j])
        raise ValueError("ties must be 'exclude' or 'split'")

    def standard_error(self, a, b, ties="exclude"):
        pr = self.beat_probability(a, b, ties)
        return math.sqrt(pr * (1.0 - pr) / self.n_replicates)

    def summary(self):
        out = {}
        for name, s in zip(self.names, self.mean_scores):
            finite = s[np.isfinite(s)]
            out[name] = {
                "mean": float(np.mean(s)),
                "std": float(np.std(s, ddof=1)) if finite.size == s.size and s.size > 1 else float("nan"),
                "min": float(np.min(s)),
                "max": float(np.max(s)),
                "clipped": self.clipped.get(name, 0),
            }
        return out

    def write_replicates_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["replicate", "forecaster", "mean_score"])
            for r in range(self.n_replicates):
                for name, s in zip(self.names, self.mean_scores):
                    w.writerow([r, name, format(float(s[r]), ".17g")])


def _forecasts(spec, p, rng, shape):
    if spec.kind == "savant":
        q = np.broadcast_to(p, shape)
    elif spec.kind == "uniform":
        q = np.full(shape, 0.5)
    elif spec.kind == "constant":
        q = np.full(shape, spec.value)
    elif spec.kind == "offset":
        sign = rng.integers(0, 2, shape) * 2 - 1 if spec.random_sign else 1.0
        q = p + sign * spec.delta
    else:
        q = p + rng.normal(0.0, spec.sd, shape)
    return q


def _run_chunk(config, rule, p, start, stop):
    n = config.n_questions
    m = stop - start
    nf = len(config.forecasters)
    outcomes = np.empty((m, n))
    qs = np.empty((nf, m, n))
    for i, spec in enumerate(config.forecasters):
        if not spec.needs_rng:
            qs[i] = _forecasts(spec, p, None, (n,))
    for row, r in enumerate(range(start, stop)):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(config.seed, spawn_key=(1, r))))
        outcomes[row] = rng.random(n) < p
        for i, spec in enumerate(config.forecasters):
            if spec.needs_rng:
                qs[i, row] = _forecasts(spec, p, rng, (n,))
    clipped = [int(np.sum((q < 0.0) | (q > 1.0))) for q in qs]
    np.clip(qs, 0.0, 1.0, out=qs)
    means = np.stack([np.mean(np.asarray(rule.binary(q, outcomes)), axis=1) for q in qs])
    return start, means, clipped


def run_simulation(config):
    """Simulate ``n_replicates`` tournaments of ``n_questions`` binary events.

    Every forecaster is scored on the same outcomes within a replicate.
    Output is bit-identical for identical configs, whatever ``chunk_size`` or
    ``n_jobs``.
    """
    rule = get_rule(config.rule, alpha=config.alpha)
    p = question_probabilities(config)
    nf = len(config.forecasters)
    bounds = [
        (s, min(s + config.chunk_size, config.n_replicates))
        for s in range(0, config.n_replicates, config.chunk_size)
    ]
    means = np.empty((nf, config.n_replicates))
    clipped = np.zeros(nf, dtype=int)
    if config.n_jobs > 1:
        with ThreadPoolExecutor(config.n_jobs) as pool:
            results = list(pool.map(lambda b: _run_chunk(config, rule, p, *b), bounds))
    else:
        results = [_run_chunk(config, rule, p, *b) for b in bounds]
    for start, m, c in results:
        means[:, start:start + m.shape[1]] = m
        clipped += c

    beat = np.zeros((nf, nf))
    tie = np.zeros((nf, nf))
    for i in range(nf):
        for j in range(nf):
            if i == j:
                continue
            with np.errstate(invalid="ignore"):
                eq = (means[i] == means[j]) | (np.abs(means[i] - means[j]) <= config.tie_tol)
            tie[i, j] = np.mean(eq)
            beat[i, j] = np.mean((means[i] > means[j]) & ~eq)
    names = [f.name for f in config.forecasters]
    return SimResult(names, means, beat, tie, p, dict(zip(names, clipped.tolist())))


def _normal_cdf(z):
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def theoretical_beat_probability(delta, p, n):
    """Normal-approximation chance that a forecaster off by `delta` beats the savant.

    The per-question score difference ``S(p + delta) - S(p)`` has mean
    ``-delta**2`` and variance ``4 delta**2 p (1 - p)``; over `n` questions the
    answer is ``Phi(-delta**2 / sqrt(4 delta**2 p (1 - p) / n))``.  At
    ``p = 0.5``, ``delta = 0.1`` this gives 0.1587 for ``n = 100`` and 0.0228 for
    ``n = 400``.
    """
    delta, p, n = float(delta), float(p), int(n)
    if not 0.0 <= p <= 1.0 or not 0.0 <= p + delta <= 1.0:
        raise ValueError("need p and p + delta in [0, 1]")
    if n < 1:
        raise ValueError("n must be at least 1")
    penalty = delta**2
    sigma = math.sqrt(4.0 * delta**2 * p * (1.0 - p) / n)
    if sigma == 0.0:
        return 0.5 if penalty == 0.0 else 0.0
    return _normal_cdf(-penalty / sigma)


def savant_vs_offset(n_questions, delta, n_replicates, p=0.5, seed=0, random_sign=False, rule="brier", **kw):
    """Convenience config pitting a ``delta``-offset forecaster against the savant."""
    return SimConfig(
        n_questions=n_questions,
        n_replicates=n_replicates,
        forecasters=[
            ForecasterSpec("savant", "savant"),
            ForecasterSpec("offset", "offset", delta=delta, random_sign=random_sign),
        ],
        true_p=p,
        rule=rule,
        seed=seed,
        **kw,
    )
