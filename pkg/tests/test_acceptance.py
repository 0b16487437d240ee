"""End-to-end acceptance checks, one test per criterion.

Each test records a single PASS/FAIL line (echoed in the terminal summary under
"acceptance criteria") before asserting.
"""

import math
import time

import numpy as np
import pytest

from conftest import MATCH
from forecast_verify.cli import _fmt2
from forecast_verify.kelly import expected_log_growth, kelly_fraction, simulate_bank
from forecast_verify.luck_skill import compare_forecasters, exposure_variance, is_separated, split_score
from forecast_verify.rules import (
    binary_brier_score,
    binary_log_score,
    brier_score,
    builtin_triples,
    elliptical_score,
    elliptical_triple,
    induced_score,
    log_score,
    poisson_asymmetric_score,
    spherical_score,
)
from forecast_verify.simulate import run_simulation, savant_vs_offset, theoretical_beat_probability
from forecast_verify.tournament import Event, Submission, score_tournament
from forecast_verify.verification import (
    climatology_baseline_multicat,
    climatology_decompose,
    murphy_decompose,
    optimal_backing,
)

ALPHAS = (0.1, 0.3, 0.5, 0.7, 0.9)
P_VALUES = np.round(np.arange(1, 20) / 20, 10)
Q_OPEN = np.round(np.arange(1, 1000) / 1000, 10)


def test_criterion_01_football_match(acceptance):
    start = time.perf_counter()
    events = {"m": Event("m", 1, 3, 0)}
    subs = [Submission(k, "m", v) for k, v in MATCH.items()]
    brier = {e.forecaster_id: e.mean_score for e in score_tournament(events, subs, rule="brier").entries}
    log = {e.forecaster_id: e.mean_score for e in score_tournament(events, subs, rule="log").entries}
    elapsed = time.perf_counter() - start

    exact_b = {"A": 0.0, "B": -0.25, "C": -0.19, "D": -0.2025, "E": -1 / 3, "F": -1.0}
    exact_l = {"A": 0.0, "B": math.log(0.5), "C": math.log(0.5), "D": math.log(0.55), "E": -math.log(3),
               "F": -math.inf}
    shown_b = {"A": "0.00", "B": "-0.25", "C": "-0.19", "D": "-0.20", "E": "-0.33", "F": "-1.00"}
    shown_l = {"A": "0.00", "B": "-0.69", "C": "-0.69", "D": "-0.60", "E": "-1.10", "F": "-inf"}

    ok = all(abs(brier[k] - v) < 1e-12 for k, v in exact_b.items())
    ok &= all(log[k] == v or abs(log[k] - v) < 1e-12 for k, v in exact_l.items())
    ok &= {k: _fmt2(v) for k, v in brier.items()} == shown_b
    ok &= {k: _fmt2(v) for k, v in log.items()} == shown_l
    # the worked example in the text uses (0.5, 0.25, 0.25) for the second and third outcomes
    ok &= brier_score((0.5, 0.25, 0.25), 0) == -0.1875 and _fmt2(-0.1875) == "-0.19"
    ok &= elapsed < 0.5
    acceptance(1, "football match Brier/log scores and 2 d.p. display", ok,
               f"S_B={[_fmt2(brier[k]) for k in 'ABCDEF']} S_L={[_fmt2(log[k]) for k in 'ABCDEF']} "
               f"{elapsed * 1e3:.1f} ms")


def test_criterion_02_baselines(acceptance):
    uniform = climatology_baseline_multicat((1 / 3, 1 / 3, 1 / 3))
    football = climatology_baseline_multicat((0.38, 0.24, 0.38))
    ok = abs(uniform + 1 / 3) < 1e-12 and abs(football + 0.3268) < 1e-12 and abs(football + 0.327) <= 5e-4
    acceptance(2, "climatological baselines", ok, f"{uniform:.12f}, {football:.12f}")


@pytest.mark.slow
def test_criterion_03_savant_monte_carlo(acceptance):
    start = time.perf_counter()
    details, ok = [], True
    for n, target, tol in ((100, 0.16, 0.02), (400, 0.02, 0.01)):
        result = run_simulation(savant_vs_offset(n, 0.1, 100_000, p=0.5, seed=2024))
        got = result.beat_probability("offset", "savant", ties="split")
        se = result.standard_error("offset", "savant", ties="split")
        theory = theoretical_beat_probability(0.1, 0.5, n)
        ok &= abs(got - target) <= tol and abs(got - theory) < 3 * se
        details.append(f"N={n}: {got:.4f} (strict {result.beat_probability('offset', 'savant'):.4f}, "
                       f"theory {theory:.4f}, se {se:.4f})")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 180
    acceptance(3, "offset forecaster beats the savant", ok, "; ".join(details) + f"; {elapsed:.1f} s")


def test_criterion_04_murphy_identity(acceptance):
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 200))
        levels = np.round(rng.uniform(0, 1, int(rng.integers(1, 12))), 3)
        q = rng.choice(levels, n)
        x = (rng.random(n) < q).astype(float)
        r = murphy_decompose(q, x)
        worst = max(worst, abs(r.reconstruction - np.mean(-(x - q) ** 2)))
    acceptance(4, "Murphy decomposition identity", worst < 1e-12, f"max error {worst:.2e}")


def grid_argmax_backing(x, f, gamma, step=1e-5):
    # the mean Brier score of f + R*gamma is a concave quadratic in R; search a bracket around zero
    bound = np.sqrt(np.sum((x - f) ** 2)) + 0.1
    grid = np.arange(-bound, bound + step, step)
    best, best_val = None, -np.inf
    for chunk in np.array_split(grid, max(1, grid.size // 20000)):
        vals = -np.mean((x[None, :] - (f + chunk[:, None] * gamma[None, :])) ** 2, axis=1)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best, best_val = chunk[i], vals[i]
    return best


def test_criterion_05_climatology(acceptance):
    rng = np.random.default_rng(5)
    worst_identity, worst_r = 0.0, 0.0
    for _ in range(100):
        n = int(rng.integers(1, 12))
        f = float(rng.uniform(0.05, 0.95))
        q = rng.uniform(0, 1, n)
        x = (rng.random(n) < q).astype(float)
        r = climatology_decompose(q, x, f)
        worst_identity = max(worst_identity, abs(r.reconstruction - np.mean(-(x - q) ** 2)))
        gamma = r.directions if r.directions is not None else np.full(n, 1 / math.sqrt(n))
        worst_r = max(worst_r, abs(optimal_backing(x, f, gamma) - grid_argmax_backing(x, f, gamma)))
    ok = worst_identity < 1e-12 and worst_r <= 1e-4
    acceptance(5, "climatology identity and optimal backing", ok,
               f"identity {worst_identity:.2e}, backing vs grid {worst_r:.2e}")


def test_criterion_06_propriety(acceptance):
    rules = {
        "brier": binary_brier_score,
        "log": binary_log_score,
        "spherical": spherical_score,
        "poisson": poisson_asymmetric_score,
    }
    rules.update({f"elliptical({a})": (lambda q, x, a=a: elliptical_score(a, q, x)) for a in ALPHAS})
    s1 = {name: fn(Q_OPEN, 1) for name, fn in rules.items()}
    s0 = {name: fn(Q_OPEN, 0) for name, fn in rules.items()}
    passed = total = 0
    for name in rules:
        for p in P_VALUES:
            total += 1
            q_best = Q_OPEN[np.argmax(p * s1[name] + (1 - p) * s0[name])]
            passed += abs(q_best - p) <= 1e-3 + 1e-12
    acceptance(6, "propriety by grid argmax", passed == total, f"{passed}/{total}")


def test_criterion_07_savage(acceptance):
    triples = builtin_triples()
    closed = {"brier": binary_brier_score, "log": binary_log_score, "spherical": spherical_score}
    worst = 0.0
    for name, fn in closed.items():
        for x in (0, 1):
            worst = max(worst, float(np.max(np.abs(induced_score(triples[name], Q_OPEN, x) - fn(Q_OPEN, x)))))
    acceptance(7, "Savage construction matches closed forms", worst < 1e-12, f"max error {worst:.2e}")


def test_criterion_08_elliptical(acceptance):
    ok = all(elliptical_score(a, a, x) == pytest.approx(1.0, abs=1e-12) for a in ALPHAS for x in (0, 1))
    ratio_err = max(float(np.max(np.abs(elliptical_score(0.5, Q_OPEN, x) - math.sqrt(2) * spherical_score(Q_OPEN, x))))
                    for x in (0, 1))
    ok &= ratio_err < 1e-12
    p = np.round(np.arange(5, 96) / 100, 10)
    d1 = d2 = 0.0
    for a in ALPHAS:
        t = elliptical_triple(a)
        h = 1e-5
        d1 = max(d1, float(np.max(np.abs((t.entropy(p + h) - t.entropy(p - h)) / (2 * h) - t.exposure(p)))))
        h = 1e-4
        fd2 = (t.entropy(p + h) - 2 * t.entropy(p) + t.entropy(p - h)) / h**2
        d2 = max(d2, float(np.max(np.abs(fd2 - t.penalty(p)))))
    ok &= d1 < 1e-6 and d2 < 1e-4
    acceptance(8, "elliptical score checks", ok, f"sqrt(2) factor {ratio_err:.1e}, F' {d1:.1e}, F'' {d2:.1e}")


def test_criterion_09_kelly(acceptance):
    f_grid = np.round(np.arange(0, 9991) * 1e-4, 10)
    argmax_err = identity_err = 0.0
    for p in P_VALUES:
        g = p * np.log1p(f_grid) + (1 - p) * np.log1p(-f_grid)
        argmax_err = max(argmax_err, abs(f_grid[np.argmax(g)] - kelly_fraction(p)))
        if p >= 0.5:
            kl = p * math.log(p) + (1 - p) * math.log(1 - p) + math.log(2)
            identity_err = max(identity_err, abs(expected_log_growth(p, kelly_fraction(p)) - kl))
    path = simulate_bank(0.75, 0.5, 100_000, seed=9)
    growth_err = abs(path.growth_rate - expected_log_growth(0.75, 0.5))
    ok = argmax_err <= 1e-4 + 1e-12 and identity_err < 1e-12 and growth_err < 0.01
    acceptance(9, "Kelly fraction and growth", ok,
               f"argmax {argmax_err:.1e}, KL identity {identity_err:.1e}, long-run {growth_err:.4f}")


def test_criterion_10_luck_skill(acceptance):
    grid = np.round(np.linspace(0, 1, 101), 10)
    p, q, x = np.meshgrid(grid, grid, [0.0, 1.0], indexing="ij")
    recon = float(np.max(np.abs(split_score(p, q, x).total - binary_brier_score(q, x))))
    rng = np.random.default_rng(10)
    worst_rel = 0.0
    for pv, qv in ((0.3, 0.8), (0.5, 0.6), (0.7, 0.2)):
        draws = (rng.random(1_000_000) < pv).astype(float)
        e = split_score(pv, qv, draws).exposure
        worst_rel = max(worst_rel, abs(e.var(ddof=1) / exposure_variance(pv, qv) - 1))
    ok = recon < 1e-12 and worst_rel < 0.02
    acceptance(10, "luck/skill split", ok, f"reconstruction {recon:.1e}, variance rel. error {worst_rel:.4f}")


def test_criterion_11_delta(acceptance):
    rng = np.random.default_rng(11)
    delta_err = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 300))
        q, q2 = rng.uniform(0, 1, (2, n))
        x = rng.integers(0, 2, n)
        direct = np.mean(binary_brier_score(q, x)) - np.mean(binary_brier_score(q2, x))
        delta_err = max(delta_err, abs(compare_forecasters(q, q2, x).delta - direct))

    bound_ok = True
    for _ in range(5):
        n, reps = 100, 20_000
        q, q2, p = rng.uniform(0, 1, (3, n))
        xs = (rng.random((reps, n)) < p).astype(float)
        deltas = np.mean(binary_brier_score(q, xs) - binary_brier_score(q2, xs), axis=1)
        sd = deltas.std(ddof=1)
        bound = compare_forecasters(q, q2, xs[0]).sigma_bound
        bound_ok &= sd <= bound + 3 * sd / math.sqrt(2 * (reps - 1))

    # N = 100 forecasts 0.1 apart: two sigma is 0.02, and the boundary itself is not separated
    sigma = compare_forecasters(np.full(100, 0.5), np.full(100, 0.6), np.zeros(100)).sigma_bound
    verdict_ok = (abs(sigma - 0.01) < 1e-15 and is_separated(0.0201, sigma) and is_separated(-0.0201, sigma)
                  and not is_separated(0.0199, sigma) and not is_separated(0.02, 0.01))
    ok = delta_err < 1e-12 and bound_ok and verdict_ok
    acceptance(11, "paired comparison statistic", ok,
               f"delta error {delta_err:.1e}, bound holds {bound_ok}, verdicts {verdict_ok}")


def test_log_of_match_text_values():
    # companion check of the 2 d.p. rounding: E submits exact thirds
    assert _fmt2(log_score(MATCH["E"], 0)) == "-1.10"
    assert _fmt2(math.log(0.33)) == "-1.11"
