"""Command-line interface: ``forecast-verify <subcommand> ...``.

Exit status is 0 on success, 1 when the input data cannot be scored, and 2 on
usage errors.
"""

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import kelly, reporting, rules, simulate, tournament, verification

FORMATS = ("human", "delimited", "structured")


def _fmt2(x):
    if x is None:
        return "-"
    x = float(x)
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.2f}"


def _table(header, rows):
    cells = [list(map(str, header))] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _emit(args, text, filename=None):
    """Print `text`, or write it under ``--out`` when a filename is given."""
    if args.out and filename:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, filename), "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _fail(msg):
    print(f"error: {msg}", file=sys.stderr)
    return 1


def _report_rejections(report):
    for r in report.rejections:
        print(f"rejected {r.source}:{r.line}: {r.reason}", file=sys.stderr)


def _load(args):
    report = tournament.ingest(args.events, args.forecasts, fmt=args.input_format)
    _report_rejections(report)
    return report


def _rule_kwargs(args):
    if args.rule == "elliptical" and args.alpha is None:
        raise SystemExit(_usage_error("--alpha is required with --rule elliptical"))
    if args.rule != "elliptical" and args.alpha is not None:
        raise SystemExit(_usage_error("--alpha only applies to --rule elliptical"))
    return dict(rule=args.rule, alpha=args.alpha, log_zero=args.log_zero)


def _usage_error(msg):
    print(f"usage error: {msg}", file=sys.stderr)
    return 2


# ---------------------------------------------------------------------------


def cmd_score(args):
    try:
        report = _load(args)
    except tournament.IngestError as exc:
        return _fail(str(exc))
    if not report.submissions:
        return _fail("no submissions")
    if args.fail_on_reject and report.rejections:
        return _fail(f"{len(report.rejections)} rows rejected")
    try:
        board = tournament.score_tournament(
            report.events, report.submissions, missing=args.missing, **_rule_kwargs(args)
        )
    except ValueError as exc:
        return _fail(str(exc))

    if args.out:
        tournament.write_rows(tournament.leaderboard_rows(board), os.path.join(_mkdir(args.out), "leaderboard.csv"))
        tournament.write_rows(tournament.trajectory_rows(board), os.path.join(args.out, "trajectories.csv"))
        _write(os.path.join(args.out, "report.json"), reporting.dumps(_board_doc(board, report), indent=2))
    if args.format == "human":
        rows = [[e.rank, e.forecaster_id, _fmt2(e.mean_score), e.n_events, e.n_imputed, _fmt2(e.margin)]
                for e in board.entries]
        print(f"rule: {board.rule}")
        print(_table(["rank", "forecaster", "mean", "events", "imputed", "margin"], rows))
    elif args.format == "delimited":
        sys.stdout.write(tournament.rows_to_text(tournament.leaderboard_rows(board)))
    else:
        print(reporting.dumps(_board_doc(board, report), indent=2))
    return 0


def _mkdir(path):
    os.makedirs(path, exist_ok=True)
    return path


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text + "\n")


def _board_doc(board, report):
    return {
        "rule": board.rule,
        "leaderboard": [
            {
                "rank": e.rank,
                "forecaster_id": e.forecaster_id,
                "mean_score": e.mean_score,
                "n_events": e.n_events,
                "n_imputed": e.n_imputed,
                "margin": e.margin,
                "band": e.band,
                "event_ids": e.event_ids,
                "scores": e.scores,
                "trajectory": e.trajectory,
            }
            for e in board.entries
        ],
        "rejections": [vars(r) for r in report.rejections],
    }


def _read_record(path):
    qs, xs, ids = [], [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"forecast", "outcome"} <= {f.strip() for f in reader.fieldnames}:
            raise ValueError("record file needs a header with 'forecast' and 'outcome' columns")
        for row in reader:
            row = {k.strip(): (v or "").strip() for k, v in row.items()}
            qs.append(float(row["forecast"]))
            xs.append(float(row["outcome"]))
            ids.append(row.get("event_id", str(reader.line_num - 1)))
    return np.array(qs), np.array(xs), ids


def cmd_decompose(args):
    try:
        q, x, _ = _read_record(args.record)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    if not np.all((x == 0) | (x == 1)):
        return _fail("decompose needs binary outcomes (0/1); score multicategory events with 'score' instead")
    try:
        murphy = verification.murphy_decompose(q, x, binning=verification.parse_binning(args.binning))
        clim = None
        if args.base_frequency is not None:
            clim = verification.climatology_decompose(q, x, args.base_frequency)
    except ValueError as exc:
        return _fail(str(exc))

    doc = {"murphy": murphy, "climatology": clim}
    if args.format == "structured":
        _emit(args, reporting.dumps(doc, indent=2), "decomposition.json")
    elif args.format == "delimited":
        rows = [["bin", "forecast", "count", "frequency"]]
        rows += [[b.label, tournament.format_number(b.forecast), b.count, tournament.format_number(b.frequency)]
                 for b in murphy.bins]
        _emit(args, tournament.rows_to_text(rows), "bins.csv")
    else:
        lines = [
            f"events: {murphy.n}   base rate f: {murphy.base_rate:.4f}",
            f"mean Brier score: {murphy.mean_score:.4f}",
            f"  -uncertainty {-murphy.uncertainty:.4f}  +resolution {murphy.resolution:.4f}"
            f"  -reliability {-murphy.reliability:.4f}   residual {murphy.residual:.2e}",
            _table(["bin", "forecast", "count", "freq"],
                   [[b.label, f"{b.forecast:.3f}", b.count, f"{b.frequency:.3f}"] for b in murphy.bins]),
        ]
        if clim is not None:
            r = "n/a" if clim.optimal_scale is None else f"{clim.optimal_scale:.4f}"
            lines.append(
                f"climatology f={clim.base_rate:g}: base {clim.base:.4f} + gain {clim.gain:.4f}"
                f" - stake {clim.stake:.4f} = {clim.reconstruction:.4f}   optimal R {r}"
            )
        _emit(args, "\n".join(lines))
    return 0


def cmd_compare(args):
    try:
        report = _load(args)
        board = tournament.score_tournament(
            report.events, report.submissions, missing=args.missing, **_rule_kwargs(args)
        )
        if (args.a is None) != (args.b is None):
            return _usage_error("give both --a and --b, or neither")
        pairs = [(args.a, args.b)] if args.a is not None else None
        verdicts = tournament.margin_significance(board, pairs)
        intervals = tournament.rank_confidence(board) if pairs is None and len(board.entries) > 1 else []
    except (tournament.IngestError, ValueError, KeyError) as exc:
        return _fail(str(exc))

    if args.format == "structured":
        _emit(args, reporting.dumps({"pairs": verdicts, "rank_intervals": intervals}, indent=2), "comparison.json")
    elif args.format == "delimited":
        rows = [["a", "b", "delta", "sigma_bound", "n", "separated", "approximate"]]
        rows += [[v.a, v.b, tournament.format_number(v.delta), tournament.format_number(v.sigma_bound),
                  v.n, v.separated, v.approximate] for v in verdicts]
        _emit(args, tournament.rows_to_text(rows), "comparison.csv")
    else:
        out = [_table(
            ["a", "b", "delta", "2*sigma", "n", "verdict"],
            [[v.a, v.b, f"{v.delta:.4f}", f"{2 * v.sigma_bound:.4f}", v.n,
              ("separated" if v.separated else "not separated") + (" (approx.)" if v.approximate else "")]
             for v in verdicts],
        )]
        if intervals:
            out.append(_table(["forecaster", "rank", "best", "worst"],
                              [[r.forecaster_id, r.rank, r.best, r.worst] for r in intervals]))
        _emit(args, "\n\n".join(out))
    return 0


def cmd_simulate(args):
    try:
        if args.config:
            with open(args.config) as fh:
                config = simulate.SimConfig.from_dict(json.load(fh))
            if args.seed is not None:
                config.seed = args.seed
        else:
            config = simulate.savant_vs_offset(
                args.n, args.delta, args.replicates, p=args.p, seed=args.seed or 0,
                random_sign=args.random_sign, rule=args.rule, alpha=args.alpha, n_jobs=args.jobs,
            )
        result = simulate.run_simulation(config)
    except (OSError, ValueError, TypeError) as exc:
        return _fail(str(exc))
    if args.raw_csv:
        result.write_replicates_csv(args.raw_csv)

    theory = None
    if not args.config and np.ndim(config.true_p) == 0:
        theory = simulate.theoretical_beat_probability(args.delta, args.p, args.n)
    pairs = [
        {
            "a": a, "b": b,
            "beat": result.beat_probability(a, b),
            "tie": float(result.tie[i, j]),
            "beat_ties_split": result.beat_probability(a, b, ties="split"),
            "standard_error": result.standard_error(a, b, ties="split"),
        }
        for i, a in enumerate(result.names) for j, b in enumerate(result.names) if i != j
    ]
    doc = {
        "n_questions": config.n_questions, "n_replicates": config.n_replicates, "seed": config.seed,
        "rule": config.rule, "summary": result.summary(), "pairs": pairs, "theoretical": theory,
    }
    if args.format == "structured":
        _emit(args, reporting.dumps(doc, indent=2), "simulation.json")
    elif args.format == "delimited":
        rows = [list(pairs[0])] + [[p["a"], p["b"]] + [tournament.format_number(p[k]) for k in list(p)[2:]]
                                   for p in pairs]
        _emit(args, tournament.rows_to_text(rows), "simulation.csv")
    else:
        lines = [f"{config.n_replicates} replicates of {config.n_questions} questions, rule {config.rule}, "
                 f"seed {config.seed}"]
        lines.append(_table(["forecaster", "mean", "std", "clipped"],
                            [[n, f"{s['mean']:.4f}", f"{s['std']:.4f}", s["clipped"]]
                             for n, s in result.summary().items()]))
        lines.append(_table(["a", "b", "P(a beats b)", "P(tie)", "ties split", "s.e."],
                            [[p["a"], p["b"], f"{p['beat']:.4f}", f"{p['tie']:.4f}",
                              f"{p['beat_ties_split']:.4f}", f"{p['standard_error']:.4f}"] for p in pairs]))
        if theory is not None:
            lines.append(f"normal approximation P(offset beats savant): {theory:.4f}")
        _emit(args, "\n".join(lines))
    return 0


def cmd_kelly(args):
    try:
        f_star = kelly.kelly_fraction(args.p)
        f = args.fraction if args.fraction is not None else args.multiple * f_star
        doc = {
            "p": args.p,
            "kelly_fraction": f_star,
            "fraction": f,
            "expected_log_growth": kelly.expected_log_growth(args.p, f),
            "optimal_growth": kelly.expected_log_growth(args.p, f_star),
        }
        if args.plays:
            path = kelly.simulate_bank(args.p, f, args.plays, seed=args.seed)
            doc.update(plays=args.plays, seed=args.seed, realized_growth=path.growth_rate,
                       final_log_multiplier=float(path.log_multiplier[-1]))
    except ValueError as exc:
        return _fail(str(exc))
    if args.format == "human":
        _emit(args, "\n".join(f"{k}: {v:.6g}" if isinstance(v, float) else f"{k}: {v}" for k, v in doc.items()))
    elif args.format == "structured":
        _emit(args, reporting.dumps(doc, indent=2), "kelly.json")
    else:
        _emit(args, tournament.rows_to_text([list(doc), [tournament.format_number(v) if isinstance(v, float)
                                                          else v for v in doc.values()]]), "kelly.csv")
    return 0


def cmd_rules(args):
    grid = np.round(np.arange(1, 10) / 10.0, 10) if args.grid is None else np.array(args.grid, dtype=float)
    triples = list(rules.builtin_triples().values())
    if args.alpha is not None:
        triples.append(rules.elliptical_triple(args.alpha))
    rows = [["rule", "p", "entropy", "exposure", "penalty"]]
    for t in triples:
        for p in grid:
            rows.append([t.name, format(p, "g")] + [
                tournament.format_number(fn(p)) if args.format != "human" else f"{float(fn(p)):.4f}"
                for fn in (t.entropy, t.exposure, t.penalty)
            ])
    if args.format == "human":
        _emit(args, _table(rows[0], rows[1:]))
    elif args.format == "delimited":
        _emit(args, tournament.rows_to_text(rows), "rules.csv")
    else:
        docs = [dict(zip(rows[0], r)) for r in rows[1:]]
        _emit(args, json.dumps(docs, indent=2), "rules.json")
    return 0


# ---------------------------------------------------------------------------


def _add_common(p, rule=True):
    p.add_argument("--format", choices=FORMATS, default="human")
    p.add_argument("--out", help="directory for output files")
    if rule:
        p.add_argument("--rule", choices=rules.RULE_NAMES, default="brier")
        p.add_argument("--alpha", type=float, help="centre of the elliptical rule")
        p.add_argument("--log-zero", choices=rules.LOG_ZERO_POLICIES, default="inf")


def _add_inputs(p):
    p.add_argument("events", help="events CSV, or the single JSON-lines file")
    p.add_argument("forecasts", nargs="?", help="forecasts CSV (delimited input)")
    p.add_argument("--input-format", choices=("delimited", "structured"))
    p.add_argument("--missing", choices=tournament.MISSING_POLICIES, default="uniform")


def build_parser():
    parser = argparse.ArgumentParser(prog="forecast-verify", description="Proper scoring and forecast verification.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score a tournament and write leaderboard/trajectory tables")
    _add_inputs(p)
    _add_common(p)
    p.add_argument("--fail-on-reject", action="store_true", help="exit 1 if any input row was rejected")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("decompose", help="Murphy and climatology decompositions of a binary record")
    p.add_argument("record", help="CSV with columns event_id,forecast,outcome")
    p.add_argument("--binning", default="by-value", help="'by-value' or 'edges:0,0.2,...,1'")
    p.add_argument("--base-frequency", type=float)
    _add_common(p, rule=False)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("compare", help="two-sigma comparison of forecasters")
    _add_inputs(p)
    _add_common(p)
    p.add_argument("--a")
    p.add_argument("--b")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", help="Monte Carlo savant-versus-offset tournaments")
    p.add_argument("--n", type=int, default=100, help="questions per tournament")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--p", type=float, default=0.5, help="true probability of every question")
    p.add_argument("--replicates", type=int, default=10000)
    p.add_argument("--seed", type=int)
    p.add_argument("--random-sign", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--config", help="JSON file with a full simulation config")
    p.add_argument("--raw-csv", help="write per-replicate mean scores here")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("kelly", help="Kelly stake and log growth for an even-odds biased coin")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--fraction", type=float, help="stake fraction (default: Kelly)")
    p.add_argument("--multiple", type=float, default=1.0, help="fraction of the Kelly stake to bet")
    p.add_argument("--plays", type=int, help="also simulate this many plays")
    p.add_argument("--seed", type=int, default=0)
    _add_common(p, rule=False)
    p.set_defaults(func=cmd_kelly)

    p = sub.add_parser("rules", help="tabulate entropy, exposure and penalty of the built-in rules")
    p.add_argument("--grid", type=float, nargs="+")
    p.add_argument("--alpha", type=float, help="also tabulate the elliptical rule at this alpha")
    _add_common(p, rule=False)
    p.set_defaults(func=cmd_rules)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
