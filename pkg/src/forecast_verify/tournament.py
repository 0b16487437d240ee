"""Prediction tournaments: ingest forecast files, score them, rank forecasters.

Input formats
-------------
Delimited (comma-separated, header row required):

* events file ``event_id,round,k,outcome``; ``outcome`` is empty while unresolved.
* forecasts file ``forecaster_id,event_id,probs`` where ``probs`` is
  ``p_0;p_1;...;p_{k-1}``.

Structured (JSON lines), one object per line, either
``{"type": "event", "event_id": ..., "round": ..., "k": ..., "outcome": ...}`` or
``{"type": "forecast", "forecaster_id": ..., "event_id": ..., "probs": [...]}``.

Row-level problems are collected as :class:`Rejection` records rather than
raised, so a single bad row never hides the rest of the file.
"""

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ._validation import ForecastError, check_forecast
from .luck_skill import compare_forecasters, is_separated
from .rules import ScoringRule, get_rule

EVENT_FIELDS = ("event_id", "round", "k", "outcome")
FORECAST_FIELDS = ("forecaster_id", "event_id")
MISSING_POLICIES = ("uniform", "strict")


class IngestError(ValueError):
    """The input as a whole cannot be read (missing file, wrong header)."""


@dataclass(frozen=True)
class Event:
    event_id: str
    round: int
    k: int
    outcome: Optional[int] = None

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"event {self.event_id}: k must be at least 2")
        if self.outcome is not None and not 0 <= self.outcome < self.k:
            raise ValueError(f"event {self.event_id}: outcome {self.outcome} outside [0, {self.k})")

    @property
    def resolved(self):
        return self.outcome is not None


@dataclass(frozen=True)
class Submission:
    forecaster_id: str
    event_id: str
    probs: Tuple[float, ...]
    round: Optional[int] = None


@dataclass(frozen=True)
class Rejection:
    source: str
    line: int
    reason: str


@dataclass
class IngestReport:
    events: Dict[str, Event] = field(default_factory=dict)
    submissions: List[Submission] = field(default_factory=list)
    rejections: List[Rejection] = field(default_factory=list)

    @property
    def ok(self):
        return not self.rejections


def event_sort_key(event):
    """Resolution order: by round, then event id (numerically when the id is an integer)."""
    eid = event.event_id
    return (event.round, (0, int(eid), "") if eid.lstrip("-").isdigit() else (1, 0, eid))


def _open(src):
    if hasattr(src, "read"):
        return src, getattr(src, "name", "<stream>"), False
    if not os.path.exists(src):
        raise IngestError(f"cannot read {src}: no such file")
    return open(src, newline=""), str(src), True


def _parse_event(row):
    eid = str(row["event_id"]).strip()
    if not eid:
        raise ValueError("empty event_id")
    outcome = row.get("outcome")
    outcome = None if outcome is None or str(outcome).strip() == "" else int(str(outcome).strip())
    return Event(eid, int(str(row["round"]).strip()), int(str(row["k"]).strip()), outcome)


def _add_event(report, ev, source, line):
    if ev.event_id in report.events:
        report.rejections.append(Rejection(source, line, f"duplicate event {ev.event_id}"))
    else:
        report.events[ev.event_id] = ev


def _add_submission(report, seen, fid, eid, probs, source, line):
    fid = str(fid).strip()
    eid = str(eid).strip()
    if not fid:
        report.rejections.append(Rejection(source, line, "empty forecaster_id"))
        return
    ev = report.events.get(eid)
    if ev is None:
        report.rejections.append(Rejection(source, line, f"unknown event {eid}"))
        return
    if (fid, eid) in seen:
        report.rejections.append(Rejection(source, line, f"duplicate submission by {fid} for event {eid}"))
        return
    try:
        q = check_forecast(probs, k=ev.k)
    except ForecastError as exc:
        report.rejections.append(Rejection(source, line, str(exc)))
        return
    seen.add((fid, eid))
    report.submissions.append(Submission(fid, eid, tuple(float(v) for v in q), ev.round))


def read_events_csv(src, report=None):
    report = report if report is not None else IngestReport()
    fh, name, close = _open(src)
    try:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != list(EVENT_FIELDS):
            raise IngestError(f"{name}: header must be {','.join(EVENT_FIELDS)}, got {reader.fieldnames}")
        for row in reader:
            line = reader.line_num
            try:
                ev = _parse_event({k.strip(): v for k, v in row.items()})
            except (ValueError, TypeError, AttributeError) as exc:
                report.rejections.append(Rejection(name, line, f"bad event row: {exc}"))
                continue
            _add_event(report, ev, name, line)
    finally:
        if close:
            fh.close()
    return report


def read_forecasts_csv(src, report):
    """Read a forecasts file against the events already in `report`."""
    fh, name, close = _open(src)
    seen = {(s.forecaster_id, s.event_id) for s in report.submissions}
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) != 3 or tuple(h.strip() for h in header[:2]) != FORECAST_FIELDS:
            raise IngestError(f"{name}: header must be forecaster_id,event_id,probs, got {header}")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                report.rejections.append(Rejection(name, line, f"expected 3 columns, got {len(row)}"))
                continue
            try:
                probs = [float(v) for v in row[2].split(";")]
            except ValueError:
                report.rejections.append(Rejection(name, line, f"unparseable probabilities {row[2]!r}"))
                continue
            _add_submission(report, seen, row[0], row[1], probs, name, line)
    finally:
        if close:
            fh.close()
    return report


def read_jsonl(src):
    fh, name, close = _open(src)
    try:
        lines = fh.read().splitlines()
    finally:
        if close:
            fh.close()
    report = IngestReport()
    forecasts = []
    for line, text in enumerate(lines, start=1):
        if not text.strip():
            continue
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            report.rejections.append(Rejection(name, line, f"invalid JSON: {exc.msg}"))
            continue
        kind = obj.get("type") if isinstance(obj, dict) else None
        if kind == "event":
            try:
                _add_event(report, _parse_event(obj), name, line)
            except (KeyError, ValueError, TypeError) as exc:
                report.rejections.append(Rejection(name, line, f"bad event object: {exc}"))
        elif kind == "forecast":
            forecasts.append((line, obj))
        else:
            report.rejections.append(Rejection(name, line, "object must have type 'event' or 'forecast'"))
    seen = set()
    for line, obj in forecasts:
        try:
            probs = [float(v) for v in obj["probs"]]
            fid, eid = obj["forecaster_id"], obj["event_id"]
        except (KeyError, TypeError, ValueError) as exc:
            report.rejections.append(Rejection(name, line, f"bad forecast object: {exc}"))
            continue
        _add_submission(report, seen, fid, eid, probs, name, line)
    return report


def ingest(events, forecasts=None, fmt=None):
    """Parse a tournament from files or streams.

    Parameters
    ----------
    events : path or file-like
        Events file, or the single JSON-lines file when ``fmt="structured"``.
    forecasts : path or file-like, optional
        Forecasts file for the delimited format.
    fmt : {"delimited", "structured"}, optional
        Inferred from the events file extension (``.jsonl``/``.ndjson`` are
        structured) when omitted.

    Returns
    -------
    IngestReport
    """
    if fmt is None:
        ext = os.path.splitext(str(getattr(events, "name", events)))[1].lower()
        fmt = "structured" if ext in (".jsonl", ".ndjson", ".json") else "delimited"
    if fmt == "structured":
        return read_jsonl(events)
    if fmt != "delimited":
        raise ValueError(f"unknown format {fmt!r}")
    if forecasts is None:
        raise IngestError("the delimited format needs both an events and a forecasts file")
    report = read_events_csv(events)
    return read_forecasts_csv(forecasts, report)


# ---------------------------------------------------------------------------
# Scoring


@dataclass
class LeaderboardEntry:
    forecaster_id: str
    rank: int
    mean_score: float
    n_events: int
    n_imputed: int
    event_ids: List[str]
    scores: np.ndarray
    margin: Optional[float] = None
    band: Optional[float] = None

    @property
    def trajectory(self):
        """Mean score after each scored event, in resolution order."""
        with np.errstate(invalid="ignore"):
            return np.cumsum(self.scores) / np.arange(1, self.scores.size + 1)


@dataclass
class Leaderboard:
    """Ranked forecasters plus the forecast streams needed for pairwise tests.

    ``margin`` is the lead over the next-ranked forecaster and ``band`` is twice
    the pairwise standard-deviation bound against that forecaster; both are
    ``None`` for the last entry.
    """

    rule: str
    entries: List[LeaderboardEntry]
    event_order: List[str]
    outcomes: Dict[str, int]
    forecasts: Dict[str, Dict[str, np.ndarray]]
    imputed: Dict[str, set]

    def entry(self, forecaster_id):
        for e in self.entries:
            if e.forecaster_id == forecaster_id:
                return e
        raise KeyError(forecaster_id)

    def ranking(self):
        return [e.forecaster_id for e in self.entries]


def _resolve_rule(rule, alpha=None, log_zero="inf"):
    if isinstance(rule, ScoringRule):
        return rule.name, rule.multicategory, rule.score
    if callable(rule):
        return getattr(rule, "__name__", "custom"), True, rule
    r = get_rule(rule, alpha=alpha, log_zero=log_zero)
    return r.name, r.multicategory, r.score


def _mean(scores):
    return float(np.mean(scores)) if scores.size else float("nan")


def score_tournament(events, submissions, rule="brier", alpha=None, missing="uniform", log_zero="inf"):
    """Score every forecaster over the resolved events and rank them.

    Parameters
    ----------
    events : mapping of id to Event, or iterable of Event
    submissions : iterable of Submission
    rule : str, ScoringRule or callable
        A rule name understood by :func:`forecast_verify.rules.get_rule`, a
        :class:`ScoringRule`, or any ``f(probs, outcome) -> float``.
    missing : {"uniform", "strict"}
        ``"uniform"`` scores a skipped event as if the forecaster had submitted
        the uniform forecast (and counts it in ``n_imputed``); ``"strict"``
        leaves the event out of that forecaster's record.
    """
    if missing not in MISSING_POLICIES:
        raise ValueError(f"missing must be one of {MISSING_POLICIES}")
    evs = list(events.values()) if isinstance(events, dict) else list(events)
    resolved = sorted((e for e in evs if e.resolved), key=event_sort_key)
    if not resolved:
        raise ValueError("no resolved events to score")
    rule_name, multicat, score_fn = _resolve_rule(rule, alpha, log_zero)
    if not multicat:
        wide = [e.event_id for e in resolved if e.k != 2]
        if wide:
            raise ValueError(f"rule {rule_name!r} is binary-only but events {wide[:5]} have K > 2")

    table = {}
    for s in submissions:
        table[(s.forecaster_id, s.event_id)] = np.asarray(s.probs, dtype=float)
    if not table:
        raise ValueError("no submissions")
    forecasters = sorted({fid for fid, _ in table})

    forecasts, imputed, entries = {}, {}, []
    for fid in forecasters:
        forecasts[fid], imputed[fid] = {}, set()
        ids, scores = [], []
        for ev in resolved:
            q = table.get((fid, ev.event_id))
            if q is None:
                if missing == "strict":
                    continue
                q = np.full(ev.k, 1.0 / ev.k)
                imputed[fid].add(ev.event_id)
            forecasts[fid][ev.event_id] = q
            ids.append(ev.event_id)
            scores.append(score_fn(q, ev.outcome))
        arr = np.asarray(scores, dtype=float)
        entries.append(LeaderboardEntry(fid, 0, _mean(arr), arr.size, len(imputed[fid]), ids, arr))

    entries.sort(key=lambda e: (-e.mean_score if not math.isnan(e.mean_score) else math.inf, e.forecaster_id))
    for pos, e in enumerate(entries):
        if pos and e.mean_score == entries[pos - 1].mean_score:
            e.rank = entries[pos - 1].rank
        else:
            e.rank = pos + 1

    board = Leaderboard(
        rule=rule_name,
        entries=entries,
        event_order=[e.event_id for e in resolved],
        outcomes={e.event_id: e.outcome for e in resolved},
        forecasts=forecasts,
        imputed=imputed,
    )
    for upper, lower in zip(entries, entries[1:]):
        upper.margin = _difference(upper.mean_score, lower.mean_score)
        common = _common_events(board, upper.forecaster_id, lower.forecaster_id)
        if common:
            upper.band = 2.0 * _compare(board, upper.forecaster_id, lower.forecaster_id, common).sigma_bound
    return board


def _difference(a, b):
    if a == b:
        return 0.0
    with np.errstate(invalid="ignore"):
        return float(a - b)


def _common_events(board, a, b):
    fa, fb = board.forecasts[a], board.forecasts[b]
    return [eid for eid in board.event_order if eid in fa and eid in fb]


def _compare(board, a, b, common):
    fa, fb = board.forecasts[a], board.forecasts[b]
    ks = {fa[e].size for e in common}
    xs = [board.outcomes[e] for e in common]
    if ks == {2}:
        return compare_forecasters([fa[e][1] for e in common], [fb[e][1] for e in common], xs)
    # mixed K: pad to a common width; zero-probability padding categories never occur
    width = max(ks)
    pad = lambda q: np.pad(q, (0, width - q.size))  # noqa: E731
    return compare_forecasters(
        np.array([pad(fa[e]) for e in common]), np.array([pad(fb[e]) for e in common]), xs
    )


@dataclass(frozen=True)
class PairVerdict:
    """Two-sigma test of the gap between forecasters ``a`` and ``b``.

    ``delta`` is ``a``'s mean score minus ``b``'s over their common events,
    under the leaderboard's rule.  ``sigma_bound`` is the Brier-score bound on
    its standard deviation; ``approximate`` flags multicategory events or a
    non-Brier rule, where the bound is heuristic.
    """

    a: str
    b: str
    delta: float
    sigma_bound: float
    n: int
    separated: bool
    approximate: bool


def _pair_verdict(board, a, b):
    common = _common_events(board, a, b)
    if not common:
        raise ValueError(f"forecasters {a} and {b} have no resolved events in common")
    report = _compare(board, a, b, common)
    ea, eb = board.entry(a), board.entry(b)
    sa = ea.scores[[ea.event_ids.index(e) for e in common]]
    sb = eb.scores[[eb.event_ids.index(e) for e in common]]
    delta = _difference(_mean(sa), _mean(sb))
    separated = not math.isnan(delta) and is_separated(delta, report.sigma_bound)
    return PairVerdict(
        a, b, delta, report.sigma_bound, report.n, separated,
        approximate=report.approximate or board.rule != "brier",
    )


def margin_significance(board, pairs=None):
    """Two-sigma verdicts for `pairs` of forecaster ids (default: adjacent ranks).

    A gap exactly equal to two sigma counts as not separated.  The sigma bound
    is the Brier range bound, so verdicts under other rules or on events with
    more than two categories are flagged ``approximate``.
    """
    if pairs is None:
        ids = board.ranking()
        pairs = list(zip(ids, ids[1:]))
    return [_pair_verdict(board, a, b) for a, b in pairs]


@dataclass(frozen=True)
class RankInterval:
    forecaster_id: str
    rank: int
    best: int
    worst: int


def rank_confidence(board):
    """Range of ranks each forecaster could hold once two-sigma noise is allowed for.

    A rival counts as surely above (below) only if the pairwise gap exceeds two
    sigma in that direction; every other rival could finish on either side.
    """
    ids = board.ranking()
    n = len(ids)
    if n < 2:
        raise ValueError("rank confidence needs at least two forecasters")
    above = {fid: 0 for fid in ids}
    below = {fid: 0 for fid in ids}
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            v = _pair_verdict(board, a, b)
            if v.separated:
                hi, lo = (a, b) if v.delta > 0 else (b, a)
                above[lo] += 1
                below[hi] += 1
    return [
        RankInterval(e.forecaster_id, e.rank, 1 + above[e.forecaster_id], n - below[e.forecaster_id])
        for e in board.entries
    ]


# ---------------------------------------------------------------------------
# Writers


def format_number(x):
    """Full-precision decimal text; non-finite values as ``-inf``/``inf``/``nan``."""
    if x is None:
        return ""
    x = float(x)
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def leaderboard_rows(board):
    yield ["rank", "forecaster_id", "n_events", "n_imputed", "mean_score", "margin", "band"]
    for e in board.entries:
        yield [e.rank, e.forecaster_id, e.n_events, e.n_imputed,
               format_number(e.mean_score), format_number(e.margin), format_number(e.band)]


def trajectory_rows(board):
    """One row per forecaster per scored event; directly plottable."""
    yield ["forecaster_id", "t", "event_id", "score", "cumulative_mean"]
    for e in sorted(board.entries, key=lambda e: e.forecaster_id):
        for t, (eid, s, m) in enumerate(zip(e.event_ids, e.scores, e.trajectory), start=1):
            yield [e.forecaster_id, t, eid, format_number(s), format_number(m)]


def write_rows(rows, dest):
    if hasattr(dest, "write"):
        csv.writer(dest, lineterminator="\n").writerows(rows)
        return
    with open(dest, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)


def rows_to_text(rows):
    buf = io.StringIO()
    write_rows(rows, buf)
    return buf.getvalue()
