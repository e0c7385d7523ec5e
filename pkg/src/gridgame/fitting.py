"""Fit the best time window to a participant's decision trace.

A trace records, per day, the units a participant had available, the units
they sold and the price offered. For every candidate window t in
{1..D-1, unbounded} the model's predicted sale series is generated and
scored against the trace with one of two metrics:

  MD  mean over days-with-inventory of |predicted proportion - sold proportion|
  PD  sum of |predicted - sold| over sum of max(predicted, sold)

Both are 0 for a perfect fit and never exceed 1. The fitted window is the
argmin; exact ties are resolved to the largest candidate (unbounded counts
as largest), because behaviorally identical windows always tie exactly and
the largest one names the whole equivalence class.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import UndefinedFitError, ValidationError
from .market import PriceDistribution, Scenario, default_price_distribution
from .models import (
    UNBOUNDED,
    CutoffSchedule,
    PredictedPlay,
    cutoff_schedule,
    decide_series,
)

MD = "md"
PD = "pd"

SELF_CONSISTENT = "self-consistent"
COUNTERFACTUAL_DAILY = "counterfactual-daily"

TRACE_CSV_HEADER = ["participant_id", "day", "offered_price", "units_available", "units_sold"]

# cohort histogram: one bin per window 1..30, everything longer (incl.
# unbounded) pooled in the last bin
HISTOGRAM_TOP_BIN = 31


@dataclass(frozen=True)
class ParticipantTrace:
    """Per-day decision record for one participant, days 1..D."""

    participant_id: str
    offered_prices: tuple[int, ...]
    units_available: tuple[int, ...]
    units_sold: tuple[int, ...]

    def __post_init__(self) -> None:
        D = len(self.offered_prices)
        if D == 0:
            raise ValidationError(f"trace {self.participant_id!r} is empty")
        if len(self.units_available) != D or len(self.units_sold) != D:
            raise ValidationError(f"trace {self.participant_id!r} has ragged day series")
        for day, (price, avail, sold) in enumerate(
            zip(self.offered_prices, self.units_available, self.units_sold), start=1
        ):
            if price < 1:
                raise ValidationError(f"trace {self.participant_id!r} day {day}: price {price} < 1")
            if avail < 0:
                raise ValidationError(f"trace {self.participant_id!r} day {day}: negative availability")
            if not 0 <= sold <= avail:
                raise ValidationError(
                    f"trace {self.participant_id!r} day {day}: sold {sold} of {avail} available"
                )

    @property
    def horizon(self) -> int:
        return len(self.offered_prices)

    @property
    def sell_days(self) -> int:
        return sum(1 for n in self.units_sold if n > 0)

    def days_with_inventory(self) -> list[int]:
        return [d for d, n in enumerate(self.units_available, start=1) if n > 0]


def _check_predicted(trace: ParticipantTrace, predicted: Sequence[int]) -> None:
    if len(predicted) != trace.horizon:
        raise ValidationError(
            f"predicted series has {len(predicted)} days, trace has {trace.horizon}"
        )
    if any(p < 0 for p in predicted):
        raise ValidationError("predicted sales must be >= 0")


def mean_deviation(trace: ParticipantTrace, predicted: Sequence[int]) -> float:
    """Average absolute difference between predicted and actual sold
    proportions over days with inventory.

    Predicted proportions are capped at 1 (a model playing its own inventory
    can predict a sale larger than the participant's holdings), which keeps
    the score in [0, 1].
    """
    _check_predicted(trace, predicted)
    total = 0.0
    count = 0
    for avail, sold, pred in zip(trace.units_available, trace.units_sold, predicted):
        if avail <= 0:
            continue
        total += abs(min(pred / avail, 1.0) - sold / avail)
        count += 1
    if count == 0:
        raise UndefinedFitError(f"trace {trace.participant_id!r} has no days with inventory")
    return total / count


def proportional_deviation(trace: ParticipantTrace, predicted: Sequence[int]) -> float:
    """Summed absolute prediction error normalized by summed max(predicted,
    actual) sales over days with inventory; 0 is a perfect fit."""
    _check_predicted(trace, predicted)
    num = 0
    den = 0
    for avail, sold, pred in zip(trace.units_available, trace.units_sold, predicted):
        if avail <= 0:
            continue
        num += abs(pred - sold)
        den += max(pred, sold)
    if den == 0:
        raise UndefinedFitError(
            f"trace {trace.participant_id!r}: no predicted or actual sales, PD undefined"
        )
    return num / den


_METRICS = {MD: mean_deviation, PD: proportional_deviation}


@dataclass(frozen=True)
class FitResult:
    """Deviation score per candidate window plus the argmin window."""

    participant_id: str
    metric: str
    scores: dict[int | None, float]
    best_window: int | None
    sell_days: int
    mode: str = SELF_CONSISTENT

    @property
    def best_score(self) -> float:
        return self.scores[self.best_window]

    @property
    def unbounded_score(self) -> float:
        return self.scores[UNBOUNDED]

    @property
    def best_windowed_score(self) -> float:
        return min(v for k, v in self.scores.items() if k is not UNBOUNDED)

    def to_json(self) -> dict:
        return {
            "participant_id": self.participant_id,
            "metric": self.metric,
            "mode": self.mode,
            "scores": {window_key(w): s for w, s in self.scores.items()},
            "best_window": window_key(self.best_window),
            "sell_days": self.sell_days,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "FitResult":
        try:
            return cls(
                participant_id=doc["participant_id"],
                metric=doc["metric"],
                scores={parse_window_key(k): float(v) for k, v in doc["scores"].items()},
                best_window=parse_window_key(doc["best_window"]),
                sell_days=int(doc["sell_days"]),
                mode=doc.get("mode", SELF_CONSISTENT),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed fit document: {exc}") from exc


def window_key(window: int | None) -> str:
    return "unbounded" if window is UNBOUNDED else str(window)


def parse_window_key(key: str | int | None) -> int | None:
    if key is None or key == "unbounded":
        return UNBOUNDED
    return int(key)


def candidate_windows(horizon: int) -> list[int | None]:
    """All integer windows 1..D-1 plus the unbounded model, smallest first."""
    return [*range(1, horizon), UNBOUNDED]


class WindowFitter:
    """Precomputes per-window predictions for one scenario and fits traces.

    Fitting many participants who played the same scenario reuses the
    candidate series; each fit itself is a pure function of the trace.
    """

    def __init__(
        self,
        scenario: Scenario,
        dist: PriceDistribution | None = None,
        mode: str = SELF_CONSISTENT,
    ) -> None:
        if mode not in (SELF_CONSISTENT, COUNTERFACTUAL_DAILY):
            raise ValidationError(f"unknown prediction mode {mode!r}")
        self.scenario = scenario
        self.mode = mode
        self.schedule: CutoffSchedule = cutoff_schedule(
            dist or default_price_distribution(), max(scenario.horizon - 1, 0)
        )
        self.candidates = candidate_windows(scenario.horizon)
        self._plays: dict[int | None, PredictedPlay] = {
            w: decide_series(scenario, w, schedule=self.schedule) for w in self.candidates
        }

    def predicted_play(self, window: int | None) -> PredictedPlay:
        return self._plays[window]

    def _sell_signal(self, window: int | None) -> list[bool]:
        D = self.scenario.horizon
        signal = []
        for day in range(1, D + 1):
            d_rem = D - day
            w = d_rem if window is UNBOUNDED else min(d_rem, window)
            signal.append(self.scenario.price(day) >= self.schedule.cutoffs[w])
        return signal

    def predicted_sales(self, window: int | None, trace: ParticipantTrace | None = None) -> list[int]:
        """Predicted sale series for one candidate window.

        Self-consistent mode ignores the trace (the model manages its own
        inventory); counterfactual-daily mode re-anchors each day's
        prediction to the participant's recorded holdings.
        """
        if self.mode == SELF_CONSISTENT:
            return list(self._plays[window].units_sold)
        if trace is None:
            raise ValidationError("counterfactual-daily predictions need the trace")
        return [
            avail if fire else 0
            for avail, fire in zip(trace.units_available, self._sell_signal(window))
        ]

    def check_trace(self, trace: ParticipantTrace) -> None:
        if trace.horizon != self.scenario.horizon:
            raise ValidationError(
                f"trace {trace.participant_id!r} covers {trace.horizon} days, "
                f"scenario has {self.scenario.horizon}"
            )
        for day, (tp, sp) in enumerate(
            zip(trace.offered_prices, self.scenario.offered_prices), start=1
        ):
            if tp != sp:
                raise ValidationError(
                    f"trace {trace.participant_id!r} day {day}: "
                    f"price {tp} does not match scenario price {sp}"
                )

    def fit(self, trace: ParticipantTrace, metric: str = MD) -> FitResult:
        if metric not in _METRICS:
            raise ValidationError(f"unknown metric {metric!r}")
        self.check_trace(trace)
        score_fn = _METRICS[metric]
        scores: dict[int | None, float] = {}
        best: int | None = None
        best_score = float("inf")
        for w in self.candidates:
            s = score_fn(trace, self.predicted_sales(w, trace))
            scores[w] = s
            if s <= best_score:  # ties go to the later (larger) candidate
                best, best_score = w, s
        return FitResult(
            participant_id=trace.participant_id,
            metric=metric,
            scores=scores,
            best_window=best,
            sell_days=trace.sell_days,
            mode=self.mode,
        )


def fit_window(
    trace: ParticipantTrace,
    scenario: Scenario,
    metric: str = MD,
    dist: PriceDistribution | None = None,
    mode: str = SELF_CONSISTENT,
) -> FitResult:
    """Score every candidate window against one trace; see WindowFitter."""
    return WindowFitter(scenario, dist=dist, mode=mode).fit(trace, metric)


def fit_cohort(
    traces: Iterable[ParticipantTrace],
    scenario: Scenario,
    metric: str = MD,
    dist: PriceDistribution | None = None,
    mode: str = SELF_CONSISTENT,
) -> list[FitResult]:
    """Fit every participant against a shared scenario, in id order."""
    fitter = WindowFitter(scenario, dist=dist, mode=mode)
    ordered = sorted(traces, key=lambda t: t.participant_id)
    return [fitter.fit(t, metric) for t in ordered]


def histogram_bin(window: int | None) -> str:
    if window is UNBOUNDED or window >= HISTOGRAM_TOP_BIN:
        return f"{HISTOGRAM_TOP_BIN}+"
    return str(window)


def histogram_labels() -> list[str]:
    return [str(w) for w in range(1, HISTOGRAM_TOP_BIN)] + [f"{HISTOGRAM_TOP_BIN}+"]


def cohort_report(fits: Sequence[FitResult]) -> dict:
    """Aggregate per-participant fits: best-window histogram, deviation
    pairs ordered by number of sell days, and sell-day counts."""
    if not fits:
        raise ValidationError("cohort report needs at least one fit")
    metrics = {f.metric for f in fits}
    if len(metrics) > 1:
        raise ValidationError(f"cohort mixes metrics {sorted(metrics)}")
    labels = histogram_labels()
    counts = dict.fromkeys(labels, 0)
    for f in fits:
        counts[histogram_bin(f.best_window)] += 1
    ordered = sorted(fits, key=lambda f: (f.sell_days, f.participant_id))
    pairs = [
        {
            "participant_id": f.participant_id,
            "sell_days": f.sell_days,
            "unbounded": f.unbounded_score,
            "windowed": f.best_windowed_score,
            "best_window": window_key(f.best_window),
        }
        for f in ordered
    ]
    return {
        "metric": metrics.pop(),
        "participants": len(fits),
        "histogram": {"labels": labels, "counts": [counts[b] for b in labels]},
        "deviation_pairs": pairs,
        "sell_day_counts": [
            {"participant_id": f.participant_id, "sell_days": f.sell_days} for f in ordered
        ],
    }


def traces_to_csv(traces: Iterable[ParticipantTrace]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_CSV_HEADER)
    for trace in traces:
        for day in range(1, trace.horizon + 1):
            writer.writerow(
                [
                    trace.participant_id,
                    day,
                    trace.offered_prices[day - 1],
                    trace.units_available[day - 1],
                    trace.units_sold[day - 1],
                ]
            )
    return buf.getvalue()


def parse_traces_csv(text: str) -> list[ParticipantTrace]:
    """Parse the trace CSV; participants sorted by id, days must be
    consecutive from 1 with no gaps."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise ValidationError("trace CSV is empty")
    missing = [c for c in TRACE_CSV_HEADER if c not in reader.fieldnames]
    if missing:
        raise ValidationError(f"trace CSV missing columns: {', '.join(missing)}")
    rows: dict[str, list[tuple[int, int, int, int]]] = {}
    for lineno, row in enumerate(reader, start=2):
        try:
            pid = row["participant_id"]
            if pid is None or pid == "":
                raise ValueError("empty participant_id")
            rec = (
                int(row["day"]),
                int(row["offered_price"]),
                int(row["units_available"]),
                int(row["units_sold"]),
            )
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"trace CSV line {lineno}: {exc}") from exc
        rows.setdefault(pid, []).append(rec)
    traces = []
    for pid in sorted(rows):
        recs = sorted(rows[pid])
        days = [r[0] for r in recs]
        if days != list(range(1, len(days) + 1)):
            raise ValidationError(
                f"trace {pid!r}: days must be consecutive 1..D with no gaps, got {days[:5]}..."
            )
        traces.append(
            ParticipantTrace(
                participant_id=pid,
                offered_prices=tuple(r[1] for r in recs),
                units_available=tuple(r[2] for r in recs),
                units_sold=tuple(r[3] for r in recs),
            )
        )
    return traces


def read_traces_csv(path: str | Path) -> list[ParticipantTrace]:
    with open(path, encoding="utf-8") as f:
        return parse_traces_csv(f.read())


def write_traces_csv(path: str | Path, traces: Iterable[ParticipantTrace]) -> None:
    Path(path).write_text(traces_to_csv(traces), encoding="utf-8")
