"""HTTP session engine for the daily sell/hold grid game.

Each session samples a hidden scenario server-side and walks a human player
through it one day at a time: the daily bulletin reports yesterday's
generation, stored units, profit so far, today's price and the chance of
each price appearing at least once before the end. A decision submission
records the sale, credits the proceeds and advances the day; the last day
completes the session and fits the player's time window to their trace.

Every session is an append-only JSONL event log on disk; live state is
produced by the same replay code that recovers state after a restart, so
the log is the single source of truth. Future prices are never exposed.
"""

from __future__ import annotations

import json
import secrets
import threading
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from .errors import SessionConflict, SessionNotFound, ValidationError
from .fitting import (
    MD,
    PD,
    ParticipantTrace,
    WindowFitter,
    traces_to_csv,
    window_key,
)
from .market import (
    GenerationDistribution,
    PriceDistribution,
    Scenario,
    at_least_once_probabilities,
    default_generation,
    generate_scenario,
    default_price_distribution,
)
from .models import UNBOUNDED, cutoff_schedule, decide_series

ACTIVE = "active"
COMPLETED = "completed"


def dollars(index_units: float) -> str:
    """Price-index units to a dollar string (one index unit = $0.10)."""
    return f"${index_units / 10:.2f}"


# ---------------------------------------------------------------------------
# Event log store
# ---------------------------------------------------------------------------


class SessionStore:
    """One append-only JSONL file per session under a single root."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, session_id: str) -> Path:
        if not session_id or any(c in session_id for c in "/\\."):
            raise SessionNotFound(session_id)
        return self.root / f"{session_id}.jsonl"

    def create(self, session_id: str, event: dict) -> None:
        path = self._path(session_id)
        if path.exists():
            raise SessionConflict(f"session {session_id} already exists")
        with open(path, "x", encoding="utf-8") as f:
            f.write(json.dumps(event, sort_keys=True) + "\n")
            f.flush()

    def append(self, session_id: str, event: dict) -> None:
        path = self._path(session_id)
        if not path.exists():
            raise SessionNotFound(session_id)
        with open(path, "a", encoding="utf-8") as f:
            f.write(json.dumps(event, sort_keys=True) + "\n")
            f.flush()

    def events(self, session_id: str) -> list[dict]:
        path = self._path(session_id)
        if not path.exists():
            raise SessionNotFound(session_id)
        with open(path, encoding="utf-8") as f:
            return [json.loads(line) for line in f if line.strip()]

    def session_ids(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.jsonl"))


# ---------------------------------------------------------------------------
# Session state (pure replay of the event log)
# ---------------------------------------------------------------------------


@dataclass
class SessionState:
    session_id: str
    scenario: Scenario
    price_probs: tuple[float, ...]
    current_day: int = 1
    units_sold: list[int] = field(default_factory=list)
    profit: int = 0
    status: str = ACTIVE

    @property
    def stored_units(self) -> int:
        gen = sum(self.scenario.generated_units[: min(self.current_day, self.scenario.horizon)])
        return self.scenario.initial_units + gen - sum(self.units_sold)

    def apply(self, event: dict) -> None:
        if event["type"] != "decision":
            raise ValidationError(f"unexpected event type {event['type']!r}")
        if self.status != ACTIVE:
            raise SessionConflict(f"session {self.session_id} is already completed")
        day = int(event["day"])
        units = int(event["units"])
        if day != self.current_day:
            raise SessionConflict(
                f"decision for day {day} conflicts with current day {self.current_day}"
            )
        if units < 0:
            raise SessionConflict("cannot sell a negative number of units")
        if units > self.stored_units:
            raise SessionConflict(
                f"don't try to sell more than you have: {units} requested, "
                f"{self.stored_units} stored"
            )
        self.units_sold.append(units)
        self.profit += units * self.scenario.price(day)
        if day == self.scenario.horizon:
            self.status = COMPLETED
        else:
            self.current_day += 1

    def trace(self) -> ParticipantTrace:
        """Recorded play so far, in the fitting ingestion schema."""
        days = len(self.units_sold)
        available = []
        inventory = self.scenario.initial_units
        for d in range(1, days + 1):
            inventory += self.scenario.generated(d)
            available.append(inventory)
            inventory -= self.units_sold[d - 1]
        return ParticipantTrace(
            participant_id=self.session_id,
            offered_prices=self.scenario.offered_prices[:days],
            units_available=tuple(available),
            units_sold=tuple(self.units_sold),
        )


def replay_events(events: list[dict]) -> SessionState:
    """Rebuild session state from its event log; the only constructor."""
    if not events or events[0].get("type") != "created":
        raise ValidationError("event log must start with a 'created' event")
    head = events[0]
    state = SessionState(
        session_id=head["session_id"],
        scenario=Scenario.from_json(head["scenario"]),
        price_probs=tuple(head["price_probs"]),
    )
    for event in events[1:]:
        state.apply(event)
    return state


# ---------------------------------------------------------------------------
# Game engine
# ---------------------------------------------------------------------------


class GameService:
    def __init__(self, store: SessionStore) -> None:
        self.store = store
        self._states: dict[str, SessionState] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def _lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def _state(self, session_id: str) -> SessionState:
        with self._registry_lock:
            state = self._states.get(session_id)
        if state is None:
            state = replay_events(self.store.events(session_id))
            with self._registry_lock:
                state = self._states.setdefault(session_id, state)
        return state

    def create_session(
        self,
        days: int = 68,
        seed: int | None = None,
        initial_units: int = 5,
        weekend_offset: float = 0.0,
        price_probs: list[float] | None = None,
        generation_probs: list[float] | None = None,
    ) -> SessionState:
        dist = PriceDistribution(price_probs) if price_probs else default_price_distribution()
        gen = (
            GenerationDistribution(generation_probs)
            if generation_probs
            else default_generation()
        )
        if seed is None:
            seed = secrets.randbelow(2**62)
        scenario = generate_scenario(
            dist,
            gen,
            horizon=days,
            seed=seed,
            weekend_offset=weekend_offset,
            initial_units=initial_units,
        )
        # nothing was generated before the game began: day 1 reports zero
        # units "generated yesterday" and the stored total starts at exactly
        # the initial inventory
        scenario = replace(
            scenario, generated_units=(0,) + scenario.generated_units[1:]
        )
        session_id = secrets.token_urlsafe(16)
        event = {
            "type": "created",
            "session_id": session_id,
            "created_at": datetime.now(timezone.utc).isoformat(),
            "params": {
                "days": days,
                "seed": seed,
                "initial_units": initial_units,
                "weekend_offset": weekend_offset,
            },
            "price_probs": list(dist.probs),
            "scenario": scenario.to_json(),
        }
        self.store.create(session_id, event)
        state = replay_events([event])
        with self._registry_lock:
            self._states[session_id] = state
        return state

    def submit_decision(self, session_id: str, units: int, day: int | None = None) -> SessionState:
        """Apply-or-reject a decision for the session's current day.

        `day`, when provided, must match the current day; clients retrying a
        submission send it so a duplicate is rejected instead of silently
        applying to the next day.
        """
        with self._lock(session_id):
            state = self._state(session_id)
            if state.status != ACTIVE:
                raise SessionConflict(f"session {session_id} is already completed")
            target_day = state.current_day if day is None else int(day)
            event = {
                "type": "decision",
                "day": target_day,
                "units": int(units),
                "price_index": state.scenario.price(target_day)
                if 1 <= target_day <= state.scenario.horizon
                else None,
                "submitted_at": datetime.now(timezone.utc).isoformat(),
            }
            # validate against a copy first so a rejected decision is never
            # persisted and the live state is untouched
            probe = replay_events(self.store.events(session_id))
            probe.apply(event)
            self.store.append(session_id, event)
            state.apply(event)
            return state

    def state_bulletin(self, session_id: str) -> dict:
        return self.bulletin(self._state(session_id))

    def replay_bulletin(self, session_id: str) -> dict:
        """Bulletin recomputed from the on-disk log, bypassing the cache."""
        return self.bulletin(replay_events(self.store.events(session_id)))

    def bulletin(self, state: SessionState) -> dict:
        scenario = state.scenario
        dist = PriceDistribution(state.price_probs)
        doc = {
            "session_id": state.session_id,
            "status": state.status,
            "day": state.current_day,
            "days_total": scenario.horizon,
            "profit_index": state.profit,
            "profit_dollars": dollars(state.profit),
            "stored_units": state.stored_units,
            "history": [
                {
                    "day": d,
                    "price_index": scenario.price(d),
                    "price_dollars": dollars(scenario.price(d)),
                    "generated": scenario.generated(d),
                    "units_sold": state.units_sold[d - 1],
                }
                for d in range(1, len(state.units_sold) + 1)
            ],
        }
        if state.status == ACTIVE:
            day = state.current_day
            days_remaining = scenario.horizon - day + 1  # today included
            chances = at_least_once_probabilities(dist, days_remaining)
            doc.update(
                {
                    "days_remaining": days_remaining,
                    "generated_yesterday": scenario.generated(day),
                    "day_kind": scenario.day_kinds[day - 1],
                    "todays_price_index": scenario.price(day),
                    "todays_price_dollars": dollars(scenario.price(day)),
                    "at_least_once": [
                        {
                            "price_index": level,
                            "price_dollars": dollars(level),
                            "probability": chances[level - 1],
                        }
                        for level in dist.levels
                    ],
                }
            )
        else:
            doc["days_remaining"] = 0
        return doc

    def report(self, session_id: str) -> dict:
        state = self._state(session_id)
        if state.status != COMPLETED:
            raise SessionConflict(f"session {session_id} is not completed yet")
        scenario = state.scenario
        dist = PriceDistribution(state.price_probs)
        trace = state.trace()
        fitter = WindowFitter(scenario, dist=dist)
        fits = {metric: fitter.fit(trace, metric) for metric in (MD, PD)}
        unbounded_play = decide_series(scenario, UNBOUNDED, schedule=fitter.schedule)
        hindsight = _hindsight_max_profit(scenario)
        return {
            "session_id": session_id,
            "status": state.status,
            "profit_index": state.profit,
            "profit_dollars": dollars(state.profit),
            "sell_days": trace.sell_days,
            "fits": {
                metric: {
                    "best_window": window_key(fit.best_window),
                    "best_windows": [
                        window_key(w)
                        for w, s in fit.scores.items()
                        if s == fit.best_score
                    ],
                    "score": fit.best_score,
                    "unbounded_score": fit.unbounded_score,
                    "scores": {window_key(w): s for w, s in fit.scores.items()},
                }
                for metric, fit in fits.items()
            },
            "unbounded_model": {
                "profit_index": unbounded_play.profit,
                "profit_dollars": dollars(unbounded_play.profit),
                "sell_days": unbounded_play.sell_days,
            },
            "hindsight": {
                "max_profit_index": hindsight,
                "max_profit_dollars": dollars(hindsight),
            },
        }

    def trace_csv(self, session_id: str) -> str:
        return traces_to_csv([self._state(session_id).trace()])


def _hindsight_max_profit(scenario: Scenario) -> int:
    """Profit with perfect foresight: each unit sells at the best price from
    the day it becomes available onward."""
    suffix_max: list[int] = [0] * (scenario.horizon + 1)
    best = 0
    for d in range(scenario.horizon, 0, -1):
        best = max(best, scenario.price(d))
        suffix_max[d] = best
    total = scenario.initial_units * suffix_max[1]
    for d in range(1, scenario.horizon + 1):
        total += scenario.generated(d) * suffix_max[d]
    return total


# ---------------------------------------------------------------------------
# HTTP layer
# ---------------------------------------------------------------------------


class CreateSessionRequest(BaseModel):
    days: int = 68
    seed: int | None = None
    initial_units: int = 5
    weekend_offset: float = 0.0
    price_probs: list[float] | None = None
    generation_probs: list[float] | None = None


class DecisionRequest(BaseModel):
    units: int
    day: int | None = None


def create_app(store_dir: str | Path | None = None) -> FastAPI:
    import os

    root = Path(store_dir or os.environ.get("GRIDGAME_STORE", "./gridgame-sessions"))
    service = GameService(SessionStore(root))
    app = FastAPI(title="gridgame", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.service = service

    @app.exception_handler(SessionNotFound)
    async def _not_found(_, exc: SessionNotFound):
        return JSONResponse(status_code=404, content={"detail": f"unknown session {exc}"})

    @app.exception_handler(SessionConflict)
    async def _conflict(_, exc: SessionConflict):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(ValidationError)
    async def _invalid(_, exc: ValidationError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.post("/sessions", status_code=201)
    def create_session(req: CreateSessionRequest):
        state = service.create_session(
            days=req.days,
            seed=req.seed,
            initial_units=req.initial_units,
            weekend_offset=req.weekend_offset,
            price_probs=req.price_probs,
            generation_probs=req.generation_probs,
        )
        return {"session_id": state.session_id, "state": service.bulletin(state)}

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        return service.state_bulletin(session_id)

    @app.get("/sessions/{session_id}/replay")
    def get_replayed_state(session_id: str):
        return service.replay_bulletin(session_id)

    @app.post("/sessions/{session_id}/decisions")
    def submit_decision(session_id: str, req: DecisionRequest):
        state = service.submit_decision(session_id, units=req.units, day=req.day)
        out = {"accepted": True, "state": service.bulletin(state)}
        if state.status == COMPLETED:
            out["report"] = service.report(session_id)
        return out

    @app.get("/sessions/{session_id}/report")
    def get_report(session_id: str):
        return service.report(session_id)

    @app.get("/sessions/{session_id}/trace.csv", response_class=PlainTextResponse)
    def get_trace(session_id: str):
        return PlainTextResponse(service.trace_csv(session_id), media_type="text/csv")

    @app.get("/cutoffs.csv", response_class=PlainTextResponse)
    def get_cutoffs(max_index: int = 67):
        schedule = cutoff_schedule(default_price_distribution(), max_index)
        return PlainTextResponse(schedule.to_csv(), media_type="text/csv")

    return app
