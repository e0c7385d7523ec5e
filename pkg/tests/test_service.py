import json

import pytest
from fastapi.testclient import TestClient

from gridgame import at_least_once_probabilities, parse_traces_csv, default_price_distribution
from gridgame.service import create_app, dollars, replay_events

PLAY_SEED = 424242  # fixed so two sessions can be compared path-for-path


@pytest.fixture()
def client(tmp_path):
    app = create_app(tmp_path / "store")
    with TestClient(app) as c:
        yield c


def new_session(client, **params):
    resp = client.post("/sessions", json=params)
    assert resp.status_code == 201, resp.text
    doc = resp.json()
    return doc["session_id"], doc["state"]


def submit(client, session_id, units, day=None, expect=200):
    body = {"units": units}
    if day is not None:
        body["day"] = day
    resp = client.post(f"/sessions/{session_id}/decisions", json=body)
    assert resp.status_code == expect, resp.text
    return resp.json()


def play_to_completion(client, session_id, state, choose_units):
    while state["status"] == "active":
        out = submit(client, session_id, choose_units(state), day=state["day"])
        state = out["state"]
        if "report" in out:
            return state, out["report"]
    raise AssertionError("session never completed")


class TestCreateSession:
    def test_day_one_bulletin(self, client):
        _, state = new_session(client, seed=PLAY_SEED)
        assert state["day"] == 1
        assert state["days_total"] == 68
        assert state["stored_units"] == 5
        assert state["generated_yesterday"] == 0
        assert state["profit_index"] == 0
        assert state["days_remaining"] == 68
        assert len(state["at_least_once"]) == 15

    def test_fixed_seed_reproduces_price_path(self, client):
        sid_a, state_a = new_session(client, seed=7, days=5)
        sid_b, state_b = new_session(client, seed=7, days=5)
        assert sid_a != sid_b
        prices_a, prices_b = [], []
        for sid, state, acc in ((sid_a, state_a, prices_a), (sid_b, state_b, prices_b)):
            while state["status"] == "active":
                acc.append(state["todays_price_index"])
                state = submit(client, sid, 0, day=state["day"])["state"]
        assert prices_a == prices_b

    def test_single_day_game(self, client):
        _, state = new_session(client, days=1, seed=1)
        assert state["day"] == 1
        assert state["days_remaining"] == 1
        probs = [row["probability"] for row in state["at_least_once"]]
        assert probs == pytest.approx(list(default_price_distribution().probs))

    def test_invalid_params_rejected(self, client):
        assert client.post("/sessions", json={"days": 0}).status_code == 422
        assert client.post("/sessions", json={"price_probs": [0.5, 0.6]}).status_code == 422


class TestDailyBulletin:
    def test_probability_table_counts_today(self, client):
        sid, state = new_session(client, seed=3, days=10)
        dist = default_price_distribution()
        while state["status"] == "active":
            day = state["day"]
            expected = at_least_once_probabilities(dist, 10 - day + 1)
            got = [row["probability"] for row in state["at_least_once"]]
            assert got == pytest.approx(expected)
            state = submit(client, sid, 0, day=day)["state"]

    def test_selling_everything_empties_storage(self, client):
        sid, state = new_session(client, seed=5, days=20)
        out = submit(client, sid, state["stored_units"], day=1)
        assert out["state"]["stored_units"] == out["state"]["generated_yesterday"]

    def test_history_only_covers_past_days(self, client):
        sid, state = new_session(client, seed=5, days=20)
        assert state["history"] == []
        state = submit(client, sid, 2, day=1)["state"]
        assert [h["day"] for h in state["history"]] == [1]
        assert state["history"][0]["units_sold"] == 2

    def test_dollar_strings(self, client):
        _, state = new_session(client, seed=5)
        assert state["todays_price_dollars"] == dollars(state["todays_price_index"])
        assert state["profit_dollars"] == "$0.00"

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/nope/state").status_code == 404
        assert client.post("/sessions/nope/decisions", json={"units": 0}).status_code == 404


class TestDecisions:
    def test_overselling_is_conflict_without_day_advance(self, client):
        sid, state = new_session(client, seed=9)
        stored = state["stored_units"]
        resp = client.post(f"/sessions/{sid}/decisions", json={"units": stored + 2})
        assert resp.status_code == 409
        assert "more than you have" in resp.json()["detail"]
        after = client.get(f"/sessions/{sid}/state").json()
        assert after["day"] == 1
        assert after["stored_units"] == stored

    def test_negative_units_rejected(self, client):
        sid, _ = new_session(client, seed=9)
        assert client.post(f"/sessions/{sid}/decisions", json={"units": -1}).status_code == 409

    def test_duplicate_day_submission_conflicts(self, client):
        sid, _ = new_session(client, seed=9)
        submit(client, sid, 0, day=1)
        submit(client, sid, 0, day=1, expect=409)  # stale retry, no double apply
        assert client.get(f"/sessions/{sid}/state").json()["day"] == 2

    def test_hold_everything_then_dump_on_last_day(self, client):
        sid, state = new_session(client, seed=11, days=15)
        while state["day"] < 15:
            state = submit(client, sid, 0, day=state["day"])["state"]
        final_price = state["todays_price_index"]
        stored = state["stored_units"]
        out = submit(client, sid, stored, day=15)
        assert out["state"]["status"] == "completed"
        assert out["state"]["profit_index"] == stored * final_price
        assert out["report"]["profit_index"] == stored * final_price

    def test_completed_session_rejects_decisions(self, client):
        sid, state = new_session(client, seed=11, days=1)
        submit(client, sid, 0, day=1)
        submit(client, sid, 0, expect=409)

    def test_concurrent_duplicate_submissions_never_double_count(self, client):
        import threading

        sid, state = new_session(client, seed=15, days=10)
        statuses = []

        def fire():
            resp = client.post(f"/sessions/{sid}/decisions", json={"units": 1, "day": 1})
            statuses.append(resp.status_code)

        threads = [threading.Thread(target=fire) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sorted(statuses) == [200, 409, 409, 409]
        after = client.get(f"/sessions/{sid}/state").json()
        assert after["day"] == 2
        assert after["profit_index"] == state["todays_price_index"]  # applied once


class TestReport:
    def test_report_requires_completion(self, client):
        sid, _ = new_session(client, seed=2)
        assert client.get(f"/sessions/{sid}/report").status_code == 409

    def test_obedient_window5_play(self, client):
        cutoffs_csv = client.get("/cutoffs.csv").text.splitlines()
        cutoffs = [int(row.split(",")[1]) for row in cutoffs_csv[1:]]
        sid, state = new_session(client, seed=PLAY_SEED)

        def strategy(state):
            w = min(state["days_total"] - state["day"], 5)
            sell = state["todays_price_index"] >= cutoffs[w]
            return state["stored_units"] if sell else 0

        state, report = play_to_completion(client, sid, state, strategy)
        assert report["fits"]["md"]["best_window"] == "5"
        assert report["fits"]["md"]["score"] == 0.0
        assert report["fits"]["pd"]["best_window"] == "5"
        assert report["profit_index"] == state["profit_index"]
        assert report["unbounded_model"]["profit_index"] > 0
        assert report["hindsight"]["max_profit_index"] >= report["profit_index"]

    def test_trace_csv_matches_fitting_schema(self, client):
        sid, state = new_session(client, seed=6, days=12)
        state, _ = play_to_completion(
            client, sid, state, lambda s: s["stored_units"] if s["day"] % 3 == 0 else 0
        )
        text = client.get(f"/sessions/{sid}/trace.csv").text
        traces = parse_traces_csv(text)
        assert len(traces) == 1
        assert traces[0].participant_id == sid
        assert traces[0].horizon == 12


class TestReplay:
    def test_replay_matches_live_state(self, client, tmp_path):
        sid, state = new_session(client, seed=8, days=10)
        for units in (0, 2, 0, 1):
            state = submit(client, sid, units, day=state["day"])["state"]
        live = client.get(f"/sessions/{sid}/state").json()
        replayed = client.get(f"/sessions/{sid}/replay").json()
        assert live == replayed

    def test_replay_reconstructs_completed_session(self, client, tmp_path):
        store = tmp_path / "store"
        sid, state = new_session(client, seed=13, days=8)
        state, report = play_to_completion(
            client, sid, state, lambda s: s["stored_units"] if s["day"] in (3, 8) else 0
        )
        trace_text = client.get(f"/sessions/{sid}/trace.csv").text

        events = [
            json.loads(line)
            for line in (store / f"{sid}.jsonl").read_text().splitlines()
        ]
        rebuilt = replay_events(events)
        assert rebuilt.status == "completed"
        assert rebuilt.profit == state["profit_index"]
        assert rebuilt.stored_units == state["stored_units"]
        from gridgame.fitting import traces_to_csv

        assert traces_to_csv([rebuilt.trace()]) == trace_text

    def test_inventory_conservation_every_transition(self, client):
        sid, state = new_session(client, seed=21, days=12)
        sold_total = 0
        gen_total = 0
        last_profit = 0
        while state["status"] == "active":
            gen_total += state["generated_yesterday"]
            assert state["stored_units"] == 5 + gen_total - sold_total
            assert state["profit_index"] >= last_profit
            last_profit = state["profit_index"]
            units = state["stored_units"] if state["day"] % 4 == 0 else 0
            sold_total += units
            state = submit(client, sid, units, day=state["day"])["state"]
        assert state["profit_index"] >= last_profit
