"""HTTP JSON API: routes, error docs, and parity with the CLI query."""

import json
import threading

import httpx
import pytest

from jitmf.cli import main
from jitmf.server import make_server
from jitmf.simdevice import SCENARIO_PRESETS, run_scenario


@pytest.fixture(scope="module")
def api(a_run, tmp_path_factory):
    """Server over a root holding one processed and one raw run."""
    root = a_run.parent
    run_scenario(SCENARIO_PRESETS["B"], seed=0, out_dir=root)  # never processed
    server = make_server(root, port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    yield base
    server.shutdown()
    thread.join(timeout=5)


def test_list_runs(api) -> None:
    r = httpx.get(f"{api}/runs")
    assert r.status_code == 200
    runs = {row["run_id"]: row for row in r.json()["runs"]}
    assert runs["A-s00000"]["processed"] is True
    assert runs["B-s00000"]["processed"] is False
    assert runs["A-s00000"]["scenario_id"] == "A"


def test_run_detail(api) -> None:
    r = httpx.get(f"{api}/runs/A-s00000")
    assert r.status_code == 200
    doc = r.json()
    assert doc["run_id"] == "A-s00000"
    assert doc["seed"] == 0
    assert doc["scenario"]["scenario_id"] == "A"
    assert doc["drivers"]


def test_events_endpoint_filters(api) -> None:
    r = httpx.get(f"{api}/runs/A-s00000/events", params={"source": "jitmf", "subject": "Alice"})
    assert r.status_code == 200
    events = r.json()["events"]
    assert events
    assert all(e["source"] == "jitmf" and e["subject"] == "Alice" for e in events)

    r = httpx.get(f"{api}/runs/A-s00000/events?keyword=Sending_Attack&keyword=nomatch")
    hits = r.json()["events"]
    assert len(hits) == 3
    assert all("Sending_Attack" in e["object"] for e in hits)

    r = httpx.get(f"{api}/runs/A-s00000/events", params={"limit": 5})
    assert len(r.json()["events"]) == 5


def test_events_baseline_model(api) -> None:
    r = httpx.get(
        f"{api}/runs/A-s00000/events", params={"model": "baseline", "keyword": "Sending_Attack"}
    )
    assert r.status_code == 200
    assert r.json()["events"] == []


def test_correlate_endpoint(api) -> None:
    r = httpx.post(
        f"{api}/runs/A-s00000/correlate",
        json={"seed": {"subject": "Alice"}, "mode": "subject"},
    )
    assert r.status_code == 200
    doc = r.json()
    assert doc["mode"] == "subject"
    assert all(e["subject"] == "Alice" for e in doc["events"])
    attack = [e for e in doc["events"] if "Sending_Attack" in e["object"]]
    assert len(attack) == 3


def test_correlate_empty_seed_rejected(api) -> None:
    r = httpx.post(f"{api}/runs/A-s00000/correlate", json={"seed": {}, "mode": "subject"})
    assert r.status_code == 400
    assert r.json()["error"]["code"] == "bad_request"

    r = httpx.post(
        f"{api}/runs/A-s00000/correlate",
        json={"seed": {"subject": "Alice"}, "mode": "telepathy"},
    )
    assert r.status_code == 400


def test_compare_endpoint(api) -> None:
    r = httpx.get(f"{api}/runs/A-s00000/compare", params={"sources": "both"})
    assert r.status_code == 200
    doc = r.json()
    assert doc["sources"]["jitmf"]["recall"] == 1.0
    assert doc["sources"]["jitmf"]["kendall_raw"] == 0
    assert doc["sources"]["baseline"]["recall"] == 0.0
    assert doc["sources"]["jitmf"]["pairs"]


def test_error_docs(api) -> None:
    r = httpx.get(f"{api}/runs/ghost-run")
    assert r.status_code == 404
    assert r.json()["error"]["code"] == "not_found"

    r = httpx.get(f"{api}/runs/B-s00000/events")  # simulated but never processed
    assert r.status_code == 404
    assert "process" in r.json()["error"]["message"]

    r = httpx.get(f"{api}/runs/A-s00000/events", params={"model": "psychic"})
    assert r.status_code == 400

    r = httpx.get(f"{api}/nowhere")
    assert r.status_code == 404


def test_cors_preflight(api) -> None:
    r = httpx.options(f"{api}/runs")
    assert r.status_code == 204
    assert r.headers["access-control-allow-origin"] == "*"


def test_api_matches_cli_query(api, a_run, capsys) -> None:
    """The events endpoint and the query command see the same records."""
    assert (
        main(["query", str(a_run), "--mode", "subject", "--subject", "Alice"]) == 0
    )
    cli_lines = [l for l in capsys.readouterr().out.splitlines() if l.strip()]
    cli_keys = {tuple(l.split("\t")[0:5]) for l in cli_lines}

    r = httpx.post(
        f"{api}/runs/A-s00000/correlate", json={"seed": {"subject": "Alice"}, "mode": "subject"}
    )
    api_keys = {
        (
            "%.6f" % e["time"],
            e["source"],
            e["event_type"],
            e["subject"],
            e["object"],
        )
        for e in r.json()["events"]
    }
    assert cli_keys == api_keys
