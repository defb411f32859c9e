#!/usr/bin/env python3
"""Record the explorer's bundled demo dataset from a real run.

Simulates the A preset at seed 0, processes it, then captures the HTTP API
responses and the matching CLI query output that the frontend's offline
fixture client and its parity tests replay. Output is deterministic, so the
checked-in fixture can be regenerated and diffed.
"""

from __future__ import annotations

import json
import subprocess
import sys
import tempfile
import threading
import urllib.request
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from jitmf.report import run_pipeline
from jitmf.server import make_server
from jitmf.simdevice.scenario import SCENARIO_PRESETS, run_scenario

FIXTURE_PATH = Path(__file__).resolve().parent.parent / "frontend" / "fixtures" / "demo.json"

# (mode, seed fields, query CLI flags); the explorer's demo seeds.
DEMO_QUERIES = [
    ("subject", {"subject": "Alice", "keywords": [], "event_type": ""},
     ["--mode", "subject", "--subject", "Alice"]),
    ("object", {"subject": "", "keywords": ["Sending_Attack"], "event_type": ""},
     ["--mode", "object", "--keyword", "Sending_Attack"]),
    ("event_type", {"subject": "", "keywords": [], "event_type": "message_sent"},
     ["--mode", "event_type", "--event-type", "message_sent"]),
    # the pivot target exercised by the history test
    ("object", {"subject": "", "keywords": ["Sending_Attack_1"], "event_type": ""},
     ["--mode", "object", "--keyword", "Sending_Attack_1"]),
]


def _get(base: str, path: str) -> dict:
    with urllib.request.urlopen(base + path) as resp:
        return json.loads(resp.read())


def _post(base: str, path: str, doc: dict) -> dict:
    req = urllib.request.Request(
        base + path,
        data=json.dumps(doc).encode("utf-8"),
        headers={"Content-Type": "application/json"},
        method="POST",
    )
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read())


def main() -> int:
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        artifacts = run_scenario(SCENARIO_PRESETS["A"], seed=0, out_dir=root)
        run_pipeline(artifacts.run_dir)
        run_id = artifacts.run_dir.name

        server = make_server(root, port=0)
        threading.Thread(target=server.serve_forever, daemon=True).start()
        base = "http://127.0.0.1:%d" % server.server_address[1]

        correlates = []
        cli_queries = []
        for mode, seed, flags in DEMO_QUERIES:
            response = _post(
                base, f"/runs/{run_id}/correlate", {"seed": seed, "mode": mode, "model": "jitmf"}
            )
            correlates.append(
                {"request": {"model": "jitmf", "mode": mode, "seed": seed}, "response": response}
            )
            proc = subprocess.run(
                [sys.executable, "-m", "jitmf.cli", "query", str(artifacts.run_dir), *flags],
                capture_output=True,
                text=True,
                check=True,
            )
            cli_queries.append({"mode": mode, "seed": seed, "tsv": proc.stdout})

        fixture = {
            "run_id": run_id,
            "runs": _get(base, "/runs"),
            "run_detail": _get(base, f"/runs/{run_id}"),
            "events_jitmf": _get(base, f"/runs/{run_id}/events"),
            "events_baseline": _get(base, f"/runs/{run_id}/events?model=baseline"),
            "correlates": correlates,
            "compare": _get(base, f"/runs/{run_id}/compare"),
            "cli_queries": cli_queries,
        }
        server.shutdown()

    FIXTURE_PATH.parent.mkdir(parents=True, exist_ok=True)
    FIXTURE_PATH.write_text(json.dumps(fixture, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {FIXTURE_PATH}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
