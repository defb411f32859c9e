"""Read-side HTTP JSON API over processed runs.

Serves run listings, filtered event queries, seeded correlation, and scored
comparisons from the artifacts on disk. Responses carry permissive CORS
headers so a browser UI served from anywhere can consume them; an optional
static directory is served for everything outside /runs.
"""

from __future__ import annotations

import json
import mimetypes
from dataclasses import asdict
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .knowledge import CorrelationMode, EmptySeed, KnowledgeModel, SeedEvent
from .metrics import MatchingCriteria, TimelineComparison
from .report import (
    BASELINE_MODEL_FILE,
    MODEL_FILE,
    CasePreset,
    case_preset_for,
    compare_run,
)

API_VERSION = "1"


def _event_doc(event) -> dict:
    return {
        "id": event.id,
        "time": event.time,
        "event_type": event.event_type,
        "subject": event.subject,
        "object": event.object,
        "source": event.source,
        "granularity": event.granularity,
        "raw_ref": event.raw_ref,
        "synthetic": event.synthetic,
    }


def comparison_doc(comp: TimelineComparison) -> dict:
    return {
        "criteria": comp.criteria.kind,
        "generated": comp.generated_total,
        "truth": comp.truth_total,
        "matched": comp.matched,
        "precision": comp.precision,
        "recall": comp.recall,
        "jaccard": comp.jaccard,
        "kendall_raw": comp.kendall_raw,
        "kendall_norm": comp.kendall_normalized,
        "deviation": asdict(comp.deviation),
        "pairs": [
            {
                "truth_ts_ms": p.truth.ts_ms,
                "truth_object": p.truth.object,
                "generated_time": p.generated.time,
                "generated_event_type": p.generated.event_type,
                "deviation_s": p.deviation_s,
            }
            for p in comp.pairs
        ],
    }


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str) -> None:
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _not_found(message: str) -> ApiError:
    return ApiError(404, "not_found", message)


def _bad_request(message: str) -> ApiError:
    return ApiError(400, "bad_request", message)


class RunStore:
    """Filesystem view the handlers query; one per server."""

    def __init__(self, root: Path | str) -> None:
        self.root = Path(root)

    def list_runs(self) -> list[dict]:
        runs = []
        if not self.root.is_dir():
            return runs
        for manifest_path in sorted(self.root.glob("*/run.json")):
            try:
                manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError):
                continue
            scenario = manifest.get("scenario", {})
            runs.append(
                {
                    "run_id": manifest.get("run_id", manifest_path.parent.name),
                    "scenario_id": scenario.get("scenario_id", ""),
                    "app_model": scenario.get("app_model", ""),
                    "attack_kind": scenario.get("attack_kind", ""),
                    "seed": manifest.get("seed"),
                    "clock_end_ms": manifest.get("clock_end_ms", 0),
                    "processed": (manifest_path.parent / MODEL_FILE).exists(),
                }
            )
        return runs

    def run_dir(self, run_id: str) -> Path:
        if "/" in run_id or "\\" in run_id or run_id in ("", ".", ".."):
            raise _bad_request(f"invalid run id {run_id!r}")
        run_dir = self.root / run_id
        if not (run_dir / "run.json").exists():
            raise _not_found(f"no run named {run_id!r}")
        return run_dir

    def model(self, run_id: str, which: str) -> KnowledgeModel:
        if which not in ("jitmf", "baseline"):
            raise _bad_request(f"unknown model {which!r}")
        name = MODEL_FILE if which == "jitmf" else BASELINE_MODEL_FILE
        path = self.run_dir(run_id) / name
        if not path.exists():
            raise _not_found(f"run {run_id!r} has no {which} model; process it first")
        return KnowledgeModel.open(path)


def _single(params: dict[str, list[str]], key: str, default: str | None = None) -> str | None:
    values = params.get(key)
    return values[-1] if values else default


def _float_param(params, key) -> float | None:
    raw = _single(params, key)
    if raw is None:
        return None
    try:
        return float(raw)
    except ValueError:
        raise _bad_request(f"{key} must be a number, got {raw!r}")


def _int_param(params, key) -> int | None:
    raw = _single(params, key)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise _bad_request(f"{key} must be an integer, got {raw!r}")


class ApiHandler(BaseHTTPRequestHandler):
    store: RunStore
    static_dir: Path | None = None
    quiet: bool = True

    server_version = "jitmf-api/" + API_VERSION

    # -- plumbing ------------------------------------------------------------

    def log_message(self, fmt: str, *args) -> None:
        if not self.quiet:
            super().log_message(fmt, *args)

    def _send_json(self, payload, status: int = 200) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self._send_cors()
        self.end_headers()
        self.wfile.write(body)

    def _send_cors(self) -> None:
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")

    def _send_error_doc(self, err: ApiError) -> None:
        self._send_json({"error": {"code": err.code, "message": err.message}}, err.status)

    def do_OPTIONS(self) -> None:  # noqa: N802 (stdlib handler naming)
        self.send_response(204)
        self._send_cors()
        self.end_headers()

    # -- routing ----------------------------------------------------------------

    def do_GET(self) -> None:  # noqa: N802
        try:
            self._route("GET")
        except ApiError as err:
            self._send_error_doc(err)
        except BrokenPipeError:
            pass

    def do_POST(self) -> None:  # noqa: N802
        try:
            self._route("POST")
        except ApiError as err:
            self._send_error_doc(err)
        except BrokenPipeError:
            pass

    def _route(self, method: str) -> None:
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        params = parse_qs(url.query)

        if parts[:1] == ["runs"]:
            if method == "GET" and len(parts) == 1:
                return self._send_json({"runs": self.store.list_runs()})
            if len(parts) == 2 and method == "GET":
                return self._get_run(parts[1])
            if len(parts) == 3:
                run_id, leaf = parts[1], parts[2]
                if method == "GET" and leaf == "events":
                    return self._get_events(run_id, params)
                if method == "GET" and leaf == "compare":
                    return self._get_compare(run_id, params)
                if method == "POST" and leaf == "correlate":
                    return self._post_correlate(run_id)
            raise _not_found(f"no route for {method} {url.path}")

        if method == "GET" and self.static_dir is not None:
            return self._send_static(url.path)
        raise _not_found(f"no route for {method} {url.path}")

    # -- endpoints ------------------------------------------------------------------

    def _get_run(self, run_id: str) -> None:
        run_dir = self.store.run_dir(run_id)
        manifest = json.loads((run_dir / "run.json").read_text(encoding="utf-8"))
        manifest["processed"] = (run_dir / MODEL_FILE).exists()
        self._send_json(manifest)

    def _get_events(self, run_id: str, params) -> None:
        keywords = params.get("keyword", [])
        with self.store.model(run_id, _single(params, "model", "jitmf")) as model:
            events = model.events(
                subject=_single(params, "subject"),
                keywords=keywords or None,
                event_type=_single(params, "event_type"),
                source=_single(params, "source"),
                granularity=_single(params, "granularity"),
                since=_float_param(params, "since"),
                until=_float_param(params, "until"),
                limit=_int_param(params, "limit"),
            )
            payload = {
                "run_id": model.run_id,
                "clock_end_ms": model.clock_end_ms,
                "count": len(events),
                "events": [_event_doc(e) for e in events],
            }
        self._send_json(payload)

    def _post_correlate(self, run_id: str) -> None:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b"{}"
        try:
            doc = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            raise _bad_request("body must be a JSON object")
        seed_doc = doc.get("seed") or {}
        try:
            seed = SeedEvent(
                subject=seed_doc.get("subject", ""),
                keywords=tuple(seed_doc.get("keywords", ())),
                event_type=seed_doc.get("event_type", ""),
            )
            mode = CorrelationMode(doc.get("mode", "subject"))
        except EmptySeed as exc:
            raise _bad_request(str(exc))
        except ValueError as exc:
            raise _bad_request(str(exc))

        with self.store.model(run_id, doc.get("model", "jitmf")) as model:
            try:
                events = model.correlate(seed, mode)
            except ValueError as exc:
                raise _bad_request(str(exc))
            payload = {
                "run_id": model.run_id,
                "mode": mode.value,
                "seed": {
                    "subject": seed.subject,
                    "keywords": list(seed.keywords),
                    "event_type": seed.event_type,
                },
                "count": len(events),
                "events": [_event_doc(e) for e in events],
            }
        self._send_json(payload)

    def _get_compare(self, run_id: str, params) -> None:
        run_dir = self.store.run_dir(run_id)
        sources = _single(params, "sources", "both")
        mode = _single(params, "mode")
        criteria_kind = _single(params, "criteria")
        preset = case_preset_for(run_dir)
        if criteria_kind:
            try:
                preset = CasePreset(preset.seed, preset.mode, MatchingCriteria(criteria_kind))
            except ValueError as exc:
                raise _bad_request(str(exc))
        for which in ("jitmf", "baseline") if sources == "both" else (sources,):
            self.store.model(run_id, which).close()
        try:
            comps = compare_run(run_dir, sources=sources, mode=mode, preset=preset)
        except ValueError as exc:
            raise _bad_request(str(exc))
        self._send_json(
            {
                "run_id": run_id,
                "mode": (mode or preset.mode.value),
                "criteria": preset.criteria.kind,
                "sources": {label: comparison_doc(comp) for label, comp in comps.items()},
            }
        )

    # -- static UI -------------------------------------------------------------------

    def _send_static(self, url_path: str) -> None:
        assert self.static_dir is not None
        rel = url_path.lstrip("/") or "index.html"
        target = (self.static_dir / rel).resolve()
        if not str(target).startswith(str(self.static_dir.resolve())) or not target.is_file():
            raise _not_found(f"no static file {url_path!r}")
        body = target.read_bytes()
        ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self._send_cors()
        self.end_headers()
        self.wfile.write(body)


def make_server(
    root: Path | str, *, host: str = "127.0.0.1", port: int = 8787, static_dir: Path | str | None = None
) -> ThreadingHTTPServer:
    """Build (but do not start) the API server; port 0 picks a free port."""
    handler = type(
        "BoundApiHandler",
        (ApiHandler,),
        {
            "store": RunStore(root),
            "static_dir": Path(static_dir) if static_dir else None,
        },
    )
    return ThreadingHTTPServer((host, port), handler)


def serve(root: Path | str, *, host: str = "127.0.0.1", port: int = 8787, static_dir=None) -> None:
    server = make_server(root, host=host, port=port, static_dir=static_dir)
    host, bound_port = server.server_address[:2]
    print(f"serving runs from {root} at http://{host}:{bound_port}/")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
