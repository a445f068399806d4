"""Read-mostly HTTP JSON API for the dashboard and scripts.

One corpus per process. Run results are cached by (config fingerprint, as_of,
filters) and every config write invalidates the cache. Config writes are
serialized and carry a version token (hash of the stored document): a PUT with
a stale token gets 409 so concurrent manager edits can never silently clobber
each other. Responses for run artifacts are rendered through the same JSON
renderer as the CLI, so the two byte-match for the same query.

No authentication in this version; deploy behind a proxy.
"""

from __future__ import annotations

import hashlib
import json
import threading
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, Query, Response
from fastapi.responses import JSONResponse

from . import config as config_mod
from .catalogue import load_catalogue
from .cli import parse_date
from .config import ConfigLayer, validate_layer
from .detectors import default_registry, run_all
from .ingest import Corpus
from .registry import Registry
from .report import health_score, issue_health, project_rates, render_json, trend_series


def _token(layer_dict: dict) -> str:
    blob = json.dumps(layer_dict, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class ApiSession:
    corpus: Corpus
    config_dir: str | None = None
    registry: Registry = field(default_factory=default_registry)
    runs: dict = field(default_factory=dict)  # run id -> (result, cfg)
    cache: dict = field(default_factory=dict)  # (fingerprint, as_of, filters) -> run id
    lock: threading.Lock = field(default_factory=threading.Lock)

    def effective(self, project=None, team=None, sprint=None, individual=None):
        layers = config_mod.context_layers(
            self.config_dir, self.registry,
            project=project, team=team, sprint=sprint, individual=individual,
        )
        return config_mod.resolve(layers, self.registry)

    def invalidate(self) -> None:
        self.cache.clear()
        self.runs.clear()


def _json_bytes(payload) -> Response:
    return Response(content=render_json(payload), media_type="application/json")


def _filtered(corpus: Corpus, project: str | None) -> Corpus:
    if not project:
        return corpus
    out = Corpus()
    for repo, proj, issue in corpus.all_issues():
        if proj == project:
            out.add(repo, issue)
    return out


def create_app(session: ApiSession) -> FastAPI:
    app = FastAPI(title="itelint", version="0.1.0")
    catalogue = load_catalogue(detector_ids=set(session.registry.ids()))

    @app.get("/detectors")
    def detectors():
        return _json_bytes(session.registry.describe())

    @app.get("/catalogue")
    def catalogue_index():
        return _json_bytes(
            [
                {"id": bp.id, "name": bp.name, "objective": bp.summary["objective"],
                 "detector_id": bp.detector_id}
                for bp in catalogue.query()
            ]
        )

    @app.get("/catalogue/{practice_id}")
    def catalogue_show(practice_id: str):
        bp = catalogue.get(practice_id)
        if bp is None:
            return JSONResponse({"error": f"no practice {practice_id}"}, status_code=404)
        return _json_bytes({**bp.to_dict(), "smells": catalogue.smell_links(bp.id)})

    @app.get("/config/{kind}/{scope}")
    def config_get(kind: str, scope: str):
        if kind not in session.registry.layer_kinds:
            return JSONResponse({"error": f"unknown layer kind {kind}"}, status_code=404)
        layer = config_mod.load_layer(session.config_dir, kind, scope)
        if layer is None:
            doc = ConfigLayer(kind=kind, scope=scope).to_dict()
            return _json_bytes({"layer": doc, "version": None})
        doc = layer.to_dict()
        return _json_bytes({"layer": doc, "version": _token(doc)})

    @app.put("/config/{kind}/{scope}")
    def config_put(kind: str, scope: str, body: dict):
        if session.config_dir is None:
            return JSONResponse({"error": "no config directory configured"}, status_code=404)
        if kind not in session.registry.layer_kinds:
            return JSONResponse({"error": f"unknown layer kind {kind}"}, status_code=404)
        layer = ConfigLayer(kind=kind, scope=scope,
                            settings=(body.get("layer") or {}).get("detectors") or {})
        problems = validate_layer(layer, session.registry)
        if problems:
            return JSONResponse(
                {"error": "invalid layer", "problems": [p.to_dict() for p in problems]},
                status_code=422,
            )
        with session.lock:
            current = config_mod.load_layer(session.config_dir, kind, scope)
            current_token = _token(current.to_dict()) if current else None
            sent_token = body.get("version")
            if current_token != sent_token:
                return JSONResponse(
                    {"error": "version conflict", "current_version": current_token},
                    status_code=409,
                )
            config_mod.save_layer(session.config_dir, layer)
            session.invalidate()
            doc = layer.to_dict()
            return _json_bytes({"layer": doc, "version": _token(doc)})

    @app.post("/runs")
    def runs_post(body: dict | None = None):
        body = body or {}
        filters = body.get("filters") or {}
        project = filters.get("project")
        as_of = parse_date(body["as_of"]) if body.get("as_of") else None
        cfg = session.effective(
            project=project,
            team=filters.get("team"),
            sprint=filters.get("sprint"),
            individual=filters.get("individual"),
        )
        cache_key = (cfg.fingerprint(), as_of, project)
        run_id = session.cache.get(cache_key)
        if run_id is None:
            corpus = _filtered(session.corpus, project)
            result = run_all(corpus, cfg, session.registry, as_of=as_of)
            run_id = uuid.uuid4().hex[:12]
            session.runs[run_id] = (result, cfg)
            session.cache[cache_key] = run_id
        return _json_bytes({"run_id": run_id, "status": "done"})

    @app.get("/runs/{run_id}/projects")
    def runs_projects(run_id: str):
        entry = session.runs.get(run_id)
        if entry is None:
            return JSONResponse({"error": "unknown run"}, status_code=404)
        result, _ = entry
        return _json_bytes(project_rates(result))

    @app.get("/runs/{run_id}/score")
    def runs_score(run_id: str):
        entry = session.runs.get(run_id)
        if entry is None:
            return JSONResponse({"error": "unknown run"}, status_code=404)
        result, cfg = entry
        return _json_bytes(health_score(result, cfg).to_dict())

    @app.get("/issues/{key}/health")
    def issues_health(key: str, as_of: str | None = None, team: str | None = None,
                      sprint: str | None = None, individual: str | None = None):
        found = None
        for repo, _, issue in session.corpus.all_issues():
            if issue.key == key:
                found = (repo, issue)
                break
        if found is None:
            return JSONResponse({"error": f"unknown issue {key}"}, status_code=404)
        repo, issue = found
        cfg = session.effective(project=issue.project, team=team,
                                sprint=sprint, individual=individual)
        health = issue_health(
            issue, cfg, session.registry,
            as_of=parse_date(as_of) if as_of else None,
            corpus=session.corpus, repo=repo,
        )
        return _json_bytes(health.to_dict())

    @app.get("/trends")
    def trends(
        start: str = Query(alias="from"),
        end: str = Query(alias="to"),
        step: int = 7,
        project: str | None = None,
    ):
        from datetime import timedelta

        begin = parse_date(start)
        finish = parse_date(end)
        if finish < begin or step < 1:
            return JSONResponse({"error": "bad range"}, status_code=422)
        dates = []
        cursor = begin
        while cursor <= finish:
            dates.append(cursor)
            cursor = cursor + timedelta(days=step)
        cfg = session.effective(project=project)
        corpus = _filtered(session.corpus, project)
        return _json_bytes(trend_series(corpus, cfg, session.registry, dates))

    return app
