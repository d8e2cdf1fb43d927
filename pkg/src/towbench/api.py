"""HTTP API over a loaded store snapshot.

The API adds no semantics of its own: every payload is reproducible from
the CLI's artifacts because both share one evaluation code path. Requests
are stateless over the immutable snapshot; the only mutable state is the
rule registry, whose updates are serialized behind a lock. All responses
carry the schema version; rule problems come back as structured
diagnostics with line/column positions.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field as dc_field

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .game import GameConfig
from .models import ModelBundle
from .query import Scope, evaluate_rule, tree_slice
from .rules import QueryRule, RuleError, SEVERITIES, parse_rule
from .store import SCHEMA_VERSION, NotFoundError, StoreError, TreeStore, catalog_dict


@dataclass
class RegisteredRule:
    rule_id: str
    name: str
    rule_class: str
    severity: str
    text: str
    rule: QueryRule


@dataclass
class ApiSession:
    """One loaded snapshot + bundle + rule registry."""

    store: TreeStore
    config: GameConfig
    bundle: ModelBundle | None = None
    rules: dict[str, RegisteredRule] = dc_field(default_factory=dict)
    _reports: dict = dc_field(default_factory=dict)
    _lock: threading.Lock = dc_field(default_factory=threading.Lock)
    _counter: int = 0

    def register(self, name, rule_class, severity, text, rule) -> RegisteredRule:
        with self._lock:
            self._counter += 1
            rule_id = f"r{self._counter}"
            registered = RegisteredRule(rule_id, name or rule_id, rule_class,
                                        severity, text, rule)
            self.rules[rule_id] = registered
            return registered

    def report_for(self, rule_id: str, episode_id: str, only_predicted: bool):
        registered = self.rules.get(rule_id)
        if registered is None:
            raise HTTPException(404, detail={"error": f"unknown rule {rule_id!r}"})
        key = (rule_id, episode_id, only_predicted)
        cached = self._reports.get(key)
        if cached is not None:
            return registered, cached
        try:
            report = evaluate_rule(
                registered.rule,
                self.store,
                Scope((episode_id,), only_model_predicted=only_predicted),
                rule_id=rule_id,
                severity=registered.severity,
            )[0]
        except NotFoundError as exc:
            raise HTTPException(404, detail={"error": str(exc)}) from exc
        except StoreError as exc:
            raise HTTPException(409, detail={"error": str(exc)}) from exc
        with self._lock:
            self._reports[key] = report
        return registered, report


class RulePayload(BaseModel):
    rule_class: str = Field(alias="class")
    text: str
    name: str | None = None
    severity: str = "sound"
    validate_only: bool = Field(default=False, alias="validateOnly")

    model_config = {"populate_by_name": True}


class EvaluatePayload(BaseModel):
    rule_id: str | None = Field(default=None, alias="ruleId")
    rule_class: str | None = Field(default=None, alias="class")
    text: str | None = None
    episode_id: str = Field(alias="episodeId")
    only_model_predicted: bool = Field(default=False, alias="onlyModelPredicted")
    page: int = 0
    page_size: int = Field(default=100, alias="pageSize")

    model_config = {"populate_by_name": True}


def _ok(payload: dict, status_code: int = 200) -> JSONResponse:
    payload["schemaVersion"] = SCHEMA_VERSION
    return JSONResponse(payload, status_code=status_code)


def create_app(session: ApiSession, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="tree-store workbench API")

    @app.exception_handler(HTTPException)
    async def _structured_errors(request, exc: HTTPException):
        detail = exc.detail if isinstance(exc.detail, dict) else {"error": exc.detail}
        detail["schemaVersion"] = SCHEMA_VERSION
        return JSONResponse(detail, status_code=exc.status_code)

    @app.get("/v1/schema")
    def schema():
        return _ok({"catalog": catalog_dict()})

    @app.get("/v1/episodes")
    def episodes():
        items = [
            {
                "episodeId": e.episode_id,
                "isWin": e.is_win,
                "waveCount": e.wave_count,
                "decisionPoints": e.decision_count,
                "configHash": e.config_hash,
            }
            for e in session.store.episodes
        ]
        return _ok({"episodes": items})

    @app.get("/v1/episodes/{episode_id}")
    def episode_summary(episode_id: str):
        try:
            return _ok(session.store.episode_summary(episode_id))
        except NotFoundError as exc:
            raise HTTPException(404, detail={"error": str(exc)}) from exc

    @app.get("/v1/episodes/{episode_id}/decisions")
    def decisions(episode_id: str):
        try:
            summary = session.store.episode_summary(episode_id)
        except NotFoundError as exc:
            raise HTTPException(404, detail={"error": str(exc)}) from exc
        return _ok({"episodeId": episode_id, "decisions": summary["decisions"]})

    @app.post("/v1/rules")
    def post_rule(payload: RulePayload):
        if payload.severity not in SEVERITIES:
            raise HTTPException(
                400,
                detail={"diagnostics": [
                    {"kind": "severity",
                     "message": f"severity must be one of {', '.join(SEVERITIES)}",
                     "line": 1, "col": 1}
                ]},
            )
        try:
            rule = parse_rule(payload.rule_class, payload.text)
        except RuleError as exc:
            raise HTTPException(
                400,
                detail={"diagnostics": [
                    {"kind": exc.kind, "message": exc.message,
                     "line": exc.line, "col": exc.col}
                ]},
            ) from exc
        if payload.validate_only:
            return _ok(
                {
                    "ruleId": None,
                    "class": payload.rule_class,
                    "pretty": rule.pretty(),
                    "diagnostics": [],
                }
            )
        registered = session.register(
            payload.name, payload.rule_class, payload.severity, payload.text, rule
        )
        return _ok(
            {
                "ruleId": registered.rule_id,
                "name": registered.name,
                "class": registered.rule_class,
                "severity": registered.severity,
                "pretty": rule.pretty(),
                "diagnostics": [],
            }
        )

    @app.post("/v1/evaluate")
    def evaluate(payload: EvaluatePayload):
        rule_id = payload.rule_id
        if rule_id is None:
            if payload.rule_class is None or payload.text is None:
                raise HTTPException(
                    400,
                    detail={"error": "provide ruleId or class + text"},
                )
            try:
                rule = parse_rule(payload.rule_class, payload.text)
            except RuleError as exc:
                raise HTTPException(
                    400,
                    detail={"diagnostics": [
                        {"kind": exc.kind, "message": exc.message,
                         "line": exc.line, "col": exc.col}
                    ]},
                ) from exc
            rule_id = session.register(
                None, payload.rule_class, "sound", payload.text, rule
            ).rule_id
        registered, report = session.report_for(
            rule_id, payload.episode_id, payload.only_model_predicted
        )
        decision_points = session.store.episodes[
            session.store.episode_index(payload.episode_id)
        ].decision_count
        start = payload.page * payload.page_size
        page = report.matches[start : start + payload.page_size]
        return _ok(
            {
                "ruleId": rule_id,
                "episodeId": payload.episode_id,
                "severity": registered.severity,
                "totalMatches": report.total_matches,
                "evaluationErrors": report.evaluation_errors,
                "totalRowsScanned": report.total_rows_scanned,
                "histogram": report.histogram(decision_points),
                "perDecisionCounts": {
                    str(k): v for k, v in sorted(report.per_decision_counts.items())
                },
                "page": payload.page,
                "pageSize": payload.page_size,
                "matches": [m.as_dict() for m in page],
            }
        )

    @app.get("/v1/episodes/{episode_id}/decisions/{decision_idx}/slice")
    def slice_endpoint(
        episode_id: str,
        decision_idx: int,
        ruleId: str = Query(...),
        onlyModelPredicted: bool = Query(default=False),
    ):
        registered, report = session.report_for(
            ruleId, episode_id, onlyModelPredicted
        )
        try:
            fragment = tree_slice(session.store, report, decision_idx)
        except KeyError as exc:
            raise HTTPException(404, detail={"error": str(exc)}) from exc
        return _ok({"ruleId": ruleId, "slice": fragment.as_dict()})

    @app.get("/v1/rules")
    def list_rules():
        return _ok(
            {
                "rules": [
                    {
                        "ruleId": r.rule_id,
                        "name": r.name,
                        "class": r.rule_class,
                        "severity": r.severity,
                        "text": r.text,
                    }
                    for r in session.rules.values()
                ]
            }
        )

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
