"""JSON-over-HTTP service exposing a live scenario to the analyst console.

One writer per hosted scenario: tick commits serialize through a lock and
carry an optimistic-concurrency precondition (the batch names the tick it
expects to commit; a mismatch is a 409).  Reads are pure functions of the
last committed state.  Payloads are JSON with a schema version field.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any, Mapping

import numpy as np
from fastapi import Body, FastAPI, HTTPException
from fastapi.responses import FileResponse, JSONResponse

from .edges import posterior_density_curve
from .engine import (
    Intervention,
    ScenarioState,
    TickReport,
    batches_from_records,
    canonical_json,
    commit_tick,
    new_scenario_state,
    snapshot_dict,
    state_from_snapshot,
    what_if,
)
from .scenario import SchemaError

__all__ = ["ScenarioHost", "create_app"]

API_VERSION = 1


class ScenarioHost:
    """Serialized access to one scenario: concurrent reads, single writer."""

    def __init__(self, state: ScenarioState, event_log_path: str | Path | None = None,
                 workers: int = 1):
        self._state = state
        self._lock = threading.Lock()
        self._reports: list[TickReport] = list(state.event_log)
        self._event_log_path = Path(event_log_path) if event_log_path else None
        self._workers = workers

    @property
    def state(self) -> ScenarioState:
        return self._state

    @property
    def reports(self) -> list[TickReport]:
        return list(self._reports)

    def commit(self, batch) -> TickReport:
        with self._lock:
            if batch.tick != self._state.tick + 1:
                raise TickPrecondition(
                    f"expected tick {self._state.tick + 1}, batch carries {batch.tick}"
                )
            new_state, report = commit_tick(self._state, batch, workers=self._workers)
            self._state = new_state
            self._reports.append(report)
            if self._event_log_path:
                with open(self._event_log_path, "a", encoding="utf-8") as fh:
                    fh.write(canonical_json(report.to_json_dict()) + "\n")
            return report

    def load_snapshot(self, doc: Mapping[str, Any]) -> None:
        state = state_from_snapshot(doc)
        with self._lock:
            self._state = state
            self._reports = []


class TickPrecondition(Exception):
    pass


def _graph_payload(state: ScenarioState) -> dict:
    config = state.config
    entities = []
    for eid, rec in sorted(state.graph.entities.items()):
        if not rec.present:
            continue
        belief = state.entity_beliefs[eid]
        pi = belief.marginal()
        entities.append(
            {
                "id": eid,
                "entered": rec.entered,
                "pi": pi.tolist(),
                "top_state": config.space.states[int(np.argmax(pi))],
            }
        )
    edges = []
    for pair, rec in sorted(state.graph.live_edges().items()):
        b = rec.belief
        edges.append(
            {
                "pair": list(pair),
                "origin": rec.origin,
                "created": rec.created,
                "alpha": b.alpha,
                "beta": b.beta,
                "mean": (b.mean if b.proper else None),
            }
        )
    cells = []
    for cid, cell in sorted(state.graph.cells.items()):
        cells.append(
            {
                "id": cid,
                "members": sorted(cell.members),
                "ideal_size": cell.ideal_size,
                "threshold": cell.threshold,
                "connectivity_broken": cell.connectivity_broken,
            }
        )
    return {
        "version": API_VERSION,
        "tick": state.tick,
        "entities": entities,
        "edges": edges,
        "cells": cells,
    }


def create_app(
    host: ScenarioHost,
    console_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="cellwatch", version=str(API_VERSION))
    state_names = list(host.state.config.space.states)

    @app.get("/api/meta")
    def meta():
        state = host.state
        return {
            "version": API_VERSION,
            "name": state.config.name,
            "tick": state.tick,
            "states": state_names,
            "tasks": list(state.config.task_names),
            "channels": [c.channel_id for c in state.config.channels],
            "cells": sorted(state.graph.cells),
            "cum_log_marginal": state.cum_log_marginal,
        }

    @app.get("/api/graph")
    def graph():
        return _graph_payload(host.state)

    @app.get("/api/entities/{entity_id}/belief")
    def entity_belief(entity_id: str):
        state = host.state
        belief = state.entity_beliefs.get(entity_id)
        if belief is None:
            raise HTTPException(404, f"unknown entity {entity_id!r}")
        return {
            "version": API_VERSION,
            "id": entity_id,
            "tick": belief.tick,
            "states": state_names,
            "pi": belief.marginal().tolist(),
            "duration": {
                state_names[i]: belief.duration_marginal(i).tolist()
                for i in range(len(state_names))
            },
        }

    @app.get("/api/edges/{a}/{b}/belief")
    def edge_belief(a: str, b: str, points: int = 200):
        state = host.state
        try:
            rec = state.graph.edge(a, b)
        except ValueError as exc:
            raise HTTPException(422, str(exc))
        if rec is None or not rec.live:
            raise HTTPException(404, f"no live edge between {a!r} and {b!r}")
        belief = rec.belief
        payload = {
            "version": API_VERSION,
            "pair": list(rec.pair),
            "origin": rec.origin,
            "alpha": belief.alpha,
            "beta": belief.beta,
            "proper": belief.proper,
            "mean": belief.mean if belief.proper else None,
            "density": None,
        }
        if belief.proper:
            hi = max(1.0, belief.mean + 4 * belief.variance**0.5)
            # exclude zero: the density is unbounded there when alpha < 1
            grid = np.linspace(0.0, hi, max(2, points) + 1)[1:]
            payload["density"] = {
                "x": grid.tolist(),
                "y": posterior_density_curve(belief, grid).tolist(),
            }
        return payload

    @app.get("/api/cells/{cell_id}/indicators")
    def cell_indicators(cell_id: str):
        state = host.state
        if cell_id not in state.graph.cells:
            raise HTTPException(404, f"unknown cell {cell_id!r}")
        series = []
        for report in host.reports:
            for ind in report.indicators:
                if ind.cell_id == cell_id:
                    series.append(
                        {"tick": ind.tick, "m": list(ind.measures),
                         "phi": list(ind.indicators)}
                    )
        return {
            "version": API_VERSION,
            "cell": cell_id,
            "threshold_default": 0.15,
            "series": series,
        }

    @app.post("/api/ticks")
    def post_tick(payload: dict = Body(...)):
        if "tick" not in payload:
            raise HTTPException(422, "payload needs a 'tick' field")
        tick = payload["tick"]
        records = payload.get("records", [])
        for rec in records:
            rec.setdefault("tick", tick)
        try:
            batches = batches_from_records(records, host.state.config)
        except (KeyError, ValueError) as exc:
            raise HTTPException(422, f"bad tick records: {exc}")
        if len(batches) > 1 or (batches and batches[0].tick != tick):
            raise HTTPException(422, "records must all belong to the posted tick")
        batch = batches[0] if batches else None
        if batch is None:
            from .engine import TickBatch

            batch = TickBatch(tick=tick)
        try:
            report = host.commit(batch)
        except TickPrecondition as exc:
            raise HTTPException(409, str(exc))
        except (KeyError, ValueError) as exc:
            raise HTTPException(422, f"commit rejected: {exc}")
        return JSONResponse(
            {"version": API_VERSION, "committed": report.to_json_dict()}
        )

    @app.post("/api/what-if")
    def post_what_if(payload: dict = Body(...)):
        try:
            intervention = Intervention(
                kind=payload.get("kind", ""),
                cell_id=payload.get("cell_id"),
                member=payload.get("member"),
                pair=tuple(payload["pair"]) if payload.get("pair") else None,
                alpha=payload.get("alpha"),
                beta=payload.get("beta"),
                states=tuple(payload["states"]) if payload.get("states") else None,
                value=payload.get("value"),
            )
            result = what_if(host.state, intervention)
        except (KeyError, ValueError) as exc:
            raise HTTPException(422, f"what-if rejected: {exc}")
        return {"version": API_VERSION, **result.to_json_dict()}

    @app.get("/api/snapshot")
    def get_snapshot():
        return JSONResponse(snapshot_dict(host.state))

    @app.post("/api/snapshot")
    def load_snapshot(payload: dict = Body(...)):
        try:
            host.load_snapshot(payload)
        except (KeyError, ValueError, SchemaError) as exc:
            raise HTTPException(422, f"bad snapshot: {exc}")
        return {"version": API_VERSION, "tick": host.state.tick}

    if console_dir is not None:
        console_path = Path(console_dir)

        @app.get("/")
        def console_index():
            index = console_path / "index.html"
            if not index.exists():
                raise HTTPException(404, "console not built")
            return FileResponse(index)

        @app.get("/console/{asset_path:path}")
        def console_asset(asset_path: str):
            target = (console_path / asset_path).resolve()
            if not str(target).startswith(str(console_path.resolve())) or not target.is_file():
                raise HTTPException(404, "no such asset")
            return FileResponse(target)

    return app
