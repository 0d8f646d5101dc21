"""Tick orchestration: route one tick's data to every filter and commit atomically.

Each committed tick runs a fixed phase order: admit entrants, update every
pair's rate belief (collecting one-step-ahead forecasts into the running log
marginal likelihood), advance every entity's state filter, advance each
cell's collective filter on the union of its members' signals, recompute the
indicator reports, retire leavers, and append the tick report to the event
log.  Any failure aborts the whole tick with the previous state untouched.

Per-edge and per-entity updates are independent given their own data, so
those phases may fan out across worker threads; results are folded back in
canonical order, which keeps committed states bit-identical regardless of
scheduling.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from .edges import (
    EdgeBelief,
    ObservationVector,
    evolve_prior,
    posterior_update,
    predictive_channel_scores,
    scale_raw,
)
from .indicators import IndicatorReport, cell_size_integrity, \
    collective_progress, individual_threat, pairwise_cohesion
from .network import (
    Cell,
    EdgeRecord,
    EntityRecord,
    PopulationGraph,
    add_edge,
    apply_population_delta,
    canonical_pair,
    cell_density,
    connected,
)
from .scenario import EMPIRICAL, ScenarioConfig
from .states import SignalVector, StateBelief, filter_tick
from . import __version__ as _pkg_version

__all__ = [
    "TickBatch",
    "EdgeEvent",
    "TickReport",
    "ScenarioState",
    "Intervention",
    "WhatIfResult",
    "new_scenario_state",
    "commit_tick",
    "joint_log_marginal_likelihood",
    "recompute_log_marginal",
    "compute_indicator_reports",
    "what_if",
    "batches_from_records",
    "records_from_csv",
    "records_from_jsonl",
    "canonical_json",
    "snapshot_dict",
    "state_from_snapshot",
]


def canonical_json(obj: Any) -> str:
    """Deterministic JSON text: sorted keys, no whitespace, round-trip floats."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


@dataclass(frozen=True)
class EdgeEvent:
    """Explicit edge creation scheduled within a tick batch."""

    pair: tuple[str, str]
    origin: str = "observed-communication"
    prior: tuple[float, float] | str | None = None

    def __init__(self, pair, origin="observed-communication", prior=None):
        object.__setattr__(self, "pair", canonical_pair(*pair))
        object.__setattr__(self, "origin", str(origin))
        if prior is not None and prior != EMPIRICAL:
            prior = (float(prior[0]), float(prior[1]))
        object.__setattr__(self, "prior", prior)


@dataclass(frozen=True)
class TickBatch:
    """Everything observed in one tick."""

    tick: int
    signals: Mapping[str, SignalVector] = field(default_factory=dict)
    observations: tuple[ObservationVector, ...] = ()
    additions: tuple[tuple[str, Mapping[str, float] | None], ...] = ()
    removals: tuple[str, ...] = ()
    edge_events: tuple[EdgeEvent, ...] = ()

    def __init__(self, tick, signals=None, observations=(), additions=(),
                 removals=(), edge_events=()):
        object.__setattr__(self, "tick", int(tick))
        object.__setattr__(self, "signals", dict(signals or {}))
        object.__setattr__(self, "observations", tuple(observations))
        norm_adds = []
        for item in additions:
            if isinstance(item, str):
                norm_adds.append((item, None))
            else:
                eid, prior = item
                norm_adds.append((str(eid), dict(prior) if prior else None))
        object.__setattr__(self, "additions", tuple(norm_adds))
        object.__setattr__(self, "removals", tuple(str(r) for r in removals))
        object.__setattr__(self, "edge_events", tuple(edge_events))
        seen = set()
        for obs in self.observations:
            key = obs.pair
            if key in seen:
                raise ValueError(f"duplicate observation for pair {key} in one tick")
            seen.add(key)


@dataclass(frozen=True)
class TickReport:
    """Committed record of one tick; the event log is a sequence of these."""

    tick: int
    edges: Mapping[str, dict]
    entities: Mapping[str, dict]
    cells: Mapping[str, dict]
    indicators: tuple[IndicatorReport, ...]
    added: tuple[str, ...]
    removed: tuple[str, ...]
    created_edges: tuple[str, ...]
    log_marginal_increment: float
    cum_log_marginal: float

    def to_json_dict(self) -> dict:
        return {
            "tick": self.tick,
            "edges": {k: dict(v) for k, v in sorted(self.edges.items())},
            "entities": {k: dict(v) for k, v in sorted(self.entities.items())},
            "cells": {k: dict(v) for k, v in sorted(self.cells.items())},
            "indicators": [r.to_json_dict() for r in self.indicators],
            "added": list(self.added),
            "removed": list(self.removed),
            "created_edges": list(self.created_edges),
            "log_marginal_increment": self.log_marginal_increment,
            "cum_log_marginal": self.cum_log_marginal,
        }


@dataclass(frozen=True)
class ScenarioState:
    """Full committed state of one running scenario."""

    config: ScenarioConfig
    graph: PopulationGraph
    entity_beliefs: Mapping[str, StateBelief]
    cell_beliefs: Mapping[str, StateBelief]
    tick: int
    cum_log_marginal: float
    event_log: tuple[TickReport, ...] = ()


def _edge_key(pair: tuple[str, str]) -> str:
    return f"{pair[0]}|{pair[1]}"


def new_scenario_state(config: ScenarioConfig) -> ScenarioState:
    """Tick-zero state: initial population, configured ties, prior beliefs."""
    graph = PopulationGraph()
    graph = apply_population_delta(
        graph, additions=[e.entity_id for e in config.entities], tick=0
    )
    for spec in config.initial_edges:
        belief = config.new_edge_belief(spec.pair, spec.origin, spec.prior)
        graph = add_edge(graph, spec.pair, spec.origin, tick=0, belief=belief)

    entity_beliefs = {
        e.entity_id: config.belief_from_prior(e.prior, tick=0) for e in config.entities
    }

    cell_beliefs: dict[str, StateBelief] = {}
    for cell_cfg in config.cells:
        # designation is the analyst's call: a cell whose members are not yet
        # connected is admitted flagged, not rejected
        cell = Cell(
            cell_id=cell_cfg.cell_id,
            members=cell_cfg.members,
            ideal_size=cell_cfg.ideal_size,
            threshold=cell_cfg.threshold,
            individual_threat_states=config.state_indices(cell_cfg.individual_threat_states),
            cell_threat_states=config.state_indices(cell_cfg.cell_threat_states),
            connectivity_broken=not connected(graph, cell_cfg.members),
        )
        graph = graph.with_cell(cell)
        if cell_cfg.prior is not None:
            cell_beliefs[cell_cfg.cell_id] = config.belief_from_prior(cell_cfg.prior, tick=0)
        else:
            # default: the member prior with the largest individual-threat mass
            idx = config.state_indices(cell_cfg.individual_threat_states)
            best = max(
                sorted(cell_cfg.members),
                key=lambda p: sum(entity_beliefs[p].marginal()[i] for i in idx),
            )
            cell_beliefs[cell_cfg.cell_id] = entity_beliefs[best]

    return ScenarioState(
        config=config,
        graph=graph,
        entity_beliefs=entity_beliefs,
        cell_beliefs=cell_beliefs,
        tick=0,
        cum_log_marginal=0.0,
        event_log=(),
    )


# ---------------------------------------------------------------------------
# Tick commit


def _map_maybe_parallel(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _advance_edge(
    record: EdgeRecord,
    obs: ObservationVector | None,
    tick: int,
    config: ScenarioConfig,
) -> tuple[EdgeRecord, dict | None, float]:
    """Evolve one edge through a tick; returns (record, report entry, log forecast).

    Unmonitored ticks leave the belief untouched: the pending discounts are
    applied one per elapsed tick as soon as the next monitored observation
    arrives, with the adaptive discount seeing effort only on the first
    pending boundary.
    """
    if obs is None or not obs.monitored:
        return record, None, 0.0

    belief = record.belief
    deltas: list[float] = []
    elapsed = 0 if record.last_update_tick is None else tick - record.last_update_tick
    for boundary in range(elapsed):
        delta = belief.tick_discount()
        belief = evolve_prior(belief, delta)
        if boundary == 0:
            belief = replace(belief, last_observed_effort=0.0)
        deltas.append(delta)

    scores: list[tuple[str, int, float]] = []
    log_forecast = 0.0
    if belief.proper:
        scores = predictive_channel_scores(belief, obs, config.channels)
        log_forecast = sum(s[2] for s in scores)

    prior_pair = (belief.alpha, belief.beta)
    belief = posterior_update(belief, obs, config.channels)
    entry = {
        "prior": [prior_pair[0], prior_pair[1]],
        "deltas": deltas,
        "posterior": [belief.alpha, belief.beta],
        "channels": [
            {"channel": cid, "value": float(obs.channels[cid]), "rounded": s,
             "log_forecast": lp}
            for cid, s, lp in scores
        ],
        "log_forecast": log_forecast,
    }
    return replace(record, belief=belief, last_update_tick=tick), entry, log_forecast


def commit_tick(
    state: ScenarioState, batch: TickBatch, workers: int = 1
) -> tuple[ScenarioState, TickReport]:
    """Run the tick phases and return the committed state and its report."""
    if batch.tick != state.tick + 1:
        raise ValueError(
            f"batch tick {batch.tick} does not follow committed tick {state.tick}"
        )
    config = state.config
    tick = batch.tick

    # phase 1: entrants join at the start of the tick
    graph = apply_population_delta(state.graph, additions=[a for a, _ in batch.additions],
                                   tick=tick)
    entity_beliefs = dict(state.entity_beliefs)
    for eid, prior in batch.additions:
        if prior is None:
            prior = config.default_entity_prior
        if prior is None:
            prior = {name: 1.0 / config.space.m for name in config.space.states}
        entity_beliefs[eid] = config.belief_from_prior(prior, tick=tick - 1)

    # phase 1b: explicit ties, then ties implied by observed communication
    created: list[str] = []
    for event in batch.edge_events:
        belief = config.new_edge_belief(event.pair, event.origin, event.prior)
        graph = add_edge(graph, event.pair, event.origin, tick=tick, belief=belief)
        created.append(_edge_key(event.pair))
    obs_by_pair: dict[tuple[str, str], ObservationVector] = {}
    for obs in batch.observations:
        obs_by_pair[obs.pair] = obs
        if obs.monitored and obs.total() > 0 and not graph.has_live_edge(*obs.pair):
            belief = config.new_edge_belief(obs.pair, "observed-communication")
            graph = add_edge(graph, obs.pair, "observed-communication", tick=tick,
                             belief=belief)
            created.append(_edge_key(obs.pair))
    unknown = set(obs_by_pair) - set(graph.live_edges())
    unknown = {p for p in unknown if obs_by_pair[p].monitored and obs_by_pair[p].total() > 0}
    if unknown:
        raise ValueError(f"observations reference pairs with no edge: {sorted(unknown)}")

    # phase 2: per-edge rate filters (parallel-safe, folded in pair order)
    live = graph.live_edges()
    pairs = sorted(live)
    results = _map_maybe_parallel(
        lambda pair: _advance_edge(live[pair], obs_by_pair.get(pair), tick, config),
        pairs,
        workers,
    )
    edge_entries: dict[str, dict] = {}
    increment = 0.0
    for pair, (record, entry, log_forecast) in zip(pairs, results):
        graph = graph.with_edge_record(record)
        if entry is not None:
            edge_entries[_edge_key(pair)] = entry
            increment += log_forecast

    # phase 3: per-entity state filters (parallel-safe, folded in id order)
    ids = sorted(entity_beliefs)
    ent_results = _map_maybe_parallel(
        lambda eid: filter_tick(
            entity_beliefs[eid], config.transition, config.task_model,
            batch.signals.get(eid),
        ),
        ids,
        workers,
    )
    entity_entries: dict[str, dict] = {}
    for eid, (belief, log_ev) in zip(ids, ent_results):
        entity_beliefs[eid] = belief
        entity_entries[eid] = {
            "pi": belief.marginal().tolist(),
            "log_evidence": log_ev,
        }

    # phase 4: cell filters on the union of member signals
    cell_beliefs = dict(state.cell_beliefs)
    cell_entries: dict[str, dict] = {}
    for cid in sorted(cell_beliefs):
        cell = graph.cells[cid]
        fused = _fuse_signals(
            [batch.signals.get(m) for m in sorted(cell.members)],
            config.task_model.n_tasks,
            tick,
        )
        belief, log_ev = filter_tick(
            cell_beliefs[cid], config.transition, config.task_model, fused
        )
        cell_beliefs[cid] = belief
        cell_entries[cid] = {"pi": belief.marginal().tolist(), "log_evidence": log_ev}

    # phase 5: indicator reports from the mid-tick snapshot
    reports = compute_indicator_reports(config, graph, entity_beliefs, cell_beliefs, tick)

    # phase 6: leavers drop at the end of the tick
    graph = apply_population_delta(graph, removals=batch.removals, tick=tick)

    cum = state.cum_log_marginal + increment
    report = TickReport(
        tick=tick,
        edges=edge_entries,
        entities=entity_entries,
        cells=cell_entries,
        indicators=reports,
        added=tuple(sorted(a for a, _ in batch.additions)),
        removed=tuple(sorted(batch.removals)),
        created_edges=tuple(created),
        log_marginal_increment=increment,
        cum_log_marginal=cum,
    )
    new_state = ScenarioState(
        config=config,
        graph=graph,
        entity_beliefs=entity_beliefs,
        cell_beliefs=cell_beliefs,
        tick=tick,
        cum_log_marginal=cum,
        event_log=state.event_log + (report,),
    )
    return new_state, report


def _fuse_signals(
    member_signals: Sequence[SignalVector | None], n_tasks: int, tick: int
) -> SignalVector | None:
    """Per-task max across members; missing only where every member is missing."""
    present = [s for s in member_signals if s is not None]
    if not present:
        return None
    stacked = np.vstack([s.values for s in present])
    with np.errstate(all="ignore"):
        fused = np.full(n_tasks, np.nan)
        any_present = ~np.all(np.isnan(stacked), axis=0)
        fused[any_present] = np.nanmax(stacked[:, any_present], axis=0)
    return SignalVector(fused, tick=tick)


def compute_indicator_reports(
    config: ScenarioConfig,
    graph: PopulationGraph,
    entity_beliefs: Mapping[str, StateBelief],
    cell_beliefs: Mapping[str, StateBelief],
    tick: int,
) -> tuple[IndicatorReport, ...]:
    """Measures and indicators for every cell against the given snapshot."""
    reports = []
    for cid in sorted(graph.cells):
        cell = graph.cells[cid]
        members = sorted(cell.members & graph.present_ids())
        cell_belief = cell_beliefs[cid]
        m1 = collective_progress(cell_belief, cell.cell_threat_states)
        m2 = individual_threat(
            [entity_beliefs[m] for m in members], cell.individual_threat_states
        )
        internal = [
            rec.belief
            for pair, rec in sorted(graph.live_edges().items())
            if pair[0] in cell.members and pair[1] in cell.members
        ]
        proper = [b for b in internal if b.proper]
        per_pair, m3 = pairwise_cohesion(proper, cell.threshold)
        n = len(members)
        m4 = cell_density(graph, replace(cell, members=frozenset(members))) if n >= 2 else 1.0
        m5 = cell_size_integrity(n, cell.ideal_size)
        measures = (m1, m2, m3, m4, m5)
        reports.append(
            IndicatorReport.build(
                cid,
                tick,
                measures,
                inputs={
                    "members": members,
                    "member_pi": {m: entity_beliefs[m].marginal().tolist() for m in members},
                    "cell_pi": cell_belief.marginal().tolist(),
                    "edge_params": [[b.alpha, b.beta] for b in proper],
                    "per_pair_cohesion": per_pair,
                    "n": n,
                    "ideal_size": cell.ideal_size,
                    "threshold": cell.threshold,
                    "individual_threat_states": sorted(cell.individual_threat_states),
                    "cell_threat_states": sorted(cell.cell_threat_states),
                    "degenerate_cohesion": not proper,
                    "connectivity_broken": len(members) != len(cell.members)
                    or not members or not connected(graph, members),
                },
            )
        )
    return tuple(reports)


def joint_log_marginal_likelihood(state: ScenarioState) -> float:
    """Running sum of every committed one-step-ahead log forecast."""
    return state.cum_log_marginal


def recompute_log_marginal(state: ScenarioState) -> float:
    """Re-derive the joint from the event log (replay check)."""
    total = 0.0
    for report in state.event_log:
        for entry in report.edges.values():
            for channel in entry["channels"]:
                total += channel["log_forecast"]
    return total


# ---------------------------------------------------------------------------
# What-if: recompute indicators on a modified snapshot without committing


@dataclass(frozen=True)
class Intervention:
    kind: str
    cell_id: str | None = None
    member: str | None = None
    pair: tuple[str, str] | None = None
    alpha: float | None = None
    beta: float | None = None
    states: tuple[str, ...] | None = None
    value: float | None = None

    KINDS = (
        "remove_member",
        "sever_edge",
        "set_edge_belief",
        "set_individual_threat_states",
        "set_cell_threat_states",
        "set_threshold",
        "set_ideal_size",
    )

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown intervention {self.kind!r}")


@dataclass(frozen=True)
class WhatIfResult:
    before: tuple[IndicatorReport, ...]
    after: tuple[IndicatorReport, ...]

    def to_json_dict(self) -> dict:
        return {
            "before": [r.to_json_dict() for r in self.before],
            "after": [r.to_json_dict() for r in self.after],
        }


def what_if(state: ScenarioState, intervention: Intervention) -> WhatIfResult:
    """Indicator deltas under a hypothetical change; the state is untouched."""
    config = state.config
    graph = state.graph
    before = compute_indicator_reports(
        config, graph, state.entity_beliefs, state.cell_beliefs, state.tick
    )

    kind = intervention.kind
    if kind == "remove_member":
        cell = _require_cell(graph, intervention.cell_id)
        if intervention.member not in cell.members:
            raise KeyError(f"{intervention.member!r} is not a member of {cell.cell_id!r}")
        members = cell.members - {intervention.member}
        if not members:
            raise ValueError("intervention would empty the cell")
        broken = not connected(graph, members)
        graph = graph.with_cell(replace(cell, members=members, connectivity_broken=broken))
    elif kind == "sever_edge":
        if intervention.pair is None:
            targets = sorted(graph.live_edges())  # sever everything
        else:
            targets = [canonical_pair(*intervention.pair)]
        edges = dict(graph.edges)
        retired = []
        for pair in targets:
            record = edges.get(pair)
            if record is None or not record.live:
                raise KeyError(f"no live edge {pair}")
            retired.append(replace(record, archived_at=state.tick))
            del edges[pair]
        graph = replace(graph, edges=edges, archived=graph.archived + tuple(retired))
        cells = {
            cid: replace(cell, connectivity_broken=not connected(graph, cell.members))
            for cid, cell in graph.cells.items()
        }
        graph = replace(graph, cells=cells)
    elif kind == "set_edge_belief":
        pair = canonical_pair(*intervention.pair)
        record = graph.edges.get(pair)
        if record is None or not record.live:
            raise KeyError(f"no live edge {pair}")
        belief = replace(record.belief, alpha=float(intervention.alpha),
                         beta=float(intervention.beta))
        graph = graph.with_edge_record(replace(record, belief=belief))
    elif kind in ("set_individual_threat_states", "set_cell_threat_states"):
        cell = _require_cell(graph, intervention.cell_id)
        indices = config.state_indices(intervention.states or ())
        key = ("individual_threat_states" if kind == "set_individual_threat_states"
               else "cell_threat_states")
        graph = graph.with_cell(replace(cell, **{key: indices}))
    elif kind == "set_threshold":
        cell = _require_cell(graph, intervention.cell_id)
        graph = graph.with_cell(replace(cell, threshold=float(intervention.value)))
    elif kind == "set_ideal_size":
        cell = _require_cell(graph, intervention.cell_id)
        graph = graph.with_cell(replace(cell, ideal_size=float(intervention.value)))

    after = compute_indicator_reports(
        config, graph, state.entity_beliefs, state.cell_beliefs, state.tick
    )
    return WhatIfResult(before=before, after=after)


def _require_cell(graph: PopulationGraph, cell_id: str | None) -> Cell:
    if cell_id is None or cell_id not in graph.cells:
        raise KeyError(f"unknown cell {cell_id!r}")
    return graph.cells[cell_id]


# ---------------------------------------------------------------------------
# Data-stream ingestion


def records_from_csv(path) -> list[dict]:
    """Pair-observation stream with columns tick, entity_a, entity_b, channel_id,
    raw_value, monitored_flag."""
    import csv

    records = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"tick", "entity_a", "entity_b", "channel_id", "raw_value",
                    "monitored_flag"}
        missing = required - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"observation CSV missing columns {sorted(missing)}")
        for row in reader:
            records.append(
                {
                    "type": "pair",
                    "tick": int(row["tick"]),
                    "entity_a": row["entity_a"],
                    "entity_b": row["entity_b"],
                    "channel_id": row["channel_id"],
                    "raw_value": float(row["raw_value"]),
                    "monitored": row["monitored_flag"].strip().lower()
                    in ("1", "true", "yes"),
                }
            )
    return records


def records_from_jsonl(path) -> list[dict]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def batches_from_records(
    records: Iterable[Mapping[str, Any]], config: ScenarioConfig
) -> list[TickBatch]:
    """Group stream records by tick into batches, scaling raw values on ingestion.

    Record types: ``pair`` (one channel observation; ``raw_value`` is scaled by
    the channel spec unless ``scaled_value`` is given), ``signals`` (per-entity
    task signals keyed by task name), ``population`` (add/remove lists), and
    ``edge`` (explicit tie creation).
    """
    by_tick: dict[int, dict] = {}

    def bucket(tick: int) -> dict:
        return by_tick.setdefault(
            int(tick),
            {"pairs": {}, "signals": {}, "add": [], "remove": [], "edges": []},
        )

    for k, rec in enumerate(records):
        rtype = rec.get("type", "pair")
        if "tick" not in rec:
            raise ValueError(f"record {k} has no tick")
        slot = bucket(rec["tick"])
        if rtype == "pair":
            pair = canonical_pair(rec["entity_a"], rec["entity_b"])
            monitored = bool(rec.get("monitored", rec.get("monitored_flag", True)))
            entry = slot["pairs"].setdefault(pair, {"channels": {}, "monitored": False})
            if monitored:
                entry["monitored"] = True
                cid = str(rec["channel_id"])
                if "scaled_value" in rec:
                    value = float(rec["scaled_value"])
                else:
                    value = scale_raw(float(rec["raw_value"]), config.channel(cid))
                entry["channels"][cid] = value
        elif rtype == "signals":
            eid = str(rec["entity"])
            values = np.full(config.task_model.n_tasks, np.nan)
            for name, z in rec.get("signals", {}).items():
                j = config.task_names.index(name) if name in config.task_names else int(name)
                values[j] = float(z)
            slot["signals"][eid] = values
        elif rtype == "population":
            for item in rec.get("add", []):
                if isinstance(item, str):
                    slot["add"].append((item, None))
                else:
                    slot["add"].append((str(item["id"]), item.get("prior")))
            slot["remove"].extend(str(r) for r in rec.get("remove", []))
        elif rtype == "edge":
            slot["edges"].append(
                EdgeEvent(
                    pair=tuple(rec["pair"]),
                    origin=rec.get("origin", "observed-communication"),
                    prior=rec.get("prior"),
                )
            )
        else:
            raise ValueError(f"record {k} has unknown type {rtype!r}")

    batches = []
    for tick in sorted(by_tick):
        slot = by_tick[tick]
        observations = [
            ObservationVector(
                pair=pair,
                tick=tick,
                channels=entry["channels"] if entry["monitored"] else {},
                monitored=entry["monitored"],
            )
            for pair, entry in sorted(slot["pairs"].items())
        ]
        signals = {
            eid: SignalVector(values, tick=tick)
            for eid, values in sorted(slot["signals"].items())
        }
        batches.append(
            TickBatch(
                tick=tick,
                signals=signals,
                observations=observations,
                additions=slot["add"],
                removals=slot["remove"],
                edge_events=slot["edges"],
            )
        )
    return batches


# ---------------------------------------------------------------------------
# Snapshots


def snapshot_dict(state: ScenarioState) -> dict:
    """JSON-ready snapshot of the committed state (the event log is its own file)."""

    def belief_dict(b: StateBelief) -> dict:
        return {"joint": b.joint.tolist(), "tick": b.tick}

    def edge_dict(rec: EdgeRecord) -> dict:
        return {
            "pair": list(rec.pair),
            "origin": rec.origin,
            "created": rec.created,
            "alpha": rec.belief.alpha,
            "beta": rec.belief.beta,
            "baseline_discount": rec.belief.baseline_discount,
            "discount_mode": rec.belief.discount_mode,
            "last_observed_effort": rec.belief.last_observed_effort,
            "last_update_tick": rec.last_update_tick,
            "archived_at": rec.archived_at,
        }

    return {
        "version": 1,
        "generator": f"cellwatch {_pkg_version}",
        "tick": state.tick,
        "cum_log_marginal": state.cum_log_marginal,
        "config": state.config.to_json_dict(),
        "entities": [
            {"id": rec.entity_id, "entered": rec.entered, "exited": rec.exited}
            for _, rec in sorted(state.graph.entities.items())
        ],
        "edges": [edge_dict(rec) for _, rec in sorted(state.graph.edges.items())],
        "archived": [edge_dict(rec) for rec in state.graph.archived],
        "cells": [
            {
                "id": cell.cell_id,
                "members": sorted(cell.members),
                "ideal_size": cell.ideal_size,
                "threshold": cell.threshold,
                "individual_threat_states": sorted(cell.individual_threat_states),
                "cell_threat_states": sorted(cell.cell_threat_states),
                "connectivity_broken": cell.connectivity_broken,
            }
            for _, cell in sorted(state.graph.cells.items())
        ],
        "entity_beliefs": {
            eid: belief_dict(b) for eid, b in sorted(state.entity_beliefs.items())
        },
        "cell_beliefs": {
            cid: belief_dict(b) for cid, b in sorted(state.cell_beliefs.items())
        },
    }


def state_from_snapshot(doc: Mapping[str, Any]) -> ScenarioState:
    if doc.get("version") != 1:
        raise ValueError(f"unsupported snapshot version {doc.get('version')!r}")
    config = ScenarioConfig.from_json_dict(doc["config"])

    entities = {
        e["id"]: EntityRecord(entity_id=e["id"], entered=e["entered"], exited=e["exited"])
        for e in doc["entities"]
    }

    def edge_record(e: Mapping[str, Any]) -> EdgeRecord:
        pair = (e["pair"][0], e["pair"][1])
        belief = EdgeBelief(
            pair=pair,
            alpha=e["alpha"],
            beta=e["beta"],
            baseline_discount=e["baseline_discount"],
            discount_mode=e["discount_mode"],
            last_observed_effort=e["last_observed_effort"],
        )
        return EdgeRecord(
            pair=pair,
            origin=e["origin"],
            created=e["created"],
            belief=belief,
            last_update_tick=e["last_update_tick"],
            archived_at=e["archived_at"],
        )

    edges = {(e["pair"][0], e["pair"][1]): edge_record(e) for e in doc["edges"]}
    archived = tuple(edge_record(e) for e in doc["archived"])
    cells = {
        c["id"]: Cell(
            cell_id=c["id"],
            members=c["members"],
            ideal_size=c["ideal_size"],
            threshold=c["threshold"],
            individual_threat_states=c["individual_threat_states"],
            cell_threat_states=c["cell_threat_states"],
            connectivity_broken=c["connectivity_broken"],
        )
        for c in doc["cells"]
    }
    graph = PopulationGraph(
        entities=entities, edges=edges, archived=archived, cells=cells, tick=doc["tick"]
    )
    entity_beliefs = {
        eid: StateBelief(b["joint"], tick=b["tick"])
        for eid, b in doc["entity_beliefs"].items()
    }
    cell_beliefs = {
        cid: StateBelief(b["joint"], tick=b["tick"])
        for cid, b in doc["cell_beliefs"].items()
    }
    return ScenarioState(
        config=config,
        graph=graph,
        entity_beliefs=entity_beliefs,
        cell_beliefs=cell_beliefs,
        tick=doc["tick"],
        cum_log_marginal=doc["cum_log_marginal"],
        event_log=(),
    )
