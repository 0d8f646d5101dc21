"""Scenario configuration: the versioned JSON document a run is built from.

A scenario file names the threat-state space and its transition structure,
the task layer, the information channels, edge-prior policy by origin class,
discount policy, the initial population with entity priors, initial ties,
and the analyst-designated cells.  Validation errors name the offending
path into the document.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .edges import ChannelSpec, EdgeBelief
from .network import EDGE_ORIGINS
from .states import (
    BetaDensity,
    GeometricHolding,
    StateBelief,
    TableHolding,
    TaskEmission,
    TaskModel,
    ThreatStateSpace,
    TransitionModel,
    WeibullHolding,
)

__all__ = ["SchemaError", "ScenarioConfig", "EMPIRICAL", "load_scenario", "SCHEMA_VERSION"]

SCHEMA_VERSION = 1

# sentinel prior: edge starts improper at (0, 0) and becomes proper on first data
EMPIRICAL = "empirical"


class SchemaError(ValueError):
    """Configuration document violates the schema; message carries the path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _require(doc: Mapping, key: str, path: str):
    if key not in doc:
        raise SchemaError(f"{path}.{key}", "missing required field")
    return doc[key]


def _holding_from_dict(doc: Mapping, path: str):
    kind = _require(doc, "kind", path)
    try:
        if kind == "geometric":
            return GeometricHolding(rho=float(_require(doc, "rho", path)))
        if kind == "weibull":
            return WeibullHolding(
                shape=float(_require(doc, "shape", path)),
                scale=float(_require(doc, "scale", path)),
            )
        if kind == "table":
            return TableHolding(probs=[float(p) for p in _require(doc, "probs", path)])
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from exc
    raise SchemaError(f"{path}.kind", f"unknown holding kind {kind!r}")


def _holding_to_dict(holding) -> dict:
    if isinstance(holding, GeometricHolding):
        return {"kind": "geometric", "rho": holding.rho}
    if isinstance(holding, WeibullHolding):
        return {"kind": "weibull", "shape": holding.shape, "scale": holding.scale}
    return {"kind": "table", "probs": list(holding.probs)}


@dataclass(frozen=True)
class CellConfig:
    cell_id: str
    members: tuple[str, ...]
    ideal_size: float
    threshold: float
    individual_threat_states: tuple[str, ...]
    cell_threat_states: tuple[str, ...]
    prior: Mapping[str, float] | None = None


@dataclass(frozen=True)
class EntityConfig:
    entity_id: str
    prior: Mapping[str, float]


@dataclass(frozen=True)
class InitialEdgeConfig:
    pair: tuple[str, str]
    origin: str
    prior: tuple[float, float] | str | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario document plus the model objects built from it."""

    name: str
    seed: int
    space: ThreatStateSpace
    transition: TransitionModel
    task_model: TaskModel
    task_names: tuple[str, ...]
    channels: tuple[ChannelSpec, ...]
    edge_priors: Mapping[str, tuple[float, float] | str]
    discount_mode: str
    discount_value: float
    entities: tuple[EntityConfig, ...]
    initial_edges: tuple[InitialEdgeConfig, ...]
    cells: tuple[CellConfig, ...]
    default_entity_prior: Mapping[str, float] | None = None
    raw_document: Mapping[str, Any] = field(default_factory=dict, repr=False)

    # -- helpers -----------------------------------------------------------

    def channel(self, channel_id: str) -> ChannelSpec:
        for spec in self.channels:
            if spec.channel_id == channel_id:
                return spec
        raise KeyError(f"unknown channel {channel_id!r}")

    def state_indices(self, names: Sequence[str]) -> frozenset[int]:
        return frozenset(self.space.index(n) for n in names)

    def belief_from_prior(self, prior: Mapping[str, float], tick: int = 0) -> StateBelief:
        pi = np.zeros(self.space.m)
        for name, p in prior.items():
            pi[self.space.index(name)] = p
        return StateBelief.from_marginal(pi, self.transition.duration_cap, tick=tick)

    def resolve_edge_prior(self, origin: str, override=None) -> tuple[float, float] | str:
        if override is not None:
            return override
        if origin in self.edge_priors:
            return self.edge_priors[origin]
        return self.edge_priors["default"]

    def new_edge_belief(self, pair: tuple[str, str], origin: str, override=None) -> EdgeBelief:
        prior = self.resolve_edge_prior(origin, override)
        if prior == EMPIRICAL:
            alpha, beta = 0.0, 0.0
        else:
            alpha, beta = float(prior[0]), float(prior[1])
        return EdgeBelief(
            pair=pair,
            alpha=alpha,
            beta=beta,
            baseline_discount=self.discount_value,
            discount_mode=self.discount_mode,
        )

    # -- parsing -----------------------------------------------------------

    @classmethod
    def from_json_dict(cls, doc: Mapping[str, Any]) -> "ScenarioConfig":
        version = _require(doc, "version", "$")
        if version != SCHEMA_VERSION:
            raise SchemaError("$.version", f"unsupported schema version {version!r}")

        sm = _require(doc, "state_model", "$")
        states = [str(s) for s in _require(sm, "states", "$.state_model")]
        try:
            space = ThreatStateSpace(
                states, [states.index(a) for a in sm.get("absorbing", [])]
            )
        except ValueError as exc:
            raise SchemaError("$.state_model", str(exc)) from exc

        holding = {}
        for k, item in enumerate(_require(sm, "holding", "$.state_model")):
            path = f"$.state_model.holding[{k}]"
            i = states.index(str(_require(item, "from", path)))
            j = states.index(str(_require(item, "to", path)))
            holding[(i, j)] = _holding_from_dict(item, path)
        try:
            transition = TransitionModel(
                space,
                _require(sm, "embedded", "$.state_model"),
                holding,
                duration_cap=int(sm.get("duration_cap", 52)),
            )
        except ValueError as exc:
            raise SchemaError("$.state_model", str(exc)) from exc

        tm = _require(doc, "task_model", "$")
        tasks = _require(tm, "tasks", "$.task_model")
        task_names = tuple(str(_require(t, "name", f"$.task_model.tasks[{k}]"))
                           for k, t in enumerate(tasks))
        emissions = []
        extractors = []
        for k, t in enumerate(tasks):
            path = f"$.task_model.tasks[{k}]"
            try:
                off = BetaDensity(*[float(v) for v in _require(t, "off", path)])
                on = BetaDensity(*[float(v) for v in _require(t, "on", path)])
            except (TypeError, ValueError) as exc:
                raise SchemaError(path, str(exc)) from exc
            emissions.append(TaskEmission(off=off, on=on))
            extractors.append(str(t.get("extractor", "mean")))

        def task_index(ref, path) -> int:
            if isinstance(ref, int):
                if not 0 <= ref < len(task_names):
                    raise SchemaError(path, f"task index {ref} out of range")
                return ref
            if ref in task_names:
                return task_names.index(ref)
            raise SchemaError(path, f"unknown task {ref!r}")

        index_sets, task_probs = [], []
        raw_sets = _require(tm, "index_sets", "$.task_model")
        raw_probs = _require(tm, "task_probs", "$.task_model")
        for name in states:
            refs = raw_sets.get(name, [])
            idx = frozenset(task_index(r, f"$.task_model.index_sets.{name}") for r in refs)
            probs = {}
            for ref, p in raw_probs.get(name, {}).items():
                j = task_index(int(ref) if str(ref).isdigit() else ref,
                               f"$.task_model.task_probs.{name}")
                probs[j] = float(p)
            if set(probs) != set(idx):
                raise SchemaError(
                    f"$.task_model.task_probs.{name}",
                    "task probabilities must cover exactly the state's index set",
                )
            index_sets.append(idx)
            task_probs.append(probs)
        try:
            task_model = TaskModel(
                n_tasks=len(task_names),
                index_sets=index_sets,
                task_probs=task_probs,
                emissions=emissions,
                extractors=extractors,
            )
            task_model.validate_for_space(space)
        except ValueError as exc:
            raise SchemaError("$.task_model", str(exc)) from exc

        channels = []
        for k, ch in enumerate(_require(doc, "channels", "$")):
            path = f"$.channels[{k}]"
            try:
                channels.append(
                    ChannelSpec(
                        channel_id=str(_require(ch, "id", path)),
                        efficiency=float(_require(ch, "efficiency", path)),
                        r_max=float(_require(ch, "r_max", path)),
                        scale_target=float(ch.get("scale_target", 10.0)),
                        clamp=bool(ch.get("clamp", False)),
                        summary_kind=str(ch.get("summary_kind", "sum")),
                    )
                )
            except ValueError as exc:
                raise SchemaError(path, str(exc)) from exc
        if len({c.channel_id for c in channels}) != len(channels):
            raise SchemaError("$.channels", "duplicate channel ids")

        priors_doc = dict(_require(doc, "edge_priors", "$"))
        if "default" not in priors_doc:
            raise SchemaError("$.edge_priors.default", "missing required field")
        edge_priors: dict[str, tuple[float, float] | str] = {}
        for key, val in priors_doc.items():
            path = f"$.edge_priors.{key}"
            if key != "default" and key not in EDGE_ORIGINS:
                raise SchemaError(path, f"unknown edge origin class {key!r}")
            if val == EMPIRICAL:
                edge_priors[key] = EMPIRICAL
            else:
                try:
                    a, b = float(val[0]), float(val[1])
                except (TypeError, ValueError, IndexError) as exc:
                    raise SchemaError(path, "expected [alpha, beta] or \"empirical\"") from exc
                if a <= 0 or b <= 0:
                    raise SchemaError(path, "configured priors must be positive")
                edge_priors[key] = (a, b)

        disc = doc.get("discount", {"mode": "fixed", "value": 0.7})
        mode = str(disc.get("mode", "fixed"))
        value = float(disc.get("value", 0.7))
        if mode not in ("fixed", "adaptive"):
            raise SchemaError("$.discount.mode", f"unknown mode {mode!r}")
        if not 0.0 < value <= 1.0:
            raise SchemaError("$.discount.value", "discount must lie in (0, 1]")

        def check_prior(prior, path) -> dict[str, float]:
            out = {}
            for name, p in prior.items():
                if name not in states:
                    raise SchemaError(path, f"unknown state {name!r}")
                out[name] = float(p)
            total = sum(out.values())
            if abs(total - 1.0) > 1e-6:
                raise SchemaError(path, f"prior sums to {total}, expected 1")
            return out

        entities = []
        for k, ent in enumerate(doc.get("entities", [])):
            path = f"$.entities[{k}]"
            entities.append(
                EntityConfig(
                    entity_id=str(_require(ent, "id", path)),
                    prior=check_prior(_require(ent, "prior", path), f"{path}.prior"),
                )
            )
        if len({e.entity_id for e in entities}) != len(entities):
            raise SchemaError("$.entities", "duplicate entity ids")
        known = {e.entity_id for e in entities}

        initial_edges = []
        for k, edge in enumerate(doc.get("initial_edges", [])):
            path = f"$.initial_edges[{k}]"
            pair = _require(edge, "pair", path)
            a, b = str(pair[0]), str(pair[1])
            if a not in known or b not in known:
                raise SchemaError(f"{path}.pair", f"unknown entities in pair {pair}")
            origin = str(edge.get("origin", "observed-communication"))
            if origin not in EDGE_ORIGINS:
                raise SchemaError(f"{path}.origin", f"unknown origin {origin!r}")
            prior = edge.get("prior")
            if prior is not None and prior != EMPIRICAL:
                prior = (float(prior[0]), float(prior[1]))
            initial_edges.append(
                InitialEdgeConfig(pair=(a, b) if a < b else (b, a), origin=origin, prior=prior)
            )

        cells = []
        for k, cell in enumerate(doc.get("cells", [])):
            path = f"$.cells[{k}]"
            members = tuple(str(p) for p in _require(cell, "members", path))
            unknown = set(members) - known
            if unknown:
                raise SchemaError(f"{path}.members", f"unknown members {sorted(unknown)}")
            for key in ("individual_threat_states", "cell_threat_states"):
                for name in cell.get(key, []):
                    if name not in states:
                        raise SchemaError(f"{path}.{key}", f"unknown state {name!r}")
            prior = cell.get("prior")
            cells.append(
                CellConfig(
                    cell_id=str(_require(cell, "id", path)),
                    members=members,
                    ideal_size=float(_require(cell, "ideal_size", path)),
                    threshold=float(_require(cell, "threshold", path)),
                    individual_threat_states=tuple(cell.get("individual_threat_states", [])),
                    cell_threat_states=tuple(cell.get("cell_threat_states", [])),
                    prior=check_prior(prior, f"{path}.prior") if prior else None,
                )
            )

        default_prior = doc.get("default_entity_prior")
        if default_prior is not None:
            default_prior = check_prior(default_prior, "$.default_entity_prior")

        return cls(
            name=str(doc.get("name", "scenario")),
            seed=int(doc.get("seed", 0)),
            space=space,
            transition=transition,
            task_model=task_model,
            task_names=task_names,
            channels=tuple(channels),
            edge_priors=edge_priors,
            discount_mode=mode,
            discount_value=value,
            entities=tuple(entities),
            initial_edges=tuple(initial_edges),
            cells=tuple(cells),
            default_entity_prior=default_prior,
            raw_document=dict(doc),
        )

    def to_json_dict(self) -> dict:
        sm_holding = [
            {"from": self.space.states[i], "to": self.space.states[j], **_holding_to_dict(h)}
            for (i, j), h in sorted(self.transition.holding.items())
        ]
        tasks = [
            {
                "name": name,
                "off": [em.off.a, em.off.b],
                "on": [em.on.a, em.on.b],
                "extractor": self.task_model.extractors[k],
            }
            for k, (name, em) in enumerate(zip(self.task_names, self.task_model.emissions))
        ]
        index_sets = {
            self.space.states[i]: sorted(self.task_model.index_sets[i])
            for i in range(self.space.m)
        }
        task_probs = {
            self.space.states[i]: {str(j): p for j, p in sorted(self.task_model.task_probs[i].items())}
            for i in range(self.space.m)
        }
        return {
            "version": SCHEMA_VERSION,
            "name": self.name,
            "seed": self.seed,
            "state_model": {
                "states": list(self.space.states),
                "absorbing": [self.space.states[i] for i in sorted(self.space.absorbing)],
                "embedded": self.transition.embedded.tolist(),
                "holding": sm_holding,
                "duration_cap": self.transition.duration_cap,
            },
            "task_model": {
                "tasks": tasks,
                "index_sets": index_sets,
                "task_probs": task_probs,
            },
            "channels": [
                {
                    "id": c.channel_id,
                    "efficiency": c.efficiency,
                    "r_max": c.r_max,
                    "scale_target": c.scale_target,
                    "clamp": c.clamp,
                    "summary_kind": c.summary_kind,
                }
                for c in self.channels
            ],
            "edge_priors": {
                k: (v if v == EMPIRICAL else [v[0], v[1]])
                for k, v in sorted(self.edge_priors.items())
            },
            "discount": {"mode": self.discount_mode, "value": self.discount_value},
            "entities": [
                {"id": e.entity_id, "prior": dict(e.prior)} for e in self.entities
            ],
            "initial_edges": [
                {
                    "pair": list(e.pair),
                    "origin": e.origin,
                    **({"prior": e.prior if e.prior == EMPIRICAL else list(e.prior)}
                       if e.prior is not None else {}),
                }
                for e in self.initial_edges
            ],
            "cells": [
                {
                    "id": c.cell_id,
                    "members": list(c.members),
                    "ideal_size": c.ideal_size,
                    "threshold": c.threshold,
                    "individual_threat_states": list(c.individual_threat_states),
                    "cell_threat_states": list(c.cell_threat_states),
                    **({"prior": dict(c.prior)} if c.prior else {}),
                }
                for c in self.cells
            ],
            **({"default_entity_prior": dict(self.default_entity_prior)}
               if self.default_entity_prior else {}),
        }


def load_scenario(path: str | Path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return ScenarioConfig.from_json_dict(json.load(fh))
