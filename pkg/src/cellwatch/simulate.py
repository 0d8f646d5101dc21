"""Deterministic seeded generation of synthetic scenarios.

The generative counterpart of the filters: latent pairwise rate
trajectories with Poisson channel counts, latent state/dwell paths with
task activity and emitted signals, and a bundled ten-tick worked example
(four monitored people forming a cell) used by the demos, the golden
tests, and the analyst console.

All randomness flows from one master seed through numpy's PCG64 bit
generator; per-stream generators derive from (seed, crc32(stream name)),
so identical seeds give byte-identical outputs on every platform.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .edges import ChannelSpec, ObservationVector
from .network import canonical_pair
from .states import SignalVector, TaskModel, TransitionModel

__all__ = [
    "substream",
    "PairTrajectory",
    "simulate_network_data",
    "simulate_entity_path",
    "bundled_worked_example",
    "write_bundled_worked_example",
]


def substream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for a named stream under one master seed."""
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, key])))


@dataclass(frozen=True)
class PairTrajectory:
    """Latent rate path spec for one pair.

    ``kind`` is ``constant`` (value), ``piecewise`` (list of (start_tick,
    value), constant in between), or ``gamma-walk`` (mean-preserving Gamma
    innovations with the given concentration around the previous value).
    """

    pair: tuple[str, str]
    kind: str = "constant"
    value: float = 1.0
    pieces: tuple[tuple[int, float], ...] = ()
    concentration: float = 20.0

    def rates(self, n_ticks: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "constant":
            return np.full(n_ticks, float(self.value))
        if self.kind == "piecewise":
            if not self.pieces:
                raise ValueError("piecewise trajectory needs at least one piece")
            out = np.empty(n_ticks)
            pieces = sorted(self.pieces)
            level = pieces[0][1]
            for t in range(1, n_ticks + 1):
                for start, value in pieces:
                    if t >= start:
                        level = value
                out[t - 1] = level
            return out
        if self.kind == "gamma-walk":
            out = np.empty(n_ticks)
            level = float(self.value)
            for t in range(n_ticks):
                shape = self.concentration
                level = rng.gamma(shape, level / shape) if level > 0 else 0.0
                out[t] = level
            return out
        raise ValueError(f"unknown trajectory kind {self.kind!r}")


def simulate_network_data(
    trajectories: Sequence[PairTrajectory],
    channels: Sequence[ChannelSpec],
    seed: int,
    n_ticks: int,
) -> tuple[list[list[ObservationVector]], dict[tuple[str, str], np.ndarray]]:
    """Sample per-channel Poisson counts around each pair's latent rate.

    Returns one observation list per tick plus the latent rate traces for
    oracle comparisons.  Counts live on the common (scaled) axis.
    """
    per_tick: list[list[ObservationVector]] = [[] for _ in range(n_ticks)]
    latent: dict[tuple[str, str], np.ndarray] = {}
    for traj in sorted(trajectories, key=lambda tr: tr.pair):
        pair = canonical_pair(*traj.pair)
        rng = substream(seed, f"pair:{pair[0]}|{pair[1]}")
        rates = traj.rates(n_ticks, rng)
        latent[pair] = rates
        for t in range(n_ticks):
            values = {
                spec.channel_id: float(rng.poisson(spec.efficiency * rates[t]))
                for spec in channels
            }
            per_tick[t].append(
                ObservationVector(pair=pair, tick=t + 1, channels=values, monitored=True)
            )
    return per_tick, latent


def simulate_entity_path(
    model: TransitionModel,
    task_model: TaskModel,
    seed: int,
    n_ticks: int,
    prior: Sequence[float],
    name: str = "entity",
) -> tuple[np.ndarray, list[SignalVector]]:
    """Sample a latent state path plus emitted task signals.

    Jumps follow the embedded chain, dwells follow the per-transition holding
    distributions, tasks flip on with their state-conditional propensities
    (50/50 outside the state's index set), and signals draw from the matching
    emission densities.
    """
    rng = substream(seed, f"entity:{name}")
    m = model.space.m
    states = np.empty(n_ticks, dtype=int)
    current = int(rng.choice(m, p=np.asarray(prior) / np.sum(prior)))
    remaining, nxt = (0, current) if current in model.space.absorbing \
        else _draw_sojourn(model, current, rng)
    signals: list[SignalVector] = []
    for t in range(n_ticks):
        states[t] = current
        values = np.empty(task_model.n_tasks)
        idx = task_model.index_sets[current]
        probs = task_model.task_probs[current]
        for j in range(task_model.n_tasks):
            p_on = probs[j] if j in idx else 0.5
            active = rng.random() < p_on
            em = task_model.emissions[j]
            values[j] = (em.on if active else em.off).sample(rng)
        signals.append(SignalVector(values, tick=t + 1))
        if current not in model.space.absorbing:
            remaining -= 1
            while remaining == 0:
                current = nxt
                if current in model.space.absorbing:
                    break
                remaining, nxt = _draw_sojourn(model, current, rng)
    return states, signals


def _draw_sojourn(model: TransitionModel, state: int, rng: np.random.Generator):
    """Draw (dwell ticks, jump target) for one visit to a non-absorbing state."""
    row = model.embedded[state]
    target = int(rng.choice(model.space.m, p=row))
    holding = model.holding[(state, target)]
    pmf, tail = holding.pmf_tail(model.duration_cap * 20)
    total = pmf.sum()
    if total <= 0:
        raise ValueError(f"holding for {state}->{target} has no sampleable mass")
    dwell = int(rng.choice(pmf.size, p=pmf / total)) + 1
    return dwell, target


# ---------------------------------------------------------------------------
# Bundled worked example: four monitored people, one information channel,
# ten weekly ticks.  The communication sums and edge schedule are fixed data;
# the activity signals are authored synthetic values shaped to the same story
# (rising preparation mid-scenario, mobilisation at the end).

_PAIR_DATA = {
    ("p1", "p2"): [0, 3, 5, 5, 5, 5, 7, 6, 7, 7],
    ("p1", "p3"): [0, 0, 0, 0, 2, 6, 6, 6, 7, 8],
    ("p1", "p4"): [0, 0, 2, 5, 5, 6, 7, 8, 9, 11],
    ("p2", "p3"): [0, 1, 0, 0, 0, 5, 6, 4, 7, 8],
    ("p2", "p4"): [0, 0, 0, 0, 1, 6, 7, 8, 9, 10],
    ("p3", "p4"): [0, 0, 0, 0, 0, 1, 7, 8, 9, 10],
}

_TASKS = [
    "engage_radicalisers",
    "public_threats",
    "weapons_training",
    "acquire_materials",
    "reconnoitre",
    "final_logistics",
]

# per entity: tick -> {task name: signal}
_ACTIVITY = {
    "p1": {
        1: {"engage_radicalisers": 0.30, "public_threats": 0.40},
        2: {"public_threats": 0.50},
        3: {"acquire_materials": 0.50},
        4: {"acquire_materials": 0.60},
        5: {"acquire_materials": 0.70},
        6: {"acquire_materials": 0.75, "reconnoitre": 0.50},
        7: {"acquire_materials": 0.80},
        8: {"acquire_materials": 0.85, "final_logistics": 0.60},
        9: {"final_logistics": 0.80, "reconnoitre": 0.70},
        10: {"final_logistics": 0.90, "acquire_materials": 0.90},
    },
    "p2": {
        1: {"engage_radicalisers": 0.50},
        2: {"engage_radicalisers": 0.60, "weapons_training": 0.40},
        3: {"weapons_training": 0.55},
        4: {"weapons_training": 0.65},
        5: {"weapons_training": 0.70, "engage_radicalisers": 0.60},
        6: {"weapons_training": 0.80, "acquire_materials": 0.60},
        7: {"weapons_training": 0.85, "acquire_materials": 0.70},
        8: {"final_logistics": 0.50, "reconnoitre": 0.60},
        9: {"final_logistics": 0.75},
        10: {"final_logistics": 0.85, "reconnoitre": 0.80},
    },
    "p3": {
        1: {"public_threats": 0.30},
        3: {"engage_radicalisers": 0.40},
        4: {"public_threats": 0.40},
        5: {"engage_radicalisers": 0.50},
        6: {"reconnoitre": 0.50},
        7: {"reconnoitre": 0.60, "acquire_materials": 0.50},
        8: {"reconnoitre": 0.70},
        9: {"final_logistics": 0.60, "reconnoitre": 0.75},
        10: {"final_logistics": 0.80},
    },
    "p4": {
        1: {"weapons_training": 0.50},
        2: {"weapons_training": 0.60, "reconnoitre": 0.40},
        3: {"reconnoitre": 0.55},
        4: {"reconnoitre": 0.65, "weapons_training": 0.70},
        5: {"reconnoitre": 0.75, "acquire_materials": 0.60},
        6: {"reconnoitre": 0.80, "acquire_materials": 0.70},
        7: {"reconnoitre": 0.85, "final_logistics": 0.60},
        8: {"final_logistics": 0.80, "reconnoitre": 0.85},
        9: {"final_logistics": 0.90, "reconnoitre": 0.90},
        10: {"final_logistics": 0.95, "reconnoitre": 0.95},
    },
}

_PRIOR_LOW = {"Active": 0.80, "Training": 0.10, "Preparing": 0.05, "Neutral": 0.05}
_PRIOR_TRAINED = {"Active": 0.20, "Training": 0.60, "Preparing": 0.15, "Neutral": 0.05}


def bundled_worked_example() -> tuple[dict, list[dict]]:
    """Scenario document and data-stream records for the bundled example.

    Four people monitored over ten weekly ticks on a single full-efficiency
    phone channel; two ties exist up front with a low-mean prior, the other
    four open on first observed communication with the empirical (0, 0)
    initialization; the discount is fixed at 0.7.
    """
    scenario = {
        "version": 1,
        "name": "bundled-worked-example",
        "seed": 20260809,
        "state_model": {
            "states": ["Active", "Training", "Preparing", "Mobilised", "Neutral"],
            "absorbing": ["Neutral"],
            "embedded": [
                [0.0, 0.5, 0.2, 0.0, 0.3],
                [0.2, 0.0, 0.6, 0.0, 0.2],
                [0.1, 0.0, 0.0, 0.6, 0.3],
                [0.3, 0.0, 0.0, 0.0, 0.7],
                [0.0, 0.0, 0.0, 0.0, 1.0],
            ],
            "holding": [
                {"from": "Active", "to": "Training", "kind": "geometric", "rho": 0.30},
                {"from": "Active", "to": "Preparing", "kind": "geometric", "rho": 0.25},
                {"from": "Active", "to": "Neutral", "kind": "geometric", "rho": 0.15},
                {"from": "Training", "to": "Preparing", "kind": "geometric", "rho": 0.35},
                {"from": "Training", "to": "Active", "kind": "geometric", "rho": 0.20},
                {"from": "Training", "to": "Neutral", "kind": "geometric", "rho": 0.15},
                {"from": "Preparing", "to": "Mobilised", "kind": "geometric", "rho": 0.35},
                {"from": "Preparing", "to": "Active", "kind": "geometric", "rho": 0.15},
                {"from": "Preparing", "to": "Neutral", "kind": "geometric", "rho": 0.15},
                {"from": "Mobilised", "to": "Active", "kind": "geometric", "rho": 0.20},
                {"from": "Mobilised", "to": "Neutral", "kind": "geometric", "rho": 0.10},
            ],
            "duration_cap": 52,
        },
        "task_model": {
            "tasks": [
                {"name": name, "off": [1.6, 4.0], "on": [4.0, 1.6], "extractor": "mean"}
                for name in _TASKS
            ],
            "index_sets": {
                "Active": ["engage_radicalisers", "public_threats"],
                "Training": ["weapons_training", "engage_radicalisers"],
                "Preparing": ["acquire_materials", "reconnoitre"],
                "Mobilised": ["final_logistics", "reconnoitre"],
                "Neutral": [],
            },
            "task_probs": {
                "Active": {"engage_radicalisers": 0.80, "public_threats": 0.60},
                "Training": {"weapons_training": 0.85, "engage_radicalisers": 0.50},
                "Preparing": {"acquire_materials": 0.80, "reconnoitre": 0.70},
                "Mobilised": {"final_logistics": 0.90, "reconnoitre": 0.60},
                "Neutral": {},
            },
        },
        "channels": [
            {"id": "phone", "efficiency": 1.0, "r_max": 10.0, "scale_target": 10.0,
             "clamp": False, "summary_kind": "sum"}
        ],
        "edge_priors": {
            "default": [0.70, 1.41],
            "observed-communication": "empirical",
        },
        "discount": {"mode": "fixed", "value": 0.7},
        "entities": [
            {"id": "p1", "prior": dict(_PRIOR_LOW)},
            {"id": "p2", "prior": dict(_PRIOR_LOW)},
            {"id": "p3", "prior": dict(_PRIOR_LOW)},
            {"id": "p4", "prior": dict(_PRIOR_TRAINED)},
        ],
        "initial_edges": [
            {"pair": ["p1", "p2"], "origin": "kinship", "prior": [0.70, 1.41]},
            {"pair": ["p2", "p3"], "origin": "affiliation", "prior": [0.70, 1.41]},
        ],
        "cells": [
            {
                "id": "cell-A",
                "members": ["p1", "p2", "p3", "p4"],
                "ideal_size": 3.0,
                "threshold": 2.0,
                "individual_threat_states": ["Preparing", "Mobilised"],
                "cell_threat_states": ["Preparing", "Mobilised"],
                "prior": dict(_PRIOR_TRAINED),
            }
        ],
    }

    records: list[dict] = []
    for tick in range(1, 11):
        for (a, b), series in sorted(_PAIR_DATA.items()):
            records.append(
                {
                    "type": "pair",
                    "tick": tick,
                    "entity_a": a,
                    "entity_b": b,
                    "channel_id": "phone",
                    "raw_value": float(series[tick - 1]),
                    "monitored": True,
                }
            )
        for entity in sorted(_ACTIVITY):
            signals = _ACTIVITY[entity].get(tick)
            if signals:
                records.append(
                    {"type": "signals", "tick": tick, "entity": entity,
                     "signals": dict(sorted(signals.items()))}
                )
    return scenario, records


def write_bundled_worked_example(out_dir) -> tuple[str, str]:
    """Write scenario.json and observations.jsonl; returns their paths."""
    import json
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scenario, records = bundled_worked_example()
    scenario_path = out / "scenario.json"
    data_path = out / "observations.jsonl"
    scenario_path.write_text(json.dumps(scenario, indent=2) + "\n", encoding="utf-8")
    with open(data_path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return str(scenario_path), str(data_path)
