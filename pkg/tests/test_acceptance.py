"""Acceptance suite: one test (or test group) per criterion, with stated
tolerances pinned.

Criterion 1 is implemented exactly as stated and is an expected failure: the
published reference trajectory is numerically inconsistent with the stated
0.7 discount (see notes in the decisions ledger outside the package).  The
companion test pins the whole trajectory at the effective discount recovered
from the table itself, which passes and guards the replay machinery.
"""

import json
import math
import time

import numpy as np
import pytest
from scipy import integrate, stats

from cellwatch.edges import EdgeBelief, evolve_prior
from cellwatch.engine import (
    TickBatch,
    batches_from_records,
    canonical_json,
    commit_tick,
    new_scenario_state,
    snapshot_dict,
)
from cellwatch.indicators import attack_indicators
from cellwatch.scenario import ScenarioConfig
from cellwatch.simulate import bundled_worked_example
from cellwatch.states import (
    StateBelief,
    TableHolding,
    ThreatStateSpace,
    TransitionModel,
    predict_step,
    update_step,
)

from conftest import register_acceptance

# ---------------------------------------------------------------------------
# Reference data for the bundled ten-tick replay: displayed 2-dp values of the
# per-pair (alpha, beta) prior/posterior trajectory.  kind 0 = prior, 1 = post.

REFERENCE_EDGE_PARAMS = {}


def _ref(pair, tick, kind, alpha, beta):
    REFERENCE_EDGE_PARAMS[(pair, tick, kind)] = (alpha, beta)


for line in """
p1|p2 1 0 0.70 1.41 ; p2|p3 1 0 0.70 1.41
p1|p2 1 1 0.70 2.41 ; p2|p3 1 1 0.70 2.41
p1|p2 2 0 0.50 1.70 ; p2|p3 2 0 0.50 1.70
p1|p2 2 1 3.50 2.70 ; p2|p3 2 1 1.50 2.70
p1|p2 3 0 2.46 1.90 ; p2|p3 3 0 1.05 1.90
p1|p2 3 1 7.46 2.90 ; p1|p4 3 1 2.00 1.00 ; p2|p3 3 1 1.05 2.90
p1|p2 4 0 5.26 2.04 ; p1|p4 4 0 1.41 0.70 ; p2|p3 4 0 0.74 2.04
p1|p2 4 1 10.26 3.04 ; p1|p4 4 1 6.41 1.70 ; p2|p3 4 1 0.74 3.04
p1|p2 5 0 7.23 2.15 ; p1|p4 5 0 4.52 1.20 ; p2|p3 5 0 0.52 2.15
p1|p2 5 1 12.23 3.15 ; p1|p3 5 1 2.00 1.00 ; p1|p4 5 1 9.52 2.20 ; p2|p3 5 1 0.52 3.15 ; p2|p4 5 1 1.00 1.00
p1|p2 6 0 8.62 2.22 ; p1|p3 6 0 1.41 0.70 ; p1|p4 6 0 6.71 1.55 ; p2|p3 6 0 0.37 2.22 ; p2|p4 6 0 0.70 0.70
p1|p2 6 1 13.62 3.22 ; p1|p3 6 1 7.41 1.70 ; p1|p4 6 1 12.71 2.55 ; p2|p3 6 1 5.37 3.22 ; p2|p4 6 1 6.70 1.70 ; p3|p4 6 1 1.00 1.00
p1|p2 7 0 9.60 2.27 ; p1|p3 7 0 5.22 1.20 ; p1|p4 7 0 8.95 1.80 ; p2|p3 7 0 3.78 2.27 ; p2|p4 7 0 4.72 1.20 ; p3|p4 7 0 0.70 0.70
p1|p2 7 1 16.60 3.27 ; p1|p3 7 1 11.22 2.20 ; p1|p4 7 1 15.95 2.80 ; p2|p3 7 1 9.78 3.27 ; p2|p4 7 1 11.72 2.20 ; p3|p4 7 1 7.70 1.70
p1|p2 8 0 11.70 2.30 ; p1|p3 8 0 7.91 1.55 ; p1|p4 8 0 11.24 1.97 ; p2|p3 8 0 6.89 2.30 ; p2|p4 8 0 8.26 1.55 ; p3|p4 8 0 5.43 1.20
p1|p2 8 1 17.70 3.30 ; p1|p3 8 1 13.91 2.55 ; p1|p4 8 1 19.24 2.97 ; p2|p3 8 1 10.89 3.30 ; p2|p4 8 1 16.26 2.55 ; p3|p4 8 1 13.43 2.20
p1|p2 9 0 12.47 2.33 ; p1|p3 9 0 9.80 1.80 ; p1|p4 9 0 13.56 2.09 ; p2|p3 9 0 7.68 2.33 ; p2|p4 9 0 11.46 1.80 ; p3|p4 9 0 9.46 1.55
p1|p2 9 1 19.47 3.33 ; p1|p3 9 1 16.80 2.80 ; p1|p4 9 1 22.56 3.09 ; p2|p3 9 1 14.68 3.33 ; p2|p4 9 1 20.46 2.80 ; p3|p4 9 1 18.46 2.55
p1|p2 10 0 13.72 2.34 ; p1|p3 10 0 11.84 1.97 ; p1|p4 10 0 15.90 2.18 ; p2|p3 10 0 10.34 2.34 ; p2|p4 10 0 14.42 1.97 ; p3|p4 10 0 13.01 1.80
p1|p2 10 1 20.72 3.34 ; p1|p3 10 1 19.84 2.97 ; p1|p4 10 1 26.90 3.18 ; p2|p3 10 1 18.34 3.34 ; p2|p4 10 1 24.42 2.97 ; p3|p4 10 1 23.01 2.80
""".strip().splitlines():
    for cell in line.split(";"):
        pair, tick, kind, alpha, beta = cell.split()
        _ref(pair, int(tick), int(kind), float(alpha), float(beta))

# effective discount recovered from the reference trajectory itself (the
# best-fitting constant; the stated 0.7 does not reproduce the table)
RECOVERED_DISCOUNT = 0.7048


def _replay_bundled(discount=None, workers=1):
    scenario, records = bundled_worked_example()
    if discount is not None:
        scenario = json.loads(json.dumps(scenario))
        scenario["discount"]["value"] = discount
        for edge in scenario.get("initial_edges", []):
            edge.setdefault("origin", "kinship")
    config = ScenarioConfig.from_json_dict(scenario)
    state = new_scenario_state(config)
    reports = []
    for batch in batches_from_records(records, config):
        state, report = commit_tick(state, batch, workers=workers)
        reports.append(report)
    return config, state, reports


def _edge_param_errors(reports, tolerance):
    seen = {}
    for report in reports:
        for key, entry in report.edges.items():
            if (key, report.tick, 0) in REFERENCE_EDGE_PARAMS:
                seen[(key, report.tick, 0)] = tuple(entry["prior"])
            if (key, report.tick, 1) in REFERENCE_EDGE_PARAMS:
                seen[(key, report.tick, 1)] = tuple(entry["posterior"])
    missing = set(REFERENCE_EDGE_PARAMS) - set(seen)
    failures = []
    for key, (ref_a, ref_b) in REFERENCE_EDGE_PARAMS.items():
        if key in missing:
            failures.append((key, "missing", None))
            continue
        got_a, got_b = seen[key]
        if abs(got_a - ref_a) > tolerance or abs(got_b - ref_b) > tolerance:
            failures.append((key, (got_a, got_b), (ref_a, ref_b)))
    return failures


@register_acceptance(1, "bundled replay reproduces the reference (alpha, beta) table")
@pytest.mark.xfail(
    strict=True,
    reason="the reference table is numerically inconsistent with the stated 0.7 "
    "discount: its own beta column implies an effective discount near 0.7048 "
    "(first breach: second-tick prior beta 1.687 vs displayed 1.70); "
    "documented in the decisions ledger",
)
def test_criterion_1_replay_as_specified():
    started = time.perf_counter()
    _, _, reports = _replay_bundled(discount=0.7)
    failures = _edge_param_errors(reports, tolerance=0.01 + 1e-9)
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"replay took {elapsed:.3f}s"
    assert not failures, f"{len(failures)} reference entries off: {failures[:5]}"


@register_acceptance(1, "bundled replay reproduces the reference (alpha, beta) table")
def test_criterion_1_replay_at_recovered_discount():
    """Same replay and tolerance with the table's own effective discount."""
    started = time.perf_counter()
    _, _, reports = _replay_bundled(discount=RECOVERED_DISCOUNT)
    failures = _edge_param_errors(reports, tolerance=0.01 + 1e-9)
    elapsed = time.perf_counter() - started
    assert not failures, f"{len(failures)} reference entries off: {failures[:5]}"
    assert elapsed < 1.0, f"replay took {elapsed:.3f}s"


@register_acceptance(1, "bundled replay reproduces the reference (alpha, beta) table")
def test_criterion_1_discount_free_structure_holds_as_specified():
    """The parts of the reference table that do not depend on the discount:
    per-tick posterior gains equal the observed data and channel efficiency,
    and newly observed pairs open at the empirical (sum s, sum xi)."""
    _, _, reports = _replay_bundled(discount=0.7)
    _, records = bundled_worked_example()
    data = {}
    for rec in records:
        if rec["type"] == "pair":
            key = f"{rec['entity_a']}|{rec['entity_b']}"
            data[(key, rec["tick"])] = rec["raw_value"]
    for report in reports:
        for key, entry in report.edges.items():
            gain_a = entry["posterior"][0] - entry["prior"][0]
            gain_b = entry["posterior"][1] - entry["prior"][1]
            assert gain_a == pytest.approx(data[(key, report.tick)], abs=1e-12)
            assert gain_b == pytest.approx(1.0, abs=1e-12)
    creations = {
        ("p1|p4", 3): (2.0, 1.0),
        ("p1|p3", 5): (2.0, 1.0),
        ("p2|p4", 5): (1.0, 1.0),
        ("p3|p4", 6): (1.0, 1.0),
    }
    for (key, tick), expected in creations.items():
        report = reports[tick - 1]
        assert key in report.created_edges
        assert tuple(report.edges[key]["posterior"]) == expected


# ---------------------------------------------------------------------------
# Criterion 2: multi-channel replay at +-0.001.

MULTI_EXPECTED = {
    # (pair, tick, kind): (alpha, beta); kind 0 prior, 1 post; ticks 1..3
    ("x1|x2", 1, 0): (0.70, 1.41),
    ("x1|x2", 1, 1): (1.914, 3.01),
    ("x1|x2", 2, 0): (1.3398, 2.107),
    ("x1|x2", 2, 1): (3.6968, 3.707),
    ("x1|x2", 3, 0): (2.5878, 2.5949),
    ("x1|x2", 3, 1): (4.9808, 4.1949),
    ("x2|x3", 1, 0): (0.70, 1.41),
    ("x2|x3", 1, 1): (3.164, 4.01),
    ("x2|x3", 2, 0): (2.2148, 2.807),
    ("x2|x3", 2, 1): (5.8007, 5.407),
    ("x2|x3", 3, 0): (4.0605, 3.7849),
    ("x2|x3", 3, 1): (8.8894, 6.3849),
}

MULTI_DATA = {
    ("x1", "x2"): {"calls": [0.857, 0.571, 1.143], "texts": [0.357, 1.786, 1.25]},
    ("x2", "x3"): {"calls": [2.286, 3.429, 4.286], "texts": [0.107, 0.1429, 0.1429],
                   "bank": [0.071, 0.014, 0.4]},
}


def _minimal_scenario(entities, channels, initial_edges, discount=0.7):
    return {
        "version": 1,
        "name": "minimal",
        "seed": 1,
        "state_model": {
            "states": ["Watch", "Done"],
            "absorbing": ["Done"],
            "embedded": [[0.0, 1.0], [0.0, 1.0]],
            "holding": [{"from": "Watch", "to": "Done", "kind": "geometric", "rho": 0.5}],
            "duration_cap": 8,
        },
        "task_model": {
            "tasks": [{"name": "watchlist", "off": [1.5, 3.0], "on": [3.0, 1.5]}],
            "index_sets": {"Watch": ["watchlist"], "Done": []},
            "task_probs": {"Watch": {"watchlist": 0.7}, "Done": {}},
        },
        "channels": channels,
        "edge_priors": {"default": [0.70, 1.41]},
        "discount": {"mode": "fixed", "value": discount},
        "entities": [{"id": e, "prior": {"Watch": 1.0}} for e in entities],
        "initial_edges": initial_edges,
        "cells": [],
    }


@register_acceptance(2, "multi-channel replay reproduces the scaled worked rows")
def test_criterion_2_multichannel_replay():
    started = time.perf_counter()
    scenario = _minimal_scenario(
        ["x1", "x2", "x3"],
        [
            {"id": "calls", "efficiency": 0.8, "r_max": 35.0},
            {"id": "texts", "efficiency": 0.8, "r_max": 1400.0},
            {"id": "bank", "efficiency": 1.0, "r_max": 70000.0},
        ],
        [
            {"pair": ["x1", "x2"], "origin": "kinship", "prior": [0.70, 1.41]},
            {"pair": ["x2", "x3"], "origin": "affiliation", "prior": [0.70, 1.41]},
        ],
    )
    config = ScenarioConfig.from_json_dict(scenario)
    records = []
    for (a, b), per_channel in MULTI_DATA.items():
        for cid, series in per_channel.items():
            for t, value in enumerate(series, start=1):
                records.append(
                    {"type": "pair", "tick": t, "entity_a": a, "entity_b": b,
                     "channel_id": cid, "scaled_value": value, "raw_value": value}
                )
    state = new_scenario_state(config)
    got = {}
    for batch in batches_from_records(records, config):
        state, report = commit_tick(state, batch)
        for key, entry in report.edges.items():
            got[(key, report.tick, 0)] = tuple(entry["prior"])
            got[(key, report.tick, 1)] = tuple(entry["posterior"])
    for key, (ref_a, ref_b) in MULTI_EXPECTED.items():
        assert got[key][0] == pytest.approx(ref_a, abs=1e-3), key
        assert got[key][1] == pytest.approx(ref_b, abs=1e-3), key
    assert time.perf_counter() - started < 1.0


# ---------------------------------------------------------------------------
# Criterion 3: indicator composition against the reference measure rows.

INDICATOR_TABLE = {
    # column label -> (m1..m5, phi0..phi4) as displayed at 2 dp
    "prior": ((0.15, 0.00, 0.14, 0.67, 0.83), (0.00, 0.01, 0.08, 0.55, 0.83)),
    "t1": ((0.21, 0.00, 0.05, 0.67, 0.83), (0.00, 0.01, 0.12, 0.55, 0.83)),
    "t2": ((0.26, 0.01, 0.14, 0.67, 0.83), (0.00, 0.02, 0.14, 0.55, 0.83)),
    "t3": ((0.32, 0.01, 0.04, 0.67, 0.89), (0.00, 0.01, 0.19, 0.59, 0.89)),
    "t4": ((0.45, 0.04, 0.03, 0.67, 0.89), (0.00, 0.01, 0.27, 0.59, 0.89)),
    "t5": ((0.71, 0.09, 0.00, 0.67, 0.89), (0.00, 0.04, 0.42, 0.63, 0.89)),
    "t6": ((0.96, 0.22, 0.30, 0.67, 0.89), (0.04, 0.17, 0.57, 0.86, 0.96)),
    "t7": ((0.99, 0.31, 1.00, 0.67, 0.89), (0.18, 0.58, 0.88, 0.99, 1.00)),
    "t8": ((1.00, 0.32, 1.00, 0.67, 0.89), (0.19, 0.59, 0.88, 1.00, 1.00)),
    "t9": ((1.00, 0.31, 1.00, 0.67, 0.89), (0.19, 0.59, 0.89, 1.00, 1.00)),
    "t10": ((1.00, 0.36, 1.00, 0.67, 0.89), (0.21, 0.59, 0.89, 1.00, 1.00)),
}


@register_acceptance(3, "indicator composition reproduces the reference phi rows")
def test_criterion_3_indicator_composition():
    started = time.perf_counter()
    for label, (measures, phi_ref) in INDICATOR_TABLE.items():
        phi = attack_indicators(measures)
        rounded = [round(v, 2) for v in phi]
        for got, want in zip(rounded, phi_ref):
            assert abs(got - want) <= 0.01 + 1e-9, (label, rounded, phi_ref)
    # spot anchor at the final column
    final = [round(v, 2) for v in attack_indicators(INDICATOR_TABLE["t10"][0])]
    assert final == pytest.approx([0.21, 0.60, 0.89, 1.00, 1.00], abs=0.011)
    assert time.perf_counter() - started < 1.0


# ---------------------------------------------------------------------------
# Criterion 4: likelihood-decomposition oracle.

COUNTS = {
    ("y1", "y2"): {"c1": [1, 0, 2, 1, 3], "c2": [2, 1, 0, 2, 4]},
    ("y1", "y3"): {"c1": [0, 0, 1, 0, 1], "c2": [1, 3, 2, 1, 0]},
    ("y2", "y3"): {"c1": [2, 2, 0, 1, 1], "c2": [0, 1, 1, 3, 2]},
}
PRIORS = {("y1", "y2"): (0.9, 1.2), ("y1", "y3"): (1.5, 2.0), ("y2", "y3"): (0.7, 1.41)}
XI = {"c1": 0.8, "c2": 1.0}
DELTA4 = 0.8


@register_acceptance(4, "sequential log marginal equals the quadrature joint")
def test_criterion_4_likelihood_decomposition_oracle():
    started = time.perf_counter()
    scenario = _minimal_scenario(
        ["y1", "y2", "y3"],
        [{"id": cid, "efficiency": xi, "r_max": 10.0} for cid, xi in XI.items()],
        [
            {"pair": list(pair), "origin": "affiliation", "prior": list(prior)}
            for pair, prior in PRIORS.items()
        ],
        discount=DELTA4,
    )
    config = ScenarioConfig.from_json_dict(scenario)
    records = [
        {"type": "pair", "tick": t, "entity_a": a, "entity_b": b, "channel_id": cid,
         "scaled_value": float(series[t - 1]), "raw_value": float(series[t - 1])}
        for (a, b), per_channel in COUNTS.items()
        for cid, series in per_channel.items()
        for t in range(1, 6)
    ]
    state = new_scenario_state(config)
    for batch in batches_from_records(records, config):
        state, _ = commit_tick(state, batch)
    closed_form = state.cum_log_marginal

    # oracle: the same prior recurrence, but every one-step-ahead forecast is
    # computed by numerical integration of Poisson(s | xi * phi) against the
    # Gamma prior density, with the discounting interleaved between ticks
    per_term = {}
    for pair, per_channel in COUNTS.items():
        alpha, beta = PRIORS[pair]
        for t in range(1, 6):
            if t > 1:
                alpha, beta = DELTA4 * alpha, DELTA4 * beta
            for cid in sorted(per_channel):
                s = per_channel[cid][t - 1]
                xi = XI[cid]
                val, _ = integrate.quad(
                    lambda phi: stats.poisson.pmf(s, xi * phi)
                    * stats.gamma.pdf(phi, alpha, scale=1 / beta),
                    0.0, np.inf, limit=300,
                )
                per_term[(pair, t, cid)] = math.log(val)
            alpha += sum(per_channel[cid][t - 1] for cid in per_channel)
            beta += sum(XI[cid] for cid in per_channel)
    oracle = sum(per_term.values())
    assert closed_form == pytest.approx(oracle, rel=1e-6)

    # permutation invariance of the decomposition: summation order over pairs
    # and channels moves the total by no more than 1e-10
    keys = sorted(per_term)
    rng = np.random.default_rng(0)
    for _ in range(10):
        perm = list(keys)
        rng.shuffle(perm)
        assert abs(sum(per_term[k] for k in perm) - oracle) <= 1e-10
    assert time.perf_counter() - started < 10.0


# ---------------------------------------------------------------------------
# Criterion 5: semi-Markov filter versus a forward-simulation oracle.


@register_acceptance(5, "filtered posteriors match the path-simulation oracle")
def test_criterion_5_semi_markov_filter_oracle():
    started = time.perf_counter()
    space = ThreatStateSpace(["A", "B", "C"], absorbing=[2])
    embedded = np.array([[0.0, 0.7, 0.3], [0.4, 0.0, 0.6], [0.0, 0.0, 1.0]])
    tables = {
        (0, 1): [0.2, 0.5, 0.3],
        (0, 2): [0.6, 0.4],
        (1, 0): [0.5, 0.3, 0.2],
        (1, 2): [0.25, 0.75],
    }
    model = TransitionModel(
        space, embedded, {k: TableHolding(v) for k, v in tables.items()},
        duration_cap=15,
    )
    # discretized signals: two symbols with per-state emission probabilities
    emit = np.array([[0.8, 0.2], [0.3, 0.7], [0.5, 0.5]])
    symbols = [0, 1, 1, 0, 1, 1, 1, 0, 1, 1]
    pi0 = np.array([0.6, 0.4, 0.0])
    n_ticks = len(symbols)

    belief = StateBelief.from_marginal(pi0, model.duration_cap)
    filtered = []
    for z in symbols:
        belief = update_step(predict_step(belief, model, 1), emit[:, z])
        filtered.append(belief.marginal())
    filtered = np.array(filtered)

    # oracle: simulate dwell-table paths on the embedded chain, then weight
    # every path by the likelihood of the observed symbols along its prefix
    n_paths, n_batches = 200_000, 20
    rng = np.random.default_rng(2026)
    outcomes = {}
    for i in (0, 1):
        entries = []
        for j in range(3):
            if embedded[i, j] <= 0:
                continue
            for d, q in enumerate(tables[(i, j)], start=1):
                entries.append((j, d, embedded[i, j] * q))
        targets = np.array([e[0] for e in entries])
        dwells = np.array([e[1] for e in entries])
        cdf = np.cumsum([e[2] for e in entries])
        outcomes[i] = (targets, dwells, cdf / cdf[-1])

    state = np.where(rng.random(n_paths) < pi0[0], 0, 1)
    dwell_left = np.zeros(n_paths, dtype=int)
    target = np.full(n_paths, -1)
    for i in (0, 1):
        mask = state == i
        t_i, d_i, cdf_i = outcomes[i]
        idx = np.searchsorted(cdf_i, rng.random(mask.sum()))
        dwell_left[mask] = d_i[idx]
        target[mask] = t_i[idx]

    paths = np.empty((n_paths, n_ticks), dtype=int)
    for t in range(n_ticks):
        active = state != 2
        dwell_left[active] -= 1
        jumping = active & (dwell_left == 0)
        state[jumping] = target[jumping]
        for i in (0, 1):
            mask = jumping & (state == i)
            if mask.any():
                t_i, d_i, cdf_i = outcomes[i]
                idx = np.searchsorted(cdf_i, rng.random(mask.sum()))
                dwell_left[mask] = d_i[idx]
                target[mask] = t_i[idx]
        paths[:, t] = state

    lik = emit[paths, np.array(symbols)[None, :]]
    weights = np.cumprod(lik, axis=1)

    batches = np.array_split(np.arange(n_paths), n_batches)
    for t in range(n_ticks):
        w = weights[:, t]
        for i in range(3):
            hits = (paths[:, t] == i).astype(float)
            estimates = [
                float(np.sum(w[b] * hits[b]) / np.sum(w[b])) for b in batches
            ]
            oracle = float(np.mean(estimates))
            se = float(np.std(estimates, ddof=1) / math.sqrt(n_batches))
            assert abs(filtered[t, i] - oracle) <= 3 * max(se, 1e-9), (
                f"tick {t + 1} state {i}: filter {filtered[t, i]:.5f} "
                f"oracle {oracle:.5f} +- {se:.5f}"
            )
    assert time.perf_counter() - started < 60.0


# ---------------------------------------------------------------------------
# Criterion 6: always-on property suites.


@register_acceptance(6, "normalization, discount, chain, endpoints, isolation, determinism")
def test_criterion_6_belief_normalization_everywhere():
    _, state, reports = _replay_bundled()
    for belief in list(state.entity_beliefs.values()) + list(state.cell_beliefs.values()):
        assert abs(belief.joint.sum() - 1.0) <= 1e-12
    for report in reports:
        for entry in report.entities.values():
            assert abs(sum(entry["pi"]) - 1.0) <= 1e-12
        for entry in report.cells.values():
            assert abs(sum(entry["pi"]) - 1.0) <= 1e-12


@register_acceptance(6, "normalization, discount, chain, endpoints, isolation, determinism")
def test_criterion_6_discount_moments():
    for alpha in (0.2, 0.7, 3.0, 20.0):
        for beta in (0.3, 1.41, 8.0):
            b = EdgeBelief(pair=("a", "b"), alpha=alpha, beta=beta)
            for delta in (0.1, 0.5, 0.7, 0.99, 1.0):
                out = evolve_prior(b, delta)
                assert abs(out.mean - b.mean) <= 1e-12 * max(1.0, b.mean)
                assert out.variance / b.variance == pytest.approx(1 / delta, rel=1e-9)


@register_acceptance(6, "normalization, discount, chain, endpoints, isolation, determinism")
def test_criterion_6_indicator_chain_bulk():
    rng = np.random.default_rng(99)
    m = rng.random((10_000, 5))
    ordered = np.sort(m, axis=1)[:, ::-1]
    partials = np.cumprod(ordered, axis=1)[:, ::-1]  # phi[i] uses largest 5-i
    assert np.all(np.diff(partials, axis=1) >= -1e-15)
    for row in m[:25]:
        assert np.allclose(attack_indicators(row), np.cumprod(np.sort(row)[::-1])[::-1])


@register_acceptance(6, "normalization, discount, chain, endpoints, isolation, determinism")
def test_criterion_6_adaptive_discount_endpoints():
    from cellwatch.edges import adaptive_discount

    for d in (0.3, 0.7, 0.95):
        assert adaptive_discount(d, 0.0) == 1.0
        assert adaptive_discount(d, 50.0) == pytest.approx(d, abs=1e-9)


@register_acceptance(6, "normalization, discount, chain, endpoints, isolation, determinism")
def test_criterion_6_decoupling_isolation_bitwise():
    from cellwatch.edges import ObservationVector
    from cellwatch.states import SignalVector

    config, _, _ = _replay_bundled()
    state = new_scenario_state(config)
    warm = TickBatch(
        tick=1,
        observations=[
            ObservationVector(pair=("p1", "p2"), tick=1, channels={"phone": 1.0}),
            ObservationVector(pair=("p2", "p3"), tick=1, channels={"phone": 2.0}),
        ],
    )
    state, _ = commit_tick(state, warm)
    touched = TickBatch(
        tick=2,
        observations=[ObservationVector(pair=("p1", "p2"), tick=2, channels={"phone": 3.0})],
        signals={"p1": SignalVector([0.8] + [np.nan] * 5, tick=2)},
    )
    a, _ = commit_tick(state, touched)
    b, _ = commit_tick(state, TickBatch(tick=2))
    assert a.graph.edge("p2", "p3").belief == b.graph.edge("p2", "p3").belief
    for eid in ("p2", "p3", "p4"):
        assert np.array_equal(a.entity_beliefs[eid].joint, b.entity_beliefs[eid].joint)


@register_acceptance(6, "normalization, discount, chain, endpoints, isolation, determinism")
def test_criterion_6_replay_determinism_across_workers():
    _, solo, solo_reports = _replay_bundled(workers=1)
    _, pooled, pooled_reports = _replay_bundled(workers=4)
    assert canonical_json(snapshot_dict(solo)) == canonical_json(snapshot_dict(pooled))
    assert [canonical_json(r.to_json_dict()) for r in solo_reports] == [
        canonical_json(r.to_json_dict()) for r in pooled_reports
    ]


# ---------------------------------------------------------------------------
# Criterion 7: qualitative trajectory check on the bundled scenario (exact
# per-tick state trajectories have no externally fixed values; the oracle
# equivalence of criterion 5 covers the machinery).


@register_acceptance(7, "collective filter mobilises over the final ticks")
def test_criterion_7_cell_mobilisation_rises():
    config, state, reports = _replay_bundled()
    idx = config.space.index("Mobilised")
    series = [report.cells["cell-A"]["pi"][idx] for report in reports]
    assert series[-3] < series[-2] < series[-1], series[-3:]
