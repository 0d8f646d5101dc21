"""Orchestrator tests: phase order, atomicity, decoupling, determinism, what-if."""

import json

import numpy as np
import pytest

from cellwatch.edges import ObservationVector
from cellwatch.engine import (
    EdgeEvent,
    Intervention,
    TickBatch,
    batches_from_records,
    canonical_json,
    commit_tick,
    joint_log_marginal_likelihood,
    new_scenario_state,
    recompute_log_marginal,
    snapshot_dict,
    state_from_snapshot,
    what_if,
)
from cellwatch.scenario import ScenarioConfig
from cellwatch.simulate import bundled_worked_example
from cellwatch.states import SignalVector


@pytest.fixture(scope="module")
def config():
    scenario, _ = bundled_worked_example()
    return ScenarioConfig.from_json_dict(scenario)


@pytest.fixture(scope="module")
def records():
    _, recs = bundled_worked_example()
    return recs


def fresh_state(config):
    return new_scenario_state(config)


def obs(pair, value, tick, monitored=True):
    channels = {"phone": float(value)} if monitored else {}
    return ObservationVector(pair=pair, tick=tick, channels=channels, monitored=monitored)


def state_bytes(state):
    return canonical_json(snapshot_dict(state)).encode()


class TestCommitBasics:
    def test_tick_must_follow(self, config):
        state = fresh_state(config)
        with pytest.raises(ValueError, match="does not follow"):
            commit_tick(state, TickBatch(tick=5))

    def test_empty_batch_advances_beliefs_only(self, config):
        state = fresh_state(config)
        new, report = commit_tick(state, TickBatch(tick=1))
        assert new.tick == 1
        # state filters advanced by prediction
        for eid in state.entity_beliefs:
            assert not np.allclose(
                new.entity_beliefs[eid].joint, state.entity_beliefs[eid].joint
            )
            assert report.entities[eid]["log_evidence"] == 0.0
        # no observations: edge beliefs untouched, discount deferred
        for pair, rec in state.graph.live_edges().items():
            assert new.graph.edges[pair].belief == rec.belief
        assert report.log_marginal_increment == 0.0
        assert len(report.indicators) == 1

    def test_auto_edge_creation_on_nonzero_communication(self, config):
        state = fresh_state(config)
        batch = TickBatch(tick=1, observations=[obs(("p1", "p4"), 2.0, 1)])
        new, report = commit_tick(state, batch)
        assert new.graph.has_live_edge("p1", "p4")
        assert "p1|p4" in report.created_edges
        rec = new.graph.edge("p1", "p4")
        # empirical initialization: first posterior equals (sum s, sum xi)
        assert (rec.belief.alpha, rec.belief.beta) == (2.0, 1.0)

    def test_zero_observation_on_non_edge_is_ignored(self, config):
        state = fresh_state(config)
        batch = TickBatch(tick=1, observations=[obs(("p1", "p4"), 0.0, 1)])
        new, report = commit_tick(state, batch)
        assert not new.graph.has_live_edge("p1", "p4")
        assert report.created_edges == ()

    def test_explicit_edge_event_with_prior(self, config):
        state = fresh_state(config)
        batch = TickBatch(
            tick=1, edge_events=[EdgeEvent(pair=("p3", "p4"), origin="kinship",
                                           prior=(2.0, 1.0))]
        )
        new, _ = commit_tick(state, batch)
        rec = new.graph.edge("p3", "p4")
        assert rec.origin == "kinship"
        assert (rec.belief.alpha, rec.belief.beta) == (2.0, 1.0)

    def test_monitored_zero_is_evidence(self, config):
        state = fresh_state(config)
        batch = TickBatch(tick=1, observations=[obs(("p1", "p2"), 0.0, 1)])
        new, _ = commit_tick(state, batch)
        belief = new.graph.edge("p1", "p2").belief
        assert belief.alpha == pytest.approx(0.70)
        assert belief.beta == pytest.approx(2.41)

    def test_first_update_applies_no_discount(self, config):
        state = fresh_state(config)
        batch = TickBatch(tick=1, observations=[obs(("p1", "p2"), 3.0, 1)])
        new, report = commit_tick(state, batch)
        entry = report.edges["p1|p2"]
        assert entry["prior"] == [0.70, 1.41]
        assert entry["deltas"] == []

    def test_discount_applies_from_second_update(self, config):
        state = fresh_state(config)
        state, _ = commit_tick(state, TickBatch(tick=1, observations=[obs(("p1", "p2"), 0.0, 1)]))
        state, report = commit_tick(state, TickBatch(tick=2, observations=[obs(("p1", "p2"), 3.0, 2)]))
        entry = report.edges["p1|p2"]
        assert entry["deltas"] == [0.7]
        assert entry["prior"][0] == pytest.approx(0.49)
        assert entry["prior"][1] == pytest.approx(1.687)
        assert entry["posterior"][0] == pytest.approx(3.49)
        assert entry["posterior"][1] == pytest.approx(2.687)

    def test_unmonitored_gap_defers_discount_multiplicatively(self, config):
        # update at t1, silence at t2-t3, update at t4: three discounts at once
        state = fresh_state(config)
        state, _ = commit_tick(state, TickBatch(tick=1, observations=[obs(("p1", "p2"), 1.0, 1)]))
        after_t1 = state.graph.edge("p1", "p2").belief
        state, _ = commit_tick(state, TickBatch(tick=2))
        state, _ = commit_tick(state, TickBatch(tick=3))
        assert state.graph.edge("p1", "p2").belief == after_t1
        state, report = commit_tick(
            state, TickBatch(tick=4, observations=[obs(("p1", "p2"), 2.0, 4)])
        )
        entry = report.edges["p1|p2"]
        assert entry["deltas"] == [0.7, 0.7, 0.7]
        assert entry["prior"][0] == pytest.approx(after_t1.alpha * 0.7**3, rel=1e-12)
        assert entry["prior"][1] == pytest.approx(after_t1.beta * 0.7**3, rel=1e-12)

    def test_population_phases_and_entity_belief(self, config):
        state = fresh_state(config)
        batch = TickBatch(
            tick=1,
            additions=[("p9", {"Active": 1.0})],
            removals=["p3"],
        )
        new, report = commit_tick(state, batch)
        assert "p9" in new.entity_beliefs
        assert "p9" in new.graph.present_ids()
        assert "p3" not in new.graph.present_ids()
        # removal happens after indicators: the tick's report still covers p3
        assert "p3" in report.indicators[0].inputs["members"]
        assert report.added == ("p9",) and report.removed == ("p3",)


class TestAtomicity:
    def test_failed_batch_leaves_state_bitwise_unchanged(self, config):
        state = fresh_state(config)
        state, _ = commit_tick(state, TickBatch(tick=1, observations=[obs(("p1", "p2"), 1.0, 1)]))
        before = state_bytes(state)
        bad = TickBatch(
            tick=2,
            observations=[obs(("p1", "p2"), 1.0, 2)],
            removals=["nobody-here"],
        )
        with pytest.raises(KeyError):
            commit_tick(state, bad)
        assert state_bytes(state) == before

    def test_unknown_channel_aborts_commit(self, config):
        state = fresh_state(config)
        before = state_bytes(state)
        bad = TickBatch(
            tick=1,
            observations=[
                ObservationVector(pair=("p1", "p2"), tick=1, channels={"fax": 1.0})
            ],
        )
        with pytest.raises(KeyError):
            commit_tick(state, bad)
        assert state_bytes(state) == before


class TestDecoupling:
    def test_touching_one_pair_leaves_others_bitwise_unchanged(self, config):
        state = fresh_state(config)
        state, _ = commit_tick(
            state,
            TickBatch(tick=1, observations=[obs(("p1", "p2"), 1.0, 1),
                                            obs(("p2", "p3"), 2.0, 1)]),
        )
        targeted = TickBatch(
            tick=2,
            observations=[obs(("p1", "p2"), 4.0, 2)],
            signals={"p1": SignalVector([0.9, np.nan, np.nan, np.nan, np.nan, np.nan], tick=2)},
        )
        empty = TickBatch(tick=2)
        with_data, _ = commit_tick(state, targeted)
        without, _ = commit_tick(state, empty)
        # untouched pair evolves identically (bitwise)
        a = with_data.graph.edge("p2", "p3").belief
        b = without.graph.edge("p2", "p3").belief
        assert (a.alpha, a.beta, a.last_observed_effort) == (b.alpha, b.beta, b.last_observed_effort)
        # untouched entities evolve identically (bitwise)
        for eid in ("p2", "p3", "p4"):
            assert np.array_equal(
                with_data.entity_beliefs[eid].joint, without.entity_beliefs[eid].joint
            )
        # the touched ones differ
        assert not np.array_equal(
            with_data.entity_beliefs["p1"].joint, without.entity_beliefs["p1"].joint
        )
        assert with_data.graph.edge("p1", "p2").belief != state.graph.edge("p1", "p2").belief


class TestDeterminism:
    def test_observation_order_within_batch_is_irrelevant(self, config, records):
        batches = batches_from_records(records, config)
        fwd = fresh_state(config)
        rev = fresh_state(config)
        for batch in batches:
            fwd, _ = commit_tick(fwd, batch)
            shuffled = TickBatch(
                tick=batch.tick,
                signals=dict(reversed(list(batch.signals.items()))),
                observations=tuple(reversed(batch.observations)),
                additions=batch.additions,
                removals=batch.removals,
                edge_events=batch.edge_events,
            )
            rev, _ = commit_tick(rev, shuffled)
        assert state_bytes(fwd) == state_bytes(rev)

    def test_worker_count_does_not_change_bits(self, config, records):
        batches = batches_from_records(records, config)
        solo = fresh_state(config)
        pooled = fresh_state(config)
        solo_reports, pooled_reports = [], []
        for batch in batches:
            solo, r1 = commit_tick(solo, batch, workers=1)
            pooled, r2 = commit_tick(pooled, batch, workers=4)
            solo_reports.append(canonical_json(r1.to_json_dict()))
            pooled_reports.append(canonical_json(r2.to_json_dict()))
        assert state_bytes(solo) == state_bytes(pooled)
        assert solo_reports == pooled_reports

    def test_full_replay_is_reproducible(self, config, records):
        def run():
            state = fresh_state(config)
            for batch in batches_from_records(records, config):
                state, _ = commit_tick(state, batch)
            return state_bytes(state)

        assert run() == run()


class TestLogMarginal:
    def test_zero_ticks_is_zero(self, config):
        assert joint_log_marginal_likelihood(fresh_state(config)) == 0.0

    def test_single_term_matches_predictive(self, config):
        from cellwatch.edges import predictive_log_likelihood

        state = fresh_state(config)
        new, report = commit_tick(
            state, TickBatch(tick=1, observations=[obs(("p1", "p2"), 2.0, 1)])
        )
        prior = state.graph.edge("p1", "p2").belief
        expected = predictive_log_likelihood(prior, obs(("p1", "p2"), 2.0, 1),
                                             config.channels)
        assert joint_log_marginal_likelihood(new) == pytest.approx(expected, rel=1e-12)

    def test_additivity_and_replay_consistency(self, config, records):
        batches = batches_from_records(records, config)
        state = fresh_state(config)
        halves = []
        for k, batch in enumerate(batches):
            state, _ = commit_tick(state, batch)
            if k == 4:
                halves.append(state.cum_log_marginal)
        total = joint_log_marginal_likelihood(state)
        assert abs(recompute_log_marginal(state) - total) <= 1e-9
        increments = sum(r.log_marginal_increment for r in state.event_log[5:])
        assert halves[0] + increments == pytest.approx(total, abs=1e-9)

    def test_empirical_creation_tick_contributes_no_forecast(self, config):
        state = fresh_state(config)
        new, report = commit_tick(
            state, TickBatch(tick=1, observations=[obs(("p1", "p4"), 2.0, 1)])
        )
        assert report.edges["p1|p4"]["channels"] == []
        assert report.edges["p1|p4"]["log_forecast"] == 0.0


class TestWhatIf:
    def run_some_ticks(self, config, records, n=6):
        state = fresh_state(config)
        for batch in batches_from_records(records, config)[:n]:
            state, _ = commit_tick(state, batch)
        return state

    def test_sever_nothing_changes_nothing(self, config, records):
        state = self.run_some_ticks(config, records)
        result = what_if(state, Intervention(kind="set_threshold", cell_id="cell-A",
                                             value=state.graph.cells["cell-A"].threshold))
        for before, after in zip(result.before, result.after):
            assert before.measures == after.measures
            assert before.indicators == after.indicators

    def test_remove_member_with_full_threat_cannot_lower_m2(self, config, records):
        state = self.run_some_ticks(config, records)
        result = what_if(
            state, Intervention(kind="remove_member", cell_id="cell-A", member="p4")
        )
        assert result.after[0].measures[1] >= result.before[0].measures[1] - 1e-15
        assert state.graph.cells["cell-A"].members == frozenset({"p1", "p2", "p3", "p4"})

    def test_remove_articulation_member_flags_connectivity(self, config):
        # path p1 - p2 - p3 - p4: dropping p2 disconnects the cell
        state = fresh_state(config)
        state, _ = commit_tick(
            state,
            TickBatch(tick=1, observations=[obs(("p1", "p2"), 1.0, 1),
                                            obs(("p2", "p3"), 1.0, 1),
                                            obs(("p3", "p4"), 1.0, 1)]),
        )
        result = what_if(
            state, Intervention(kind="remove_member", cell_id="cell-A", member="p3")
        )
        assert result.after[0].inputs["connectivity_broken"]

    def test_sever_edge_recomputes_cohesion_and_density(self, config, records):
        state = self.run_some_ticks(config, records, n=8)
        result = what_if(
            state, Intervention(kind="sever_edge", pair=("p1", "p2"))
        )
        assert result.after[0].measures[3] < result.before[0].measures[3]
        assert state.graph.has_live_edge("p1", "p2")  # original untouched

    def test_set_edge_belief(self, config, records):
        state = self.run_some_ticks(config, records)
        result = what_if(
            state,
            Intervention(kind="set_edge_belief", pair=("p1", "p2"), alpha=50.0, beta=1.0),
        )
        assert result.after[0].measures[2] >= result.before[0].measures[2]


class TestSnapshots:
    def test_round_trip_bytes(self, config, records):
        state = fresh_state(config)
        for batch in batches_from_records(records, config)[:5]:
            state, _ = commit_tick(state, batch)
        blob = canonical_json(snapshot_dict(state))
        revived = state_from_snapshot(json.loads(blob))
        assert canonical_json(snapshot_dict(revived)) == blob

    def test_resume_equals_uninterrupted(self, config, records):
        batches = batches_from_records(records, config)
        straight = fresh_state(config)
        for batch in batches:
            straight, _ = commit_tick(straight, batch)

        partial = fresh_state(config)
        for batch in batches[:5]:
            partial, _ = commit_tick(partial, batch)
        resumed = state_from_snapshot(json.loads(canonical_json(snapshot_dict(partial))))
        for batch in batches[5:]:
            resumed, _ = commit_tick(resumed, batch)
        assert state_bytes(resumed) == state_bytes(straight)
