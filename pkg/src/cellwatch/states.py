"""Latent threat-state filtering for one monitored entity (or one cell).

The state model is semi-Markov: jump targets follow an embedded Markov
chain while dwell times in each state follow per-transition holding
distributions.  Exact filtering tracks the joint distribution over
(state, duration-in-state) on a truncated duration grid; the ordinary
state probability vector is the duration marginal.  Observed activity
signals enter through a two-layer task model: each state makes a subset
of preparatory tasks likely, and each task emits a bounded signal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence, Union

import numpy as np
from scipy import integrate, stats

__all__ = [
    "ThreatStateSpace",
    "GeometricHolding",
    "WeibullHolding",
    "TableHolding",
    "TransitionModel",
    "TransitionOperator",
    "StateBelief",
    "BetaDensity",
    "TaskEmission",
    "TaskModel",
    "SignalVector",
    "TotalEvidenceZero",
    "DegenerateHoldingSpec",
    "build_transition_operator",
    "predict_step",
    "signal_likelihood",
    "update_step",
    "filter_tick",
    "marginal_threat",
    "MISSING",
]

MISSING = float("nan")

_NORM_TOL = 1e-12


class TotalEvidenceZero(ValueError):
    """Every state supported by the belief assigns zero likelihood to the signals."""


class DegenerateHoldingSpec(ValueError):
    """Holding-time mass is exhausted below the duration cap at an occupied cell."""


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ThreatStateSpace:
    """Ordered threat states; absorbing indices mark terminal (no-threat) states."""

    states: tuple[str, ...]
    absorbing: frozenset[int]

    def __init__(self, states: Sequence[str], absorbing: Sequence[int] = ()):
        object.__setattr__(self, "states", tuple(states))
        object.__setattr__(self, "absorbing", frozenset(int(i) for i in absorbing))
        if len(self.states) < 2:
            raise ValueError("state space needs at least two states")
        if len(set(self.states)) != len(self.states):
            raise ValueError("state names must be unique")
        if any(i < 0 or i >= len(self.states) for i in self.absorbing):
            raise ValueError("absorbing index out of range")

    @property
    def m(self) -> int:
        return len(self.states)

    def index(self, name: str) -> int:
        return self.states.index(name)


# ---------------------------------------------------------------------------
# Holding-time distributions over dwell durations 1, 2, ... (in ticks).
#
# Each spec exposes the untruncated pmf and survival tail on 1..cap.  The
# transition operator works with the untruncated tail so that the duration
# cap behaves as an accumulating "cap bucket": hazards at the cap reuse the
# underlying distribution, which keeps geometric holding exactly memoryless.


@dataclass(frozen=True)
class GeometricHolding:
    """P(dwell = d) = rho * (1 - rho)^(d-1)."""

    rho: float

    def __post_init__(self):
        if not 0.0 < self.rho <= 1.0:
            raise ValueError("geometric holding needs rho in (0, 1]")

    def pmf_tail(self, cap: int) -> tuple[np.ndarray, np.ndarray]:
        d = np.arange(1, cap + 1)
        tail = (1.0 - self.rho) ** (d - 1)
        return self.rho * tail, tail


@dataclass(frozen=True)
class WeibullHolding:
    """Discretized Weibull dwell: P(dwell = d) = S(d-1) - S(d), S(x) = exp(-(x/scale)^shape)."""

    shape: float
    scale: float

    def __post_init__(self):
        if self.shape <= 0 or self.scale <= 0:
            raise ValueError("weibull holding needs positive shape and scale")

    def pmf_tail(self, cap: int) -> tuple[np.ndarray, np.ndarray]:
        d = np.arange(0, cap + 1, dtype=float)
        surv = np.exp(-((d / self.scale) ** self.shape))
        return surv[:-1] - surv[1:], surv[:-1]


@dataclass(frozen=True)
class TableHolding:
    """Explicit dwell table; probs[d-1] = P(dwell = d).  Mass beyond the table is zero."""

    probs: tuple[float, ...]

    def __init__(self, probs: Sequence[float]):
        object.__setattr__(self, "probs", tuple(float(p) for p in probs))
        if not self.probs or any(p < 0 for p in self.probs):
            raise ValueError("holding table must be nonempty and nonnegative")
        if abs(sum(self.probs) - 1.0) > 1e-9:
            raise ValueError("holding table must sum to 1")

    def pmf_tail(self, cap: int) -> tuple[np.ndarray, np.ndarray]:
        pmf = np.zeros(cap)
        n = min(cap, len(self.probs))
        pmf[:n] = self.probs[:n]
        # mass beyond the cap stays in the tail so the cap bucket can hold it
        beyond = sum(self.probs[cap:]) if len(self.probs) > cap else 0.0
        tail = np.cumsum(pmf[::-1])[::-1] + beyond
        return pmf, tail


Holding = Union[GeometricHolding, WeibullHolding, TableHolding]


def capped_pmf(holding: Holding, cap: int) -> np.ndarray:
    """Truncation-renormalized dwell pmf on {1..cap} (the validated view)."""
    pmf, _ = holding.pmf_tail(cap)
    total = pmf.sum()
    if total <= 0:
        raise ValueError("holding distribution has no mass below the duration cap")
    return pmf / total


@dataclass(frozen=True)
class TransitionModel:
    """Embedded jump chain plus per-transition holding distributions.

    ``embedded[i, j]`` is the probability that the next jump from state i
    lands in j; rows sum to one, non-absorbing diagonals are zero, and
    absorbing rows are unit vectors.  ``holding[(i, j)]`` gives the dwell
    distribution in i conditional on jumping to j.
    """

    space: ThreatStateSpace
    embedded: np.ndarray
    holding: Mapping[tuple[int, int], Holding]
    duration_cap: int = 52

    def __init__(self, space, embedded, holding, duration_cap: int = 52):
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "embedded", _frozen_array(embedded))
        object.__setattr__(self, "holding", dict(holding))
        object.__setattr__(self, "duration_cap", int(duration_cap))
        self._validate()

    def _validate(self):
        m = self.space.m
        if self.embedded.shape != (m, m):
            raise ValueError(f"embedded matrix must be {m}x{m}")
        if np.any(self.embedded < 0):
            raise ValueError("negative transition probability")
        if np.any(np.abs(self.embedded.sum(axis=1) - 1.0) > _NORM_TOL):
            raise ValueError("embedded rows must sum to 1")
        if self.duration_cap < 1:
            raise ValueError("duration cap must be positive")
        for i in range(m):
            if i in self.space.absorbing:
                unit = np.zeros(m)
                unit[i] = 1.0
                if not np.array_equal(self.embedded[i], unit):
                    raise ValueError(f"absorbing state {i} must map to itself")
                continue
            if self.embedded[i, i] != 0.0:
                raise ValueError(f"non-absorbing state {i} must have zero self-transition")
            for j in np.nonzero(self.embedded[i])[0]:
                if (i, int(j)) not in self.holding:
                    raise ValueError(f"missing holding distribution for transition {i}->{j}")
                capped_pmf(self.holding[(i, int(j))], self.duration_cap)

    @cached_property
    def operator(self) -> "TransitionOperator":
        m, cap = self.space.m, self.duration_cap
        hazard = np.zeros((m, m, cap))
        retention = np.ones((m, cap))
        survival = np.ones((m, cap))
        for i in range(m):
            if i in self.space.absorbing:
                continue
            pmf = np.zeros((m, cap))
            tail = np.zeros((m, cap))
            for j in np.nonzero(self.embedded[i])[0]:
                pmf[j], tail[j] = self.holding[(i, int(j))].pmf_tail(cap)
            w = self.embedded[i] @ tail  # survival mass at each dwell
            survival[i] = w
            live = w > 0
            hazard[i, :, live] = (self.embedded[i][None, :] * pmf[:, live].T) / w[live, None]
            retention[i] = np.clip(1.0 - hazard[i].sum(axis=0), 0.0, 1.0)
        return TransitionOperator(hazard=hazard, retention=retention, survival=survival)


@dataclass(frozen=True)
class TransitionOperator:
    """One-tick linear map on joint (state, duration) mass.

    hazard[i, j, d-1] is the probability of jumping i -> j at dwell d given
    survival to d; leftover mass keeps the state and moves one duration slot
    up, accumulating in the cap bucket.
    """

    hazard: np.ndarray
    retention: np.ndarray
    survival: np.ndarray

    def apply(self, joint: np.ndarray) -> np.ndarray:
        out = np.zeros_like(joint)
        out[:, 0] = np.einsum("id,ijd->j", joint, self.hazard)
        stay = joint * self.retention
        out[:, 1:] += stay[:, :-1]
        out[:, -1] += stay[:, -1]
        return out

    def matrix(self) -> np.ndarray:
        """Dense (m*cap, m*cap) matrix of the map, for small-instance tests."""
        m, cap = self.retention.shape
        cols = []
        for i in range(m):
            for d in range(cap):
                basis = np.zeros((m, cap))
                basis[i, d] = 1.0
                cols.append(self.apply(basis).ravel())
        return np.array(cols).T


@dataclass(frozen=True)
class StateBelief:
    """Joint P(state, duration-in-state) at a tick; rows states, columns dwell 1..cap."""

    joint: np.ndarray
    tick: int = 0

    def __init__(self, joint, tick: int = 0):
        arr = np.array(joint, dtype=float)
        if arr.ndim != 2:
            raise ValueError("belief joint must be 2-d (states x durations)")
        if np.any(arr < 0):
            raise ValueError("belief mass must be nonnegative")
        total = arr.sum()
        if not math.isfinite(total) or abs(total - 1.0) > 1e-6:
            raise ValueError(f"belief mass must sum to 1, got {total}")
        if abs(total - 1.0) > 1e-12:  # leave already-normalized bits untouched
            arr /= total
        arr.setflags(write=False)
        object.__setattr__(self, "joint", arr)
        object.__setattr__(self, "tick", int(tick))

    @classmethod
    def from_marginal(cls, pi: Sequence[float], duration_cap: int, tick: int = 0) -> "StateBelief":
        """Start every state at dwell 1 with the given marginal."""
        pi = np.asarray(pi, dtype=float)
        joint = np.zeros((pi.size, duration_cap))
        joint[:, 0] = pi
        return cls(joint, tick=tick)

    def marginal(self) -> np.ndarray:
        return self.joint.sum(axis=1)

    def duration_marginal(self, state: int) -> np.ndarray:
        return np.asarray(self.joint[state])


# ---------------------------------------------------------------------------
# Task layer: per-state task propensities and per-task signal emissions.


@dataclass(frozen=True)
class BetaDensity:
    """Beta(a, b) density on [0, 1]."""

    a: float
    b: float

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("beta parameters must be positive")

    def pdf(self, z: float) -> float:
        return float(stats.beta.pdf(z, self.a, self.b))

    def sample(self, rng: np.random.Generator) -> float:
        return float(rng.beta(self.a, self.b))


@dataclass(frozen=True)
class TaskEmission:
    """Signal densities for one task: ``off`` when idle, ``on`` when enacting it."""

    off: BetaDensity
    on: BetaDensity


@dataclass(frozen=True)
class TaskModel:
    """Task layer linking states to bounded activity signals.

    ``index_sets[i]`` lists the tasks relevant to state i; ``task_probs[i][j]``
    is P(task j active | state i) for j in the index set.  Tasks outside a
    state's index set are uninformative about it and contribute a 50/50
    emission mixture, so likelihood ratios between states depend only on the
    relevant tasks.
    """

    n_tasks: int
    index_sets: tuple[frozenset[int], ...]
    task_probs: tuple[Mapping[int, float], ...]
    emissions: tuple[TaskEmission, ...]
    extractors: tuple[str, ...] = ()
    _skip_emission_check: bool = False

    def __init__(self, n_tasks, index_sets, task_probs, emissions, extractors=(),
                 _skip_emission_check=False):
        object.__setattr__(self, "n_tasks", int(n_tasks))
        object.__setattr__(self, "index_sets", tuple(frozenset(s) for s in index_sets))
        object.__setattr__(self, "task_probs", tuple(dict(p) for p in task_probs))
        object.__setattr__(self, "emissions", tuple(emissions))
        object.__setattr__(self, "extractors", tuple(extractors) or ("mean",) * int(n_tasks))
        object.__setattr__(self, "_skip_emission_check", bool(_skip_emission_check))
        self._validate()

    def _validate(self):
        if len(self.emissions) != self.n_tasks:
            raise ValueError("one emission pair per task required")
        if len(self.index_sets) != len(self.task_probs):
            raise ValueError("index_sets and task_probs must align per state")
        for i, (idx, probs) in enumerate(zip(self.index_sets, self.task_probs)):
            if any(j < 0 or j >= self.n_tasks for j in idx):
                raise ValueError(f"task index out of range for state {i}")
            if set(probs) != set(idx):
                raise ValueError(f"task_probs keys must equal the index set for state {i}")
            if any(not 0.0 <= p <= 1.0 for p in probs.values()):
                raise ValueError(f"task probabilities must lie in [0, 1] for state {i}")
        if self._skip_emission_check:
            return
        for j, em in enumerate(self.emissions):
            for dens in (em.off, em.on):
                total, _ = integrate.quad(dens.pdf, 0.0, 1.0, limit=200)
                if abs(total - 1.0) > 1e-6:
                    raise ValueError(f"emission density for task {j} integrates to {total}")

    def validate_for_space(self, space: ThreatStateSpace):
        if len(self.index_sets) != space.m:
            raise ValueError("task model must cover every state")
        for i in range(space.m):
            if i not in space.absorbing and not self.index_sets[i]:
                raise ValueError(f"non-absorbing state {i} needs a nonempty task index set")


@dataclass(frozen=True)
class SignalVector:
    """Per-task filtered signals in [0, 1] for one tick; NaN marks a missing signal."""

    values: np.ndarray
    tick: int = 0

    def __init__(self, values, tick: int = 0):
        arr = np.array(values, dtype=float)
        present = ~np.isnan(arr)
        if np.any((arr[present] < 0) | (arr[present] > 1)):
            raise ValueError("present signals must lie in [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "tick", int(tick))

    @property
    def n_present(self) -> int:
        return int(np.sum(~np.isnan(self.values)))


# ---------------------------------------------------------------------------
# Operations


def build_transition_operator(model: TransitionModel, belief: StateBelief) -> TransitionOperator:
    """Validate the one-tick operator against the belief's occupied cells.

    Rejects holding specifications whose survival mass hits zero below the
    duration cap at a cell the belief occupies: such mass could neither stay
    nor leave.
    """
    op = model.operator
    occupied = belief.joint > 0
    exhausted = op.survival <= 0  # absorbing rows keep survival 1, so they never flag
    exhausted[:, -1] = False  # cap bucket may legitimately be terminal
    bad = occupied & exhausted
    if np.any(bad):
        i, d = np.argwhere(bad)[0]
        raise DegenerateHoldingSpec(
            f"state {model.space.states[i]} has zero survival mass at dwell {d + 1} "
            f"but the belief occupies it"
        )
    return op


def predict_step(belief: StateBelief, model: TransitionModel, n_ticks: int = 1) -> StateBelief:
    """Advance the joint belief n_ticks through the semi-Markov dynamics."""
    if n_ticks < 1:
        raise ValueError("n_ticks must be >= 1")
    op = build_transition_operator(model, belief)
    joint = belief.joint
    for _ in range(n_ticks):
        joint = op.apply(joint)
        joint = joint / joint.sum()
    return StateBelief(joint, tick=belief.tick + n_ticks)


def signal_likelihood(task_model: TaskModel, z: SignalVector, state_index: int) -> float:
    """P(signals | state) under the factorized task layer.

    Missing signals contribute a factor of one; tasks outside the state's
    index set mix their two emissions 50/50.
    """
    idx = task_model.index_sets[state_index]
    probs = task_model.task_probs[state_index]
    value = 1.0
    for j in range(task_model.n_tasks):
        zj = z.values[j]
        if math.isnan(zj):
            continue
        if not 0.0 <= zj <= 1.0:
            raise ValueError(f"signal {j} outside [0, 1]: {zj}")
        em = task_model.emissions[j]
        p_on = probs[j] if j in idx else 0.5
        value *= p_on * em.on.pdf(zj) + (1.0 - p_on) * em.off.pdf(zj)
    return value


def likelihood_vector(task_model: TaskModel, z: SignalVector, m: int) -> np.ndarray:
    return np.array([signal_likelihood(task_model, z, i) for i in range(m)])


def update_step(belief: StateBelief, likelihoods: Sequence[float]) -> StateBelief:
    """Bayes update of the joint belief by per-state likelihoods."""
    lik = np.asarray(likelihoods, dtype=float)
    if np.any(lik < 0):
        raise ValueError("likelihoods must be nonnegative")
    evidence = float(belief.marginal() @ lik)
    if evidence <= 0.0:
        raise TotalEvidenceZero("zero total evidence: signals incompatible with the belief support")
    joint = belief.joint * lik[:, None]
    return StateBelief(joint / joint.sum(), tick=belief.tick)


def filter_tick(
    belief: StateBelief,
    model: TransitionModel,
    task_model: TaskModel,
    z: SignalVector | None,
) -> tuple[StateBelief, float]:
    """One predict-update cycle; returns the posterior and log evidence."""
    predicted = predict_step(belief, model, 1)
    if z is None or z.n_present == 0:
        return predicted, 0.0
    lik = likelihood_vector(task_model, z, model.space.m)
    evidence = float(predicted.marginal() @ lik)
    if evidence <= 0.0:
        raise TotalEvidenceZero("zero total evidence: signals incompatible with the belief support")
    posterior = update_step(predicted, lik)
    return posterior, math.log(evidence)


def marginal_threat(belief: StateBelief, threat_set: Sequence[int]) -> float:
    """Total probability mass on the given threat states."""
    pi = belief.marginal()
    return float(sum(pi[i] for i in set(threat_set)))
