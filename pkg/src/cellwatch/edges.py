"""Conjugate Gamma-Poisson filtering of pairwise communication rates.

Each monitored pair carries a latent communication rate with a Gamma(alpha,
beta) belief: alpha units of communication observed over beta time units.
Scaled per-channel counts are Poisson with the rate thinned by a per-channel
efficiency, so the posterior recurrence stays closed form.  Between ticks the
posterior decays into the next prior through a discount factor that preserves
the mean and inflates the variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import special, stats

__all__ = [
    "ChannelSpec",
    "EdgeBelief",
    "ObservationVector",
    "UnmonitoredTick",
    "scale_raw",
    "evolve_prior",
    "adaptive_discount",
    "posterior_update",
    "predictive_channel_scores",
    "predictive_log_likelihood",
    "tail_probability",
    "posterior_density_curve",
]


class UnmonitoredTick(ValueError):
    """Posterior update requested for a tick on which the pair was not monitored."""


@dataclass(frozen=True)
class ChannelSpec:
    """One information channel: scaling rule plus efficiency.

    ``efficiency`` in (0, 1] thins the latent rate to the observed Poisson
    intensity; ``r_max`` is the raw value expected as a practical maximum,
    mapped to ``scale_target`` on the common scale.  ``clamp`` caps scaled
    values at the target instead of letting them exceed it.
    """

    channel_id: str
    efficiency: float
    r_max: float
    scale_target: float = 10.0
    clamp: bool = False
    summary_kind: str = "sum"

    def __post_init__(self):
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError("channel efficiency must lie in (0, 1]")
        if self.r_max <= 0 or self.scale_target <= 0:
            raise ValueError("r_max and scale_target must be positive")
        if self.summary_kind not in ("sum", "count", "first-difference"):
            raise ValueError(f"unknown summary kind {self.summary_kind!r}")


@dataclass(frozen=True)
class EdgeBelief:
    """Gamma(alpha, beta) belief over one pair's latent communication rate.

    An edge opened with the "empirical" initialization starts improper at
    (0, 0) and becomes proper on its first monitored observation.
    ``baseline_discount`` is the fixed discount in fixed mode and the floor
    of the adaptive discount otherwise; ``last_observed_effort`` is the
    efficiency-weighted total of the previous monitored observation, which
    drives the adaptive discount.
    """

    pair: tuple[str, str]
    alpha: float
    beta: float
    baseline_discount: float = 0.7
    discount_mode: str = "fixed"
    last_observed_effort: float = 0.0

    def __post_init__(self):
        if self.pair[0] >= self.pair[1]:
            raise ValueError("pair must be stored canonically (first id < second id)")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be nonnegative")
        if not 0.0 < self.baseline_discount <= 1.0:
            raise ValueError("baseline discount must lie in (0, 1]")
        if self.discount_mode not in ("fixed", "adaptive"):
            raise ValueError(f"unknown discount mode {self.discount_mode!r}")
        if self.last_observed_effort < 0:
            raise ValueError("observed effort cannot be negative")

    @property
    def proper(self) -> bool:
        return self.alpha > 0 and self.beta > 0

    @property
    def mean(self) -> float:
        return self.alpha / self.beta

    @property
    def variance(self) -> float:
        return self.alpha / self.beta**2

    def tick_discount(self) -> float:
        """Discount factor to evolve this posterior into the next prior."""
        if self.discount_mode == "adaptive":
            return adaptive_discount(self.baseline_discount, self.last_observed_effort)
        return self.baseline_discount


@dataclass(frozen=True)
class ObservationVector:
    """Scaled per-channel values for one pair at one tick.

    Channels absent from ``channels`` were not observed; a monitored pair
    with an all-zero vector is still evidence (zeros were watched for).
    """

    pair: tuple[str, str]
    tick: int
    channels: Mapping[str, float]
    monitored: bool = True

    def __init__(self, pair, tick, channels, monitored=True):
        object.__setattr__(self, "pair", (str(pair[0]), str(pair[1])))
        object.__setattr__(self, "tick", int(tick))
        object.__setattr__(self, "channels", dict(channels))
        object.__setattr__(self, "monitored", bool(monitored))
        if self.pair[0] >= self.pair[1]:
            raise ValueError("pair must be stored canonically (first id < second id)")
        if any(v < 0 for v in self.channels.values()):
            raise ValueError("scaled values must be nonnegative")
        if not self.monitored and self.channels:
            raise ValueError("an unmonitored tick cannot carry channel values")

    def total(self) -> float:
        return float(sum(self.channels.values()))


def scale_raw(raw: float, channel: ChannelSpec) -> float:
    """Map a raw channel summary onto the common scale."""
    if raw < 0:
        raise ValueError("raw value must be nonnegative")
    scaled = raw / channel.r_max * channel.scale_target
    if channel.clamp and scaled > channel.scale_target:
        return channel.scale_target
    return scaled


def evolve_prior(belief: EdgeBelief, delta: float) -> EdgeBelief:
    """Decay a posterior into the next tick's prior: (a, b) -> (da, db).

    Keeps the mean and scales the variance by 1/delta.
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError("discount factor must lie in (0, 1]")
    return replace(belief, alpha=delta * belief.alpha, beta=delta * belief.beta)


def adaptive_discount(baseline: float, prev_effort: float) -> float:
    """Effort-responsive discount: d + (1 - d) * exp(-prev_effort).

    Quiet previous ticks push the discount toward one (information is held);
    busy ones push it toward the baseline (information decays fast).
    """
    if not 0.0 < baseline <= 1.0:
        raise ValueError("baseline discount must lie in (0, 1]")
    if prev_effort < 0:
        raise ValueError("effort cannot be negative")
    return baseline + (1.0 - baseline) * math.exp(-prev_effort)


def _present_channels(
    obs: ObservationVector, channels: Sequence[ChannelSpec]
) -> list[tuple[ChannelSpec, float]]:
    by_id = {c.channel_id: c for c in channels}
    unknown = set(obs.channels) - set(by_id)
    if unknown:
        raise KeyError(f"observation references unknown channels {sorted(unknown)}")
    return [(by_id[k], float(v)) for k, v in sorted(obs.channels.items())]


def posterior_update(
    belief: EdgeBelief, obs: ObservationVector, channels: Sequence[ChannelSpec]
) -> EdgeBelief:
    """Fold one monitored tick into the belief.

    alpha gains the summed scaled values; beta gains the summed efficiencies
    of the channels that reported (observed zeros included).  The caller must
    already have evolved the belief to this tick's prior.
    """
    if not obs.monitored:
        raise UnmonitoredTick(f"pair {obs.pair} was not monitored at tick {obs.tick}")
    present = _present_channels(obs, channels)
    gain_alpha = sum(value for _, value in present)
    gain_beta = sum(spec.efficiency for spec, _ in present)
    effort = sum(value * spec.efficiency for spec, value in present)
    return replace(
        belief,
        alpha=belief.alpha + gain_alpha,
        beta=belief.beta + gain_beta,
        last_observed_effort=effort,
    )


def predictive_channel_scores(
    belief: EdgeBelief, obs: ObservationVector, channels: Sequence[ChannelSpec]
) -> list[tuple[str, int, float]]:
    """Per-channel one-step-ahead log forecasts at this tick's prior.

    Each present channel contributes the Gamma-Poisson mixture mass at the
    scaled value rounded to the nearest integer; entries are (channel id,
    rounded value, log probability).
    """
    if belief.alpha <= 0 or belief.beta <= 0:
        raise ValueError("predictive likelihood needs a proper (positive) Gamma belief")
    a, b = belief.alpha, belief.beta
    scores = []
    for spec, value in _present_channels(obs, channels):
        s = int(round(value))
        xi = spec.efficiency
        logp = (
            special.gammaln(a + s)
            - special.gammaln(a)
            - special.gammaln(s + 1)
            + a * math.log(b / (b + xi))
            + s * math.log(xi / (b + xi))
        )
        scores.append((spec.channel_id, s, float(logp)))
    return scores


def predictive_log_likelihood(
    belief: EdgeBelief, obs: ObservationVector, channels: Sequence[ChannelSpec]
) -> float:
    """Sum of the per-channel one-step-ahead log forecasts."""
    return sum(logp for _, _, logp in predictive_channel_scores(belief, obs, channels))


def tail_probability(belief: EdgeBelief, threshold: float) -> float:
    """P(rate > threshold): upper regularized incomplete gamma Q(alpha, beta * threshold)."""
    if belief.alpha <= 0 or belief.beta <= 0:
        raise ValueError("tail probability needs a proper (positive) Gamma belief")
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    return float(special.gammaincc(belief.alpha, belief.beta * threshold))


def posterior_density_curve(belief: EdgeBelief, grid: Iterable[float]) -> np.ndarray:
    """Gamma density evaluated on a grid of rate values."""
    if belief.alpha <= 0 or belief.beta <= 0:
        raise ValueError("density curve needs a proper (positive) Gamma belief")
    x = np.asarray(list(grid), dtype=float)
    return stats.gamma.pdf(x, a=belief.alpha, scale=1.0 / belief.beta)
