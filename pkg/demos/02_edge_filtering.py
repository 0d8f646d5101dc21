#!/usr/bin/env python3
"""Tracking pairwise communication rates across several information channels.

Walks the conjugate recurrence by hand for two monitored pairs: raw channel
summaries are scaled onto a common 0-10 axis, the prior decays through the
discount between ticks, and each monitored tick folds its scaled values and
channel efficiencies into the Gamma parameters.
"""

import numpy as np

from cellwatch.edges import (
    ChannelSpec,
    EdgeBelief,
    ObservationVector,
    adaptive_discount,
    evolve_prior,
    posterior_update,
    scale_raw,
    tail_probability,
)

CHANNELS = [
    ChannelSpec("calls", efficiency=0.8, r_max=35.0),
    ChannelSpec("texts", efficiency=0.8, r_max=1400.0),
    ChannelSpec("bank", efficiency=1.0, r_max=70000.0),
]

RAW = {
    ("p1", "p2"): {"calls": [3, 2, 4], "texts": [50, 250, 175]},
    ("p2", "p3"): {"calls": [8, 12, 15], "texts": [15, 20, 20], "bank": [500, 100, 2800]},
}


def main():
    by_id = {c.channel_id: c for c in CHANNELS}
    print("scaling raw summaries onto the common axis:")
    for pair, streams in RAW.items():
        for cid, series in streams.items():
            scaled = [scale_raw(r, by_id[cid]) for r in series]
            print(f"  {pair} {cid:<6} raw {series} -> " +
                  str([round(s, 3) for s in scaled]))

    print("\nconjugate updates with a fixed 0.7 discount:")
    for pair, streams in RAW.items():
        belief = EdgeBelief(pair=pair, alpha=0.70, beta=1.41)
        print(f"  pair {pair}: prior ({belief.alpha:.2f}, {belief.beta:.2f})")
        for t in range(3):
            if t > 0:
                belief = evolve_prior(belief, 0.7)
                print(f"    t{t} prior     ({belief.alpha:.4f}, {belief.beta:.4f})")
            channels = {cid: scale_raw(series[t], by_id[cid])
                        for cid, series in streams.items()}
            obs = ObservationVector(pair=pair, tick=t, channels=channels)
            belief = posterior_update(belief, obs, CHANNELS)
            print(f"    t{t} posterior ({belief.alpha:.4f}, {belief.beta:.4f})"
                  f"   mean {belief.mean:.3f}"
                  f"   P(rate > 1) = {tail_probability(belief, 1.0):.3f}")

    print("\nadaptive discount: quiet pairs hold information, busy pairs decay")
    for effort in (0.0, 0.5, 2.0, 8.0):
        print(f"  previous effort {effort:>4.1f} -> discount "
              f"{adaptive_discount(0.7, effort):.4f}")


if __name__ == "__main__":
    main()
