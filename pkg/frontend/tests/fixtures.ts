/** Frozen service payloads captured from a live scenario host at tick 7 of
 * the bundled worked example. */

import type { GraphPayload, Meta, WhatIfResponse } from "../src/types.js";

export const META_FIXTURE: Meta = {
  version: 1,
  name: "bundled-worked-example",
  tick: 7,
  states: ["Active", "Training", "Preparing", "Mobilised", "Neutral"],
  tasks: [
    "engage_radicalisers",
    "public_threats",
    "weapons_training",
    "acquire_materials",
    "reconnoitre",
    "final_logistics",
  ],
  channels: ["phone"],
  cells: ["cell-A"],
  cum_log_marginal: -74.9,
};

export const WHAT_IF_FIXTURE: WhatIfResponse = {
  version: 1,
  before: [
    {
      cell_id: "cell-A",
      tick: 7,
      m: [
        0.6468422565547305, 0.03779127956383642, 0.8302851281933097, 1.0,
        0.9469052537634979,
      ],
      phi: [
        0.01921868928946359, 0.5085482553455141, 0.7862013500079442,
        0.9469052537634979, 1.0,
      ],
      inputs: { connectivity_broken: false, degenerate_cohesion: false },
    },
  ],
  after: [
    {
      cell_id: "cell-A",
      tick: 7,
      m: [
        0.6468422565547305, 0.05669824322975145, 0.8591655524086066, 1.0, 1.0,
      ],
      phi: [
        0.03150974163546788, 0.5557445846740746, 0.8591655524086066, 1.0, 1.0,
      ],
      inputs: { connectivity_broken: false, degenerate_cohesion: false },
    },
  ],
};

export const GRAPH_FIXTURE: GraphPayload = {
  version: 1,
  tick: 7,
  entities: [
    {
      id: "p1",
      entered: 0,
      pi: [0.10977, 0.0893, 0.38881, 0.14076, 0.27136],
      top_state: "Preparing",
    },
    {
      id: "p2",
      entered: 0,
      pi: [0.14278, 0.36009, 0.22626, 0.07379, 0.19707],
      top_state: "Training",
    },
    {
      id: "p3",
      entered: 0,
      pi: [0.1457, 0.13398, 0.20085, 0.15596, 0.3635],
      top_state: "Neutral",
    },
    {
      id: "p4",
      entered: 0,
      pi: [0.05, 0.18, 0.33, 0.36, 0.08],
      top_state: "Mobilised",
    },
  ],
  edges: [
    { pair: ["p1", "p2"], origin: "kinship", created: 0, alpha: 16.5, beta: 3.25, mean: 5.08 },
    { pair: ["p1", "p3"], origin: "observed-communication", created: 5, alpha: 11.2, beta: 2.19, mean: 5.11 },
    { pair: ["p1", "p4"], origin: "observed-communication", created: 3, alpha: 15.85, beta: 2.77, mean: 5.72 },
    { pair: ["p2", "p3"], origin: "affiliation", created: 0, alpha: 9.73, beta: 3.25, mean: 2.99 },
    { pair: ["p2", "p4"], origin: "observed-communication", created: 5, alpha: 11.7, beta: 2.19, mean: 5.34 },
    { pair: ["p3", "p4"], origin: "observed-communication", created: 6, alpha: 7.7, beta: 1.7, mean: 4.53 },
  ],
  cells: [
    {
      id: "cell-A",
      members: ["p1", "p2", "p3", "p4"],
      ideal_size: 3,
      threshold: 2,
      connectivity_broken: false,
    },
  ],
};
