/** Payload shapes of the scenario service API (schema version 1). */

export interface Meta {
  version: number;
  name: string;
  tick: number;
  states: string[];
  tasks: string[];
  channels: string[];
  cells: string[];
  cum_log_marginal: number;
}

export interface GraphEntity {
  id: string;
  entered: number;
  pi: number[];
  top_state: string;
}

export interface GraphEdge {
  pair: [string, string];
  origin: string;
  created: number;
  alpha: number;
  beta: number;
  mean: number | null;
}

export interface GraphCell {
  id: string;
  members: string[];
  ideal_size: number;
  threshold: number;
  connectivity_broken: boolean;
}

export interface GraphPayload {
  version: number;
  tick: number;
  entities: GraphEntity[];
  edges: GraphEdge[];
  cells: GraphCell[];
}

export interface EdgeBeliefPayload {
  version: number;
  pair: [string, string];
  origin: string;
  alpha: number;
  beta: number;
  proper: boolean;
  mean: number | null;
  density: { x: number[]; y: number[] } | null;
}

export interface EntityBeliefPayload {
  version: number;
  id: string;
  tick: number;
  states: string[];
  pi: number[];
  duration: Record<string, number[]>;
}

export interface IndicatorPoint {
  tick: number;
  m: number[];
  phi: number[];
}

export interface IndicatorSeriesPayload {
  version: number;
  cell: string;
  threshold_default: number;
  series: IndicatorPoint[];
}

export interface IndicatorReportPayload {
  cell_id: string;
  tick: number;
  m: number[];
  phi: number[];
  inputs: Record<string, unknown>;
}

export interface WhatIfResponse {
  version: number;
  before: IndicatorReportPayload[];
  after: IndicatorReportPayload[];
}

export interface CommitResponse {
  version: number;
  committed: { tick: number } & Record<string, unknown>;
}

/** One observation-stream record, mirroring the engine's JSONL schema. */
export type StreamRecord =
  | {
      type: "pair";
      tick?: number;
      entity_a: string;
      entity_b: string;
      channel_id: string;
      raw_value?: number;
      scaled_value?: number;
      monitored?: boolean;
    }
  | { type: "signals"; tick?: number; entity: string; signals: Record<string, number> }
  | { type: "population"; tick?: number; add?: string[]; remove?: string[] }
  | {
      type: "edge";
      tick?: number;
      pair: [string, string];
      origin?: string;
      prior?: [number, number] | "empirical";
    };

export interface WhatIfRequest {
  kind: string;
  cell_id?: string;
  member?: string;
  pair?: [string, string];
  alpha?: number;
  beta?: number;
  states?: string[];
  value?: number;
}
