/**
 * Document shapes exchanged with the bayescj session service.
 *
 * These mirror the JSON the service emits; the client treats them as
 * read-only and keeps no state of its own beyond the assessment id.
 */

export interface ItemCard {
  id: number;
  label: string;
  payload: string | null;
}

export interface CriterionInfo {
  id: number;
  name: string;
  weight: number;
}

export interface Progress {
  iterations: number;
  budget: number;
  judgements: number;
  judgement_budget: number;
}

/** Served pair plus judging context, from GET .../next while active. */
export interface ServedPairDoc {
  status: "active";
  pair: { i: number; j: number; items: [ItemCard, ItemCard] };
  criteria: CriterionInfo[];
  progress: Progress;
}

/** What .../next returns once the session has stopped or completed. */
export interface StopNoticeDoc {
  status: "stopped" | "complete";
  reason: string;
  report: ReliabilityReport;
  progress: Progress;
}

export type NextDoc = ServedPairDoc | StopNoticeDoc;

export interface JudgementSubmission {
  pair: [number, number];
  winners: Record<string, number>;
  idempotency_key?: string;
}

export interface JudgementResponse {
  status: string;
  expected_ranks: number[];
  order: number[];
  pair_eap: Record<string, number>;
  progress: Progress;
}

export interface ReliabilityRow {
  i: number;
  j: number;
  d: number;
  map: number;
  eap: number;
  n: number;
  flagged: boolean;
  moderated: boolean;
}

export interface ReliabilityReport {
  pairs: ReliabilityRow[];
}

export interface QueueRow {
  i: number;
  j: number;
  d: number;
  map: number;
  eap: number;
  n: number;
}

export interface RankingRow {
  item_id: number;
  expected_rank: number;
  [rankProb: string]: number;
}

export interface RadarDoc {
  axes: { criterion: number; name: string; weight: number }[];
  items: { item_id: number; label: string; expected_ranks: number[] }[];
}

export interface ReportDoc {
  id: string;
  status: string;
  rankings: {
    holistic: RankingRow[];
    per_criterion: Record<string, RankingRow[]>;
  };
  reliability: ReliabilityReport;
  radar: RadarDoc;
  moderation_queue: QueueRow[];
  stopping: {
    stop: boolean;
    metric: string;
    threshold: number;
    aggregation: string;
    value: number;
  } | null;
  progress: Progress;
}

export interface ModerationSubmission {
  pair: [number, number];
  criterion: number;
  chosen_winner: number;
  pseudo_wins?: number;
  note?: string;
}

export interface ModerationResponse {
  status: string;
  moderated: { pair: [number, number]; criterion: number };
  queue: QueueRow[];
}

export interface CreatedDoc {
  id: string;
  status: string;
  budget: number;
}
