/** Wire types for the session service. Field names mirror the JSON payloads. */

export type Mode = "sort" | "choose";

export interface DatasetInfo {
  name: string;
  d: number;
  n: number;
  columns: string[] | null;
}

/** One candidate as shown to the user: original attribute values, not normalized. */
export interface Card {
  id: number;
  label: string | null;
  values: Record<string, number>;
}

export interface Display {
  round: number;
  mode: Mode;
  cards: Card[];
}

export interface Recommendation {
  id: number;
  bound: number;
  card: Card;
}

export interface RoundRecord {
  round: number;
  shown: number[];
  response: Record<string, unknown>;
  candidates_after: number;
  width_after: number;
}

export interface SessionState {
  session_id: string;
  dataset: string;
  algorithm: string;
  s: number;
  epsilon: number;
  status: string;
  stop_reason: string | null;
  round: number;
  candidates_remaining: number;
  width: number;
  display: Display | null;
  recommendation: Recommendation | null;
  rounds: RoundRecord[];
}

export interface CreateSessionOptions {
  dataset: string;
  algorithm?: string;
  s?: number;
  epsilon?: number;
  seed?: number;
}
