import type { Card, SessionState } from "../src/types.js";

export function card(id: number, values: Record<string, number> = { x0: id, x1: -id }): Card {
  return { id, label: null, values };
}

export function snapshot(over: Partial<SessionState> = {}): SessionState {
  return {
    session_id: "sid-1",
    dataset: "cars",
    algorithm: "sorting-simplex",
    s: 3,
    epsilon: 0.05,
    status: "awaiting_feedback",
    stop_reason: null,
    round: 1,
    candidates_remaining: 5,
    width: 1.0,
    display: { round: 1, mode: "sort", cards: [card(1), card(2), card(3)] },
    recommendation: null,
    rounds: [],
    ...over,
  };
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

/** Poll until `cond` holds; the event loop keeps turning in between. */
export async function until(cond: () => boolean, ms = 5_000): Promise<void> {
  const start = Date.now();
  while (!cond()) {
    if (Date.now() - start > ms) {
      throw new Error("condition not met in time");
    }
    await new Promise((resolve) => setTimeout(resolve, 5));
  }
}
