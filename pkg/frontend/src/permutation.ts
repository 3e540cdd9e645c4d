/** Outcome of a client-side order check. */
export interface OrderCheck {
  ok: boolean;
  reason: string | null;
}

/**
 * Verify that `order` is a permutation of the displayed card ids.
 *
 * Every submission runs through this check before any request is built, so a
 * short, padded, or duplicated order never leaves the client.
 */
export function checkPermutation(
  shown: readonly number[],
  order: readonly number[],
): OrderCheck {
  if (order.length !== shown.length) {
    return { ok: false, reason: `expected ${shown.length} cards, got ${order.length}` };
  }
  const wanted = new Set(shown);
  const seen = new Set<number>();
  for (const id of order) {
    if (!wanted.has(id)) {
      return { ok: false, reason: `card ${id} is not part of this round` };
    }
    if (seen.has(id)) {
      return { ok: false, reason: `card ${id} appears more than once` };
    }
    seen.add(id);
  }
  return { ok: true, reason: null };
}
