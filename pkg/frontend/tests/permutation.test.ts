import { describe, expect, it } from "vitest";
import { checkPermutation } from "../src/permutation.js";

describe("checkPermutation", () => {
  const shown = [4, 9, 2];

  it("accepts any rearrangement of the shown ids", () => {
    expect(checkPermutation(shown, [4, 9, 2]).ok).toBe(true);
    expect(checkPermutation(shown, [2, 4, 9]).ok).toBe(true);
    expect(checkPermutation(shown, [9, 2, 4]).ok).toBe(true);
  });

  it("rejects an order that is too short or too long", () => {
    expect(checkPermutation(shown, [4, 9]).reason).toBe("expected 3 cards, got 2");
    expect(checkPermutation(shown, [4, 9, 2, 2]).reason).toBe("expected 3 cards, got 4");
  });

  it("rejects ids that were never shown", () => {
    expect(checkPermutation(shown, [4, 9, 7]).reason).toBe("card 7 is not part of this round");
  });

  it("rejects duplicated ids", () => {
    expect(checkPermutation(shown, [4, 9, 9]).reason).toBe("card 9 appears more than once");
  });

  it("treats the empty display as trivially complete", () => {
    expect(checkPermutation([], []).ok).toBe(true);
  });

  it("reports ok with no reason attached", () => {
    expect(checkPermutation(shown, [2, 9, 4])).toEqual({ ok: true, reason: null });
  });
});
