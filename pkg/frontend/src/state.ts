import { ApiClient, ApiError } from "./api.js";
import { checkPermutation } from "./permutation.js";
import type { CreateSessionOptions, SessionState } from "./types.js";

export type StoreListener = () => void;

/**
 * Client-side session state.
 *
 * Holds the latest server snapshot plus the transient flags the view needs:
 * an inline validation message, a retry banner for requests that failed in
 * transit, and a stale-round marker for rounds the server has already moved
 * past. Submissions are keyed by round number, so a double click or a replayed
 * request cannot post the same round twice.
 */
export class SessionStore {
  state: SessionState | null = null;
  /** Inline message shown next to the submit control. */
  error: string | null = null;
  /** Set when a request failed in transit; the round on screen is kept as-is. */
  networkError: string | null = null;
  /** Set when the server rejected the submission's round number. */
  staleRound = false;

  private inFlight = false;
  private readonly submitted = new Set<number>();
  private readonly listeners: StoreListener[] = [];

  constructor(private readonly api: ApiClient) {}

  subscribe(listener: StoreListener): void {
    this.listeners.push(listener);
  }

  get busy(): boolean {
    return this.inFlight;
  }

  async create(opts: CreateSessionOptions): Promise<boolean> {
    this.submitted.clear();
    this.staleRound = false;
    return this.pull(() => this.api.createSession(opts));
  }

  async resume(sessionId: string): Promise<boolean> {
    this.submitted.clear();
    this.staleRound = false;
    return this.pull(() => this.api.getState(sessionId));
  }

  /** Re-pull the authoritative state; clears the stale-round marker. */
  async refresh(): Promise<boolean> {
    const id = this.state?.session_id;
    if (!id) {
      return false;
    }
    this.staleRound = false;
    return this.pull(() => this.api.getState(id));
  }

  /** Surface a client-side validation message without touching the round. */
  reject(message: string): void {
    this.error = message;
    this.emit();
  }

  async submitOrder(order: number[]): Promise<boolean> {
    const display = this.state?.display;
    if (!this.state || !display || display.mode !== "sort") {
      return false;
    }
    const check = checkPermutation(display.cards.map((c) => c.id), order);
    if (!check.ok) {
      this.reject(`blocked: ${check.reason}`);
      return false;
    }
    const id = this.state.session_id;
    return this.send(display.round, () => this.api.submitSort(id, order, display.round));
  }

  async submitFavorite(favorite: number): Promise<boolean> {
    const display = this.state?.display;
    if (!this.state || !display || display.mode !== "choose") {
      return false;
    }
    if (!display.cards.some((c) => c.id === favorite)) {
      this.reject(`blocked: card ${favorite} is not part of this round`);
      return false;
    }
    const id = this.state.session_id;
    return this.send(display.round, () => this.api.submitFavorite(id, favorite, display.round));
  }

  private async pull(call: () => Promise<SessionState>): Promise<boolean> {
    this.clearMessages();
    try {
      this.state = await call();
      return true;
    } catch (err) {
      this.record(err);
      return false;
    } finally {
      this.emit();
    }
  }

  /** One POST per round: repeats while pending or after success are dropped. */
  private async send(round: number, call: () => Promise<SessionState>): Promise<boolean> {
    if (this.inFlight || this.submitted.has(round)) {
      return false;
    }
    this.inFlight = true;
    this.clearMessages();
    try {
      this.state = await call();
      this.submitted.add(round);
      return true;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.staleRound = true;
      } else {
        this.record(err);
      }
      return false;
    } finally {
      this.inFlight = false;
      this.emit();
    }
  }

  private record(err: unknown): void {
    if (err instanceof ApiError) {
      this.error = err.message;
    } else {
      this.networkError = err instanceof Error ? err.message : String(err);
    }
  }

  private clearMessages(): void {
    this.error = null;
    this.networkError = null;
  }

  private emit(): void {
    for (const fn of this.listeners) {
      fn();
    }
  }
}
