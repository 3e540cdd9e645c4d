import { ApiClient } from "./api.js";
import { SessionStore } from "./state.js";
import { cardBody, FavoriteBoard, SortBoard } from "./sortboard.js";
import type { DatasetInfo, SessionState } from "./types.js";

export interface AppOptions {
  apiBase?: string;
  sessionId?: string | null;
  /** Called when a session is created, so the host can put its id in the URL. */
  onSessionChange?: (sessionId: string) => void;
}

const ALGORITHMS = ["sorting-simplex", "sorting-random", "uh-simplex", "uh-random"];

const STOP_TEXT: Record<string, string> = {
  single_candidate: "only one candidate is left",
  width: "the remaining utility range is inside tolerance",
  stagnation: "further rounds stopped narrowing the candidates",
  infeasible_feedback: "the feedback contradicted an earlier round",
};

/**
 * Session view. One active session per page; everything renders from the
 * store's latest snapshot, and the board for the pending round is kept alive
 * across renders so an arrangement in progress is never thrown away.
 */
export class App {
  readonly store: SessionStore;
  board: SortBoard | null = null;
  favorites: FavoriteBoard | null = null;

  private readonly api: ApiClient;
  private datasets: DatasetInfo[] = [];
  private loadError: string | null = null;
  private roundKey: string | null = null;
  private roundHost: HTMLElement | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly opts: AppOptions = {},
  ) {
    this.api = new ApiClient(opts.apiBase ?? "");
    this.store = new SessionStore(this.api);
    this.store.subscribe(() => this.render());
  }

  async start(): Promise<void> {
    if (this.opts.sessionId) {
      await this.store.resume(this.opts.sessionId);
      return;
    }
    this.loadError = null;
    try {
      this.datasets = await this.api.listDatasets();
    } catch (err) {
      this.loadError = err instanceof Error ? err.message : String(err);
    }
    this.render();
  }

  render(): void {
    this.root.textContent = "";
    const state = this.store.state;
    if (this.store.networkError) {
      this.root.appendChild(this.retryBanner(this.store.networkError));
    }
    if (!state) {
      this.root.appendChild(this.launcher());
      return;
    }
    this.root.appendChild(this.progress(state));
    if (this.store.staleRound) {
      this.root.appendChild(this.stalePrompt());
      return;
    }
    if (state.status === "awaiting_feedback" && state.display) {
      this.root.appendChild(this.roundView(state));
    } else {
      this.root.appendChild(this.recommendationView(state));
    }
  }

  private async submit(): Promise<void> {
    const display = this.store.state?.display;
    if (!display || this.store.busy) {
      return;
    }
    if (display.mode === "sort" && this.board) {
      await this.store.submitOrder(this.board.order());
    } else if (display.mode === "choose" && this.favorites) {
      const choice = this.favorites.selected();
      if (choice === null) {
        this.store.reject("blocked: pick a favorite before submitting");
        return;
      }
      await this.store.submitFavorite(choice);
    }
  }

  private launcher(): HTMLElement {
    const panel = el("section", "launcher");
    panel.appendChild(el("h1", "", "sortpick"));
    if (this.loadError) {
      const note = el("p", "banner", `could not reach the service: ${this.loadError}`);
      note.appendChild(button("retry", "try again", () => void this.start()));
      panel.appendChild(note);
      return panel;
    }

    const form = el("form", "launcher-form") as HTMLFormElement;
    const dataset = document.createElement("select");
    dataset.id = "dataset";
    for (const ds of this.datasets) {
      const opt = document.createElement("option");
      opt.value = ds.name;
      opt.textContent = `${ds.name} (${ds.n} points, ${ds.d} attributes)`;
      dataset.appendChild(opt);
    }
    const algorithm = document.createElement("select");
    algorithm.id = "algorithm";
    for (const name of ALGORITHMS) {
      const opt = document.createElement("option");
      opt.value = name;
      opt.textContent = name;
      algorithm.appendChild(opt);
    }
    const s = numberInput("s", 3, { min: 2, max: 10, step: 1 });
    const epsilon = numberInput("epsilon", 0.05, { min: 0, max: 1, step: 0.01 });
    const seed = numberInput("seed", 0, { step: 1 });

    form.appendChild(field("dataset", dataset));
    form.appendChild(field("algorithm", algorithm));
    form.appendChild(field("cards per round", s));
    form.appendChild(field("regret tolerance", epsilon));
    form.appendChild(field("seed", seed));

    const startBtn = button("start", "start session", () => undefined);
    startBtn.setAttribute("type", "submit");
    form.appendChild(startBtn);
    form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.createSession({
        dataset: dataset.value,
        algorithm: algorithm.value,
        s: Number(s.value),
        epsilon: Number(epsilon.value),
        seed: Number(seed.value),
      });
    });
    panel.appendChild(form);
    if (this.store.error) {
      panel.appendChild(el("p", "inline-error", this.store.error));
    }
    return panel;
  }

  private async createSession(opts: {
    dataset: string;
    algorithm: string;
    s: number;
    epsilon: number;
    seed: number;
  }): Promise<void> {
    const ok = await this.store.create(opts);
    const id = this.store.state?.session_id;
    if (ok && id) {
      this.opts.onSessionChange?.(id);
    }
  }

  private progress(state: SessionState): HTMLElement {
    const bar = el("header", "progress");
    bar.appendChild(el("span", "", `${state.dataset} · ${state.algorithm}`));
    bar.appendChild(el("span", "", `candidates remaining ${state.candidates_remaining}`));
    bar.appendChild(el("span", "", `width bound ${state.width.toPrecision(3)}`));
    bar.appendChild(el("span", "", `rounds so far ${state.rounds.length}`));
    return bar;
  }

  private roundView(state: SessionState): HTMLElement {
    const display = state.display;
    if (!display) {
      return el("section");
    }
    const section = el("section", "round");
    const heading =
      display.mode === "sort"
        ? `round ${display.round}: sort the cards, best first`
        : `round ${display.round}: choose your favorite`;
    section.appendChild(el("h2", "", heading));
    section.appendChild(this.boardFor(state));
    if (this.store.error) {
      const msg = el("p", "inline-error", this.store.error);
      msg.id = "submit-error";
      section.appendChild(msg);
    }
    const submitBtn = button("submit", "submit", () => void this.submit());
    submitBtn.disabled = this.store.busy;
    section.appendChild(submitBtn);
    return section;
  }

  /**
   * The board outlives re-renders within a round: rebuilding it from the
   * payload would reset the user's arrangement whenever a message appears.
   */
  private boardFor(state: SessionState): HTMLElement {
    const display = state.display;
    if (!display) {
      return el("div");
    }
    const key = `${state.session_id}:${display.round}:${display.mode}`;
    if (key === this.roundKey && this.roundHost) {
      return this.roundHost;
    }
    const host = el("div", "board-host");
    this.board = null;
    this.favorites = null;
    if (display.mode === "sort") {
      this.board = new SortBoard(host, display.cards);
    } else {
      this.favorites = new FavoriteBoard(host, display.cards);
    }
    this.roundKey = key;
    this.roundHost = host;
    return host;
  }

  private recommendationView(state: SessionState): HTMLElement {
    const section = el("section", "recommendation");
    const rec = state.recommendation;
    section.appendChild(el("h2", "", "recommendation"));
    if (state.status !== "awaiting_feedback") {
      const reason = state.stop_reason ? STOP_TEXT[state.stop_reason] ?? state.stop_reason : "";
      section.appendChild(
        el("p", "status-line", reason ? `no further rounds: ${reason}` : "no further rounds"),
      );
    }
    if (rec) {
      const cardEl = el("div", "card rec-card");
      cardEl.dataset.recId = String(rec.id);
      cardEl.appendChild(cardBody(rec.card));
      section.appendChild(cardEl);
      section.appendChild(
        el("p", "", `regret bound ${rec.bound.toPrecision(3)} after ${state.rounds.length} rounds`),
      );
    } else {
      section.appendChild(el("p", "", "no recommendation was recorded"));
    }
    return section;
  }

  private stalePrompt(): HTMLElement {
    const panel = el("section", "stale");
    panel.appendChild(
      el("p", "banner", "this round was already answered; the view is out of date"),
    );
    panel.appendChild(button("refresh", "refresh", () => void this.store.refresh()));
    return panel;
  }

  private retryBanner(message: string): HTMLElement {
    const banner = el("div", "banner network-banner");
    banner.appendChild(el("span", "", `request failed: ${message} (your arrangement was kept)`));
    banner.appendChild(
      button("retry", "try again", () => {
        if (this.store.state?.display) {
          void this.submit();
        } else if (this.store.state) {
          void this.store.refresh();
        } else {
          void this.start();
        }
      }),
    );
    return banner;
  }
}

function el(tag: string, className = "", text = ""): HTMLElement {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text) {
    node.textContent = text;
  }
  return node;
}

function button(id: string, label: string, onClick: () => void): HTMLButtonElement {
  const btn = document.createElement("button");
  btn.type = "button";
  btn.id = id;
  btn.textContent = label;
  btn.addEventListener("click", onClick);
  return btn;
}

function field(name: string, control: HTMLElement): HTMLElement {
  const wrap = el("label", "field");
  wrap.appendChild(el("span", "", name));
  wrap.appendChild(control);
  return wrap;
}

function numberInput(
  id: string,
  value: number,
  bounds: { min?: number; max?: number; step?: number },
): HTMLInputElement {
  const input = document.createElement("input");
  input.type = "number";
  input.id = id;
  input.value = String(value);
  if (bounds.min !== undefined) {
    input.min = String(bounds.min);
  }
  if (bounds.max !== undefined) {
    input.max = String(bounds.max);
  }
  if (bounds.step !== undefined) {
    input.step = String(bounds.step);
  }
  return input;
}
