// @vitest-environment jsdom
import { afterEach, describe, expect, it, vi } from "vitest";
import { App } from "../src/app.js";
import { card, jsonResponse, snapshot, until } from "./support.js";

function stubFetch(...queue: Array<Response | Error>) {
  const calls: Array<{ url: string; init?: RequestInit }> = [];
  const fn = vi.fn(async (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    const next = queue.shift();
    if (next === undefined) {
      throw new Error(`unexpected request to ${url}`);
    }
    if (next instanceof Error) {
      throw next;
    }
    return next;
  });
  vi.stubGlobal("fetch", fn);
  return { fn, calls };
}

function mount(): HTMLElement {
  document.body.innerHTML = '<div id="app"></div>';
  return document.getElementById("app") as HTMLElement;
}

function appWithRound(): { root: HTMLElement; app: App } {
  const root = mount();
  const app = new App(root);
  app.store.state = snapshot();
  app.render();
  return { root, app };
}

const DATASETS = [
  { name: "cars", d: 2, n: 5, columns: ["speed", "comfort"] },
  { name: "anti-2d-60", d: 2, n: 60, columns: null },
];

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("App", () => {
  it("lists datasets in the launcher and starts a session from the form", async () => {
    const { calls } = stubFetch(jsonResponse(DATASETS), jsonResponse(snapshot()));
    const root = mount();
    const seen: string[] = [];
    const app = new App(root, { onSessionChange: (id) => seen.push(id) });
    await app.start();

    const select = root.querySelector("#dataset") as HTMLSelectElement;
    expect(Array.from(select.options).map((o) => o.value)).toEqual(["cars", "anti-2d-60"]);

    (root.querySelector("#s") as HTMLInputElement).value = "3";
    (root.querySelector("#seed") as HTMLInputElement).value = "7";
    root.querySelector("form")?.dispatchEvent(new Event("submit", { cancelable: true }));
    await until(() => app.store.state !== null);

    expect(seen).toEqual(["sid-1"]);
    expect(JSON.parse(String(calls[1]?.init?.body))).toMatchObject({ dataset: "cars", seed: 7 });
    expect(root.querySelector("h2")?.textContent).toContain("sort the cards");
    expect(root.textContent).toContain("candidates remaining 5");
  });

  it("posts the on-screen order and then shows the recommendation view", async () => {
    const done = snapshot({
      status: "converged",
      stop_reason: "single_candidate",
      round: 2,
      candidates_remaining: 1,
      display: null,
      recommendation: { id: 2, bound: 0.0, card: card(2) },
      rounds: [
        { round: 1, shown: [1, 2, 3], response: {}, candidates_after: 1, width_after: 0.1 },
      ],
    });
    const { calls } = stubFetch(jsonResponse(done));
    const { root, app } = appWithRound();

    app.board?.move(2, -1);
    (root.querySelector("#submit") as HTMLButtonElement).click();
    await until(() => app.store.state?.status === "converged");

    expect(JSON.parse(String(calls[0]?.init?.body))).toEqual({ order: [2, 1, 3], round: 1 });
    const rec = root.querySelector<HTMLElement>("[data-rec-id]");
    expect(rec?.dataset.recId).toBe("2");
    expect(root.textContent).toContain("no further rounds");
    expect(root.textContent).toContain("only one candidate is left");
  });

  it("swaps the board for a refresh prompt when the round went stale", async () => {
    const next = snapshot({
      round: 2,
      display: { round: 2, mode: "sort", cards: [card(1), card(2), card(3)] },
    });
    stubFetch(jsonResponse({ detail: "already recorded" }, 409), jsonResponse(next));
    const { root, app } = appWithRound();

    (root.querySelector("#submit") as HTMLButtonElement).click();
    await until(() => app.store.staleRound);
    expect(root.querySelector("#submit")).toBeNull();
    expect(root.textContent).toContain("out of date");

    (root.querySelector("#refresh") as HTMLButtonElement).click();
    await until(() => !app.store.staleRound && app.store.state?.round === 2);
    expect(root.querySelector("h2")?.textContent).toContain("round 2");
  });

  it("keeps the arrangement across a transport failure and retries it", async () => {
    const { calls } = stubFetch(
      new TypeError("fetch failed"),
      jsonResponse(snapshot({ status: "converged", display: null })),
    );
    const { root, app } = appWithRound();

    app.board?.move(3, -1);
    app.board?.move(3, -1);
    expect(app.board?.order()).toEqual([3, 1, 2]);

    (root.querySelector("#submit") as HTMLButtonElement).click();
    await until(() => app.store.networkError !== null);
    expect(root.textContent).toContain("your arrangement was kept");
    expect(app.board?.order()).toEqual([3, 1, 2]);

    (root.querySelector("#retry") as HTMLButtonElement).click();
    await until(() => app.store.state?.status === "converged");
    expect(JSON.parse(String(calls[1]?.init?.body))).toEqual({ order: [3, 1, 2], round: 1 });
  });

  it("renders a blocked submission inline and leaves the board alone", async () => {
    const { fn } = stubFetch();
    const { root, app } = appWithRound();
    app.board?.move(2, -1);

    expect(await app.store.submitOrder([1, 1, 3])).toBe(false);
    expect(root.querySelector("#submit-error")?.textContent).toContain("appears more than once");
    expect(app.board?.order()).toEqual([2, 1, 3]);
    expect(fn).not.toHaveBeenCalled();
  });

  it("shows a retry banner when the dataset listing is unreachable", async () => {
    stubFetch(new TypeError("connection refused"));
    const root = mount();
    const app = new App(root);
    await app.start();
    expect(root.textContent).toContain("could not reach the service");
    expect(root.querySelector("#retry")).not.toBeNull();
  });
});
