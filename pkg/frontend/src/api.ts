import type { CreateSessionOptions, DatasetInfo, SessionState } from "./types.js";

/** Error raised for non-2xx responses, carrying the server's detail message. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

/** Typed client for the session service. */
export class ApiClient {
  constructor(private readonly base: string = "") {}

  listDatasets(): Promise<DatasetInfo[]> {
    return this.request("/datasets");
  }

  createSession(opts: CreateSessionOptions): Promise<SessionState> {
    return this.request("/sessions", post(opts));
  }

  getState(sessionId: string): Promise<SessionState> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}`);
  }

  submitSort(sessionId: string, order: number[], round: number): Promise<SessionState> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/sort`, post({ order, round }));
  }

  submitFavorite(sessionId: string, favorite: number, round: number): Promise<SessionState> {
    return this.request(
      `/sessions/${encodeURIComponent(sessionId)}/favorite`,
      post({ favorite, round }),
    );
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await fetch(this.base + path, init);
    if (!res.ok) {
      throw new ApiError(res.status, await readDetail(res));
    }
    return res.json() as Promise<T>;
  }
}

function post(body: unknown): RequestInit {
  return {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  };
}

async function readDetail(res: Response): Promise<string> {
  try {
    const body = (await res.json()) as { detail?: unknown };
    if (typeof body.detail === "string") {
      return body.detail;
    }
  } catch {
    // non-JSON error body; fall through to the status line
  }
  return `${res.status} ${res.statusText}`;
}
