/**
 * Typed client for the study service HTTP routes.
 *
 * This module is the only place the page talks to the network; everything
 * it can see is the public JSON and SVG documents, which never include the
 * hidden data position, the answer salt, or the raw data values.
 */

export interface SessionDoc {
  session_id: string;
  observer_id: string;
  lineups: string[];
  completed: string[];
}

export interface LineupDoc {
  id: string;
  m: number;
  n: number;
  design: string;
  hypothesis: string;
  allow_multiple_select: boolean;
}

export interface EvaluationBody {
  observer_id: string;
  selected_panels: number[];
  reasons: string[];
  free_text: string;
}

/** Non-2xx response, with the service's detail string when it sent one. */
export class ApiError extends Error {
  status: number;

  constructor(status: number, detail: string) {
    super(`service responded ${status}: ${detail}`);
    this.name = "ApiError";
    this.status = status;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface Api {
  createSession(observerId: string): Promise<SessionDoc>;
  getSession(sessionId: string): Promise<SessionDoc>;
  getLineup(lineupId: string): Promise<LineupDoc>;
  getLineupSvg(lineupId: string): Promise<string>;
  submitEvaluation(lineupId: string, body: EvaluationBody): Promise<void>;
}

async function readJson(resp: Response): Promise<any> {
  const text = await resp.text();
  let doc: any = null;
  try {
    doc = JSON.parse(text);
  } catch {
    // non-JSON error body; fall through with the raw text as detail
  }
  if (!resp.ok) {
    const detail = doc && typeof doc.detail === "string" ? doc.detail : text.slice(0, 200);
    throw new ApiError(resp.status, detail);
  }
  return doc;
}

/**
 * Build a client bound to a base URL.  `fetchFn` defaults to the page's
 * fetch; tests pass a wrapper so every payload can be inspected.
 */
export function createApi(baseUrl: string, fetchFn?: FetchLike): Api {
  const doFetch: FetchLike = fetchFn ?? ((url, init) => fetch(url, init));
  const base = baseUrl.replace(/\/$/, "");

  async function post(path: string, body: unknown): Promise<any> {
    const resp = await doFetch(base + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return readJson(resp);
  }

  async function get(path: string): Promise<Response> {
    return doFetch(base + path);
  }

  return {
    async createSession(observerId: string): Promise<SessionDoc> {
      return post("/sessions", { observer_id: observerId });
    },

    async getSession(sessionId: string): Promise<SessionDoc> {
      return readJson(await get(`/sessions/${encodeURIComponent(sessionId)}`));
    },

    async getLineup(lineupId: string): Promise<LineupDoc> {
      const doc = await readJson(await get(`/lineups/${encodeURIComponent(lineupId)}`));
      return doc.lineup as LineupDoc;
    },

    async getLineupSvg(lineupId: string): Promise<string> {
      const resp = await get(`/lineups/${encodeURIComponent(lineupId)}/svg`);
      if (!resp.ok) {
        throw new ApiError(resp.status, await resp.text());
      }
      return resp.text();
    },

    async submitEvaluation(lineupId: string, body: EvaluationBody): Promise<void> {
      await post(`/lineups/${encodeURIComponent(lineupId)}/evaluations`, body);
    },
  };
}
