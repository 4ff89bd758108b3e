/** Shared fakes for unit tests: lineup SVG markup and a stub service. */

import { Api, ApiError, EvaluationBody, LineupDoc, SessionDoc } from "../../src/api.js";
import { KeyValueStore } from "../../src/state.js";

/**
 * Lineup SVG in the exact shape the service renders: grid metadata on the
 * root, one group per panel carrying its pixel origin.
 */
export function makeSvg(
  id: string,
  rows = 2,
  cols = 2,
  panel = 40,
  margin = 5,
  gap = 10,
): string {
  const m = rows * cols;
  const width = 2 * margin + cols * panel + (cols - 1) * gap;
  const height = 2 * margin + rows * panel + (rows - 1) * gap;
  const parts = [
    '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" ' +
      `width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" ` +
      `data-lineup-id="${id}" data-m="${m}" data-design="standard" ` +
      'data-hypothesis="scaled_normal" data-n="8" ' +
      `data-rows="${rows}" data-cols="${cols}" ` +
      `data-panel-width="${panel}" data-panel-height="${panel}">`,
    `<rect width="${width}" height="${height}" fill="#fafafa"/>`,
  ];
  for (let index = 1; index <= m; index += 1) {
    const r = Math.floor((index - 1) / cols);
    const c = (index - 1) % cols;
    const x = margin + c * (panel + gap);
    const y = margin + r * (panel + gap);
    parts.push(
      `<g data-panel-index="${index}" data-x="${x}" data-y="${y}" ` +
        `transform="translate(${x},${y})"><circle cx="1" cy="1" r="1"/></g>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n");
}

export interface StubOptions {
  lineups?: string[];
  completed?: string[];
  multiSelect?: string[];
  rows?: number;
  cols?: number;
  createSessionError?: () => Error | null;
  getSessionError?: (id: string) => Error | null;
  submitError?: () => Error | null;
}

export interface StubApi extends Api {
  submissions: { lineupId: string; body: EvaluationBody }[];
  calls: { createSession: number; getSession: number; getLineup: number };
}

/** In-memory Api with scriptable failures; records every submission. */
export function makeStubApi(options: StubOptions = {}): StubApi {
  const lineupIds = options.lineups ?? ["a", "b", "c"];
  const rows = options.rows ?? 2;
  const cols = options.cols ?? 2;
  const multi = new Set(options.multiSelect ?? []);
  const session: SessionDoc = {
    session_id: "sess-1",
    observer_id: "obs-1",
    lineups: lineupIds,
    completed: options.completed ?? [],
  };
  const stub: StubApi = {
    submissions: [],
    calls: { createSession: 0, getSession: 0, getLineup: 0 },

    async createSession(observerId: string): Promise<SessionDoc> {
      stub.calls.createSession += 1;
      const err = options.createSessionError?.();
      if (err) {
        throw err;
      }
      return { ...session, observer_id: observerId };
    },

    async getSession(sessionId: string): Promise<SessionDoc> {
      stub.calls.getSession += 1;
      const err = options.getSessionError?.(sessionId);
      if (err) {
        throw err;
      }
      const done = new Set(session.completed);
      for (const sub of stub.submissions) {
        done.add(sub.lineupId);
      }
      return { ...session, completed: lineupIds.filter((id) => done.has(id)) };
    },

    async getLineup(lineupId: string): Promise<LineupDoc> {
      stub.calls.getLineup += 1;
      if (!lineupIds.includes(lineupId)) {
        throw new ApiError(404, "unknown lineup id");
      }
      return {
        id: lineupId,
        m: rows * cols,
        n: 8,
        design: "standard",
        hypothesis: "scaled_normal",
        allow_multiple_select: multi.has(lineupId),
      };
    },

    async getLineupSvg(lineupId: string): Promise<string> {
      return makeSvg(lineupId, rows, cols);
    },

    async submitEvaluation(lineupId: string, body: EvaluationBody): Promise<void> {
      const err = options.submitError?.();
      if (err) {
        throw err;
      }
      stub.submissions.push({ lineupId, body });
    },
  };
  return stub;
}

/** Map-backed stand-in for localStorage. */
export function makeStorage(): KeyValueStore {
  const data = new Map<string, string>();
  return {
    getItem: (key) => data.get(key) ?? null,
    setItem: (key, value) => void data.set(key, value),
    removeItem: (key) => void data.delete(key),
  };
}
