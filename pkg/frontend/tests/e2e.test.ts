// @vitest-environment happy-dom

/**
 * End-to-end study round trip against the real Python service:
 * three lineups created over HTTP, a full three-lineup session completed
 * through the mounted page (one evaluation a two-panel multi-pick), admin
 * results checked against an exact binomial oracle, and every payload the
 * page received scanned for answer-key material.
 *
 * The hidden data positions come from the service's store file, which
 * only the test reads; the page never sees them.
 */

import { spawn, ChildProcess } from "node:child_process";
import * as fs from "node:fs";
import * as net from "node:net";
import * as os from "node:os";
import * as path from "node:path";
import { afterAll, beforeAll, expect, test, vi } from "vitest";

import { createApi } from "../src/api.js";
import { SessionController } from "../src/state.js";
import { mountApp, App } from "../src/ui.js";
import { makeStorage } from "./helpers/fixtures.js";
import { rawRequest, recordingFetch, RecordedPayload } from "./helpers/http.js";

const ADMIN = { authorization: "Bearer e2e-admin", "content-type": "application/json" };
const M = 20;

let tmpDir: string;
let storePath: string;
let server: ChildProcess | null = null;
let serverErr = "";
let base = "";

// filled in as the flow runs
let lineupIds: { multi: string; singleA: string; singleB: string };
let positions: Map<string, number>;
const payloadLog: RecordedPayload[] = [];
let controller: SessionController;
let app: App;
let root: HTMLElement;
const picks = new Map<string, number[]>();

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = net.createServer();
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        reject(new Error("could not allocate a port"));
        return;
      }
      probe.close(() => resolve(address.port));
    });
    probe.on("error", reject);
  });
}

async function waitForHealth(deadlineMs: number): Promise<void> {
  const start = Date.now();
  for (;;) {
    try {
      const resp = await rawRequest("GET", `${base}/healthz`);
      if (resp.status === 200) {
        return;
      }
    } catch {
      // not up yet
    }
    if (Date.now() - start > deadlineMs) {
      throw new Error(`service did not come up; stderr so far:\n${serverErr}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 100));
  }
}

/** P(Binomial(n, p) >= k), by direct summation. */
function binomialTail(k: number, n: number, p: number): number {
  if (k <= 0) {
    return 1;
  }
  let total = 0;
  for (let i = k; i <= n; i += 1) {
    let coef = 1;
    for (let j = 0; j < i; j += 1) {
      coef = (coef * (n - j)) / (j + 1);
    }
    total += coef * p ** i * (1 - p) ** (n - i);
  }
  return total;
}

/** A decoy panel index distinct from the hidden position. */
function decoy(position: number): number {
  return (position % M) + 1;
}

beforeAll(async () => {
  tmpDir = fs.mkdtempSync(path.join(os.tmpdir(), "evaluator-ui-e2e-"));
  storePath = path.join(tmpDir, "store.jsonl");
  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  server = spawn(
    "python3",
    [
      "-m",
      "uvicorn",
      "--factory",
      "qqlineup.service:create_app",
      "--host",
      "127.0.0.1",
      "--port",
      String(port),
      "--log-level",
      "warning",
    ],
    {
      env: {
        ...process.env,
        QQLINEUP_STORE: storePath,
        QQLINEUP_ADMIN_TOKEN: "e2e-admin",
        QQLINEUP_SESSION_LENGTH: "3",
        QQLINEUP_SERVICE_SEED: "1",
        QQLINEUP_DISCLOSURE_THRESHOLD: "10",
      },
      stdio: ["ignore", "ignore", "pipe"],
    },
  );
  server.stderr?.on("data", (chunk) => {
    serverErr += String(chunk);
  });
  await waitForHealth(30_000);
}, 60_000);

afterAll(async () => {
  if (server !== null) {
    server.kill("SIGTERM");
    await new Promise((resolve) => {
      server?.on("exit", resolve);
      setTimeout(resolve, 3_000);
    });
  }
  fs.rmSync(tmpDir, { recursive: true, force: true });
});

test("admin creates three lineups over HTTP", async () => {
  // three distinct samples so the session dedup keeps all three
  const samples: Record<string, { data: number[]; seed: number; multi: boolean }> = {
    multi: {
      data: [0.31, -1.2, 0.55, 1.87, -0.43, 0.02, -0.91, 1.13, 0.68, -0.27, 2.4, -1.55],
      seed: 11,
      multi: true,
    },
    singleA: {
      data: [5.1, 4.2, 6.3, 5.8, 4.9, 5.5, 6.1, 4.4, 5.2, 6.8, 3.9, 5.0],
      seed: 22,
      multi: false,
    },
    singleB: {
      data: [-0.1, 0.9, 0.33, -2.1, 1.6, 0.05, -0.77, 0.41, 1.02, -0.6, 0.2, -1.3],
      seed: 33,
      multi: false,
    },
  };
  const ids: Record<string, string> = {};
  for (const [label, sample] of Object.entries(samples)) {
    const resp = await rawRequest("POST", `${base}/lineups`, {
      headers: ADMIN,
      body: JSON.stringify({
        data: sample.data,
        seed: sample.seed,
        allow_multiple_select: sample.multi,
      }),
    });
    expect(resp.status).toBe(201);
    ids[label] = JSON.parse(resp.body).lineup_id;
  }
  lineupIds = ids as typeof lineupIds;

  // answer key straight from the store file: the test's oracle, never the page's
  positions = new Map();
  for (const line of fs.readFileSync(storePath, "utf8").split("\n")) {
    if (line.trim() === "") {
      continue;
    }
    const record = JSON.parse(line);
    if (record.kind === "lineup_private") {
      positions.set(record.body.lineup_id, record.body.data_position);
    }
  }
  expect(positions.size).toBe(3);
  for (const position of positions.values()) {
    expect(position).toBeGreaterThanOrEqual(1);
    expect(position).toBeLessThanOrEqual(M);
  }
}, 60_000);

test("the page completes a full three-lineup session", async () => {
  document.body.innerHTML = '<div id="app"></div>';
  root = document.getElementById("app") as HTMLElement;
  const api = createApi(base, recordingFetch(payloadLog));
  controller = new SessionController(api, makeStorage(), "e2e-observer");
  app = mountApp(root, controller);
  await controller.start();
  app.refresh();

  expect(controller.phase).toBe("active");
  expect(controller.progress()).toEqual({ index: 1, total: 3 });
  expect(root.querySelector("#progress")?.textContent).toBe("Lineup 1 of 3");

  let sawHitAlready = false;
  for (let step = 0; step < 3; step += 1) {
    const view = controller.current();
    expect(view).not.toBeNull();
    const id = view!.id;
    const position = positions.get(id)!;
    const hits = root.querySelectorAll<HTMLButtonElement>("button.panel-hit");
    expect(hits).toHaveLength(M);

    let chosen: number[];
    if (id === lineupIds.multi) {
      expect(view!.allowMultipleSelect).toBe(true);
      chosen = [position, decoy(position)];
    } else if (!sawHitAlready) {
      sawHitAlready = true;
      chosen = [position];
    } else {
      chosen = [decoy(position)];
    }
    picks.set(id, chosen);
    for (const panel of chosen) {
      root
        .querySelector<HTMLButtonElement>(`button.panel-hit[data-index="${panel}"]`)
        ?.click();
    }
    expect(root.querySelectorAll(".panel-hit.selected")).toHaveLength(chosen.length);

    if (id === lineupIds.multi) {
      root.querySelector<HTMLInputElement>('input[value="Outliers"]')?.click();
      const free = root.querySelector<HTMLInputElement>("#free-text");
      if (free) {
        free.value = "two plots look off";
        free.dispatchEvent(new Event("input", { bubbles: true }));
      }
    }

    root.querySelector<HTMLButtonElement>("#submit")?.click();
    await vi.waitFor(
      () => {
        expect(
          controller.phase === "done" || controller.current()?.id !== id,
        ).toBe(true);
      },
      { timeout: 15_000 },
    );
  }

  expect(controller.phase).toBe("done");
  expect(root.querySelector("h1")?.textContent).toBe("All done");
  expect(root.textContent).toMatch(/evaluated 3 lineups/);
}, 60_000);

test("admin results report N, the 0.5-weighted count, and oracle p-values", async () => {
  for (const [label, id] of Object.entries(lineupIds)) {
    const resp = await rawRequest("GET", `${base}/lineups/${id}/result`, {
      headers: ADMIN,
    });
    expect(resp.status).toBe(200);
    const result = JSON.parse(resp.body).result;
    expect(result.lineup_id).toBe(id);
    expect(result.N).toBe(1);
    expect(result.m).toBe(M);

    const chosen = picks.get(id)!;
    const position = positions.get(id)!;
    const hit = chosen.includes(position);
    const expectedY = hit ? 1 / chosen.length : 0;
    expect(result.y_weighted).toBe(expectedY);
    if (label === "multi") {
      expect(result.y_weighted).toBe(0.5);
    }

    const oracle = binomialTail(Math.ceil(expectedY), result.N, 1 / M);
    expect(Math.abs(result.p_value - oracle)).toBeLessThan(1e-12);
    expect(result.reject_at["0.05"]).toBe(hit);
  }
}, 60_000);

test("the submitted reasons and free text round-tripped to the store", () => {
  const evaluations = fs
    .readFileSync(storePath, "utf8")
    .split("\n")
    .filter((line) => line.trim() !== "")
    .map((line) => JSON.parse(line))
    .filter((record) => record.kind === "evaluation")
    .map((record) => record.body);
  expect(evaluations).toHaveLength(3);
  const multiEval = evaluations.find((e) => e.lineup_id === lineupIds.multi);
  expect(multiEval.reasons).toEqual(["Outliers"]);
  expect(multiEval.free_text).toBe("two plots look off");
  expect([...multiEval.selected_panels].sort((a: number, b: number) => a - b)).toEqual(
    [...picks.get(lineupIds.multi)!].sort((a, b) => a - b),
  );
});

test("no payload the page received carries answer-key material", () => {
  // 1 session + 3 x (lineup json + svg) + 3 evaluation receipts
  expect(payloadLog.length).toBeGreaterThanOrEqual(10);
  for (const payload of payloadLog) {
    expect(payload.body).not.toContain("data_position");
    expect(payload.body).not.toContain('"salt"');
    expect(payload.body).not.toContain('"seed"');
    expect(payload.body).not.toContain("data_digest");
    expect(payload.body).not.toContain('"data":');
  }
});
