/**
 * Session flow and per-lineup form state.
 *
 * Pure state machine over the Api client: no DOM access, so the whole
 * participant flow is unit-testable.  The page layer renders from this
 * and forwards clicks into it.
 */

import { Api, ApiError, SessionDoc } from "./api.js";

/** Canonical reason tokens the service accepts, in display order. */
export const REASONS = [
  "Outliers",
  "LeftSideDifferent",
  "RightSideDifferent",
  "PointsCurve",
] as const;

export type Reason = (typeof REASONS)[number];

/** Checkbox captions; the submitted values stay canonical. */
export const REASON_LABELS: Record<Reason, string> = {
  Outliers: "Outliers",
  LeftSideDifferent: "Left side different",
  RightSideDifferent: "Right side different",
  PointsCurve: "Points curve away from the line",
};

export type Phase = "loading" | "active" | "done" | "closed" | "error";

export interface LineupView {
  id: string;
  m: number;
  allowMultipleSelect: boolean;
  svg: string;
}

/** localStorage-shaped dependency so tests can pass a plain map. */
export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

const SESSION_KEY = "qqlineup.session";

export class SessionController {
  readonly observerId: string;
  phase: Phase = "loading";
  /** Inline, recoverable message (empty selection, transient network). */
  notice: string | null = null;
  /** Terminal-screen message for phase "error". */
  errorMessage: string | null = null;
  freeText = "";

  private readonly api: Api;
  private readonly store: KeyValueStore;
  private session: SessionDoc | null = null;
  private queue: string[] = [];
  private completedCount = 0;
  private view: LineupView | null = null;
  private selected = new Set<number>();
  private checked = new Set<Reason>();
  private inFlight = false;

  constructor(api: Api, store: KeyValueStore, observerId: string) {
    this.api = api;
    this.store = store;
    this.observerId = observerId;
  }

  current(): LineupView | null {
    return this.view;
  }

  progress(): { index: number; total: number } {
    const total = this.session ? this.session.lineups.length : 0;
    return { index: Math.min(this.completedCount + 1, total), total };
  }

  selection(): number[] {
    return [...this.selected].sort((a, b) => a - b);
  }

  isSelected(index: number): boolean {
    return this.selected.has(index);
  }

  reasonChecked(reason: Reason): boolean {
    return this.checked.has(reason);
  }

  canSubmit(): boolean {
    return this.phase === "active" && this.selected.size > 0 && !this.inFlight;
  }

  /**
   * Create the session, or resume the one in storage.  Resuming skips
   * every lineup this observer already submitted, so a mid-session reload
   * lands on the first uncompleted lineup.  Also the retry entry point
   * after a network failure: the session id is persisted before any
   * lineup loads, so rerunning is safe.
   */
  async start(): Promise<void> {
    this.phase = "loading";
    this.errorMessage = null;
    try {
      this.session = await this.loadOrCreateSession();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.phase = "closed";
        return;
      }
      this.fail(err);
      return;
    }
    this.store.setItem(SESSION_KEY, this.session.session_id);
    const done = new Set(this.session.completed);
    this.queue = this.session.lineups.filter((id) => !done.has(id));
    this.completedCount = this.session.lineups.length - this.queue.length;
    await this.loadCurrent();
  }

  /** Toggle a panel; single-select lineups replace instead of accumulate. */
  togglePanel(index: number): void {
    if (this.phase !== "active" || this.view === null) {
      return;
    }
    if (!Number.isInteger(index) || index < 1 || index > this.view.m) {
      return;
    }
    if (this.selected.has(index)) {
      this.selected.delete(index);
    } else {
      if (!this.view.allowMultipleSelect) {
        this.selected.clear();
      }
      this.selected.add(index);
    }
    this.notice = null;
  }

  toggleReason(reason: Reason): void {
    if (this.checked.has(reason)) {
      this.checked.delete(reason);
    } else {
      this.checked.add(reason);
    }
  }

  setFreeText(text: string): void {
    this.freeText = text;
  }

  /**
   * Post the evaluation and advance the queue.  An empty selection is
   * blocked with an inline message; a 409 means this lineup was already
   * submitted (double click, reload race) and advances the same way a
   * 201 does; other failures keep the form state for a retry.
   */
  async submit(): Promise<void> {
    if (this.inFlight || this.phase !== "active" || this.view === null) {
      return;
    }
    if (this.selected.size === 0) {
      this.notice = "Select at least one plot before submitting.";
      return;
    }
    this.inFlight = true;
    try {
      await this.api.submitEvaluation(this.view.id, {
        observer_id: this.observerId,
        selected_panels: this.selection(),
        reasons: REASONS.filter((r) => this.checked.has(r)),
        free_text: this.freeText.trim(),
      });
    } catch (err) {
      if (!(err instanceof ApiError)) {
        this.notice = "Could not reach the study server. Your answer is kept; try again.";
        this.inFlight = false;
        return;
      }
      if (err.status !== 409) {
        this.notice = err.message;
        this.inFlight = false;
        return;
      }
      // 409: already recorded server-side; fall through and advance
    }
    this.inFlight = false;
    this.queue.shift();
    this.completedCount += 1;
    this.selected.clear();
    this.checked.clear();
    this.freeText = "";
    this.notice = null;
    this.view = null;
    await this.loadCurrent();
  }

  private async loadOrCreateSession(): Promise<SessionDoc> {
    const saved = this.store.getItem(SESSION_KEY);
    if (saved !== null) {
      try {
        return await this.api.getSession(saved);
      } catch (err) {
        if (!(err instanceof ApiError) || err.status !== 404) {
          throw err;
        }
        this.store.removeItem(SESSION_KEY);
      }
    }
    return this.api.createSession(this.observerId);
  }

  private async loadCurrent(): Promise<void> {
    if (this.queue.length === 0) {
      this.phase = "done";
      return;
    }
    this.phase = "loading";
    const id = this.queue[0];
    try {
      const [doc, svg] = await Promise.all([
        this.api.getLineup(id),
        this.api.getLineupSvg(id),
      ]);
      this.view = {
        id: doc.id,
        m: doc.m,
        allowMultipleSelect: doc.allow_multiple_select,
        svg,
      };
      this.phase = "active";
    } catch (err) {
      this.fail(err);
    }
  }

  private fail(err: unknown): void {
    this.phase = "error";
    this.errorMessage =
      err instanceof Error ? err.message : "Could not reach the study server.";
  }
}
