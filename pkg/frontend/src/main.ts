/**
 * Page entry point: pick a stable observer id, build the controller
 * against the study service, and mount the app.
 *
 * The service base URL defaults to the page's own origin (the service is
 * expected behind the same proxy); set `window.QQLINEUP_BASE_URL` before
 * this module loads to point elsewhere.
 */

import { createApi } from "./api.js";
import { SessionController } from "./state.js";
import { mountApp } from "./ui.js";

const OBSERVER_KEY = "qqlineup.observer";

function observerId(): string {
  const saved = localStorage.getItem(OBSERVER_KEY);
  if (saved !== null) {
    return saved;
  }
  const fresh = crypto.randomUUID();
  localStorage.setItem(OBSERVER_KEY, fresh);
  return fresh;
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (root === null) {
    throw new Error("page is missing the #app container");
  }
  const base = (window as { QQLINEUP_BASE_URL?: string }).QQLINEUP_BASE_URL ?? "";
  const api = createApi(base);
  const controller = new SessionController(api, localStorage, observerId());
  const app = mountApp(root, controller);
  await controller.start();
  app.refresh();
}

void boot();
