/**
 * DOM rendering for the participant page.
 *
 * One screen per controller phase; the active screen is rebuilt only when
 * the lineup changes, and interactions patch classes and text in place so
 * keyboard focus survives selection changes.  Every panel gets the same
 * transparent button overlay: nothing in the markup varies by panel
 * beyond its index and the observer's own selections.
 */

import { arrowTarget, OverlayLayout, readOverlayLayout } from "./overlay.js";
import { REASONS, REASON_LABELS, SessionController } from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export interface App {
  /** Re-draw from controller state; call after every controller change. */
  refresh(): void;
}

export function mountApp(root: HTMLElement, controller: SessionController): App {
  let renderedLineup: string | null = null;
  let layout: OverlayLayout | null = null;

  function refresh(): void {
    const view = controller.current();
    if (controller.phase === "active" && view !== null && view.id === renderedLineup) {
      syncActive();
      return;
    }
    renderedLineup = null;
    layout = null;
    root.textContent = "";
    switch (controller.phase) {
      case "loading":
        root.appendChild(el("p", "status", "Loading the next lineup..."));
        break;
      case "closed":
        renderTerminal(
          "Study closed",
          "There are no lineups to evaluate right now. Thank you for your interest.",
        );
        break;
      case "error":
        renderError();
        break;
      case "done":
        renderDone();
        break;
      case "active":
        renderActive();
        renderedLineup = view === null ? null : view.id;
        break;
    }
  }

  function renderTerminal(title: string, message: string): void {
    root.appendChild(el("h1", undefined, title));
    root.appendChild(el("p", "status", message));
  }

  function renderError(): void {
    root.appendChild(el("h1", undefined, "Connection problem"));
    root.appendChild(
      el("p", "status", controller.errorMessage ?? "Could not reach the study server."),
    );
    const retry = el("button", "retry", "Try again");
    retry.addEventListener("click", async () => {
      const pending = controller.start();
      refresh();
      await pending;
      refresh();
    });
    root.appendChild(retry);
  }

  function renderDone(): void {
    const { total } = controller.progress();
    renderTerminal(
      "All done",
      `You evaluated ${total} lineup${total === 1 ? "" : "s"}. Thank you for taking part.`,
    );
  }

  function renderActive(): void {
    const view = controller.current();
    if (view === null) {
      return;
    }

    const header = el("header", "bar");
    const progress = el("span", "progress");
    progress.id = "progress";
    header.appendChild(progress);
    root.appendChild(header);

    root.appendChild(
      el(
        "p",
        "prompt",
        view.allowMultipleSelect
          ? "Click the plot or plots that look most different from the rest."
          : "Click the one plot that looks most different from the rest.",
      ),
    );

    const frame = el("div", "plot-frame");
    frame.innerHTML = view.svg;
    const svg = frame.querySelector("svg");
    if (svg === null) {
      throw new Error("lineup response contained no svg element");
    }
    layout = readOverlayLayout(svg);
    frame.style.position = "relative";
    frame.style.width = `${layout.width}px`;
    frame.style.height = `${layout.height}px`;
    for (const panel of layout.panels) {
      const hit = el("button", "panel-hit");
      hit.type = "button";
      hit.dataset.index = String(panel.index);
      hit.setAttribute("aria-label", `Plot ${panel.index}`);
      hit.setAttribute("aria-pressed", "false");
      hit.style.position = "absolute";
      hit.style.left = `${panel.x}px`;
      hit.style.top = `${panel.y}px`;
      hit.style.width = `${panel.width}px`;
      hit.style.height = `${panel.height}px`;
      hit.addEventListener("click", () => {
        controller.togglePanel(panel.index);
        refresh();
      });
      hit.addEventListener("keydown", (event) => {
        if (layout === null) {
          return;
        }
        const target = arrowTarget(layout, panel.index, event.key);
        if (target !== null) {
          event.preventDefault();
          const next = frame.querySelector<HTMLButtonElement>(
            `button.panel-hit[data-index="${target}"]`,
          );
          next?.focus();
        }
      });
      frame.appendChild(hit);
    }
    root.appendChild(frame);

    const notice = el("p", "notice");
    notice.id = "notice";
    notice.setAttribute("role", "alert");
    root.appendChild(notice);

    const reasons = el("fieldset", "reasons");
    reasons.appendChild(el("legend", undefined, "What makes it different?"));
    for (const reason of REASONS) {
      const label = el("label", "reason");
      const box = el("input");
      box.type = "checkbox";
      box.value = reason;
      box.addEventListener("change", () => {
        controller.toggleReason(reason);
        refresh();
      });
      label.appendChild(box);
      label.appendChild(document.createTextNode(" " + REASON_LABELS[reason]));
      reasons.appendChild(label);
    }
    const freeLabel = el("label", "free-text");
    freeLabel.appendChild(document.createTextNode("Anything else? "));
    const free = el("input");
    free.type = "text";
    free.id = "free-text";
    free.maxLength = 2000;
    free.addEventListener("input", () => {
      controller.setFreeText(free.value);
    });
    freeLabel.appendChild(free);
    reasons.appendChild(freeLabel);
    root.appendChild(reasons);

    const submit = el("button", "submit", "Submit");
    submit.type = "button";
    submit.id = "submit";
    submit.addEventListener("click", async () => {
      const pending = controller.submit();
      refresh();
      await pending;
      refresh();
    });
    root.appendChild(submit);

    syncActive();
  }

  function syncActive(): void {
    const { index, total } = controller.progress();
    const progress = root.querySelector("#progress");
    if (progress !== null) {
      progress.textContent = `Lineup ${index} of ${total}`;
    }
    root.querySelectorAll<HTMLButtonElement>("button.panel-hit").forEach((hit) => {
      const selected = controller.isSelected(Number(hit.dataset.index));
      hit.classList.toggle("selected", selected);
      hit.setAttribute("aria-pressed", String(selected));
    });
    const submit = root.querySelector<HTMLButtonElement>("#submit");
    if (submit !== null) {
      // aria-disabled rather than disabled: an empty-selection click must
      // still reach the controller so it can explain itself inline
      submit.setAttribute("aria-disabled", String(!controller.canSubmit()));
      submit.classList.toggle("unready", !controller.canSubmit());
    }
    const notice = root.querySelector("#notice");
    if (notice !== null) {
      notice.textContent = controller.notice ?? "";
    }
  }

  refresh();
  return { refresh };
}
