/**
 * Panel hit-target geometry, read straight off the lineup SVG.
 *
 * The service marks the root element with grid metadata and each panel
 * group with its pixel origin, so the page never re-derives plot layout:
 * it positions one transparent button per panel from these attributes.
 */

export interface PanelRegion {
  index: number;
  x: number;
  y: number;
  width: number;
  height: number;
  /** Row-major grid coordinates, for arrow-key navigation. */
  row: number;
  col: number;
}

export interface OverlayLayout {
  width: number;
  height: number;
  rows: number;
  cols: number;
  panels: PanelRegion[];
}

function numberAttr(el: Element, name: string): number {
  const raw = el.getAttribute(name);
  const value = raw === null ? NaN : Number(raw);
  if (!Number.isFinite(value)) {
    throw new Error(`lineup SVG is missing a numeric ${name} attribute`);
  }
  return value;
}

/**
 * Extract the per-panel regions from a mounted lineup `<svg>` element.
 * Throws when the document does not carry the expected attributes; the
 * page treats that as a load failure rather than guessing at geometry.
 */
export function readOverlayLayout(svg: Element): OverlayLayout {
  const m = numberAttr(svg, "data-m");
  const rows = numberAttr(svg, "data-rows");
  const cols = numberAttr(svg, "data-cols");
  const panelWidth = numberAttr(svg, "data-panel-width");
  const panelHeight = numberAttr(svg, "data-panel-height");
  const width = numberAttr(svg, "width");
  const height = numberAttr(svg, "height");

  const groups = svg.querySelectorAll("g[data-panel-index]");
  const panels: PanelRegion[] = [];
  const seen = new Set<number>();
  groups.forEach((g) => {
    const index = numberAttr(g, "data-panel-index");
    if (!Number.isInteger(index) || index < 1 || index > m || seen.has(index)) {
      throw new Error(`lineup SVG has an unexpected panel index ${index}`);
    }
    seen.add(index);
    panels.push({
      index,
      x: numberAttr(g, "data-x"),
      y: numberAttr(g, "data-y"),
      width: panelWidth,
      height: panelHeight,
      row: Math.floor((index - 1) / cols),
      col: (index - 1) % cols,
    });
  });
  if (panels.length !== m) {
    throw new Error(`lineup SVG holds ${panels.length} panels, expected ${m}`);
  }
  panels.sort((a, b) => a.index - b.index);
  return { width, height, rows, cols, panels };
}

/**
 * Panel index reached from `from` by one arrow-key step, or null at the
 * grid edge.  Indices are row-major starting at 1.
 */
export function arrowTarget(
  layout: OverlayLayout,
  from: number,
  key: string,
): number | null {
  const steps: Record<string, [number, number]> = {
    ArrowLeft: [0, -1],
    ArrowRight: [0, 1],
    ArrowUp: [-1, 0],
    ArrowDown: [1, 0],
  };
  const step = steps[key];
  if (step === undefined) {
    return null;
  }
  const row = Math.floor((from - 1) / layout.cols) + step[0];
  const col = ((from - 1) % layout.cols) + step[1];
  if (row < 0 || row >= layout.rows || col < 0 || col >= layout.cols) {
    return null;
  }
  const target = row * layout.cols + col + 1;
  return target <= layout.panels.length ? target : null;
}
