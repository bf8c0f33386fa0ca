import type { QueueRow, ReliabilityRow, ReportDoc } from "./types.js";

/**
 * One cell of the pairwise reliability heatmap.
 *
 * The matrix is rendered with the expected-agreement metric above the
 * diagonal and the mode-agreement metric below it, so both triangles of
 * the same picture carry information.  Flagged cells are exactly the
 * pairs whose EAP sits under the configured threshold; moderated cells
 * are styled distinctly and never flagged again.
 */
export interface HeatmapCell {
  row: number;
  col: number;
  value: number | null;
  metric: "eap" | "map" | null;
  flagged: boolean;
  moderated: boolean;
}

export function buildHeatmap(
  reliability: ReliabilityRow[],
  nItems: number,
  criterion: number,
  threshold: number,
): HeatmapCell[][] {
  const byPair = new Map<string, ReliabilityRow>();
  for (const row of reliability) {
    if (row.d === criterion) byPair.set(`${row.i}:${row.j}`, row);
  }
  const grid: HeatmapCell[][] = [];
  for (let r = 0; r < nItems; r++) {
    const cells: HeatmapCell[] = [];
    for (let c = 0; c < nItems; c++) {
      if (r === c) {
        cells.push({
          row: r,
          col: c,
          value: null,
          metric: null,
          flagged: false,
          moderated: false,
        });
        continue;
      }
      const lo = Math.min(r, c);
      const hi = Math.max(r, c);
      const entry = byPair.get(`${lo}:${hi}`);
      if (!entry) {
        throw new Error(`reliability report is missing pair (${lo}, ${hi})`);
      }
      const upper = c > r;
      cells.push({
        row: r,
        col: c,
        value: upper ? entry.eap : entry.map,
        metric: upper ? "eap" : "map",
        flagged: !entry.moderated && entry.eap < threshold,
        moderated: entry.moderated,
      });
    }
    grid.push(cells);
  }
  return grid;
}

/** Queue rows sorted most-contested first (EAP ascending, then pair). */
export function sortQueue(rows: QueueRow[]): QueueRow[] {
  return [...rows].sort(
    (a, b) => a.eap - b.eap || a.i - b.i || a.j - b.j || a.d - b.d,
  );
}

/** Restrict a queue to entries under a (possibly stricter) threshold. */
export function filterQueue(rows: QueueRow[], threshold: number): QueueRow[] {
  return rows.filter((row) => row.eap < threshold);
}

/**
 * The flagged queue as the moderator sees it: exactly the report's
 * moderation queue, optionally re-thresholded by the slider, sorted
 * most-contested first.
 */
export function queueFromReport(
  report: ReportDoc,
  threshold?: number,
): QueueRow[] {
  const rows =
    threshold === undefined
      ? report.moderation_queue
      : filterQueue(report.moderation_queue, threshold);
  return sortQueue(rows);
}

/** Item count implied by a report's holistic ranking. */
export function itemCount(report: ReportDoc): number {
  return report.rankings.holistic.length;
}
