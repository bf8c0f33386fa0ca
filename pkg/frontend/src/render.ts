import { progressFraction } from "./judging.js";
import type { HeatmapCell } from "./moderation.js";
import type {
  ItemCard,
  NextDoc,
  QueueRow,
  ServedPairDoc,
  StopNoticeDoc,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/**
 * An item's payload rendered score-blind: arbitrary HTML goes into a
 * sandboxed iframe (no scripts, no navigation), so the assessor sees
 * the work but the page never executes it.
 */
function itemCardHtml(card: ItemCard): string {
  const body =
    card.payload === null
      ? "<p class=\"empty\">(no content)</p>"
      : `<iframe sandbox="" srcdoc="${escapeHtml(card.payload)}"></iframe>`;
  return `
    <section class="item-card" data-item-id="${card.id}">
      <h3>${escapeHtml(card.label) || `item ${card.id}`}</h3>
      ${body}
    </section>`;
}

export function renderJudging(
  doc: ServedPairDoc,
  selections: (criterionId: number) => number | undefined,
): string {
  const { i, j, items } = doc.pair;
  const rows = doc.criteria
    .map((criterion) => {
      const picked = selections(criterion.id);
      const button = (winner: number, label: string) =>
        `<button data-criterion="${criterion.id}" data-winner="${winner}"
                 class="${picked === winner ? "selected" : ""}">${escapeHtml(label)}</button>`;
      return `
        <tr>
          <th>${escapeHtml(criterion.name)}</th>
          <td>${button(i, items[0].label || `item ${i}`)}</td>
          <td>${button(j, items[1].label || `item ${j}`)}</td>
        </tr>`;
    })
    .join("");
  const complete = doc.criteria.every((c) => selections(c.id) !== undefined);
  const pct = Math.round(100 * progressFraction(doc.progress));
  return `
    <div class="judging">
      <div class="pair">${itemCardHtml(items[0])}${itemCardHtml(items[1])}</div>
      <table class="verdicts"><tbody>${rows}</tbody></table>
      <button id="submit" ${complete ? "" : "disabled"}>Submit</button>
      <progress max="${doc.progress.judgement_budget}"
                value="${doc.progress.judgements}"></progress>
      <span class="progress-label">${doc.progress.judgements} /
        ${doc.progress.judgement_budget} judgements (${pct}%)</span>
    </div>`;
}

export function renderStopNotice(doc: StopNoticeDoc): string {
  const summary = doc.report.pairs
    .map(
      (row) =>
        `<tr><td>(${row.i}, ${row.j})</td><td>${row.d}</td>` +
        `<td>${row.eap.toFixed(1)}%</td><td>${row.map.toFixed(1)}%</td>` +
        `<td>${row.n}</td></tr>`,
    )
    .join("");
  return `
    <div class="stop-notice">
      <h2>Session ${escapeHtml(doc.status)}</h2>
      <p>${escapeHtml(doc.reason)}</p>
      <table class="reliability-summary">
        <thead><tr><th>pair</th><th>criterion</th><th>EAP</th><th>MAP</th><th>n</th></tr></thead>
        <tbody>${summary}</tbody>
      </table>
    </div>`;
}

export function renderNext(
  doc: NextDoc,
  selections: (criterionId: number) => number | undefined,
): string {
  return doc.status === "active"
    ? renderJudging(doc, selections)
    : renderStopNotice(doc);
}

export function renderHeatmap(grid: HeatmapCell[][]): string {
  const rows = grid
    .map((cells) => {
      const tds = cells
        .map((cell) => {
          if (cell.value === null) return `<td class="diag"></td>`;
          const classes = [
            cell.metric,
            cell.flagged ? "flagged" : "",
            cell.moderated ? "moderated" : "",
          ]
            .filter(Boolean)
            .join(" ");
          return `<td class="${classes}" title="${cell.metric}">${cell.value.toFixed(0)}</td>`;
        })
        .join("");
      return `<tr>${tds}</tr>`;
    })
    .join("");
  return `<table class="heatmap"><tbody>${rows}</tbody></table>`;
}

export function renderQueue(rows: QueueRow[]): string {
  if (rows.length === 0) return `<p class="empty">No contested pairs.</p>`;
  const body = rows
    .map(
      (row) =>
        `<tr data-i="${row.i}" data-j="${row.j}" data-d="${row.d}">` +
        `<td>(${row.i}, ${row.j})</td><td>${row.d}</td>` +
        `<td>${row.eap.toFixed(1)}%</td><td>${row.n}</td>` +
        `<td><button class="intervene">Resolve…</button></td></tr>`,
    )
    .join("");
  return `
    <table class="queue">
      <thead><tr><th>pair</th><th>criterion</th><th>EAP</th><th>n</th><th></th></tr></thead>
      <tbody>${body}</tbody>
    </table>`;
}
