// Rendering: the view is the identity on API data. Results keep the
// response order, every number shown comes straight from a response field.

import type { ProvenanceEntry, QueryResponse, RankEntry } from "./types.js";

export interface ResultRow {
  rank: number;
  id: string;
  simTabular: string;
  simVisual: string;
  combined: string;
}

function show(value: number | null): string {
  return value === null ? "–" : value.toFixed(4);
}

/** Response order and values pass through untouched. */
export function resultRows(results: RankEntry[]): ResultRow[] {
  return results.map((entry) => ({
    rank: entry.rank,
    id: entry.id,
    simTabular: show(entry.sim_tabular),
    simVisual: show(entry.sim_visual),
    combined: show(entry.combined),
  }));
}

export interface ProvenanceSummary {
  trueCount: number;
  falseCount: number;
  unknownCount: number;
  entries: ProvenanceEntry[];
}

export function provenanceSummary(entries: ProvenanceEntry[]): ProvenanceSummary {
  const counts = { true: 0, false: 0, unknown: 0 };
  for (const entry of entries) counts[entry.status] += 1;
  return {
    trueCount: counts.true,
    falseCount: counts.false,
    unknownCount: counts.unknown,
    entries,
  };
}

export function renderResults(table: HTMLTableElement, response: QueryResponse): void {
  const rows = resultRows(response.results);
  const body = table.tBodies[0] ?? table.createTBody();
  body.replaceChildren(
    ...rows.map((row) => {
      const tr = document.createElement("tr");
      for (const value of [String(row.rank), row.id, row.simTabular, row.simVisual, row.combined]) {
        const td = document.createElement("td");
        td.textContent = value;
        tr.appendChild(td);
      }
      return tr;
    }),
  );
}

export function renderProvenance(container: HTMLElement, entries: ProvenanceEntry[]): void {
  const summary = provenanceSummary(entries);
  const header = document.createElement("p");
  header.className = "provenance-counts";
  header.textContent =
    `patterns: ${summary.trueCount} true, ${summary.falseCount} false, ` +
    `${summary.unknownCount} unknown`;
  const list = document.createElement("ul");
  list.className = "provenance-list";
  for (const entry of summary.entries) {
    const item = document.createElement("li");
    item.dataset.status = entry.status;
    item.textContent = `[${entry.status}] ${entry.pattern}`;
    list.appendChild(item);
  }
  container.replaceChildren(header, list);
}

export function renderError(container: HTMLElement, message: string | null): void {
  container.textContent = message ?? "";
  container.hidden = message === null;
}
