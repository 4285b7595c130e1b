// Draft state for a design under construction: a parts-list template whose
// cells can hold text or be left open. Edits are pure updates; nothing
// touches the server until submit.

import type { DrawingDocument, CellDocument } from "./types.js";

export interface RowDraft {
  qty: string | null;
  desc: string | null;
}

export interface QueryDraft {
  title: string | null;
  headerQty: string | null;
  headerDesc: string | null;
  author: string | null;
  approver: string | null;
  rows: RowDraft[];
  alpha: number;
  k: number;
}

export const CELL_H = 20;
export const GAP = 2;
const ROW_PITCH = CELL_H + GAP;
const QTY_X = 400;
const QTY_W = 60;
const DESC_X = 462;
const DESC_W = 140;
const TITLE_Y = 500;

export function defaultDraft(): QueryDraft {
  return {
    title: "PARTS LIST",
    headerQty: "QTY",
    headerDesc: "DESCRIPTION",
    author: null,
    approver: null,
    rows: [
      { qty: "1", desc: "Spring" },
      { qty: "2", desc: null },
    ],
    alpha: 0.5,
    k: 10,
  };
}

function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value));
}

export type DraftEdit =
  | { kind: "set-field"; field: "title" | "headerQty" | "headerDesc" | "author" | "approver"; text: string | null }
  | { kind: "set-row"; row: number; column: "qty" | "desc"; text: string | null }
  | { kind: "row-count"; rows: number }
  | { kind: "alpha"; alpha: number }
  | { kind: "k"; k: number };

/** Pure state update; alpha is clamped to [0,1], k floored at 1. */
export function applyEdit(draft: QueryDraft, edit: DraftEdit): QueryDraft {
  switch (edit.kind) {
    case "set-field":
      return { ...draft, [edit.field]: normalize(edit.text) };
    case "set-row": {
      if (edit.row < 0 || edit.row >= draft.rows.length) return draft;
      const rows = draft.rows.map((row, i) =>
        i === edit.row ? { ...row, [edit.column]: normalize(edit.text) } : row,
      );
      return { ...draft, rows };
    }
    case "row-count": {
      const count = clamp(Math.round(edit.rows), 1, 12);
      const rows = draft.rows.slice(0, count);
      while (rows.length < count) rows.push({ qty: null, desc: null });
      return { ...draft, rows };
    }
    case "alpha":
      return { ...draft, alpha: clamp(edit.alpha, 0, 1) };
    case "k":
      return { ...draft, k: Math.max(1, Math.round(edit.k)) };
  }
}

function normalize(text: string | null): string | null {
  if (text === null) return null;
  const trimmed = text.trim();
  return trimmed === "" ? null : trimmed;
}

/** The template geometry mirrors the corpus layout: title bar at the bottom,
 * header row above it, materials rows stacked upward. */
export function draftToDocument(draft: QueryDraft, id = "draft"): DrawingDocument {
  const cells: CellDocument[] = [
    { id: "appr", bbox: [50, TITLE_Y - ROW_PITCH, 60, CELL_H], text: "APPR" },
    { id: "apprby", bbox: [112, TITLE_Y - ROW_PITCH, 110, CELL_H], text: draft.approver },
    { id: "drawn", bbox: [50, TITLE_Y, 60, CELL_H], text: "DRAWN" },
    { id: "author", bbox: [112, TITLE_Y, 110, CELL_H], text: draft.author },
  ];
  draft.rows.forEach((row, i) => {
    const y = TITLE_Y - ROW_PITCH * (i + 2);
    cells.push({ id: `qty${i}`, bbox: [QTY_X, y, QTY_W, CELL_H], text: row.qty });
    cells.push({ id: `desc${i}`, bbox: [DESC_X, y, DESC_W, CELL_H], text: row.desc });
  });
  cells.push({ id: "hqty", bbox: [QTY_X, TITLE_Y - ROW_PITCH, QTY_W, CELL_H], text: draft.headerQty });
  cells.push({ id: "hdesc", bbox: [DESC_X, TITLE_Y - ROW_PITCH, DESC_W, CELL_H], text: draft.headerDesc });
  cells.push({ id: "title", bbox: [QTY_X, TITLE_Y, QTY_W + GAP + DESC_W, CELL_H], text: draft.title });
  return { id, cells, labels: {}, visual_features: null };
}

export function emptyCellCount(draft: QueryDraft): number {
  const doc = draftToDocument(draft);
  return doc.cells.filter((c) => c.text === null).length;
}

/** Undo-able draft holder with session persistence. */
export class DraftStore {
  private history: QueryDraft[] = [];
  private current: QueryDraft;

  constructor(
    initial?: QueryDraft,
    private readonly storage: Pick<Storage, "getItem" | "setItem"> | null = null,
    private readonly storageKey = "tdassist.draft",
  ) {
    this.current = initial ?? this.restore() ?? defaultDraft();
  }

  get draft(): QueryDraft {
    return this.current;
  }

  get canUndo(): boolean {
    return this.history.length > 0;
  }

  apply(edit: DraftEdit): QueryDraft {
    const next = applyEdit(this.current, edit);
    if (next !== this.current) {
      this.history.push(this.current);
      this.current = next;
      this.persist();
    }
    return this.current;
  }

  undo(): QueryDraft {
    const previous = this.history.pop();
    if (previous) {
      this.current = previous;
      this.persist();
    }
    return this.current;
  }

  private persist(): void {
    this.storage?.setItem(this.storageKey, JSON.stringify(this.current));
  }

  private restore(): QueryDraft | null {
    const raw = this.storage?.getItem(this.storageKey);
    if (!raw) return null;
    try {
      const parsed = JSON.parse(raw) as QueryDraft;
      if (Array.isArray(parsed.rows) && typeof parsed.alpha === "number") {
        return parsed;
      }
    } catch {
      // corrupted session entry; start fresh
    }
    return null;
  }
}
