// Wires the draft editor, alpha/k controls, and the results panel together.

import { SearchClient, ApiRequestError } from "./api.js";
import { DraftStore, draftToDocument, emptyCellCount, type DraftEdit } from "./state.js";
import { renderError, renderProvenance, renderResults } from "./view.js";

const client = new SearchClient();
const store = new DraftStore(undefined, window.sessionStorage);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function renderDraft(): void {
  const draft = store.draft;
  const grid = el<HTMLDivElement>("grid");
  grid.replaceChildren();

  const addField = (
    label: string,
    value: string | null,
    onChange: (text: string | null) => DraftEdit,
  ) => {
    const row = document.createElement("div");
    row.className = "field";
    const name = document.createElement("label");
    name.textContent = label;
    const input = document.createElement("input");
    input.value = value ?? "";
    input.placeholder = "(empty cell)";
    input.addEventListener("change", () => {
      store.apply(onChange(input.value === "" ? null : input.value));
      renderDraft();
    });
    row.append(name, input);
    grid.appendChild(row);
  };

  addField("title bar", draft.title, (text) => ({ kind: "set-field", field: "title", text }));
  addField("header / qty", draft.headerQty, (text) => ({ kind: "set-field", field: "headerQty", text }));
  addField("header / description", draft.headerDesc, (text) => ({
    kind: "set-field",
    field: "headerDesc",
    text,
  }));
  addField("author", draft.author, (text) => ({ kind: "set-field", field: "author", text }));
  addField("approver", draft.approver, (text) => ({ kind: "set-field", field: "approver", text }));

  draft.rows.forEach((row, i) => {
    addField(`row ${i} / qty`, row.qty, (text) => ({ kind: "set-row", row: i, column: "qty", text }));
    addField(`row ${i} / description`, row.desc, (text) => ({
      kind: "set-row",
      row: i,
      column: "desc",
      text,
    }));
  });

  el<HTMLInputElement>("rows").value = String(draft.rows.length);
  el<HTMLInputElement>("alpha").value = String(draft.alpha);
  el<HTMLSpanElement>("alpha-value").textContent = draft.alpha.toFixed(2);
  el<HTMLInputElement>("k").value = String(draft.k);
  el<HTMLSpanElement>("empty-count").textContent = String(emptyCellCount(draft));
  el<HTMLButtonElement>("undo").disabled = !store.canUndo;
}

async function submit(): Promise<void> {
  const draft = store.draft;
  const request = {
    document: draftToDocument(draft),
    alpha: draft.alpha,
    k: draft.k,
  };
  renderError(el("error"), null);
  try {
    const response = await client.queryPartial(request);
    renderResults(el<HTMLTableElement>("results"), response);
    renderProvenance(el("provenance"), response.provenance);
  } catch (error) {
    if (error instanceof DOMException && error.name === "AbortError") {
      return; // superseded by a newer submission
    }
    const message =
      error instanceof ApiRequestError ? `${error.code}: ${error.message}` : String(error);
    renderError(el("error"), message);
  }
}

function boot(): void {
  el<HTMLInputElement>("rows").addEventListener("change", (event) => {
    store.apply({ kind: "row-count", rows: Number((event.target as HTMLInputElement).value) });
    renderDraft();
  });
  el<HTMLInputElement>("alpha").addEventListener("input", (event) => {
    store.apply({ kind: "alpha", alpha: Number((event.target as HTMLInputElement).value) });
    el<HTMLSpanElement>("alpha-value").textContent = store.draft.alpha.toFixed(2);
  });
  el<HTMLInputElement>("k").addEventListener("change", (event) => {
    store.apply({ kind: "k", k: Number((event.target as HTMLInputElement).value) });
  });
  el<HTMLButtonElement>("undo").addEventListener("click", () => {
    store.undo();
    renderDraft();
  });
  el<HTMLButtonElement>("submit").addEventListener("click", () => {
    void submit();
  });
  client
    .health()
    .then((health) => {
      el("status").textContent = `${health.designs} designs, ${health.patterns} patterns`;
    })
    .catch(() => {
      el("status").textContent = "service unreachable";
    });
  renderDraft();
}

boot();
