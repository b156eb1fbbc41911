/**
 * Pure view functions: ViewState in, HTML string out. No DOM access,
 * so every view is testable as a plain function; main.ts owns the
 * mounting and event wiring. Interactive elements carry data-action
 * attributes the DOM layer delegates on.
 */

import type { ViewState } from "./state.js";
import type { EntityField, FormFieldSchema, HistoryEntry } from "./types.js";
import { localName } from "./validation.js";

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const attr = esc;

export function renderApp(state: ViewState): string {
  const parts = [renderBanner(state), renderConflict(state)];
  switch (state.route) {
    case "catalog":
      parts.push(renderCatalog(state));
      break;
    case "entity":
      parts.push(renderEntity(state));
      break;
    case "new_record":
      parts.push(renderNewRecord(state));
      break;
    case "history":
      parts.push(renderHistory(state));
      break;
    case "vault":
      parts.push(renderVault(state));
      break;
  }
  return parts.filter(Boolean).join("\n");
}

function renderBanner(state: ViewState): string {
  if (state.banner === null) return "";
  return `<div class="banner" role="alert">${esc(state.banner)}
    <button data-action="dismiss-banner">Dismiss</button></div>`;
}

function renderConflict(state: ViewState): string {
  if (!state.conflict) return "";
  return `<div class="conflict-dialog" role="alertdialog">
    <p>Someone else saved this record first. Reload the latest version
    and re-apply your staged changes?</p>
    <button data-action="reload-reapply">Reload and re-apply</button>
    <button data-action="cancel-editing">Discard my changes</button>
  </div>`;
}

// -- catalog: two-panel layout ----------------------------------------------

export function renderCatalog(state: ViewState): string {
  const categories = state.categories
    .map(
      (c) => `<li><a href="#" data-action="open-category" data-class="${attr(c.class)}"
        class="${c.class === state.category ? "active" : ""}">${esc(c.label)}
        <span class="count">${c.count}</span></a></li>`,
    )
    .join("\n");
  return `<div class="two-panel">
    <nav class="categories" aria-label="Categories"><h2>Categories</h2>
      <ul>${categories}</ul>
      <button data-action="open-vault">Time Vault</button>
    </nav>
    <section class="items">${renderItemList(state)}</section>
  </div>`;
}

function renderItemList(state: ViewState): string {
  const page = state.catalog;
  if (page === null) return `<p class="hint">Pick a category to browse.</p>`;
  const items = page.items
    .map(
      (i) => `<li><a href="#" data-action="open-entity" data-iri="${attr(i.iri)}">
        ${esc(i.display)}</a></li>`,
    )
    .join("\n");
  const lastPage = Math.max(1, Math.ceil(page.total / page.per_page));
  const perPage = [20, 50, 100]
    .map(
      (n) => `<option value="${n}" ${n === page.per_page ? "selected" : ""}>${n}</option>`,
    )
    .join("");
  return `<div class="list-controls">
      <span>${page.total} records</span>
      <label>Per page <select data-action="set-per-page">${perPage}</select></label>
      <button data-action="new-record" data-class="${attr(page.category)}">New Record</button>
    </div>
    <ol class="catalog">${items}</ol>
    <div class="pager">
      <button data-action="set-page" data-page="${page.page - 1}"
        ${page.page <= 1 ? "disabled" : ""}>Previous</button>
      <span>Page ${page.page} of ${lastPage}</span>
      <button data-action="set-page" data-page="${page.page + 1}"
        ${page.page >= lastPage ? "disabled" : ""}>Next</button>
    </div>`;
}

// -- entity detail / editor ---------------------------------------------------

export function renderEntity(state: ViewState): string {
  const detail = state.detail;
  if (detail === null) return "";
  const readOnly = state.viewingVersion !== null;
  const fields = detail.fields.map((f) => renderField(state, f, readOnly)).join("\n");
  const versionNote = readOnly
    ? `<p class="version-note">Viewing version ${state.viewingVersion} (read only).</p>`
    : "";
  const controls = readOnly
    ? `<button data-action="open-entity" data-iri="${attr(detail.iri)}">Back to current</button>`
    : `<button data-action="save" ${saveDisabled(state) ? "disabled" : ""}>Save</button>
       <button data-action="cancel-editing">Cancel Editing</button>
       <button data-action="delete" data-iri="${attr(detail.iri)}">Delete</button>
       <button data-action="open-history" data-iri="${attr(detail.iri)}">Time Machine</button>`;
  return `<article class="entity">
    <h1>${esc(detail.display)}</h1>
    <p class="iri">${esc(detail.iri)}</p>
    ${versionNote}
    <dl class="fields">${fields}</dl>
    <div class="controls">${controls}</div>
  </article>`;
}

export function saveDisabled(state: ViewState): boolean {
  const empty =
    state.buffer.additions.length === 0 && state.buffer.removals.length === 0;
  return empty || state.errors.size > 0;
}

function renderField(state: ViewState, field: EntityField, readOnly: boolean): string {
  const values = field.values
    .map((v, i) => {
      const raw = field.raw_values[i];
      const text = v.target
        ? `<a href="#" data-action="open-entity" data-iri="${attr(v.target)}">${esc(v.display)}</a>`
        : esc(v.display);
      const remove =
        !readOnly && field.can_remove && raw
          ? `<button data-action="stage-removal" data-property="${attr(field.property)}"
               data-term="${attr(JSON.stringify(raw))}">Remove</button>`
          : "";
      return `<dd>${text} ${remove}</dd>`;
    })
    .join("\n");
  const errors = (state.errors.get(field.property) ?? [])
    .map((e) => `<dd class="error" role="alert">${esc(e)}</dd>`)
    .join("\n");
  const add =
    !readOnly && field.can_add
      ? renderAddControl(state, field)
      : "";
  return `<dt>${esc(field.label)}</dt>${values}${errors}${add}`;
}

function renderAddControl(state: ViewState, field: EntityField): string {
  const widget = field.widget;
  const input = widget
    ? renderInput(widget)
    : `<input type="text" data-property="${attr(field.property)}">`;
  const dropdown =
    state.suggestions !== null && state.suggestions.path === field.property
      ? renderSuggestions(state)
      : "";
  return `<dd class="add-value">Add ${esc(field.label)}: ${input}
    <button data-action="stage-addition" data-property="${attr(field.property)}">Add</button>
    ${dropdown}</dd>`;
}

export function renderSuggestions(state: ViewState): string {
  const s = state.suggestions;
  if (s === null) return "";
  const rows = s.items
    .map(
      (item) => `<li><a href="#" data-action="pick-suggestion"
        data-path="${attr(s.path)}" data-entity="${attr(item.entity)}"
        data-display="${attr(item.display)}">${esc(item.display)}</a></li>`,
    )
    .join("\n");
  return `<ul class="suggestions" role="listbox">
    <li><a href="#" data-action="create-new-nested" data-path="${attr(s.path)}">
      Create new entity</a></li>
    ${rows}
  </ul>`;
}

/** One input element per widget kind, mirroring the form schema. */
export function renderInput(field: FormFieldSchema): string {
  const common = `data-property="${attr(field.path)}" aria-label="${attr(field.label)}"`;
  switch (field.widget) {
    case "date_full":
      return `<input type="date" ${common}>`;
    case "date_year_month":
      return `<input type="month" ${common}>`;
    case "date_year":
      return `<input type="number" step="1" placeholder="YYYY" ${common}>`;
    case "number":
      return `<input type="number" ${common}>`;
    case "uri_ref":
      return `<input type="url" ${common}>`;
    case "textarea":
      return `<textarea ${common}></textarea>`;
    case "dropdown": {
      const options =
        field.options.length > 0
          ? field.options
              .map((o) => `<option value="${attr(o.value)}">${esc(o.value)}</option>`)
              .join("")
          : field.datatype_options
              .map((dt) => `<option value="${attr(dt)}">${esc(localName(dt))}</option>`)
              .join("");
      return `<select ${common}>${options}</select>`;
    }
    case "nested_entity":
      return `<input type="search" ${common} data-search="1"
        placeholder="Search existing or create new">`;
    default:
      return `<input type="text" ${common}>`;
  }
}

// -- new record ---------------------------------------------------------------

export function renderNewRecord(state: ViewState): string {
  const record = state.newRecord;
  if (record === null) return "";
  const rows = record.fields
    .map((f) => {
      const errors = (state.errors.get(f.path) ?? [])
        .map((e) => `<p class="error" role="alert">${esc(e)}</p>`)
        .join("\n");
      const required = f.required ? `<span class="required">*</span>` : "";
      return `<label>${esc(f.label)}${required} ${renderInput(f)}</label>${errors}`;
    })
    .join("\n");
  return `<form class="new-record" data-class="${attr(record.class)}">
    <h1>New Record</h1>
    ${rows}
    <button data-action="create-record">Create</button>
    <button data-action="back-to-catalog">Cancel</button>
  </form>`;
}

// -- time machine ---------------------------------------------------------------

export function renderHistory(state: ViewState): string {
  const entries = state.historyEntries.map((e) => renderHistoryEntry(state, e)).join("\n");
  return `<section class="time-machine">
    <h1>Version history for ${esc(state.entity ?? "")}</h1>
    <ol class="timeline">${entries}</ol>
    <button data-action="open-entity" data-iri="${attr(state.entity ?? "")}">Back</button>
  </section>`;
}

function renderHistoryEntry(state: ViewState, entry: HistoryEntry): string {
  const isHead = state.historyEntries[0]?.sequence === entry.sequence;
  const changes = (label: string, pairs: [string, string][]) =>
    pairs.length
      ? `<h3>${label}</h3><ul>${pairs
          .map(([p, v]) => `<li><strong>${esc(p)}</strong>: ${esc(v)}</li>`)
          .join("")}</ul>`
      : "";
  const source = entry.primary_source
    ? `<a href="${attr(entry.primary_source)}">${esc(entry.primary_source)}</a>`
    : "—";
  const actions = `
    <button data-action="view-version" data-sequence="${entry.sequence}">View this version</button>
    ${isHead ? "" : `<button data-action="restore" data-iri="${attr(state.entity ?? "")}"
      data-sequence="${entry.sequence}">Restore</button>`}`;
  return `<li class="snapshot ${entry.is_deletion ? "deletion" : ""}">
    <h2>Version ${entry.sequence}${entry.is_deletion ? " (deleted)" : ""}</h2>
    <p>${esc(entry.generated_at)} — ${esc(entry.description)}</p>
    <p>Responsible agent: <a href="${attr(entry.agent)}">${esc(entry.agent)}</a></p>
    <p>Primary source: ${source}</p>
    ${changes("Additions", entry.additions)}
    ${changes("Removals", entry.removals)}
    ${actions}
  </li>`;
}

// -- vault -------------------------------------------------------------------

export function renderVault(state: ViewState): string {
  if (state.vaultEntries.length === 0) {
    return `<section class="vault"><h1>Time Vault</h1>
      <p class="empty">No deleted records.</p>
      <button data-action="back-to-catalog">Back</button></section>`;
  }
  const rows = state.vaultEntries
    .map(
      (e) => `<li>
        <strong>${esc(e.display)}</strong>
        <span>deleted ${esc(e.deleted_at)} by <a href="${attr(e.agent)}">${esc(e.agent)}</a></span>
        <button data-action="restore-from-vault" data-entity="${attr(e.entity)}">Restore</button>
      </li>`,
    )
    .join("\n");
  return `<section class="vault"><h1>Time Vault</h1>
    <ul class="vault-entries">${rows}</ul>
    <button data-action="back-to-catalog">Back</button></section>`;
}
