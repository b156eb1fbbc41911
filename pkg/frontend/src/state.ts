/**
 * View state for the single-page interface. One plain object the
 * controller mutates and the renderer reads; the server is the
 * concurrency arbiter via the head token.
 *
 * Invariants:
 *  - the dirty edit buffer is discarded on "Cancel Editing";
 *  - `head` always echoes the sequence of the last fetched detail.
 */

import type {
  CatalogPage,
  Category,
  EntityDetail,
  FormFieldSchema,
  HistoryEntry,
  Suggestion,
  TermJson,
  VaultEntry,
} from "./types.js";

export type Route = "catalog" | "entity" | "new_record" | "history" | "vault";

export interface StagedChange {
  property: string;
  value: TermJson;
}

export interface EditBuffer {
  additions: StagedChange[];
  removals: StagedChange[];
}

export interface NewRecordState {
  class: string;
  fields: FormFieldSchema[];
}

export interface SuggestionState {
  /** Property path the dropdown belongs to. */
  path: string;
  query: string;
  items: Suggestion[];
}

export interface ViewState {
  route: Route;
  // catalog
  categories: Category[];
  category: string | null;
  catalog: CatalogPage | null;
  page: number;
  perPage: number;
  sortBy: string | null;
  sortDir: "asc" | "desc";
  // entity
  entity: string | null;
  detail: EntityDetail | null;
  head: number | null;
  buffer: EditBuffer;
  errors: Map<string, string[]>;
  suggestions: SuggestionState | null;
  /** Stale head detected on save; offer non-destructive reload. */
  conflict: boolean;
  /** Old version being viewed read-only, if any. */
  viewingVersion: number | null;
  // other routes
  historyEntries: HistoryEntry[];
  vaultEntries: VaultEntry[];
  newRecord: NewRecordState | null;
  // chrome
  banner: string | null;
}

export function emptyBuffer(): EditBuffer {
  return { additions: [], removals: [] };
}

export function initialState(): ViewState {
  return {
    route: "catalog",
    categories: [],
    category: null,
    catalog: null,
    page: 1,
    perPage: 50,
    sortBy: null,
    sortDir: "asc",
    entity: null,
    detail: null,
    head: null,
    buffer: emptyBuffer(),
    errors: new Map(),
    suggestions: null,
    conflict: false,
    viewingVersion: null,
    historyEntries: [],
    vaultEntries: [],
    newRecord: null,
    banner: null,
  };
}

export function bufferIsEmpty(buffer: EditBuffer): boolean {
  return buffer.additions.length === 0 && buffer.removals.length === 0;
}

/** "Cancel Editing": throw away staged changes and their errors. */
export function discardBuffer(state: ViewState): void {
  state.buffer = emptyBuffer();
  state.errors = new Map();
  state.suggestions = null;
  state.conflict = false;
}

const sameTerm = (a: TermJson, b: TermJson): boolean =>
  a.type === b.type &&
  a.value === b.value &&
  a.datatype === b.datatype &&
  a["xml:lang"] === b["xml:lang"];

/**
 * The values a property would have if the buffer were saved now:
 * current values minus staged removals plus staged additions.
 */
export function pendingValues(state: ViewState, property: string): TermJson[] {
  const current =
    state.detail?.fields.find((f) => f.property === property)?.raw_values ?? [];
  const removed = state.buffer.removals.filter((r) => r.property === property);
  const kept = current.filter((v) => !removed.some((r) => sameTerm(r.value, v)));
  const added = state.buffer.additions
    .filter((a) => a.property === property)
    .map((a) => a.value);
  return [...kept, ...added];
}

export { sameTerm };
