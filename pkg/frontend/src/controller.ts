/**
 * Application controller: the verbs behind every widget. The DOM layer
 * (main.ts) translates events into these calls; tests drive them
 * directly against a live service, which exercises the same code paths
 * minus the pixels.
 */

import { ApiClient, ApiError } from "./api.js";
import {
  bufferIsEmpty,
  discardBuffer,
  initialState,
  pendingValues,
  sameTerm,
  type ViewState,
} from "./state.js";
import { validateForm } from "./validation.js";
import type {
  FieldValue,
  FormFieldSchema,
  RestoreResult,
  SearchHint,
  Suggestion,
  TermJson,
} from "./types.js";

/** Asks the user to confirm a destructive action. */
export type ConfirmFn = (message: string) => boolean | Promise<boolean>;

export interface ControllerOptions {
  /** Called after every state change; the DOM layer re-renders here. */
  onChange?: (state: ViewState) => void;
  /** Confirmation dialog; defaults to always-yes (tests override). */
  confirm?: ConfirmFn;
}

export class AppController {
  readonly state: ViewState;
  private readonly onChange: (state: ViewState) => void;
  private readonly confirmFn: ConfirmFn;

  constructor(
    private readonly api: ApiClient,
    options: ControllerOptions = {},
  ) {
    this.state = initialState();
    this.onChange = options.onChange ?? (() => {});
    this.confirmFn = options.confirm ?? (() => true);
  }

  private changed(): void {
    this.onChange(this.state);
  }

  private fail(error: unknown): void {
    this.state.banner =
      error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
    this.changed();
  }

  dismissBanner(): void {
    this.state.banner = null;
    this.changed();
  }

  // -- catalog -------------------------------------------------------------

  async loadCategories(): Promise<void> {
    try {
      this.state.categories = await this.api.categories();
      this.state.banner = null;
    } catch (error) {
      this.fail(error);
      return;
    }
    this.changed();
  }

  async openCatalog(classIri: string): Promise<void> {
    this.state.category = classIri;
    this.state.page = 1;
    await this.refreshCatalog();
  }

  async setPage(page: number): Promise<void> {
    this.state.page = page;
    await this.refreshCatalog();
  }

  async setPerPage(perPage: number): Promise<void> {
    this.state.perPage = perPage;
    this.state.page = 1;
    await this.refreshCatalog();
  }

  async setSort(sortBy: string | null, sortDir: "asc" | "desc" = "asc"): Promise<void> {
    this.state.sortBy = sortBy;
    this.state.sortDir = sortDir;
    this.state.page = 1;
    await this.refreshCatalog();
  }

  private async refreshCatalog(): Promise<void> {
    if (this.state.category === null) return;
    try {
      this.state.catalog = await this.api.catalog(this.state.category, {
        page: this.state.page,
        perPage: this.state.perPage,
        sortBy: this.state.sortBy ?? undefined,
        sortDir: this.state.sortDir,
      });
      this.state.route = "catalog";
      this.state.banner = null;
    } catch (error) {
      this.fail(error);
      return;
    }
    this.changed();
  }

  // -- entity detail / editing ---------------------------------------------

  async openEntity(iri: string): Promise<void> {
    try {
      const detail = await this.api.entity(iri);
      this.state.entity = iri;
      this.state.detail = detail;
      this.state.head = detail.head; // token echoes the last fetch
      this.state.route = "entity";
      this.state.viewingVersion = null;
      this.state.banner = null;
      discardBuffer(this.state);
    } catch (error) {
      if (error instanceof ApiError && error.isDeleted) {
        this.state.banner = `${iri} has been deleted — see the vault`;
        await this.openVault();
        return;
      }
      this.fail(error);
      return;
    }
    this.changed();
  }

  stageAddition(property: string, value: TermJson): void {
    this.state.buffer.additions.push({ property, value });
    this.revalidate();
  }

  stageRemoval(property: string, value: TermJson): void {
    const added = this.state.buffer.additions.findIndex(
      (a) => a.property === property && sameTerm(a.value, value),
    );
    if (added >= 0) {
      // removing something only staged: just drop the staged addition
      this.state.buffer.additions.splice(added, 1);
    } else {
      this.state.buffer.removals.push({ property, value });
    }
    this.revalidate();
  }

  cancelEditing(): void {
    discardBuffer(this.state);
    this.changed();
  }

  private revalidate(): void {
    const form = this.state.detail?.form ?? [];
    const byPath = new Map<string, TermJson[]>();
    for (const field of form) {
      byPath.set(field.path, pendingValues(this.state, field.path));
    }
    this.state.errors = validateForm(form, byPath);
    this.changed();
  }

  get saveDisabled(): boolean {
    return bufferIsEmpty(this.state.buffer) || this.state.errors.size > 0;
  }

  async save(description?: string, primarySource?: string): Promise<boolean> {
    if (this.state.entity === null || this.state.head === null || this.saveDisabled) {
      return false;
    }
    try {
      await this.api.editEntity({
        iri: this.state.entity,
        expected_head: this.state.head,
        additions: this.state.buffer.additions,
        removals: this.state.buffer.removals,
        description,
        primary_source: primarySource,
      });
    } catch (error) {
      if (error instanceof ApiError && error.isConflict) {
        // someone else saved first: keep the buffer, offer a reload
        this.state.conflict = true;
        this.changed();
        return false;
      }
      this.fail(error);
      return false;
    }
    await this.openEntity(this.state.entity);
    return true;
  }

  /** Non-destructive conflict recovery: refetch, keep staged changes. */
  async reloadAfterConflict(): Promise<void> {
    if (this.state.entity === null) return;
    const buffer = this.state.buffer;
    try {
      const detail = await this.api.entity(this.state.entity);
      this.state.detail = detail;
      this.state.head = detail.head;
      this.state.buffer = buffer;
      this.state.conflict = false;
    } catch (error) {
      this.fail(error);
      return;
    }
    this.revalidate();
  }

  // -- disambiguation -------------------------------------------------------

  searchHint(path: string): SearchHint | null {
    const fromForm = (fields: FormFieldSchema[] | undefined) =>
      fields?.find((f) => f.path === path)?.search ?? null;
    return fromForm(this.state.detail?.form) ?? fromForm(this.state.newRecord?.fields);
  }

  /**
   * Suggestions for the dropdown under a text input. Below the
   * configured minimum query length no request is made at all.
   */
  async suggest(path: string, query: string): Promise<Suggestion[]> {
    const hint = this.searchHint(path);
    if (hint === null || query.length < hint.min_chars) {
      this.state.suggestions = { path, query, items: [] };
      this.changed();
      return [];
    }
    try {
      const items = await this.api.search(query, hint.property, hint.class);
      this.state.suggestions = { path, query, items };
      this.changed();
      return items;
    } catch (error) {
      this.fail(error);
      return [];
    }
  }

  /** Curator picked an existing record from the dropdown. */
  pickSuggestion(path: string, suggestion: Suggestion): void {
    this.state.suggestions = null;
    this.stageAddition(path, { type: "uri", value: suggestion.entity });
  }

  // -- creation -------------------------------------------------------------

  async startNewRecord(classIri: string): Promise<void> {
    try {
      this.state.newRecord = {
        class: classIri,
        fields: await this.api.formSchema(classIri),
      };
      this.state.route = "new_record";
      this.state.banner = null;
    } catch (error) {
      this.fail(error);
      return;
    }
    this.changed();
  }

  async createRecord(
    fields: { property: string; value: FieldValue }[],
    primarySource?: string,
  ): Promise<string | null> {
    if (this.state.newRecord === null) return null;
    // client-side pass over the concrete (non-nested) values
    const byPath = new Map<string, TermJson[]>();
    for (const { property, value } of fields) {
      const terms = byPath.get(property) ?? [];
      if ("nested" in value) {
        terms.push({ type: "uri", value: "about:new" }); // placeholder for count checks
      } else {
        terms.push(value);
      }
      byPath.set(property, terms);
    }
    this.state.errors = validateForm(this.state.newRecord.fields, byPath);
    if (this.state.errors.size > 0) {
      this.changed();
      return null;
    }
    try {
      const created = await this.api.createEntity(
        this.state.newRecord.class, fields, primarySource,
      );
      this.state.newRecord = null;
      await this.openEntity(created.iri);
      return created.iri;
    } catch (error) {
      this.fail(error);
      return null;
    }
  }

  // -- destructive actions ---------------------------------------------------

  async deleteEntity(iri: string): Promise<boolean> {
    const display = this.state.detail?.iri === iri ? this.state.detail.display : iri;
    if (!(await this.confirmFn(`Delete "${display}"? It will move to the vault.`))) {
      return false;
    }
    try {
      await this.api.deleteEntity(iri);
    } catch (error) {
      this.fail(error);
      return false;
    }
    await this.openVault();
    return true;
  }

  async restoreSnapshot(iri: string, snapshot: number): Promise<RestoreResult | null> {
    const linked = this.linkedEntities(iri);
    const cascadeNote = linked.length
      ? ` Linked records that changed since then may also be reverted: ${linked.join(", ")}.`
      : "";
    const ok = await this.confirmFn(
      `Restore ${iri} to version ${snapshot}?${cascadeNote}`,
    );
    if (!ok) return null;
    try {
      const result = await this.api.restore(iri, snapshot);
      await this.openEntity(iri);
      return result;
    } catch (error) {
      this.fail(error);
      return null;
    }
  }

  /** IRIs this entity points at — the candidates a restore cascades to. */
  private linkedEntities(iri: string): string[] {
    if (this.state.detail?.iri !== iri) return [];
    const linked = new Set<string>();
    for (const field of this.state.detail.fields) {
      for (const value of field.raw_values) {
        if (value.type === "uri" && value.value !== iri) linked.add(value.value);
      }
    }
    return [...linked].sort();
  }

  // -- history / vault -------------------------------------------------------

  async openHistory(iri: string): Promise<void> {
    try {
      this.state.historyEntries = await this.api.history(iri);
      this.state.entity = iri;
      this.state.route = "history";
      this.state.banner = null;
    } catch (error) {
      this.fail(error);
      return;
    }
    this.changed();
  }

  /** Read-only view of an old version (no buffer, no save). */
  viewVersion(snapshot: number): void {
    this.state.viewingVersion = snapshot;
    discardBuffer(this.state);
  }

  async openVault(): Promise<void> {
    try {
      this.state.vaultEntries = await this.api.vault();
      this.state.route = "vault";
    } catch (error) {
      this.fail(error);
      return;
    }
    this.changed();
  }

  async restoreFromVault(entity: string): Promise<boolean> {
    const entry = this.state.vaultEntries.find((e) => e.entity === entity);
    if (entry === undefined) return false;
    const ok = await this.confirmFn(
      `Restore "${entry.display}" to its last version before deletion?`,
    );
    if (!ok) return false;
    try {
      await this.api.restore(entry.entity, entry.last_snapshot);
    } catch (error) {
      this.fail(error);
      return false;
    }
    await this.openEntity(entity);
    return true;
  }
}
