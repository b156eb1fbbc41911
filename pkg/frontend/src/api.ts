/**
 * Typed client for the curation service HTTP/JSON API. This is the
 * only place the frontend talks to the outside world: no SPARQL, no
 * RDF, just the JSON endpoints.
 */

import type {
  Category,
  CatalogPage,
  EntityDetail,
  FieldValue,
  FormFieldSchema,
  HistoryEntry,
  RestoreResult,
  Suggestion,
  TermJson,
  VaultEntry,
  Violation,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    detail: string,
    readonly violations: Violation[] = [],
    readonly vault?: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }

  /** Optimistic-concurrency conflict: someone else saved first. */
  get isConflict(): boolean {
    return this.status === 409;
  }

  /** The entity lives in the vault now. */
  get isDeleted(): boolean {
    return this.status === 410;
  }
}

export interface ApiClientOptions {
  /** Origin prefix; empty string for same-origin requests. */
  baseUrl?: string;
  /** Bearer token for authenticated instances. */
  token?: string;
  /** Injectable fetch, for tests. */
  fetchFn?: typeof fetch;
}

type Query = Record<string, string | number | undefined>;

export interface EditPayload {
  iri: string;
  expected_head: number;
  additions?: { property: string; value: TermJson }[];
  removals?: { property: string; value: TermJson }[];
  primary_source?: string;
  description?: string;
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly token?: string;
  private readonly fetchFn: typeof fetch;

  constructor(options: ApiClientOptions = {}) {
    this.baseUrl = (options.baseUrl ?? "").replace(/\/+$/, "");
    this.token = options.token;
    this.fetchFn = options.fetchFn ?? ((...args) => fetch(...args));
  }

  private async request<T>(
    method: string,
    path: string,
    opts: { query?: Query; body?: unknown } = {},
  ): Promise<T> {
    let url = this.baseUrl + path;
    if (opts.query) {
      const pairs = Object.entries(opts.query)
        .filter(([, v]) => v !== undefined)
        .map(([k, v]) => `${encodeURIComponent(k)}=${encodeURIComponent(String(v))}`);
      if (pairs.length) url += "?" + pairs.join("&");
    }
    const headers: Record<string, string> = {};
    if (opts.body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const response = await this.fetchFn(url, {
      method,
      headers,
      body: opts.body === undefined ? undefined : JSON.stringify(opts.body),
    });
    let payload: Record<string, unknown> = {};
    try {
      payload = (await response.json()) as Record<string, unknown>;
    } catch {
      // non-JSON body: fall through to the status check
    }
    if (!response.ok) {
      throw new ApiError(
        response.status,
        typeof payload.error === "string" ? payload.error : "Error",
        typeof payload.detail === "string" ? payload.detail : `HTTP ${response.status}`,
        Array.isArray(payload.violations) ? (payload.violations as Violation[]) : [],
        typeof payload.vault === "string" ? payload.vault : undefined,
      );
    }
    return payload as T;
  }

  async categories(): Promise<Category[]> {
    const doc = await this.request<{ categories: Category[] }>("GET", "/api/categories");
    return doc.categories;
  }

  catalog(
    classIri: string,
    opts: { page?: number; perPage?: number; sortBy?: string; sortDir?: string } = {},
  ): Promise<CatalogPage> {
    return this.request("GET", `/api/catalog/${encodeURIComponent(classIri)}`, {
      query: {
        page: opts.page,
        per_page: opts.perPage,
        sort_by: opts.sortBy,
        sort_dir: opts.sortDir,
      },
    });
  }

  entity(iri: string): Promise<EntityDetail> {
    return this.request("GET", "/api/entity", { query: { iri } });
  }

  createEntity(
    classIri: string,
    fields: { property: string; value: FieldValue }[],
    primarySource?: string,
  ): Promise<{ iri: string; head: number }> {
    return this.request("POST", "/api/entity", {
      body: { class: classIri, fields, primary_source: primarySource },
    });
  }

  editEntity(payload: EditPayload): Promise<{ head: number }> {
    return this.request("PATCH", "/api/entity", { body: payload });
  }

  deleteEntity(iri: string): Promise<{ deleted: boolean; head: number }> {
    return this.request("DELETE", "/api/entity", { query: { iri } });
  }

  async history(iri: string): Promise<HistoryEntry[]> {
    const doc = await this.request<{ entries: HistoryEntry[] }>(
      "GET", "/api/entity/history", { query: { iri } },
    );
    return doc.entries;
  }

  restore(iri: string, snapshot: number, primarySource?: string): Promise<RestoreResult> {
    return this.request("POST", "/api/entity/restore", {
      body: { iri, snapshot, primary_source: primarySource },
    });
  }

  async search(q: string, property: string, classIri: string): Promise<Suggestion[]> {
    const doc = await this.request<{ suggestions: Suggestion[] }>("GET", "/api/search", {
      query: { q, property, class: classIri },
    });
    return doc.suggestions;
  }

  async vault(): Promise<VaultEntry[]> {
    const doc = await this.request<{ entries: VaultEntry[] }>("GET", "/api/vault");
    return doc.entries;
  }

  async formSchema(classIri: string): Promise<FormFieldSchema[]> {
    const doc = await this.request<{ fields: FormFieldSchema[] }>(
      "GET", "/api/form-schema", { query: { class: classIri } },
    );
    return doc.fields;
  }
}
