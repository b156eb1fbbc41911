/**
 * JSON shapes of the curation service API. Terms travel in
 * SPARQL-results-JSON form; timestamps are millisecond-precision UTC
 * ISO strings.
 */

export interface TermJson {
  type: "uri" | "literal";
  value: string;
  datatype?: string;
  "xml:lang"?: string;
}

/** A value for a create/edit field: either a concrete term or a nested
 * new record (created together with its parent). */
export type FieldValue = TermJson | { nested: NestedRecord };

export interface NestedRecord {
  class: string;
  fields: { property: string; value: FieldValue }[];
}

export interface Category {
  class: string;
  label: string;
  count: number;
}

export interface CatalogItem {
  iri: string;
  display: string;
}

export interface CatalogPage {
  category: string;
  total: number;
  page: number;
  per_page: number;
  sort_by: string | null;
  sort_dir: string;
  items: CatalogItem[];
}

/** Where the UI should send disambiguation queries for a field. */
export interface SearchHint {
  class: string;
  property: string;
  min_chars: number;
}

export type Widget =
  | "text"
  | "textarea"
  | "date_full"
  | "date_year_month"
  | "date_year"
  | "number"
  | "uri_ref"
  | "nested_entity"
  | "dropdown";

export interface FormFieldSchema {
  path: string;
  label: string;
  widget: Widget;
  datatype_options: string[];
  min_count: number | null;
  max_count: number | null;
  pattern: string | null;
  required: boolean;
  repeatable: boolean;
  object_class: string | null;
  options: TermJson[];
  search: SearchHint | null;
}

export interface EntityFieldValue {
  display: string;
  target: string | null;
}

export interface EntityField {
  property: string;
  label: string;
  values: EntityFieldValue[];
  raw_values: TermJson[];
  widget: FormFieldSchema | null;
  can_add: boolean;
  can_remove: boolean;
}

export interface EntityDetail {
  iri: string;
  types: string[];
  display: string;
  head: number;
  fields: EntityField[];
  form: FormFieldSchema[];
}

export interface HistoryEntry {
  sequence: number;
  agent: string;
  primary_source: string | null;
  generated_at: string;
  invalidated_at: string | null;
  description: string;
  additions: [string, string][];
  removals: [string, string][];
  is_deletion: boolean;
}

export interface Suggestion {
  entity: string;
  display: string;
  score: number;
}

export interface VaultEntry {
  entity: string;
  display: string;
  deleted_at: string;
  agent: string;
  last_snapshot: number;
}

export interface Violation {
  path: string;
  kind: string;
  message: string;
}

export interface RestoreResult {
  head: number;
  cascaded: { iri: string; snapshot: number }[];
}
