/**
 * Client-side validation mirroring the form schema, for latency: the
 * same cardinality, pattern and lexical checks the service applies,
 * so curators see errors as they type. The server stays the authority;
 * anything this module cannot judge it lets through.
 */

import type { FormFieldSchema, TermJson } from "./types.js";

const XSD = "http://www.w3.org/2001/XMLSchema#";

// Timezone: Z, ±hh:mm up to ±13:59, or exactly ±14:00.
const TZ = "(?:Z|[+-](?:0[0-9]|1[0-3]):[0-5][0-9]|[+-]14:00)";

const LEXICAL: Record<string, RegExp> = {
  [XSD + "string"]: /^[\s\S]*$/,
  [XSD + "integer"]: /^[+-]?[0-9]+$/,
  [XSD + "decimal"]: /^[+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)$/,
  [XSD + "boolean"]: /^(true|false|1|0)$/,
  [XSD + "gYear"]: new RegExp(`^-?([0-9]{4,})${TZ}?$`),
  [XSD + "gYearMonth"]: new RegExp(`^-?([0-9]{4,})-(0[1-9]|1[0-2])${TZ}?$`),
  [XSD + "date"]: new RegExp(`^(-?[0-9]{4,})-([0-9]{2})-([0-9]{2})${TZ}?$`),
  [XSD + "dateTime"]: new RegExp(
    `^(-?[0-9]{4,})-([0-9]{2})-([0-9]{2})T([0-9]{2}):([0-9]{2}):([0-9]{2})(\\.[0-9]+)?${TZ}?$`,
  ),
};

const ANYURI_FORBIDDEN = /[\s<>"{}|\\^`]/;

const DAYS_IN_MONTH = [31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];

function isLeap(year: number): boolean {
  return year % 4 === 0 && (year % 100 !== 0 || year % 400 === 0);
}

function validDay(year: number, month: number, day: number): boolean {
  if (month < 1 || month > 12 || day < 1) return false;
  if (month === 2 && !isLeap(year)) return day <= 28;
  return day <= (DAYS_IN_MONTH[month - 1] as number);
}

function yearOk(digits: string): boolean {
  // Years beyond four digits must not have leading zeros.
  return digits.length === 4 || !digits.startsWith("0");
}

function timeOk(h: number, m: number, s: number, fraction: string | undefined): boolean {
  if (h === 24) return m === 0 && s === 0 && !fraction?.match(/[1-9]/);
  return h <= 23 && m <= 59 && s <= 59;
}

/**
 * Whether `value` is in the lexical space of `datatype`. Mirrors the
 * service's XSD subset; unsupported datatypes are accepted (the server
 * decides).
 */
export function lexicalValid(value: string, datatype: string): boolean {
  if (datatype === XSD + "anyURI") {
    return value.length > 0 && !ANYURI_FORBIDDEN.test(value);
  }
  const pattern = LEXICAL[datatype];
  if (pattern === undefined) return true;
  const m = pattern.exec(value);
  if (m === null) return false;
  if (datatype === XSD + "gYear" || datatype === XSD + "gYearMonth") {
    return yearOk(m[1] as string);
  }
  if (datatype === XSD + "date" || datatype === XSD + "dateTime") {
    const yearDigits = (m[1] as string).replace(/^-/, "");
    if (!yearOk(yearDigits)) return false;
    const year = parseInt(m[1] as string, 10);
    const month = parseInt(m[2] as string, 10);
    const day = parseInt(m[3] as string, 10);
    if (datatype === XSD + "dateTime") {
      const h = parseInt(m[4] as string, 10);
      const min = parseInt(m[5] as string, 10);
      const s = parseInt(m[6] as string, 10);
      if (!timeOk(h, min, s, m[7])) return false;
    }
    return validDay(year, month, day);
  }
  return true;
}

/**
 * Errors for one field given its pending values. Empty array means the
 * field conforms as far as the client can tell.
 */
export function validateField(field: FormFieldSchema, values: TermJson[]): string[] {
  const errors: string[] = [];
  const min = field.min_count ?? 0;
  if (values.length < min) {
    errors.push(`${field.label}: at least ${min} value${min === 1 ? "" : "s"} required`);
  }
  if (field.max_count !== null && values.length > field.max_count) {
    errors.push(`${field.label}: at most ${field.max_count} value${field.max_count === 1 ? "" : "s"} allowed`);
  }
  for (const value of values) {
    if (field.widget === "nested_entity") {
      if (value.type !== "uri") {
        errors.push(`${field.label}: expected a linked record, found "${value.value}"`);
      }
      continue;
    }
    if (value.type !== "literal") continue;
    if (field.pattern !== null) {
      let re: RegExp | null = null;
      try {
        re = new RegExp(field.pattern);
      } catch {
        re = null; // dialect difference: leave it to the server
      }
      if (re !== null && !re.test(value.value)) {
        errors.push(`${field.label}: "${value.value}" does not match the required pattern`);
      }
    }
    if (field.options.length > 0) {
      if (!field.options.some((o) => o.type === value.type && o.value === value.value)) {
        errors.push(`${field.label}: "${value.value}" is not one of the allowed values`);
      }
      continue;
    }
    if (field.datatype_options.length > 0) {
      const ok = field.datatype_options.some((dt) => lexicalValid(value.value, dt));
      if (!ok) {
        errors.push(`${field.label}: "${value.value}" is not a valid ${field.datatype_options.map(localName).join(" or ")}`);
      }
    }
  }
  return errors;
}

/**
 * Validate a whole form: pending values per property against every
 * schema field. Returns only the paths that have errors.
 */
export function validateForm(
  fields: FormFieldSchema[],
  valuesByPath: Map<string, TermJson[]>,
): Map<string, string[]> {
  const out = new Map<string, string[]>();
  for (const field of fields) {
    const errors = validateField(field, valuesByPath.get(field.path) ?? []);
    if (errors.length > 0) out.set(field.path, errors);
  }
  return out;
}

export function localName(iri: string): string {
  for (const sep of ["#", "/"]) {
    const at = iri.lastIndexOf(sep);
    if (at >= 0 && at < iri.length - 1) return iri.slice(at + 1);
  }
  return iri;
}
