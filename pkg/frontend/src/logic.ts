/**
 * Pure view-model helpers: everything here is a function of API responses,
 * so the pages cannot drift from the store.
 */

import { isOpaqueEnvelope, TagListing, WireValue } from "./api.js";

export const TOOLKIT_TAG = "einsteintoolkit.org/includes";
export const ABOUT_TAG = "fluiddb/about";

export const THORN_COLUMNS = ["name", "arrangement", "description"] as const;

export interface ThornRow {
  id: string;
  about: string;
  name: string;
  arrangement: string;
  description: string;
}

export interface TagGroup {
  user: string;
  tags: TagListing[];
}

export function defaultQuery(publisher: string): string {
  return `has ${publisher}/CCTK/name`;
}

/** Tags the list page asks the query endpoint to return per object. */
export function listColumnsTags(prefixes: string[]): string[] {
  const wanted = prefixes.flatMap((p) => THORN_COLUMNS.map((c) => `${p}/${c}`));
  return [ABOUT_TAG, ...wanted];
}

function firstHit(
  values: Record<string, WireValue>,
  prefixes: string[],
  column: string,
): string {
  for (const prefix of prefixes) {
    const value = values[`${prefix}/${column}`];
    if (value !== undefined && !isOpaqueEnvelope(value)) {
      return typeof value === "string" ? value : JSON.stringify(value);
    }
  }
  return "";
}

export function rowsFromResults(
  ids: string[],
  results: Record<string, Record<string, WireValue>>,
  prefixes: string[],
): ThornRow[] {
  return ids.map((id) => {
    const values = results[id] ?? {};
    const about = values[ABOUT_TAG];
    return {
      id,
      about: typeof about === "string" ? about : "",
      name: firstHit(values, prefixes, "name"),
      arrangement: firstHit(values, prefixes, "arrangement"),
      description: firstHit(values, prefixes, "description"),
    };
  });
}

export function groupTagsByUser(listing: TagListing[]): TagGroup[] {
  const groups = new Map<string, TagListing[]>();
  for (const entry of listing) {
    const user = entry.path.split("/", 1)[0];
    const bucket = groups.get(user) ?? [];
    bucket.push(entry);
    groups.set(user, bucket);
  }
  return [...groups.entries()]
    .sort(([a], [b]) => a.localeCompare(b))
    .map(([user, tags]) => ({
      user,
      tags: [...tags].sort((a, b) => a.path.localeCompare(b.path)),
    }));
}

/** The badge shows only for an exactly-true boolean visible to the viewer. */
export function toolkitBadge(value: unknown): boolean {
  return value === true;
}

export interface Page<T> {
  items: T[];
  page: number;
  pages: number;
  total: number;
}

export const PAGE_SIZE = 200;

export function paginate<T>(items: T[], page: number, pageSize = PAGE_SIZE): Page<T> {
  const pages = Math.max(1, Math.ceil(items.length / pageSize));
  const current = Math.min(Math.max(1, page), pages);
  const start = (current - 1) * pageSize;
  return {
    items: items.slice(start, start + pageSize),
    page: current,
    pages,
    total: items.length,
  };
}

export function ownsPath(path: string, username: string | null): boolean {
  return username !== null && path.split("/", 1)[0] === username;
}

/**
 * Editor input for primitive values: JSON when it parses, otherwise the
 * bare text as a string (so `stampede` and `"stampede"` both work).
 */
export function parseEditorValue(text: string): unknown {
  const trimmed = text.trim();
  if (trimmed === "") {
    return "";
  }
  try {
    return JSON.parse(trimmed);
  } catch {
    return text;
  }
}

/** Inline rendering of a primitive JSON body; opaque values get links instead. */
export function formatPrimitive(jsonText: string): string {
  try {
    const value = JSON.parse(jsonText);
    if (typeof value === "string") {
      return value;
    }
    return JSON.stringify(value);
  } catch {
    return jsonText;
  }
}
