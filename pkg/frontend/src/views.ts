/**
 * HTML renderers. Pure string builders so they are testable without a
 * browser; app.ts mounts the results and wires events via data attributes.
 */

import { ApiError, TagListing } from "./api.js";
import { Page, TagGroup, ThornRow } from "./logic.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderBanner(message: string): string {
  return `<div class="banner error">${escapeHtml(message)}</div>`;
}

export function renderQueryError(message: string): string {
  return `<div class="inline-error query-error">Query error: ${escapeHtml(message)}</div>`;
}

/** 403 and 404 render distinctly; everything else is a plain error box. */
export function renderApiError(error: ApiError): string {
  if (error.status === 403) {
    return `<div class="inline-error permission-error">Permission denied: ${escapeHtml(error.message)}</div>`;
  }
  if (error.status === 404) {
    return `<div class="inline-error notfound-error">Not found: ${escapeHtml(error.message)}</div>`;
  }
  return `<div class="inline-error">${escapeHtml(`${error.status} ${error.message}`)}</div>`;
}

export function renderThornRows(page: Page<ThornRow>): string {
  if (page.total === 0) {
    return `<p class="empty-state">No matching objects.</p>`;
  }
  const rows = page.items
    .map(
      (row) => `<tr data-object-id="${escapeHtml(row.id)}">
  <td><a href="#/object/${encodeURIComponent(row.id)}">${escapeHtml(row.name || row.about || row.id)}</a></td>
  <td>${escapeHtml(row.arrangement)}</td>
  <td>${escapeHtml(row.description)}</td>
</tr>`,
    )
    .join("\n");
  const pager =
    page.pages > 1
      ? `<nav class="pager">page ${page.page} of ${page.pages}
  <button data-page="${page.page - 1}" ${page.page <= 1 ? "disabled" : ""}>prev</button>
  <button data-page="${page.page + 1}" ${page.page >= page.pages ? "disabled" : ""}>next</button>
</nav>`
      : "";
  return `<table class="thorn-list">
<thead><tr><th>name</th><th>arrangement</th><th>description</th></tr></thead>
<tbody>
${rows}
</tbody>
</table>
<p class="result-count">${page.total} objects</p>
${pager}`;
}

export function renderBadge(show: boolean): string {
  return show
    ? `<span class="toolkit-badge" title="part of the Einstein Toolkit">Einstein Toolkit</span>`
    : "";
}

function renderTagRow(
  entry: TagListing,
  value: string | null,
  tagUrl: string,
  editable: boolean,
): string {
  const shown =
    entry.kind === "opaque"
      ? `<a class="opaque-link" href="${escapeHtml(tagUrl)}" download>download (${escapeHtml(entry.kind)})</a>`
      : `<code class="tag-value">${escapeHtml(value ?? "")}</code>`;
  const buttons = editable
    ? `<button data-edit-tag="${escapeHtml(entry.path)}">edit</button>
       <button data-delete-tag="${escapeHtml(entry.path)}">delete</button>`
    : "";
  return `<li class="tag-row" data-tag="${escapeHtml(entry.path)}">
  <span class="tag-path">${escapeHtml(entry.path)}</span> ${shown} ${buttons}
</li>`;
}

export interface DetailModel {
  objectId: string;
  about: string | null;
  groups: TagGroup[];
  values: Record<string, string | null>; // primitive JSON text, null for opaque
  badge: boolean;
  viewer: string | null;
  tagUrl: (path: string) => string;
}

export function renderDetail(model: DetailModel): string {
  const sections = model.groups
    .map((group) => {
      const items = group.tags
        .map((entry) =>
          renderTagRow(
            entry,
            model.values[entry.path] ?? null,
            model.tagUrl(entry.path),
            group.user === model.viewer,
          ),
        )
        .join("\n");
      return `<section class="user-group" data-user="${escapeHtml(group.user)}">
<h3>${escapeHtml(group.user)}</h3>
<ul>
${items}
</ul>
</section>`;
    })
    .join("\n");
  const addForm = model.viewer
    ? `<form id="add-tag-form">
  <input id="new-tag-path" placeholder="${escapeHtml(model.viewer)}/comment" value="${escapeHtml(model.viewer)}/" />
  <input id="new-tag-value" placeholder="value (JSON or text)" />
  <button type="submit">add tag</button>
  <label class="upload">or upload opaque: <input type="file" id="new-tag-file" /></label>
</form>`
    : `<p class="hint">log in to add tags</p>`;
  return `<header class="detail-header">
  <h2>${escapeHtml(model.about ?? model.objectId)}</h2>
  ${renderBadge(model.badge)}
</header>
${sections}
${addForm}
<div id="detail-message"></div>`;
}

export function renderLogin(): string {
  return `<form id="login-form">
  <input id="login-user" placeholder="username (optional)" />
  <input id="login-token" placeholder="API token (kept in memory)" type="password" />
  <button type="submit">use credentials</button>
</form>`;
}
