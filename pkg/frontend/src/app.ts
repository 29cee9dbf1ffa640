/**
 * Page wiring: hash routes `#/list` and `#/object/<id>`, a login box whose
 * token lives only in memory, and refresh-on-write after every mutation.
 */

import { ApiClient, ApiError } from "./api.js";
import { loadConfig, UiConfig } from "./config.js";
import {
  ABOUT_TAG,
  TOOLKIT_TAG,
  defaultQuery,
  formatPrimitive,
  groupTagsByUser,
  listColumnsTags,
  ownsPath,
  paginate,
  parseEditorValue,
  rowsFromResults,
  toolkitBadge,
} from "./logic.js";
import {
  renderApiError,
  renderBanner,
  renderDetail,
  renderLogin,
  renderQueryError,
  renderThornRows,
} from "./views.js";

interface State {
  config: UiConfig;
  username: string | null;
  token: string | null;
  query: string;
  page: number;
}

function api(state: State): ApiClient {
  return new ApiClient({
    baseUrl: state.config.apiBase,
    token: state.token ?? undefined,
  });
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

async function showList(state: State): Promise<void> {
  const main = el("main");
  try {
    const { ids, results } = await api(state).query(
      state.query,
      listColumnsTags(state.config.prefixes),
    );
    const rows = rowsFromResults(ids, results ?? {}, state.config.prefixes);
    main.innerHTML = renderThornRows(paginate(rows, state.page));
    for (const button of main.querySelectorAll<HTMLButtonElement>("[data-page]")) {
      button.onclick = () => {
        state.page = Number(button.dataset.page);
        void showList(state);
      };
    }
  } catch (error) {
    if (error instanceof ApiError) {
      main.innerHTML =
        error.code === "query-syntax"
          ? renderQueryError(error.message)
          : renderApiError(error);
    } else {
      main.innerHTML = renderBanner(`server unreachable: ${String(error)}`);
    }
  }
}

async function showDetail(state: State, objectId: string): Promise<void> {
  const main = el("main");
  const client = api(state);
  try {
    const listing = await client.listTags(objectId);
    const rawTexts: Record<string, string> = {};
    const values: Record<string, string | null> = {};
    for (const entry of listing) {
      if (entry.kind === "opaque") {
        values[entry.path] = null;
      } else {
        rawTexts[entry.path] = await client.getTagText(objectId, entry.path);
        values[entry.path] = formatPrimitive(rawTexts[entry.path]);
      }
    }
    let badgeRaw: unknown;
    if (rawTexts[TOOLKIT_TAG] !== undefined) {
      try {
        badgeRaw = JSON.parse(rawTexts[TOOLKIT_TAG]);
      } catch {
        badgeRaw = undefined;
      }
    }
    main.innerHTML = renderDetail({
      objectId,
      about: values[ABOUT_TAG] ?? null,
      groups: groupTagsByUser(listing),
      values,
      badge: toolkitBadge(badgeRaw),
      viewer: state.username,
      tagUrl: (path) => client.tagUrl(objectId, path),
    });
    wireDetail(state, objectId);
  } catch (error) {
    main.innerHTML =
      error instanceof ApiError
        ? renderApiError(error)
        : renderBanner(`server unreachable: ${String(error)}`);
  }
}

function wireDetail(state: State, objectId: string): void {
  const client = api(state);
  const message = el("detail-message");
  const rerender = () => void showDetail(state, objectId);
  const report = (error: unknown) => {
    message.innerHTML =
      error instanceof ApiError
        ? renderApiError(error)
        : renderBanner(String(error));
  };

  for (const button of document.querySelectorAll<HTMLButtonElement>("[data-delete-tag]")) {
    button.onclick = async () => {
      try {
        await client.deleteTag(objectId, button.dataset.deleteTag!);
        rerender();
      } catch (error) {
        report(error);
      }
    };
  }
  for (const button of document.querySelectorAll<HTMLButtonElement>("[data-edit-tag]")) {
    button.onclick = async () => {
      const path = button.dataset.editTag!;
      const text = prompt(`new value for ${path} (JSON or text)`);
      if (text === null) {
        return;
      }
      try {
        await client.putTagJson(objectId, path, parseEditorValue(text));
        rerender();
      } catch (error) {
        report(error);
      }
    };
  }
  const form = document.getElementById("add-tag-form") as HTMLFormElement | null;
  if (form) {
    form.onsubmit = async (event) => {
      event.preventDefault();
      const path = el<HTMLInputElement>("new-tag-path").value.trim();
      if (!ownsPath(path, state.username)) {
        message.innerHTML = renderBanner(
          `tags can only be added under your namespace (${state.username ?? "?"}/...)`,
        );
        return;
      }
      const file = el<HTMLInputElement>("new-tag-file").files?.[0];
      try {
        if (file) {
          await client.putTagOpaque(objectId, path, file);
        } else {
          const raw = el<HTMLInputElement>("new-tag-value").value;
          await client.putTagJson(objectId, path, parseEditorValue(raw));
        }
        rerender();
      } catch (error) {
        report(error);
      }
    };
  }
}

function route(state: State): void {
  const hash = window.location.hash || "#/list";
  const detail = hash.match(/^#\/object\/(.+)$/);
  if (detail) {
    void showDetail(state, decodeURIComponent(detail[1]));
  } else {
    void showList(state);
  }
}

async function start(): Promise<void> {
  const config = await loadConfig();
  const state: State = {
    config,
    username: null,
    token: null,
    query: defaultQuery(config.publisher),
    page: 1,
  };

  el("controls").innerHTML = `${renderLogin()}
<form id="query-form">
  <input id="query-box" value="${state.query.replace(/"/g, "&quot;")}" size="60" />
  <button type="submit">search</button>
</form>`;

  (el("login-form") as unknown as HTMLFormElement).onsubmit = (event) => {
    event.preventDefault();
    state.username = el<HTMLInputElement>("login-user").value.trim() || null;
    state.token = el<HTMLInputElement>("login-token").value.trim() || null;
    route(state);
  };
  (el("query-form") as unknown as HTMLFormElement).onsubmit = (event) => {
    event.preventDefault();
    state.query = el<HTMLInputElement>("query-box").value;
    state.page = 1;
    window.location.hash = "#/list";
    route(state);
  };
  window.addEventListener("hashchange", () => route(state));
  route(state);
}

void start();
