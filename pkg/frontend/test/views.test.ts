import { describe, expect, it } from "vitest";

import { ApiError } from "../src/api.js";
import { paginate, rowsFromResults } from "../src/logic.js";
import {
  escapeHtml,
  renderApiError,
  renderBadge,
  renderDetail,
  renderQueryError,
  renderThornRows,
} from "../src/views.js";
import { WireValue } from "../src/api.js";

function toolkitFixture(n: number) {
  const ids: string[] = [];
  const results: Record<string, Record<string, WireValue>> = {};
  for (let i = 0; i < n; i++) {
    const id = `id-${String(i).padStart(4, "0")}`;
    ids.push(id);
    results[id] = {
      "fluiddb/about": `CCTK:Arr/Thorn${i}`,
      "gridaphobe/CCTK/name": `Thorn${i}`,
      "gridaphobe/CCTK/arrangement": "Arr",
      "gridaphobe/CCTK/description": `thorn ${i}`,
    };
  }
  return rowsFromResults(ids, results, ["gridaphobe/CCTK"]);
}

describe("renderThornRows", () => {
  it("renders 135 rows for the toolkit fixture", () => {
    const html = renderThornRows(paginate(toolkitFixture(135), 1));
    expect(html.match(/<tr data-object-id=/g)).toHaveLength(135);
    expect(html).toContain("135 objects");
  });

  it("renders the empty state", () => {
    expect(renderThornRows(paginate([], 1))).toContain("No matching objects");
  });

  it("escapes values", () => {
    const rows = rowsFromResults(
      ["x"],
      { x: { "p/name": "<script>alert(1)</script>" } },
      ["p"],
    );
    const html = renderThornRows(paginate(rows, 1));
    expect(html).not.toContain("<script>alert(1)</script>");
    expect(html).toContain("&lt;script&gt;");
  });

  it("shows a pager only beyond one page", () => {
    expect(renderThornRows(paginate(toolkitFixture(135), 1))).not.toContain("pager");
    const html = renderThornRows(paginate(toolkitFixture(401), 1));
    expect(html).toContain("page 1 of 3");
  });
});

describe("error rendering", () => {
  it("query errors are inline", () => {
    expect(renderQueryError("unexpected token")).toContain("query-error");
  });

  it("403 and 404 render distinctly", () => {
    const denied = renderApiError(new ApiError(403, "permission-denied", "update denied"));
    const missing = renderApiError(new ApiError(404, "not-found", "no such tag"));
    expect(denied).toContain("permission-error");
    expect(denied).toContain("update denied");
    expect(missing).toContain("notfound-error");
    expect(denied).not.toBe(missing);
  });
});

describe("renderBadge", () => {
  it("emits markup only when shown", () => {
    expect(renderBadge(true)).toContain("toolkit-badge");
    expect(renderBadge(false)).toBe("");
  });
});

function detailModel(overrides: Partial<Parameters<typeof renderDetail>[0]> = {}) {
  return {
    objectId: "obj-1",
    about: "CCTK:Carpet/Carpet",
    groups: [
      {
        user: "alice",
        tags: [{ path: "alice/tested-on", kind: "string" }],
      },
      {
        user: "gridaphobe",
        tags: [
          { path: "gridaphobe/CCTK/name", kind: "string" },
          { path: "gridaphobe/CCTK/blob", kind: "opaque" },
        ],
      },
    ],
    values: {
      "alice/tested-on": "stampede",
      "gridaphobe/CCTK/name": "Carpet",
      "gridaphobe/CCTK/blob": null,
    },
    badge: true,
    viewer: "alice" as string | null,
    tagUrl: (path: string) => `http://api/objects/obj-1/${path}`,
    ...overrides,
  };
}

describe("renderDetail", () => {
  it("groups tags into per-user sections", () => {
    const html = renderDetail(detailModel());
    const sections = html.match(/<section class="user-group" data-user="([^"]+)"/g);
    expect(sections).toHaveLength(2);
    expect(html.indexOf('data-user="alice"')).toBeLessThan(
      html.indexOf('data-user="gridaphobe"'),
    );
  });

  it("shows the toolkit badge only when set", () => {
    expect(renderDetail(detailModel())).toContain("toolkit-badge");
    expect(renderDetail(detailModel({ badge: false }))).not.toContain("toolkit-badge");
  });

  it("offers edit controls only for the viewer's own tags", () => {
    const html = renderDetail(detailModel());
    expect(html).toContain('data-edit-tag="alice/tested-on"');
    expect(html).not.toContain('data-edit-tag="gridaphobe/CCTK/name"');
  });

  it("renders opaque values as typed download links", () => {
    const html = renderDetail(detailModel());
    expect(html).toContain('class="opaque-link"');
    expect(html).toContain("http://api/objects/obj-1/gridaphobe/CCTK/blob");
  });

  it("anonymous viewers get no editor", () => {
    const html = renderDetail(detailModel({ viewer: null }));
    expect(html).not.toContain("add-tag-form");
    expect(html).toContain("log in to add tags");
  });
});

describe("escapeHtml", () => {
  it("escapes the four specials", () => {
    expect(escapeHtml('<a href="x">&</a>')).toBe(
      "&lt;a href=&quot;x&quot;&gt;&amp;&lt;/a&gt;",
    );
  });
});
