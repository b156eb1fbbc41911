import { describe, expect, it } from "vitest";

import { initialState } from "../src/state.js";
import {
  esc,
  renderApp,
  renderCatalog,
  renderEntity,
  renderHistory,
  renderInput,
  renderSuggestions,
  renderVault,
} from "../src/render.js";
import type { FormFieldSchema } from "../src/types.js";

function fieldSchema(overrides: Partial<FormFieldSchema> = {}): FormFieldSchema {
  return {
    path: "urn:p:x",
    label: "X",
    widget: "text",
    datatype_options: [],
    min_count: null,
    max_count: null,
    pattern: null,
    required: false,
    repeatable: true,
    object_class: null,
    options: [],
    search: null,
    ...overrides,
  };
}

describe("catalog view", () => {
  it("shows the two-panel layout with labels and counts", () => {
    const state = initialState();
    state.categories = [
      { class: "urn:c:chapter", label: "Article in Book", count: 153 },
      { class: "urn:c:issue", label: "Issue", count: 25 },
    ];
    const html = renderCatalog(state);
    expect(html).toContain("Article in Book");
    expect(html).toContain(">153</span>");
    expect(html).toContain("Issue");
    expect(html).toContain('class="two-panel"');
  });

  it("renders items as links with paging controls", () => {
    const state = initialState();
    state.category = "urn:c:chapter";
    state.catalog = {
      category: "urn:c:chapter",
      total: 153,
      page: 2,
      per_page: 50,
      sort_by: null,
      sort_dir: "asc",
      items: [{ iri: "urn:e:1", display: "A chapter" }],
    };
    const html = renderCatalog(state);
    expect(html).toContain('data-action="open-entity"');
    expect(html).toContain("A chapter");
    expect(html).toContain("Page 2 of 4");
  });
});

describe("entity editor", () => {
  function entityState() {
    const state = initialState();
    state.route = "entity";
    state.detail = {
      iri: "urn:e:1",
      types: ["urn:c:article"],
      display: "Alpha <One>",
      head: 2,
      fields: [
        {
          property: "urn:p:title",
          label: "Title",
          values: [{ display: "Alpha <One>", target: null }],
          raw_values: [{ type: "literal", value: "Alpha <One>" }],
          widget: fieldSchema({ path: "urn:p:title", label: "Title", max_count: 1 }),
          can_add: false,
          can_remove: false,
        },
        {
          property: "urn:p:creator",
          label: "Creator",
          values: [{ display: "Ada", target: "urn:a:9" }],
          raw_values: [{ type: "uri", value: "urn:a:9" }],
          widget: fieldSchema({ path: "urn:p:creator", label: "Creator", widget: "nested_entity" }),
          can_add: true,
          can_remove: true,
        },
      ],
      form: [],
    };
    state.head = 2;
    return state;
  }

  it("escapes markup in displayed values", () => {
    const html = renderEntity(entityState());
    expect(html).toContain("Alpha &lt;One&gt;");
    expect(html).not.toContain("Alpha <One>");
  });

  it("gates add/remove affordances by cardinality", () => {
    const html = renderEntity(entityState());
    expect(html).not.toContain('Add Title');
    expect(html).toContain("Add Creator");
    expect(html).toContain('data-action="stage-removal"');
  });

  it("disables Save while the buffer is empty or invalid", () => {
    const state = entityState();
    let html = renderEntity(state);
    expect(html).toMatch(/data-action="save" disabled/);
    state.buffer.additions.push({
      property: "urn:p:creator",
      value: { type: "uri", value: "urn:a:10" },
    });
    html = renderEntity(state);
    expect(html).not.toMatch(/data-action="save" disabled/);
    state.errors = new Map([["urn:p:title", ["Title: at most 1 value allowed"]]]);
    html = renderEntity(state);
    expect(html).toMatch(/data-action="save" disabled/);
    expect(html).toContain("at most 1 value allowed");
  });

  it("offers the standard controls", () => {
    const html = renderEntity(entityState());
    for (const action of ["cancel-editing", "delete", "open-history"]) {
      expect(html).toContain(`data-action="${action}"`);
    }
  });

  it("renders old versions read-only", () => {
    const state = entityState();
    state.viewingVersion = 1;
    const html = renderEntity(state);
    expect(html).toContain("read only");
    expect(html).not.toContain('data-action="save"');
    expect(html).not.toContain('data-action="stage-removal"');
  });
});

describe("suggestion dropdown", () => {
  it("offers Create new entity above the matches", () => {
    const state = initialState();
    state.suggestions = {
      path: "urn:p:creator",
      query: "Fran",
      items: [
        { entity: "urn:a:1", display: "Franco Montanari [omid:ra/09110155]", score: 0 },
      ],
    };
    const html = renderSuggestions(state);
    const createAt = html.indexOf("Create new entity");
    const matchAt = html.indexOf("Franco Montanari");
    expect(createAt).toBeGreaterThan(-1);
    expect(matchAt).toBeGreaterThan(createAt);
  });
});

describe("widget inputs mirror the form schema", () => {
  it.each([
    ["date_full", 'type="date"'],
    ["date_year_month", 'type="month"'],
    ["date_year", 'type="number"'],
    ["number", 'type="number"'],
    ["uri_ref", 'type="url"'],
    ["textarea", "<textarea"],
    ["nested_entity", 'type="search"'],
    ["text", 'type="text"'],
  ] as const)("%s → %s", (widget, expected) => {
    expect(renderInput(fieldSchema({ widget }))).toContain(expected);
  });

  it("dropdowns list the enumerated values", () => {
    const html = renderInput(
      fieldSchema({
        widget: "dropdown",
        options: [
          { type: "literal", value: "draft" },
          { type: "literal", value: "final" },
        ],
      }),
    );
    expect(html).toContain("<select");
    expect(html).toContain(">draft</option>");
    expect(html).toContain(">final</option>");
  });
});

describe("time machine", () => {
  it("renders the timeline newest first with agent and source links", () => {
    const state = initialState();
    state.route = "history";
    state.entity = "urn:e:1";
    state.historyEntries = [
      {
        sequence: 2,
        agent: "https://orcid.org/0009-0002-5790-4804",
        primary_source: "https://doi.org/10.5281/zenodo.13768531",
        generated_at: "2026-02-01T10:00:00.000Z",
        invalidated_at: null,
        description: "modified",
        additions: [["Keyword", "author>Homerus"]],
        removals: [],
        is_deletion: false,
      },
      {
        sequence: 1,
        agent: "urn:agent:a",
        primary_source: null,
        generated_at: "2026-01-01T10:00:00.000Z",
        invalidated_at: "2026-02-01T10:00:00.000Z",
        description: "created",
        additions: [],
        removals: [],
        is_deletion: false,
      },
    ];
    const html = renderHistory(state);
    expect(html.indexOf("Version 2")).toBeLessThan(html.indexOf("Version 1"));
    expect(html).toContain('href="https://doi.org/10.5281/zenodo.13768531"');
    expect(html).toContain("author&gt;Homerus");
    // the head version offers view but not restore
    const headBlock = html.slice(html.indexOf("Version 2"), html.indexOf("Version 1"));
    expect(headBlock).toContain('data-action="view-version"');
    expect(headBlock).not.toContain('data-action="restore"');
    const oldBlock = html.slice(html.indexOf("Version 1"));
    expect(oldBlock).toContain('data-action="restore"');
  });
});

describe("vault view", () => {
  it("shows the empty-state message", () => {
    const html = renderVault(initialState());
    expect(html).toContain("No deleted records.");
  });

  it("lists deletions with restore buttons", () => {
    const state = initialState();
    state.vaultEntries = [
      {
        entity: "urn:e:1",
        display: "Alpha",
        deleted_at: "2026-03-01T00:00:00.000Z",
        agent: "urn:agent:a",
        last_snapshot: 3,
      },
    ];
    const html = renderVault(state);
    expect(html).toContain("Alpha");
    expect(html).toContain('data-action="restore-from-vault"');
  });
});

describe("chrome", () => {
  it("renders an API failure banner", () => {
    const state = initialState();
    state.banner = "StoreFailure: endpoint unreachable";
    expect(renderApp(state)).toContain("endpoint unreachable");
  });

  it("renders the conflict dialog non-destructively", () => {
    const state = initialState();
    state.route = "entity";
    state.conflict = true;
    const html = renderApp(state);
    expect(html).toContain("Reload and re-apply");
    expect(html).toContain('data-action="cancel-editing"');
  });

  it("escapes html metacharacters", () => {
    expect(esc(`<a href="x">&`)).toBe("&lt;a href=&quot;x&quot;&gt;&amp;");
  });
});
