import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { AppController } from "../src/controller.js";
import { pendingValues } from "../src/state.js";
import type { EntityDetail, FormFieldSchema } from "../src/types.js";

const NS = "http://example.com/ns/";

const titleField: FormFieldSchema = {
  path: NS + "title",
  label: "Title",
  widget: "text",
  datatype_options: ["http://www.w3.org/2001/XMLSchema#string"],
  min_count: 1,
  max_count: 1,
  pattern: null,
  required: true,
  repeatable: false,
  object_class: null,
  options: [],
  search: { class: NS + "Article", property: NS + "title", min_chars: 2 },
};

function detail(head = 1): EntityDetail {
  return {
    iri: "urn:e:1",
    types: [NS + "Article"],
    display: "Alpha",
    head,
    fields: [
      {
        property: NS + "title",
        label: "Title",
        values: [{ display: "Alpha", target: null }],
        raw_values: [{ type: "literal", value: "Alpha" }],
        widget: titleField,
        can_add: false,
        can_remove: false,
      },
    ],
    form: [titleField],
  };
}

interface Call {
  method: string;
  path: string;
  query: URLSearchParams;
  body: unknown;
}

/** In-memory service stub: route table keyed by "METHOD /path". */
function stubApi(
  handlers: Record<string, (call: Call) => [number, unknown]>,
  calls: Call[] = [],
): { api: ApiClient; calls: Call[] } {
  const fetchFn = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = new URL(String(input), "http://stub");
    const call: Call = {
      method: init?.method ?? "GET",
      path: url.pathname,
      query: url.searchParams,
      body: init?.body === undefined ? undefined : JSON.parse(String(init.body)),
    };
    calls.push(call);
    const handler = handlers[`${call.method} ${call.path}`];
    if (handler === undefined) {
      return new Response(JSON.stringify({ error: "NotFoundError", detail: "no route" }), { status: 404 });
    }
    const [status, payload] = handler(call);
    return new Response(JSON.stringify(payload), { status });
  }) as typeof fetch;
  return { api: new ApiClient({ fetchFn }), calls };
}

describe("edit buffer", () => {
  it("head token echoes the last fetched detail", async () => {
    const { api } = stubApi({ "GET /api/entity": () => [200, detail(7)] });
    const c = new AppController(api);
    await c.openEntity("urn:e:1");
    expect(c.state.head).toBe(7);
    expect(c.state.route).toBe("entity");
  });

  it("Cancel Editing discards the dirty buffer", async () => {
    const { api } = stubApi({ "GET /api/entity": () => [200, detail()] });
    const c = new AppController(api);
    await c.openEntity("urn:e:1");
    c.stageAddition(NS + "note", { type: "literal", value: "draft" });
    expect(c.state.buffer.additions).toHaveLength(1);
    c.cancelEditing();
    expect(c.state.buffer.additions).toHaveLength(0);
    expect(c.state.errors.size).toBe(0);
  });

  it("removing a merely staged value drops the staged addition", async () => {
    const { api } = stubApi({ "GET /api/entity": () => [200, detail()] });
    const c = new AppController(api);
    await c.openEntity("urn:e:1");
    c.stageAddition(NS + "note", { type: "literal", value: "draft" });
    c.stageRemoval(NS + "note", { type: "literal", value: "draft" });
    expect(c.state.buffer.additions).toHaveLength(0);
    expect(c.state.buffer.removals).toHaveLength(0);
  });

  it("pending values merge current state with the buffer", async () => {
    const { api } = stubApi({ "GET /api/entity": () => [200, detail()] });
    const c = new AppController(api);
    await c.openEntity("urn:e:1");
    c.stageRemoval(NS + "title", { type: "literal", value: "Alpha" });
    c.stageAddition(NS + "title", { type: "literal", value: "Beta" });
    expect(pendingValues(c.state, NS + "title")).toEqual([
      { type: "literal", value: "Beta" },
    ]);
  });

  it("violating maxCount disables Save with an inline error", async () => {
    const { api } = stubApi({ "GET /api/entity": () => [200, detail()] });
    const c = new AppController(api);
    await c.openEntity("urn:e:1");
    c.stageAddition(NS + "title", { type: "literal", value: "Second title" });
    expect(c.state.errors.get(NS + "title")?.[0]).toContain("at most 1");
    expect(c.saveDisabled).toBe(true);
    // undoing the addition re-enables nothing (buffer empty again)
    c.stageRemoval(NS + "title", { type: "literal", value: "Second title" });
    expect(c.state.errors.size).toBe(0);
    expect(c.saveDisabled).toBe(true); // nothing to save
  });
});

describe("save and conflict handling", () => {
  it("saves with the expected head and refetches", async () => {
    let head = 1;
    const { api, calls } = stubApi({
      "GET /api/entity": () => [200, detail(head)],
      "PATCH /api/entity": (call) => {
        const body = call.body as { expected_head: number };
        expect(body.expected_head).toBe(1);
        head = 2;
        return [200, { head }];
      },
    });
    const c = new AppController(api);
    await c.openEntity("urn:e:1");
    c.stageRemoval(NS + "title", { type: "literal", value: "Alpha" });
    c.stageAddition(NS + "title", { type: "literal", value: "Beta" });
    expect(await c.save("rename")).toBe(true);
    expect(c.state.head).toBe(2);
    expect(c.state.buffer.additions).toHaveLength(0); // buffer cleared by refetch
    expect(calls.filter((x) => x.method === "PATCH")).toHaveLength(1);
  });

  it("a stale head keeps the buffer and offers a non-destructive reload", async () => {
    let entityHead = 1;
    const { api } = stubApi({
      "GET /api/entity": () => [200, detail(entityHead)],
      "PATCH /api/entity": () => [409, { error: "ConflictError", detail: "stale head" }],
    });
    const c = new AppController(api);
    await c.openEntity("urn:e:1");
    c.stageAddition(NS + "note", { type: "literal", value: "mine" });
    entityHead = 2; // someone else saved in another tab
    expect(await c.save()).toBe(false);
    expect(c.state.conflict).toBe(true);
    expect(c.state.buffer.additions).toHaveLength(1); // staged work survives
    await c.reloadAfterConflict();
    expect(c.state.conflict).toBe(false);
    expect(c.state.head).toBe(2);
    expect(c.state.buffer.additions).toHaveLength(1); // re-applied over fresh state
  });
});

describe("disambiguation dropdown", () => {
  it("does not query below the configured minimum length", async () => {
    const { api, calls } = stubApi({
      "GET /api/entity": () => [200, detail()],
      "GET /api/search": () => [200, { suggestions: [{ entity: "urn:a", display: "A [urn:a]", score: 0 }] }],
    });
    const c = new AppController(api);
    await c.openEntity("urn:e:1");
    expect(await c.suggest(NS + "title", "F")).toEqual([]);
    expect(calls.filter((x) => x.path === "/api/search")).toHaveLength(0);
    const items = await c.suggest(NS + "title", "Fr");
    expect(items).toHaveLength(1);
    expect(calls.filter((x) => x.path === "/api/search")).toHaveLength(1);
  });

  it("picking a suggestion stages a link to the existing record", async () => {
    const { api } = stubApi({ "GET /api/entity": () => [200, detail()] });
    const c = new AppController(api);
    await c.openEntity("urn:e:1");
    c.pickSuggestion(NS + "creator", { entity: "urn:a:9", display: "Ada [urn:a:9]", score: 0 });
    expect(c.state.buffer.additions).toEqual([
      { property: NS + "creator", value: { type: "uri", value: "urn:a:9" } },
    ]);
    expect(c.state.suggestions).toBeNull();
  });
});

describe("destructive actions require confirmation", () => {
  it("delete is aborted when the curator declines", async () => {
    const { api, calls } = stubApi({
      "GET /api/entity": () => [200, detail()],
      "DELETE /api/entity": () => [200, { deleted: true, head: 2 }],
    });
    const messages: string[] = [];
    const c = new AppController(api, {
      confirm: (m) => {
        messages.push(m);
        return false;
      },
    });
    await c.openEntity("urn:e:1");
    expect(await c.deleteEntity("urn:e:1")).toBe(false);
    expect(messages[0]).toContain("Alpha");
    expect(calls.filter((x) => x.method === "DELETE")).toHaveLength(0);
  });

  it("restore confirmation lists the linked records", async () => {
    const linkedDetail = detail();
    linkedDetail.fields.push({
      property: NS + "creator",
      label: "Creator",
      values: [{ display: "Ada", target: "urn:a:9" }],
      raw_values: [{ type: "uri", value: "urn:a:9" }],
      widget: null,
      can_add: true,
      can_remove: true,
    });
    const { api } = stubApi({
      "GET /api/entity": () => [200, linkedDetail],
      "POST /api/entity/restore": () => [200, { head: 3, cascaded: [{ iri: "urn:a:9", snapshot: 1 }] }],
    });
    const messages: string[] = [];
    const c = new AppController(api, {
      confirm: (m) => {
        messages.push(m);
        return true;
      },
    });
    await c.openEntity("urn:e:1");
    const result = await c.restoreSnapshot("urn:e:1", 1);
    expect(messages[0]).toContain("urn:a:9");
    expect(result?.cascaded).toEqual([{ iri: "urn:a:9", snapshot: 1 }]);
  });
});

describe("vault", () => {
  it("deleted entities route to the vault with a banner", async () => {
    const { api } = stubApi({
      "GET /api/entity": () => [410, { error: "DeletedError", detail: "gone", entity: "urn:e:1", vault: "/api/vault" }],
      "GET /api/vault": () => [200, { entries: [{ entity: "urn:e:1", display: "Alpha", deleted_at: "2026-01-01T00:00:00.000Z", agent: "urn:agent:a", last_snapshot: 1 }] }],
    });
    const c = new AppController(api);
    await c.openEntity("urn:e:1");
    expect(c.state.route).toBe("vault");
    expect(c.state.banner).toContain("vault");
    expect(c.state.vaultEntries).toHaveLength(1);
  });
});
