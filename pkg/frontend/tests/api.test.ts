/** ApiClient wire behaviour: headers, paths, payloads, error mapping. */

import { describe, expect, it } from "vitest";
import { ANNOTATOR_HEADER, ApiClient, ApiError, ServiceUnreachable } from "../src/api.js";
import { MockServer, makeDraft } from "./mockServer.js";

function client(server: MockServer, extra: { token?: string; baseUrl?: string } = {}): ApiClient {
  return new ApiClient({
    annotatorId: "a1",
    fetchFn: server.fetch,
    ...extra,
  });
}

describe("request shaping", () => {
  it("sends the annotator header on every call", async () => {
    const server = new MockServer([makeDraft({ id: "d-06-0001" })]);
    const api = client(server);
    await api.listDrafts();
    await api.claim("d-06-0001");
    for (const request of server.requests) {
      expect(request.headers.get(ANNOTATOR_HEADER)).toBe("a1");
    }
  });

  it("adds a bearer token only when configured", async () => {
    const open = new MockServer([]);
    await client(open).listDrafts();
    expect(open.requests[0]?.headers.get("Authorization")).toBeNull();

    const locked = new MockServer([], { token: "s3cret" });
    await client(locked, { token: "s3cret" }).listDrafts();
    expect(locked.requests[0]?.headers.get("Authorization")).toBe("Bearer s3cret");
  });

  it("rejects a bad token with the service detail", async () => {
    const locked = new MockServer([], { token: "s3cret" });
    const bad = client(locked, { token: "wrong" });
    await expect(bad.listDrafts()).rejects.toMatchObject({
      status: 401,
      detail: "missing or invalid bearer token",
    });
  });

  it("sets Content-Type only when a body is sent", async () => {
    const server = new MockServer([makeDraft({ id: "d-06-0001" })]);
    const api = client(server);
    await api.listDrafts();
    await api.claim("d-06-0001");
    await api.submit("d-06-0001", { is_correct: true });
    const [list, claim, submit] = server.requests;
    expect(list?.headers.get("Content-Type")).toBeNull();
    expect(claim?.headers.get("Content-Type")).toBeNull();
    expect(submit?.headers.get("Content-Type")).toBe("application/json");
    expect(submit?.body).toEqual({ is_correct: true });
  });

  it("prefixes a configured base URL without doubling slashes", async () => {
    const server = new MockServer([]);
    const api = client(server, { baseUrl: "http://mock.test/" });
    await api.listDrafts();
    expect(server.requests[0]?.path).toBe("/api/drafts");
    expect(api.exportUrl()).toBe("http://mock.test/api/export.csv");
    expect(api.exportUrl("a one")).toBe(
      "http://mock.test/api/export.csv?annotator=a%20one",
    );
  });
});

describe("responses", () => {
  it("unwraps the drafts envelope", async () => {
    const server = new MockServer([
      makeDraft({ id: "d-06-0001" }),
      makeDraft({ id: "d-19-0001", status: "top_priority" }),
    ]);
    const drafts = await client(server).listDrafts();
    expect(drafts.map((d) => d.id).sort()).toEqual(["d-06-0001", "d-19-0001"]);
  });

  it("passes the status filter through as a query parameter", async () => {
    const server = new MockServer([
      makeDraft({ id: "d-06-0001" }),
      makeDraft({ id: "d-19-0001", status: "top_priority" }),
    ]);
    const drafts = await client(server).listDrafts("top_priority");
    expect(server.requests[0]?.query.get("status")).toBe("top_priority");
    expect(drafts.map((d) => d.id)).toEqual(["d-19-0001"]);
  });

  it("fetches one draft by id", async () => {
    const server = new MockServer([makeDraft({ id: "d-06-0001" })]);
    const draft = await client(server).getDraft("d-06-0001");
    expect(draft.id).toBe("d-06-0001");
    expect(server.requests[0]?.path).toBe("/api/drafts/d-06-0001");
  });

  it("returns the claim lease", async () => {
    const server = new MockServer([makeDraft({ id: "d-06-0001" })], {
      leaseSeconds: 900,
    });
    const lease = await client(server).claim("d-06-0001");
    expect(lease).toEqual({
      draft_id: "d-06-0001",
      annotator_id: "a1",
      lease_seconds: 900,
    });
  });
});

describe("error mapping", () => {
  it("turns a detail body into an ApiError", async () => {
    const server = new MockServer([]);
    const error = await client(server)
      .getDraft("d-99-0001")
      .catch((exc: unknown) => exc);
    expect(error).toBeInstanceOf(ApiError);
    if (error instanceof ApiError) {
      expect(error.status).toBe(404);
      expect(error.detail).toBe("no flagged draft d-99-0001");
      expect(error.isConflict).toBe(false);
    }
  });

  it("marks 409 responses as conflicts", async () => {
    const server = new MockServer([makeDraft({ id: "d-06-0001" })]);
    server.leases.set("d-06-0001", "a2");
    const error = await client(server)
      .claim("d-06-0001")
      .catch((exc: unknown) => exc);
    expect(error).toBeInstanceOf(ApiError);
    if (error instanceof ApiError) {
      expect(error.isConflict).toBe(true);
      expect(error.detail).toContain("a2");
    }
  });

  it("falls back to the status text for non-JSON error bodies", async () => {
    const fetchFn: typeof fetch = async () =>
      new Response("boom", { status: 500, statusText: "Internal Server Error" });
    const api = new ApiClient({ annotatorId: "a1", fetchFn });
    const error = await api.listDrafts().catch((exc: unknown) => exc);
    expect(error).toBeInstanceOf(ApiError);
    if (error instanceof ApiError) {
      expect(error.status).toBe(500);
      expect(error.detail).toBe("Internal Server Error");
    }
  });

  it("wraps network failures in ServiceUnreachable", async () => {
    const server = new MockServer([]);
    server.down = true;
    const error = await client(server)
      .listDrafts()
      .catch((exc: unknown) => exc);
    expect(error).toBeInstanceOf(ServiceUnreachable);
    if (error instanceof ServiceUnreachable) {
      expect(error.cause).toBeInstanceOf(TypeError);
    }
  });
});
