/** End-to-end controller flows against the mock service. */

import { beforeEach, describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import { App } from "../src/app.js";
import { ReviewSession } from "../src/session.js";
import { DraftView } from "../src/types.js";
import { MockServer, makeDraft } from "./mockServer.js";

function seedDrafts(): DraftView[] {
  return [
    makeDraft({ id: "d-02-0001", status: "accepted" }),
    makeDraft({ id: "d-18-0001", status: "low_priority" }),
    makeDraft({
      id: "d-19-0001",
      status: "top_priority",
      response_lrl: "Suba, a koy Niamey.",
      options: [
        { text: "Suba, a ga koy Niamey", explanation: "future marker restored" },
      ],
      corrected_field: "resp_lrl",
    }),
    makeDraft({ id: "d-06-0001", status: "low_priority" }),
  ];
}

let server: MockServer;
let app: App;
let renders: number;

beforeEach(() => {
  server = new MockServer(seedDrafts());
  const client = new ApiClient({ annotatorId: "a1", fetchFn: server.fetch });
  renders = 0;
  app = new App(client, new ReviewSession("a1"), () => {
    renders += 1;
  });
});

describe("queue screen", () => {
  it("orders the queue and drops accepted drafts", async () => {
    await app.loadQueue();
    expect(app.queue.map((d) => d.id)).toEqual([
      "d-19-0001",
      "d-06-0001",
      "d-18-0001",
    ]);
    expect(app.queueError).toBeNull();
    expect(renders).toBeGreaterThan(0);
  });

  it("moves the cursor with j/k and clamps at both ends", async () => {
    await app.loadQueue();
    await app.handleKey("k");
    expect(app.cursor).toBe(0);
    await app.handleKey("j");
    await app.handleKey("ArrowDown");
    await app.handleKey("j");
    expect(app.cursor).toBe(2);
    await app.handleKey("ArrowUp");
    expect(app.cursor).toBe(1);
  });

  it("shows a retry state when the service is down, then recovers on r", async () => {
    server.down = true;
    await app.loadQueue();
    expect(app.queueError).toContain("retry");
    expect(app.queue).toEqual([]);

    server.down = false;
    await app.handleKey("r");
    expect(app.queueError).toBeNull();
    expect(app.queue).toHaveLength(3);
  });

  it("filters by status", async () => {
    await app.setFilter("low_priority");
    expect(app.queue.map((d) => d.id)).toEqual(["d-06-0001", "d-18-0001"]);
    await app.setFilter(null);
    expect(app.queue).toHaveLength(3);
  });

  it("reports a claim conflict without leaving the queue", async () => {
    server.leases.set("d-19-0001", "a2");
    await app.loadQueue();
    await app.handleKey("Enter");
    expect(app.screen).toBe("queue");
    expect(app.editor).toBeNull();
    expect(app.notice).toContain("claimed by someone else");
    expect(app.session.claimedDraft).toBeNull();
  });
});

describe("keyboard-only review", () => {
  it("completes claim, decide, categorize, submit without a pointer", async () => {
    await app.loadQueue();

    await app.handleKey("Enter");
    expect(app.screen).toBe("editor");
    expect(app.session.claimedDraft?.id).toBe("d-19-0001");
    expect(server.leases.get("d-19-0001")).toBe("a1");

    await app.handleKey("n");
    expect(app.editor?.verdict).toBe(false);

    await app.handleKey("1");
    expect(app.editor?.correctedResponse).toBe("Suba, a ga koy Niamey");

    await app.handleKey("c");
    await app.handleKey("c");
    await app.handleKey("c");
    expect(app.editor?.category).toBe("tense_inconsistency");

    await app.handleKey("s");
    expect(app.screen).toBe("queue");
    expect(app.notice).toBe("saved d-19-0001");
    expect(app.session.claimedDraft).toBeNull();
    expect(server.leases.has("d-19-0001")).toBe(false);

    expect(server.journal).toHaveLength(1);
    expect(server.journal[0]).toMatchObject({
      draftId: "d-19-0001",
      annotatorId: "a1",
      record: {
        is_correct: false,
        corrected_response: "Suba, a ga koy Niamey",
        error_category: "tense_inconsistency",
      },
    });

    expect(app.queue.map((d) => d.id)).toEqual(["d-06-0001", "d-18-0001"]);
  });

  it("keeps an invalid submission local: inline error, no annotation request", async () => {
    await app.loadQueue();
    await app.handleKey("Enter");
    await app.handleKey("n");
    const before = server.requests.length;

    await app.handleKey("s");
    expect(app.screen).toBe("editor");
    expect(app.editor?.error).toBe("is_correct=No requires corrected_response");
    expect(server.requests).toHaveLength(before);
    expect(server.journal).toHaveLength(0);
  });

  it("cycles the category through all four labels and back to none", async () => {
    await app.loadQueue();
    await app.handleKey("Enter");
    const seen: Array<string | null> = [];
    for (let i = 0; i < 5; i += 1) {
      await app.handleKey("c");
      seen.push(app.editor?.category ?? null);
    }
    expect(seen).toEqual([
      "fluency",
      "suffix_misuse",
      "tense_inconsistency",
      "orthography",
      null,
    ]);
  });

  it("releases the claim and discards edits on Escape", async () => {
    await app.loadQueue();
    await app.handleKey("Enter");
    await app.handleKey("n");
    await app.handleKey("1");
    expect(app.editor?.correctedResponse).not.toBe("");

    await app.handleKey("Escape");
    expect(app.screen).toBe("queue");
    expect(app.editor).toBeNull();
    expect(app.session.claimedDraft).toBeNull();
    expect(app.session.pendingEdits.correctedResponse).toBe("");

    await app.handleKey("Enter");
    expect(app.editor?.verdict).toBeNull();
    expect(app.editor?.correctedResponse).toBe("");
  });
});

describe("conflict recovery", () => {
  it("locks the editor on a stolen lease and recovers via re-claim", async () => {
    await app.loadQueue();
    await app.handleKey("Enter");
    server.leases.set("d-19-0001", "a2");

    await app.handleKey("y");
    await app.handleKey("s");
    expect(app.screen).toBe("editor");
    expect(app.editor?.locked).toBe(true);
    expect(app.editor?.error).toContain("re-claim");
    expect(server.journal).toHaveLength(0);

    await app.reclaim();
    expect(app.editor?.locked).toBe(true);
    expect(app.notice).toContain("claimed by someone else");

    server.leases.delete("d-19-0001");
    await app.reclaim();
    expect(app.editor?.locked).toBe(false);
    expect(app.editor?.verdict).toBeNull();
    expect(server.leases.get("d-19-0001")).toBe("a1");

    await app.handleKey("y");
    await app.handleKey("s");
    expect(server.journal).toHaveLength(1);
    expect(server.journal[0]?.record.is_correct).toBe(true);
  });

  it("ignores verdict and adopt keys while locked", async () => {
    await app.loadQueue();
    await app.handleKey("Enter");
    server.leases.set("d-19-0001", "a2");
    await app.handleKey("y");
    await app.handleKey("s");
    expect(app.editor?.locked).toBe(true);

    const verdict = app.editor?.verdict;
    await app.handleKey("n");
    await app.handleKey("1");
    await app.handleKey("c");
    expect(app.editor?.verdict).toBe(verdict);
    expect(app.editor?.correctedResponse).toBe("");
    expect(app.editor?.category).toBeNull();
  });
});

describe("dashboard", () => {
  it("loads progress and agreement together and returns on Escape", async () => {
    server.agreementReport = { alpha: 0.821, items: 142, raters: 2 };
    await app.loadQueue();
    await app.handleKey("Enter");
    await app.handleKey("y");
    await app.handleKey("s");

    await app.handleKey("d");
    expect(app.screen).toBe("dashboard");
    expect(app.dashboard?.agreement.alpha).toBe(0.821);
    const progress = app.dashboard?.progress;
    expect(progress?.by_status["top_priority"]).toEqual({
      total: 1,
      reviewed: 1,
      remaining: 0,
    });
    expect(progress?.by_status["low_priority"]).toEqual({
      total: 2,
      reviewed: 0,
      remaining: 2,
    });

    await app.handleKey("Escape");
    expect(app.screen).toBe("queue");
  });

  it("keeps the queue usable when the dashboard fetch fails", async () => {
    await app.loadQueue();
    server.down = true;
    await app.handleKey("d");
    expect(app.screen).toBe("queue");
    expect(app.notice).toContain("unreachable");
  });
});
