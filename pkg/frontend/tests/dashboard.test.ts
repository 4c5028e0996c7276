/** Dashboard formatting: counts per queue, agreement echoed untouched. */

import { describe, expect, it } from "vitest";
import { agreementLine, progressLines } from "../src/dashboard.js";
import { ProgressReport } from "../src/types.js";

const report: ProgressReport = {
  by_status: {
    top_priority: { total: 91, reviewed: 40, remaining: 51 },
    low_priority: { total: 51, reviewed: 51, remaining: 0 },
  },
  total: 142,
  reviewed: 91,
  remaining: 51,
};

describe("progressLines", () => {
  it("lists top priority, then low priority, then the overall row", () => {
    const lines = progressLines(report);
    expect(lines.map((l) => l.label)).toEqual([
      "Top priority",
      "Low priority",
      "All flagged",
    ]);
    expect(lines[0]).toMatchObject({ reviewed: 40, remaining: 51, total: 91 });
    expect(lines[1]).toMatchObject({ reviewed: 51, remaining: 0, total: 51 });
    expect(lines[2]).toMatchObject({ reviewed: 91, remaining: 51, total: 142 });
  });

  it("skips statuses the service did not report", () => {
    const lines = progressLines({
      by_status: { top_priority: { total: 1, reviewed: 0, remaining: 1 } },
      total: 1,
      reviewed: 0,
      remaining: 1,
    });
    expect(lines.map((l) => l.label)).toEqual(["Top priority", "All flagged"]);
  });
});

describe("agreementLine", () => {
  it("echoes alpha exactly as reported, with the sample size", () => {
    const line = agreementLine({
      alpha: 0.7930000000000001,
      items: 150,
      raters: 2,
    });
    expect(line).toBe("alpha=0.7930000000000001 over 150 item(s), 2 rater(s)");
  });

  it("does not round a long alpha", () => {
    const line = agreementLine({ alpha: 2 / 3, items: 3, raters: 3 });
    expect(line).toContain(String(2 / 3));
  });

  it("surfaces the service explanation when alpha is unavailable", () => {
    const line = agreementLine({
      alpha: null,
      items: 5,
      raters: 1,
      detail: "no pairable values",
    });
    expect(line).toBe("agreement unavailable (no pairable values); items=5 raters=1");
  });

  it("falls back to a generic reason when no detail is given", () => {
    const line = agreementLine({ alpha: null, items: 0, raters: 0 });
    expect(line).toContain("not computable");
  });
});
