/** Progress dashboard formatting. Numbers from the service are echoed verbatim. */

import { AgreementReport, ProgressReport } from "./types.js";

export interface ProgressLine {
  label: string;
  reviewed: number;
  remaining: number;
  total: number;
}

const STATUS_LABELS: Record<string, string> = {
  top_priority: "Top priority",
  low_priority: "Low priority",
};

export function progressLines(report: ProgressReport): ProgressLine[] {
  const lines: ProgressLine[] = [];
  for (const status of ["top_priority", "low_priority"]) {
    const row = report.by_status[status];
    if (row === undefined) {
      continue;
    }
    lines.push({
      label: STATUS_LABELS[status] ?? status,
      reviewed: row.reviewed,
      remaining: row.remaining,
      total: row.total,
    });
  }
  lines.push({
    label: "All flagged",
    reviewed: report.reviewed,
    remaining: report.remaining,
    total: report.total,
  });
  return lines;
}

/**
 * Agreement summary with alpha exactly as the service reported it: no
 * rounding, no reformatting. A null alpha surfaces the service's reason.
 */
export function agreementLine(report: AgreementReport): string {
  if (report.alpha === null) {
    const why = report.detail ?? "not computable";
    return `agreement unavailable (${why}); items=${report.items} raters=${report.raters}`;
  }
  return `alpha=${String(report.alpha)} over ${report.items} item(s), ${report.raters} rater(s)`;
}
