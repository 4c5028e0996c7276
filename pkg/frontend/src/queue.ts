/** Queue ordering and filtering, independent of how the server sorts. */

import { DraftView, TriageToken } from "./types.js";

const SEVERITY: Record<TriageToken, number> = {
  top_priority: 2,
  low_priority: 1,
  accepted: 0,
};

export interface QueueOptions {
  /** Show only this status; null/undefined shows every flagged draft. */
  filter?: TriageToken | null;
  /** Hide drafts this annotator has already submitted a verdict for. */
  hideAnnotatedBy?: string | null;
}

/** Top-priority first, then low; ascending draft id within a status. */
export function orderQueue(
  drafts: DraftView[],
  options: QueueOptions = {},
): DraftView[] {
  let rows = drafts.filter((d) => d.status !== "accepted");
  if (options.filter) {
    rows = rows.filter((d) => d.status === options.filter);
  }
  const hide = options.hideAnnotatedBy;
  if (hide) {
    rows = rows.filter((d) => !d.annotated_by.includes(hide));
  }
  return rows.slice().sort((a, b) => {
    const severity = SEVERITY[b.status] - SEVERITY[a.status];
    if (severity !== 0) {
      return severity;
    }
    return a.id < b.id ? -1 : a.id > b.id ? 1 : 0;
  });
}
