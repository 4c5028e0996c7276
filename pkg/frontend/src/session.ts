/** Per-annotator session state: one claimed draft at a time, edits live and die with the claim. */

import { DraftView, TriageToken } from "./types.js";

export interface PendingEdits {
  correctedInstruction: string;
  correctedResponse: string;
  category: string | null;
  comments: string;
}

export function emptyEdits(): PendingEdits {
  return {
    correctedInstruction: "",
    correctedResponse: "",
    category: null,
    comments: "",
  };
}

export class ReviewSession {
  readonly annotatorId: string;
  queueFilter: TriageToken | null = null;
  private claimed: DraftView | null = null;
  private edits: PendingEdits = emptyEdits();

  constructor(annotatorId: string) {
    if (!annotatorId) {
      throw new Error("annotator id is required");
    }
    this.annotatorId = annotatorId;
  }

  get claimedDraft(): DraftView | null {
    return this.claimed;
  }

  get pendingEdits(): PendingEdits {
    return this.edits;
  }

  claim(draft: DraftView): void {
    if (this.claimed !== null && this.claimed.id !== draft.id) {
      throw new Error(
        `already holding ${this.claimed.id}; release it before claiming ${draft.id}`,
      );
    }
    this.claimed = draft;
    this.edits = emptyEdits();
  }

  updateEdits(patch: Partial<PendingEdits>): void {
    if (this.claimed === null) {
      throw new Error("no claimed draft to edit");
    }
    this.edits = { ...this.edits, ...patch };
  }

  /** Drop the claim; any pending edits are discarded, not saved. */
  release(): void {
    this.claimed = null;
    this.edits = emptyEdits();
  }
}
