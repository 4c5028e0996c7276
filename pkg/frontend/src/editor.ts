/** Review editor state machine. Pure state transitions; network happens only in submitEditor. */

import { ApiClient, ApiError, ServiceUnreachable } from "./api.js";
import {
  AnnotationPayload,
  DraftView,
  NormalizedAnnotation,
  SubmitResult,
} from "./types.js";
import { validateAnnotation } from "./validate.js";

export interface EditorState {
  draft: DraftView;
  /** null until the annotator decides; true = correct as-is, false = needs fixing. */
  verdict: boolean | null;
  correctedInstruction: string;
  correctedResponse: string;
  category: string | null;
  comments: string;
  /** Set when the server rejected our claim (409); editor must be re-claimed. */
  locked: boolean;
  /** Inline validation message; cleared on the next edit. */
  error: string | null;
}

export function newEditor(draft: DraftView): EditorState {
  return {
    draft,
    verdict: null,
    correctedInstruction: "",
    correctedResponse: "",
    category: null,
    comments: "",
    locked: false,
    error: null,
  };
}

export function setVerdict(state: EditorState, verdict: boolean): EditorState {
  return { ...state, verdict, error: null };
}

/** Correction fields are editable only after a "No" verdict. */
export function correctionFieldsEnabled(state: EditorState): boolean {
  return state.verdict === false;
}

/**
 * Adopt a checker option by position (0-based). Pre-fills the field the
 * checker flagged and implies a "No" verdict, since adopting a rewrite
 * concedes the draft was wrong.
 */
export function adoptOption(state: EditorState, index: number): EditorState {
  const option = state.draft.options[index];
  if (option === undefined) {
    return state;
  }
  const next = { ...state, verdict: false as boolean | null, error: null };
  if (state.draft.corrected_field === "instr_lrl") {
    next.correctedInstruction = option.text;
  } else {
    next.correctedResponse = option.text;
  }
  return next;
}

export function setField(
  state: EditorState,
  field: "correctedInstruction" | "correctedResponse" | "comments",
  value: string,
): EditorState {
  return { ...state, [field]: value, error: null };
}

export function setCategory(
  state: EditorState,
  category: string | null,
): EditorState {
  return { ...state, category, error: null };
}

/** Wire payload for the current state. "Yes" verdicts carry no corrections. */
export function buildPayload(state: EditorState): AnnotationPayload {
  const payload: AnnotationPayload = { is_correct: state.verdict === true };
  if (state.comments.trim() !== "") {
    payload.comments = state.comments;
  }
  if (state.verdict === false) {
    if (state.correctedInstruction.trim() !== "") {
      payload.corrected_instruction = state.correctedInstruction;
    }
    if (state.correctedResponse.trim() !== "") {
      payload.corrected_response = state.correctedResponse;
    }
    payload.error_category = state.category;
  }
  return payload;
}

export type SubmitOutcome =
  | { kind: "submitted"; state: EditorState; result: SubmitResult; record: NormalizedAnnotation }
  | { kind: "invalid"; state: EditorState }
  | { kind: "conflict"; state: EditorState }
  | { kind: "unreachable"; state: EditorState };

/**
 * Validate locally, then post. An invalid payload never reaches the
 * network; a 409 locks the editor until the draft is re-claimed.
 */
export async function submitEditor(
  state: EditorState,
  client: ApiClient,
): Promise<SubmitOutcome> {
  if (state.verdict === null) {
    return {
      kind: "invalid",
      state: { ...state, error: "choose Yes or No before submitting" },
    };
  }
  const payload = buildPayload(state);
  const checked = validateAnnotation(payload);
  if (!checked.ok) {
    return { kind: "invalid", state: { ...state, error: checked.error } };
  }
  try {
    const result = await client.submit(state.draft.id, payload);
    return {
      kind: "submitted",
      state: { ...state, error: null },
      result,
      record: checked.record,
    };
  } catch (exc) {
    if (exc instanceof ApiError && exc.isConflict) {
      return {
        kind: "conflict",
        state: {
          ...state,
          locked: true,
          error: "another annotator holds this draft; re-claim to continue",
        },
      };
    }
    if (exc instanceof ServiceUnreachable) {
      return {
        kind: "unreachable",
        state: { ...state, error: "service unreachable; try again" },
      };
    }
    if (exc instanceof ApiError) {
      return {
        kind: "invalid",
        state: { ...state, error: exc.detail },
      };
    }
    throw exc;
  }
}
