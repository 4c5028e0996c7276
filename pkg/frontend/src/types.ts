/** Wire types for the review REST service. Field names match the JSON. */

export type TriageToken = "accepted" | "low_priority" | "top_priority";

export interface OptionView {
  text: string;
  explanation: string;
}

export interface DraftView {
  id: string;
  status: TriageToken;
  instruction_fr: string;
  instruction_lrl: string;
  response_lrl: string;
  chain_of_thought: string;
  reason: string | null;
  options: OptionView[];
  applied_correction: string | null;
  corrected_field: string | null;
  annotated_by: string[];
  claimed_by: string | null;
  lease_expires_in: number | null;
}

export interface AnnotationPayload {
  is_correct: boolean;
  corrected_instruction?: string | null;
  corrected_response?: string | null;
  error_category?: string | null;
  comments?: string | null;
}

/** Payload after validation: empty strings collapsed to null. */
export interface NormalizedAnnotation {
  is_correct: boolean;
  corrected_instruction: string | null;
  corrected_response: string | null;
  error_category: string | null;
  comments: string | null;
}

export interface ClaimResult {
  draft_id: string;
  annotator_id: string;
  lease_seconds: number;
}

export interface SubmitResult {
  draft_id: string;
  annotator_id: string;
  is_correct: boolean;
}

export interface StatusProgress {
  total: number;
  reviewed: number;
  remaining: number;
}

export interface ProgressReport {
  by_status: Record<string, StatusProgress>;
  total: number;
  reviewed: number;
  remaining: number;
}

export interface AgreementReport {
  alpha: number | null;
  items: number;
  raters: number;
  detail?: string;
}

/** Human-readable category labels keyed by wire token, in display order. */
export const ERROR_CATEGORIES: ReadonlyArray<{
  token: string;
  label: string;
}> = [
  { token: "fluency", label: "Fluency" },
  { token: "suffix_misuse", label: "Suffix Misuse" },
  { token: "tense_inconsistency", label: "Tense Inconsistency" },
  { token: "orthography", label: "Orthography" },
];

export function categoryLabel(token: string): string {
  const entry = ERROR_CATEGORIES.find((c) => c.token === token);
  return entry ? entry.label : token;
}
