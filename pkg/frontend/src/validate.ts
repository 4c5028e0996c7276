/** Client-side annotation validation.
 *
 * Mirrors the service's checks step for step, message for message, so a
 * payload rejected here would have been rejected by the server too. The
 * shared vectors in contract/annotation_vectors.json pin both sides.
 */

import { ERROR_CATEGORIES, NormalizedAnnotation } from "./types.js";

const PAYLOAD_FIELDS = [
  "is_correct",
  "corrected_instruction",
  "corrected_response",
  "error_category",
  "comments",
];

const CATEGORY_TOKENS = new Set(ERROR_CATEGORIES.map((c) => c.token));

export type ValidationResult =
  | { ok: true; record: NormalizedAnnotation }
  | { ok: false; error: string };

function fail(error: string): ValidationResult {
  return { ok: false, error };
}

function textOrNull(value: unknown): string | null {
  return typeof value === "string" && value !== "" ? value : null;
}

export function validateAnnotation(payload: unknown): ValidationResult {
  if (
    typeof payload !== "object" ||
    payload === null ||
    Array.isArray(payload)
  ) {
    return fail("annotation payload must be a JSON object");
  }
  const body = payload as Record<string, unknown>;
  for (const key of Object.keys(body)) {
    if (!PAYLOAD_FIELDS.includes(key)) {
      return fail(`unknown field '${key}'`);
    }
  }
  const isCorrect = body["is_correct"];
  if (typeof isCorrect !== "boolean") {
    return fail("is_correct must be a boolean");
  }
  for (const key of [
    "corrected_instruction",
    "corrected_response",
    "comments",
  ]) {
    const value = body[key];
    if (value !== undefined && value !== null && typeof value !== "string") {
      return fail(`${key} must be a string or null`);
    }
  }
  const rawCategory = body["error_category"];
  let category: string | null = null;
  if (rawCategory !== undefined && rawCategory !== null) {
    if (typeof rawCategory !== "string") {
      return fail("error_category must be a string or null");
    }
    if (!CATEGORY_TOKENS.has(rawCategory)) {
      return fail(`unknown error category token: '${rawCategory}'`);
    }
    category = rawCategory;
  }
  const record: NormalizedAnnotation = {
    is_correct: isCorrect,
    corrected_instruction: textOrNull(body["corrected_instruction"]),
    corrected_response: textOrNull(body["corrected_response"]),
    error_category: category,
    comments: textOrNull(body["comments"]),
  };
  if (!record.is_correct) {
    if (record.corrected_response === null) {
      return fail("is_correct=No requires corrected_response");
    }
    if (record.error_category === null) {
      return fail("is_correct=No requires error_category");
    }
  }
  return { ok: true, record };
}
