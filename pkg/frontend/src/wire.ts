/** Request/response schemas for the scorer wire contract. */

import { z } from "zod";

export const embedRequest = z.strictObject({
  texts: z.array(z.string()).min(1),
});

export const scoreRequest = z.strictObject({
  inputs: z.array(z.string()).min(1),
});

const unit = z.number().min(0).max(1);

export const embedResponse = z.strictObject({
  dim: z.number().int().positive(),
  vectors: z.array(z.array(z.number())),
});

export const paragraphResponse = z.strictObject({
  scores: z.array(
    z.strictObject({
      p: unit,
      s_p: z.array(unit).min(1),
    })
  ),
});

export const evidenceResponse = z.strictObject({
  scores: z.array(
    z.strictObject({
      e: unit,
      s_e: z.array(unit).min(1),
    })
  ),
});

export type EmbedRequest = z.infer<typeof embedRequest>;
export type ScoreRequest = z.infer<typeof scoreRequest>;
export type EmbedResponse = z.infer<typeof embedResponse>;
export type ParagraphResponse = z.infer<typeof paragraphResponse>;
export type EvidenceResponse = z.infer<typeof evidenceResponse>;

/**
 * Responses are serialized with plain JSON.stringify and sent as-is, so the
 * bytes on the wire are exactly the shortest-roundtrip rendering of each
 * double. Recorded transcripts compare against these bytes.
 */
export function wireBytes(payload: unknown): string {
  return JSON.stringify(payload);
}
