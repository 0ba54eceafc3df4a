/**
 * Deterministic stub scorers, byte-compatible with the Python package.
 *
 * Every score is derived from SHA-256 over a keyed copy of the serialized
 * input, mapped into [0.0001, 0.9999]. Endpoints of (0, 1) are excluded so
 * no score is an integral float; shortest-roundtrip JSON of these doubles
 * is then identical between Node and CPython.
 */

import { createHash } from "node:crypto";

export class MalformedInputError extends Error {}

export function hashUnit(key: string): number {
  const digest = createHash("sha256").update(key, "utf8").digest();
  const head = digest.readBigUInt64BE(0);
  return (Number(head % 9999n) + 1) / 10000;
}

export function countSentenceMarkers(serialized: string): number {
  return serialized.split("[SM]").length - 1;
}

/**
 * Content-hash embedding: unit-norm, no zero or integral coordinate.
 *
 * Components come from SHA-256 blocks keyed `${text}#${block}`, shifted into
 * [32/287, 1] before normalizing. The squared-norm accumulation is a
 * sequential loop on purpose: it pins one IEEE-754 evaluation order that the
 * Python side follows too, so the doubles agree bit for bit.
 */
export function embedStub(text: string, dim: number): number[] {
  if (dim < 2) {
    throw new Error("stub embedder needs dim >= 2");
  }
  const comps: number[] = [];
  let block = 0;
  while (comps.length < dim) {
    const digest = createHash("sha256").update(`${text}#${block}`, "utf8").digest();
    for (const byte of digest) {
      comps.push((byte + 32) / 287);
    }
    block += 1;
  }
  comps.length = dim;
  let total = 0;
  for (const c of comps) {
    total += c * c;
  }
  const norm = Math.sqrt(total);
  return comps.map((c) => c / norm);
}

export interface ParagraphScore {
  p: number;
  s_p: number[];
}

export interface EvidenceScore {
  e: number;
  s_e: number[];
}

export function scoreParagraphStub(serialized: string): ParagraphScore {
  const n = countSentenceMarkers(serialized);
  if (!serialized.startsWith("[CLS] ") || n === 0) {
    throw new MalformedInputError("not a serialized reranker input");
  }
  const s_p: number[] = [];
  for (let i = 0; i < n; i++) {
    s_p.push(hashUnit(`sp#${i}#${serialized}`));
  }
  return { p: hashUnit(`p#${serialized}`), s_p };
}

export function scoreEvidenceStub(serialized: string): EvidenceScore {
  const n = countSentenceMarkers(serialized);
  if (!serialized.startsWith("[CLS] ") || n === 0) {
    throw new MalformedInputError("not a serialized evidence input");
  }
  const s_e: number[] = [];
  for (let i = 0; i < n; i++) {
    s_e.push(hashUnit(`se#${i}#${serialized}`));
  }
  return { e: hashUnit(`e#${serialized}`), s_e };
}
