/**
 * Scoring backends behind the HTTP surface.
 *
 * Stub mode answers from the deterministic SHA-256 stub. Model mode is thin
 * forwarding plumbing: requests go to an upstream inference server speaking
 * the same contract (model weights are not bundled with this service), with
 * raw-logit upstreams squashed through a sigmoid so every score lands in
 * [0, 1].
 */

import type { EvidenceScore, ParagraphScore } from "./stub.js";
import { embedStub, scoreEvidenceStub, scoreParagraphStub } from "./stub.js";
import type { ModelConfig } from "./config.js";

export interface ScorerBackend {
  readonly mode: "stub" | "model";
  embed(texts: string[]): Promise<{ dim: number; vectors: number[][] }>;
  scoreParagraphs(inputs: string[]): Promise<ParagraphScore[]>;
  scoreEvidence(inputs: string[]): Promise<EvidenceScore[]>;
}

export class StubBackend implements ScorerBackend {
  readonly mode = "stub" as const;

  constructor(private readonly dim: number) {}

  async embed(texts: string[]) {
    return { dim: this.dim, vectors: texts.map((t) => embedStub(t, this.dim)) };
  }

  async scoreParagraphs(inputs: string[]) {
    return inputs.map(scoreParagraphStub);
  }

  async scoreEvidence(inputs: string[]) {
    return inputs.map(scoreEvidenceStub);
  }
}

export function sigmoid(x: number): number {
  return 1 / (1 + Math.exp(-x));
}

function clampUnit(x: number): number {
  return Math.min(Math.max(x, 0), 1);
}

export class UpstreamError extends Error {}

export class UpstreamBackend implements ScorerBackend {
  readonly mode = "model" as const;
  private readonly base: string;
  private readonly squash: (x: number) => number;

  constructor(private readonly config: ModelConfig) {
    if (!config.upstream_url) {
      throw new Error(
        "model mode needs upstream_url: weights are not bundled, " +
          "point at an inference server or run with --stub"
      );
    }
    this.base = config.upstream_url.replace(/\/+$/, "");
    this.squash =
      config.upstream_scores === "logits" ? sigmoid : clampUnit;
  }

  private async post<T>(route: string, payload: unknown): Promise<T> {
    let resp: Response;
    try {
      resp = await fetch(`${this.base}${route}`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(payload),
      });
    } catch (err) {
      throw new UpstreamError(`upstream unreachable: ${this.base}${route}`);
    }
    if (!resp.ok) {
      throw new UpstreamError(`upstream ${route} returned ${resp.status}`);
    }
    return (await resp.json()) as T;
  }

  /** Fails fast at startup when the upstream cannot serve the contract. */
  async probe(): Promise<void> {
    const out = await this.embed(["startup probe"]);
    if (!out.vectors.length || out.vectors[0].length !== out.dim) {
      throw new UpstreamError("upstream /embed does not honor the contract");
    }
  }

  async embed(texts: string[]) {
    return this.post<{ dim: number; vectors: number[][] }>("/embed", { texts });
  }

  async scoreParagraphs(inputs: string[]) {
    const data = await this.post<{ scores: { p: number; s_p: number[] }[] }>(
      "/score_paragraph",
      { inputs }
    );
    return data.scores.map((s) => ({
      p: this.squash(s.p),
      s_p: s.s_p.map(this.squash),
    }));
  }

  async scoreEvidence(inputs: string[]) {
    const data = await this.post<{ scores: { e: number; s_e: number[] }[] }>(
      "/score_evidence",
      { inputs }
    );
    return data.scores.map((s) => ({
      e: this.squash(s.e),
      s_e: s.s_e.map(this.squash),
    }));
  }
}
