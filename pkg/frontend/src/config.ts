/** Service configuration: model ids, batch limit, device, stub dimension. */

import { readFileSync } from "node:fs";

import { z } from "zod";

export const DEFAULT_PORT = 8750;
export const PORT_ENV = "HOPFORGE_SCORER_PORT";

const configSchema = z.object({
  embedder_model: z.string().default("stub-sha256-embedder"),
  paragraph_model: z.string().default("stub-sha256-paragraph"),
  evidence_model: z.string().default("stub-sha256-evidence"),
  // one request may carry at most this many texts/inputs
  max_batch_size: z.number().int().min(1).default(64),
  device: z.string().default("cpu"),
  // embedding width served in stub mode
  stub_dim: z.number().int().min(2).default(64),
  // model mode forwards to an inference server speaking the same contract
  upstream_url: z.string().nullable().default(null),
  // set to "logits" when the upstream emits raw scores to be squashed
  upstream_scores: z.enum(["probabilities", "logits"]).default("probabilities"),
});

export type ModelConfig = z.infer<typeof configSchema>;

export function loadConfig(path?: string): ModelConfig {
  const raw: unknown = path ? JSON.parse(readFileSync(path, "utf8")) : {};
  return configSchema.parse(raw);
}

export function portFromEnv(env: NodeJS.ProcessEnv = process.env): number {
  const raw = env[PORT_ENV];
  if (raw === undefined || raw === "") {
    return DEFAULT_PORT;
  }
  const port = Number(raw);
  if (!Number.isInteger(port) || port < 1 || port > 65535) {
    throw new Error(`${PORT_ENV} must be a port number, got ${JSON.stringify(raw)}`);
  }
  return port;
}
