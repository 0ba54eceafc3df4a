/** HTTP surface: /embed, /score_paragraph, /score_evidence, /healthz. */

import express, { type Express, type Request, type Response } from "express";
import type { ZodType } from "zod";

import type { ModelConfig } from "./config.js";
import type { ScorerBackend } from "./backends.js";
import { UpstreamError } from "./backends.js";
import { MalformedInputError } from "./stub.js";
import { embedRequest, scoreRequest, wireBytes } from "./wire.js";

function sendJson(res: Response, status: number, payload: unknown): void {
  res.status(status).type("application/json").send(wireBytes(payload));
}

function parseBody<T>(schema: ZodType<T>, req: Request, res: Response): T | null {
  const result = schema.safeParse(req.body);
  if (!result.success) {
    sendJson(res, 400, { error: `bad request: ${result.error.issues[0]?.message}` });
    return null;
  }
  return result.data;
}

function checkBatch(items: string[], limit: number, res: Response): boolean {
  if (items.length > limit) {
    sendJson(res, 413, {
      error: `batch of ${items.length} exceeds the limit of ${limit}`,
    });
    return false;
  }
  return true;
}

async function answer(res: Response, work: () => Promise<unknown>): Promise<void> {
  try {
    sendJson(res, 200, await work());
  } catch (err) {
    if (err instanceof MalformedInputError) {
      sendJson(res, 400, { error: err.message });
    } else if (err instanceof UpstreamError) {
      sendJson(res, 502, { error: err.message });
    } else {
      sendJson(res, 500, { error: String(err) });
    }
  }
}

export function buildApp(config: ModelConfig, backend: ScorerBackend): Express {
  const app = express();
  app.use(express.json({ limit: "4mb" }));

  app.get("/healthz", (_req, res) => {
    sendJson(res, 200, {
      status: "ok",
      mode: backend.mode,
      models: {
        embedder: config.embedder_model,
        paragraph: config.paragraph_model,
        evidence: config.evidence_model,
      },
      device: config.device,
      max_batch_size: config.max_batch_size,
    });
  });

  app.post("/embed", (req, res) => {
    const body = parseBody(embedRequest, req, res);
    if (!body || !checkBatch(body.texts, config.max_batch_size, res)) return;
    void answer(res, () => backend.embed(body.texts));
  });

  app.post("/score_paragraph", (req, res) => {
    const body = parseBody(scoreRequest, req, res);
    if (!body || !checkBatch(body.inputs, config.max_batch_size, res)) return;
    void answer(res, async () => ({
      scores: await backend.scoreParagraphs(body.inputs),
    }));
  });

  app.post("/score_evidence", (req, res) => {
    const body = parseBody(scoreRequest, req, res);
    if (!body || !checkBatch(body.inputs, config.max_batch_size, res)) return;
    void answer(res, async () => ({
      scores: await backend.scoreEvidence(body.inputs),
    }));
  });

  // express surfaces JSON parse failures as errors; fold them into 400s
  app.use(
    (err: Error, _req: Request, res: Response, _next: express.NextFunction) => {
      sendJson(res, 400, { error: `unparseable body: ${err.message}` });
    }
  );

  return app;
}
