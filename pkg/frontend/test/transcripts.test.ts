/**
 * Recorded-transcript replay: every stub-mode response must match the bytes
 * frozen from the reference implementation, exactly.
 */

import { readFileSync } from "node:fs";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { buildApp } from "../src/app.js";
import { StubBackend } from "../src/backends.js";
import { loadConfig } from "../src/config.js";
import { embedResponse, evidenceResponse, paragraphResponse } from "../src/wire.js";
import { type RunningServer, postJson, start } from "./util.js";

interface Transcript {
  name: string;
  server: { stub_dim: number };
  route: "/embed" | "/score_paragraph" | "/score_evidence";
  request: Record<string, unknown>;
  response_body: string;
}

const fixturePath = new URL("../fixtures/stub_transcripts.json", import.meta.url);
const transcripts: Transcript[] = JSON.parse(readFileSync(fixturePath, "utf8"));

const responseSchema = {
  "/embed": embedResponse,
  "/score_paragraph": paragraphResponse,
  "/score_evidence": evidenceResponse,
} as const;

describe("stub transcript replay", () => {
  const servers = new Map<number, RunningServer>();

  beforeAll(async () => {
    for (const dim of new Set(transcripts.map((t) => t.server.stub_dim))) {
      const config = { ...loadConfig(), stub_dim: dim };
      servers.set(dim, await start(buildApp(config, new StubBackend(dim))));
    }
  });

  afterAll(async () => {
    for (const server of servers.values()) {
      await server.close();
    }
  });

  it("carries the full recorded set", () => {
    expect(transcripts).toHaveLength(20);
    const routes = new Set(transcripts.map((t) => t.route));
    expect(routes).toEqual(
      new Set(["/embed", "/score_paragraph", "/score_evidence"])
    );
  });

  for (const transcript of transcripts) {
    it(`replays byte-identically: ${transcript.name}`, async () => {
      const server = servers.get(transcript.server.stub_dim)!;
      const res = await postJson(server.url, transcript.route, transcript.request);
      expect(res.status).toBe(200);
      expect(res.headers.get("content-type")).toContain("application/json");
      const body = await res.text();
      expect(body).toBe(transcript.response_body);
      // the bytes also validate against the wire schema
      responseSchema[transcript.route].parse(JSON.parse(body));

      const again = await postJson(server.url, transcript.route, transcript.request);
      expect(await again.text()).toBe(body);
    });
  }
});
