/**
 * CLI entry point.
 *
 *   node dist/serve.js [--config path.json] [--stub] [--port N]
 *
 * Port precedence: --port, then HOPFORGE_SCORER_PORT, then 8750. Without
 * --stub the service needs a reachable upstream inference server; it probes
 * the upstream before accepting traffic and refuses to start otherwise.
 */

import { buildApp } from "./app.js";
import { StubBackend, UpstreamBackend, type ScorerBackend } from "./backends.js";
import { loadConfig, portFromEnv } from "./config.js";

interface CliArgs {
  config?: string;
  stub: boolean;
  port?: number;
}

export function parseArgs(argv: string[]): CliArgs {
  const args: CliArgs = { stub: false };
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--stub") {
      args.stub = true;
    } else if (arg === "--config") {
      args.config = argv[++i];
      if (args.config === undefined) throw new Error("--config needs a path");
    } else if (arg === "--port") {
      const raw = argv[++i];
      args.port = Number(raw);
      if (!Number.isInteger(args.port)) throw new Error(`bad --port ${raw}`);
    } else {
      throw new Error(`unknown argument ${arg}`);
    }
  }
  return args;
}

export async function makeBackend(
  config: ReturnType<typeof loadConfig>,
  stub: boolean
): Promise<ScorerBackend> {
  if (stub) {
    return new StubBackend(config.stub_dim);
  }
  const backend = new UpstreamBackend(config);
  await backend.probe();
  return backend;
}

async function main(): Promise<void> {
  const args = parseArgs(process.argv.slice(2));
  const config = loadConfig(args.config);
  const backend = await makeBackend(config, args.stub);
  const port = args.port ?? portFromEnv();
  const app = buildApp(config, backend);
  app.listen(port, () => {
    console.log(`scorer service (${backend.mode} mode) listening on :${port}`);
  });
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("serve.js") || entry.endsWith("serve.ts")) {
  main().catch((err) => {
    console.error(`startup failed: ${err instanceof Error ? err.message : err}`);
    process.exit(1);
  });
}
