import type { AddressInfo } from "node:net";
import type { Server } from "node:http";

import type { Express } from "express";

export interface RunningServer {
  url: string;
  close: () => Promise<void>;
}

export async function start(app: Express): Promise<RunningServer> {
  const server: Server = app.listen(0);
  await new Promise<void>((resolve) => server.once("listening", resolve));
  const { port } = server.address() as AddressInfo;
  return {
    url: `http://127.0.0.1:${port}`,
    close: () =>
      new Promise((resolve, reject) =>
        server.close((err) => (err ? reject(err) : resolve()))
      ),
  };
}

export async function postJson(
  url: string,
  route: string,
  body: unknown
): Promise<Response> {
  return fetch(`${url}${route}`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: typeof body === "string" ? body : JSON.stringify(body),
  });
}
