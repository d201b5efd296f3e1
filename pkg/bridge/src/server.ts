/** HTTP wiring for the bridge service.
 *
 * Usage: node dist/server.js [port]   (default 8777, localhost only)
 * Point the pipeline at it with MECHNLI_BRIDGE_URL=http://127.0.0.1:8777
 */

import { createServer, type IncomingMessage, type ServerResponse } from "node:http";

import { BridgeService, type Envelope } from "./service.js";

const MAX_BODY_BYTES = 4 * 1024 * 1024;

function readBody(request: IncomingMessage): Promise<string> {
  return new Promise((resolve, reject) => {
    const chunks: Buffer[] = [];
    let size = 0;
    request.on("data", (chunk: Buffer) => {
      size += chunk.length;
      if (size > MAX_BODY_BYTES) {
        reject(new Error("request body too large"));
        request.destroy();
        return;
      }
      chunks.push(chunk);
    });
    request.on("end", () => resolve(Buffer.concat(chunks).toString("utf-8")));
    request.on("error", reject);
  });
}

function send(response: ServerResponse, envelope: Envelope): void {
  const status = envelope.ok ? 200 : envelope.error?.code === "NotFound" ? 404 : 400;
  const body = JSON.stringify(envelope);
  response.writeHead(status, {
    "Content-Type": "application/json",
    "Content-Length": Buffer.byteLength(body),
  });
  response.end(body);
}

export function startServer(port: number, host = "127.0.0.1") {
  const service = new BridgeService();
  const server = createServer(async (request, response) => {
    const method = request.method ?? "GET";
    const path = (request.url ?? "/").split("?")[0];
    let payload: unknown = undefined;
    if (method === "POST") {
      try {
        const raw = await readBody(request);
        payload = raw ? JSON.parse(raw) : {};
      } catch (error) {
        send(response, {
          ok: false,
          error: { code: "BadRequest", message: `unreadable body: ${error}` },
        });
        return;
      }
    }
    try {
      send(response, service.handle(method, path, payload));
    } catch (error) {
      send(response, {
        ok: false,
        error: { code: "Internal", message: String(error) },
      });
    }
  });
  server.listen(port, host);
  return server;
}

const entrypoint = process.argv[1] ?? "";
if (entrypoint.endsWith("server.js")) {
  const port = Number(process.argv[2] ?? process.env.MECHNLI_BRIDGE_PORT ?? 8777);
  const server = startServer(port);
  server.on("listening", () => {
    console.log(`mechnli bridge listening on http://127.0.0.1:${port}`);
  });
}
