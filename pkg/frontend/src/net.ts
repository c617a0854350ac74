/** Session transport: hello/welcome handshake, snapshot stream, reconnects.
 *
 * A malformed frame is reported and skipped without touching the socket.
 * When the server drops us the session retries with exponential backoff
 * (reset after the next successful welcome) until close() is called.
 */

import { helloFrame, parseServerMessage, Role, ServerMsg } from "./protocol";

/** The WebSocket surface we rely on; injectable for tests. */
export interface SocketLike {
  send(text: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export interface SessionHandlers {
  onMessage(msg: ServerMsg): void;
  onFrameError(err: unknown): void;
  onStatus(status: "connecting" | "connected" | "retrying" | "closed", detail?: string): void;
}

export interface SessionOptions {
  makeSocket?: (url: string) => SocketLike;
  baseDelayMs?: number;
  maxDelayMs?: number;
}

export interface LiveSession {
  send(text: string): void;
  close(): void;
}

export function openSession(
  url: string,
  role: Role,
  handlers: SessionHandlers,
  options: SessionOptions = {},
): LiveSession {
  const makeSocket =
    options.makeSocket ?? ((u: string) => new WebSocket(u) as unknown as SocketLike);
  const baseDelay = options.baseDelayMs ?? 500;
  const maxDelay = options.maxDelayMs ?? 10_000;

  let socket: SocketLike | null = null;
  let attempts = 0;
  let closed = false;
  let retryTimer: ReturnType<typeof setTimeout> | null = null;

  function connect(): void {
    if (closed) {
      return;
    }
    handlers.onStatus(attempts === 0 ? "connecting" : "retrying");
    socket = makeSocket(url);
    socket.onopen = () => {
      socket?.send(helloFrame(role));
    };
    socket.onmessage = (ev) => {
      let msg: ServerMsg;
      try {
        msg = parseServerMessage(String(ev.data));
      } catch (err) {
        handlers.onFrameError(err); // skip the frame, keep the stream
        return;
      }
      if (msg.type === "welcome") {
        attempts = 0; // a fresh welcome means the link is healthy again
        handlers.onStatus("connected");
      }
      handlers.onMessage(msg);
    };
    socket.onclose = () => {
      socket = null;
      if (closed) {
        handlers.onStatus("closed");
        return;
      }
      const delay = Math.min(maxDelay, baseDelay * 2 ** attempts);
      attempts += 1;
      handlers.onStatus("retrying", `reconnecting in ${(delay / 1000).toFixed(1)}s`);
      retryTimer = setTimeout(connect, delay);
    };
    socket.onerror = () => {
      // the close handler owns recovery; nothing to do here
    };
  }

  connect();
  return {
    send(text: string): void {
      socket?.send(text);
    },
    close(): void {
      closed = true;
      if (retryTimer !== null) {
        clearTimeout(retryTimer);
      }
      socket?.close();
      handlers.onStatus("closed");
    },
  };
}
