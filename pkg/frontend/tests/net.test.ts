import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { openSession, SocketLike } from "../src/net";
import { ServerMsg } from "../src/protocol";
import { applyServerError, applyWelcome, initialView } from "../src/view";
import { readGolden } from "./helpers";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  onopen: (() => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;

  send(text: string): void {
    this.sent.push(text);
  }

  close(): void {
    this.onclose?.();
  }

  // test-side controls
  open(): void {
    this.onopen?.();
  }

  receive(text: string): void {
    this.onmessage?.({ data: text });
  }

  drop(): void {
    this.onclose?.();
  }
}

interface Harness {
  sockets: FakeSocket[];
  messages: ServerMsg[];
  frameErrors: number;
  statuses: string[];
}

function startSession(
  role: "operator" | "observer" = "operator",
  options: { baseDelayMs?: number; maxDelayMs?: number } = {},
) {
  const harness: Harness = { sockets: [], messages: [], frameErrors: 0, statuses: [] };
  const session = openSession(
    "ws://test/ws",
    role,
    {
      onMessage: (msg) => harness.messages.push(msg),
      onFrameError: () => (harness.frameErrors += 1),
      onStatus: (status) => harness.statuses.push(status),
    },
    {
      makeSocket: () => {
        const socket = new FakeSocket();
        harness.sockets.push(socket);
        return socket;
      },
      baseDelayMs: options.baseDelayMs ?? 500,
      maxDelayMs: options.maxDelayMs ?? 8000,
    },
  );
  return { session, harness };
}

beforeEach(() => {
  vi.useFakeTimers();
});

afterEach(() => {
  vi.useRealTimers();
});

describe("handshake", () => {
  it("completes hello/welcome against the recorded transcript", () => {
    const { harness } = startSession("operator");
    const socket = harness.sockets[0]!;
    socket.open();
    expect(socket.sent).toEqual(['{"type":"hello","role":"operator"}']);

    socket.receive(readGolden("welcome.json"));
    socket.receive(readGolden("snapshot.json"));

    expect(harness.statuses).toEqual(["connecting", "connected"]);
    expect(harness.messages.map((m) => m.type)).toEqual(["welcome", "snapshot"]);
    const welcome = harness.messages[0]!;
    if (welcome.type !== "welcome") {
      throw new Error("expected a welcome");
    }
    expect(welcome.role).toBe("operator");
    expect(welcome.map.width).toBe(10);
  });

  it("falls back to observer when the operator seat is taken", () => {
    const { harness } = startSession("operator");
    const socket = harness.sockets[0]!;
    socket.open();
    // recorded denial: error frame, then a welcome that grants observer
    socket.receive(readGolden("error.json"));
    const welcome = JSON.parse(readGolden("welcome.json"));
    welcome.role = "observer";
    socket.receive(JSON.stringify(welcome));

    const view = initialView("operator", false);
    for (const msg of harness.messages) {
      if (msg.type === "welcome") {
        applyWelcome(view, msg, 0);
      } else if (msg.type === "error") {
        applyServerError(view, msg, 0);
      }
    }
    expect(view.role).toBe("observer");
    expect(view.connection).toBe("connected");
    expect(view.banner?.text).toBe("joined as observer");
  });
});

describe("frame errors", () => {
  it("skips malformed frames and keeps consuming the stream", () => {
    const { harness } = startSession();
    const socket = harness.sockets[0]!;
    socket.open();
    socket.receive(readGolden("welcome.json"));
    socket.receive("{oops");
    socket.receive('{"type":"snapshot","tick":"wrong"}');
    socket.receive(readGolden("snapshot.json"));

    expect(harness.frameErrors).toBe(2);
    expect(harness.messages.map((m) => m.type)).toEqual(["welcome", "snapshot"]);
    expect(harness.sockets).toHaveLength(1); // connection retained
  });
});

describe("reconnect", () => {
  it("retries with exponential backoff and resets after a welcome", () => {
    const { harness } = startSession("operator", { baseDelayMs: 500 });
    harness.sockets[0]!.open();
    harness.sockets[0]!.receive(readGolden("welcome.json"));

    harness.sockets[0]!.drop();
    expect(harness.statuses.at(-1)).toBe("retrying");
    vi.advanceTimersByTime(499);
    expect(harness.sockets).toHaveLength(1);
    vi.advanceTimersByTime(1);
    expect(harness.sockets).toHaveLength(2);

    harness.sockets[1]!.drop(); // never came up: back off harder
    vi.advanceTimersByTime(999);
    expect(harness.sockets).toHaveLength(2);
    vi.advanceTimersByTime(1);
    expect(harness.sockets).toHaveLength(3);

    // a fresh welcome heals the link and resets the backoff clock
    harness.sockets[2]!.open();
    harness.sockets[2]!.receive(readGolden("welcome.json"));
    harness.sockets[2]!.drop();
    vi.advanceTimersByTime(500);
    expect(harness.sockets).toHaveLength(4);
    expect(harness.sockets[3]!.sent).toEqual([]); // not opened yet
    harness.sockets[3]!.open();
    expect(harness.sockets[3]!.sent).toEqual(['{"type":"hello","role":"operator"}']);
  });

  it("caps the delay at the configured maximum", () => {
    const { harness } = startSession("operator", { baseDelayMs: 500, maxDelayMs: 2000 });
    for (let i = 0; i < 6; i++) {
      harness.sockets.at(-1)!.drop();
      vi.advanceTimersByTime(2000); // always enough once capped
    }
    expect(harness.sockets.length).toBe(7);
  });

  it("close() stops the retry loop", () => {
    const { session, harness } = startSession();
    harness.sockets[0]!.drop();
    session.close();
    vi.advanceTimersByTime(60_000);
    expect(harness.sockets).toHaveLength(1);
    expect(harness.statuses.at(-1)).toBe("closed");
  });
});
