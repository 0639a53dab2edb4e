/** End-to-end: a scripted client completes one full shot against the real
 * session service and the experimenter cursor advances on command. */
import { spawn, type ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { parseServerMessage, type ServerMessage, type StateSnapshot } from "../src/protocol.js";

const PORT = 8931;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;

class Client {
  private queue: ServerMessage[] = [];
  private waiters: ((m: ServerMessage) => void)[] = [];
  socket: WebSocket;

  constructor(role: string) {
    this.socket = new WebSocket(`ws://127.0.0.1:${PORT}/ws?role=${role}`);
    this.socket.on("message", (data) => {
      const message = parseServerMessage(data.toString());
      if (!message) return;
      const waiter = this.waiters.shift();
      if (waiter) waiter(message);
      else this.queue.push(message);
    });
  }

  opened(): Promise<void> {
    return new Promise((resolve, reject) => {
      this.socket.once("open", resolve);
      this.socket.once("error", reject);
    });
  }

  send(message: unknown): void {
    this.socket.send(JSON.stringify(message));
  }

  next(timeoutMs = 5000): Promise<ServerMessage> {
    const queued = this.queue.shift();
    if (queued) return Promise.resolve(queued);
    return new Promise((resolve, reject) => {
      const timer = setTimeout(() => reject(new Error("timed out")), timeoutMs);
      this.waiters.push((m) => {
        clearTimeout(timer);
        resolve(m);
      });
    });
  }

  async until<T extends ServerMessage>(
    predicate: (m: ServerMessage) => m is T,
    limit = 2000,
  ): Promise<T> {
    for (let i = 0; i < limit; i++) {
      const message = await this.next();
      if (predicate(message)) return message;
    }
    throw new Error("expected message never arrived");
  }

  close(): void {
    this.socket.close();
  }
}

async function waitForHealth(): Promise<void> {
  for (let i = 0; i < 100; i++) {
    try {
      const response = await fetch(`${BASE}/health`);
      if (response.ok) return;
    } catch {
      /* server not up yet */
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error("service never became healthy");
}

beforeAll(async () => {
  server = spawn(
    "python3",
    ["-m", "springcurl.cli", "serve", "--port", String(PORT),
     "--pacing", "client", "--participant", "webtest", "--condition", "LS"],
    { stdio: ["ignore", "pipe", "pipe"], cwd: ".." },
  );
  await waitForHealth();
}, 30000);

afterAll(() => {
  server?.kill();
});

const isSnapshot = (m: ServerMessage): m is StateSnapshot => m.type === "state";

describe("scripted shot over /ws", () => {
  it("completes a full shot with a headless-consistent result", async () => {
    const experimenter = new Client("experimenter");
    await experimenter.opened();
    const participant = new Client("participant");
    await participant.opened();

    const hello = await participant.next();
    expect(hello.type).toBe("hello");
    const first = await participant.until(isSnapshot);
    expect(first.prompt).toEqual({ kind: "phase", phase: "Familiarization" });

    // experimenter advances through the familiarization prompt
    const before = first.cursor;
    experimenter.send({ type: "experimenter", command: "advance" });
    const ack = await experimenter.until(
      (m): m is ServerMessage & { cursor: number } => m.type === "ack",
    );
    expect(ack.cursor).toBe(before + 1);

    // approach the cube, grab, pull to 90 mm, release
    participant.send({ type: "move", x: 0 });
    participant.send({ type: "button_down" });
    for (let x = -5; x >= -90; x -= 5) {
      participant.send({ type: "move", x });
    }
    // occlusion while grabbed: cube and sphere hidden, elongation hidden
    const grabbed = await participant.until(
      (m): m is StateSnapshot =>
        isSnapshot(m) && m.phase === "Grabbed" && m.renderedForce > 1,
    );
    expect(grabbed.cubeVisible).toBe(false);
    expect(grabbed.sphereVisible).toBe(false);
    expect(grabbed.elongationHidden).toBe(true);

    participant.send({ type: "button_up" });
    const result = await participant.until(
      (m): m is ServerMessage & { landing: number; points: number } =>
        m.type === "shot_result",
    );
    // headless engine values for a 90 mm release on the main linear spring
    expect(result.landing).toBeCloseTo(500.0, 4);
    expect(result.points).toBe(100);

    participant.close();
    experimenter.close();
  }, 30000);
});
