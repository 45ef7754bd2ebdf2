// Lecturer live console state and channel handling.
//
// The console never accumulates anything itself: every push from the server
// replaces the previous stats snapshot wholesale, so the displayed counts are
// always exactly the latest server message.  A dropped channel reconnects and
// the server's greeting snapshot resyncs the view.

import type { LiveServerMessage, StatsMessage } from "./types.js";

export interface ConsoleState {
  connection: "connecting" | "open" | "closed";
  latest: StatsMessage | null;
  frozen: boolean; // session closed; controls disabled, data frozen
}

export const initialConsole: ConsoleState = {
  connection: "connecting",
  latest: null,
  frozen: false,
};

export function applyMessage(state: ConsoleState, message: LiveServerMessage): ConsoleState {
  if (message.type !== "stats") return state;
  return {
    connection: state.connection,
    latest: message,
    frozen: message.open === false,
  };
}

export function connectionChanged(
  state: ConsoleState,
  connection: ConsoleState["connection"],
): ConsoleState {
  return { ...state, connection };
}

// Minimal socket surface so tests can drive the channel with a fake.
export interface SocketLike {
  onmessage: ((event: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onopen: (() => void) | null;
  close(): void;
  send(data: string): void;
}

export type SocketFactory = (url: string) => SocketLike;

export class LiveChannel {
  private socket: SocketLike | null = null;
  private stopped = false;
  reconnectDelayMs = 1000;

  constructor(
    private readonly url: string,
    private readonly factory: SocketFactory,
    private readonly onMessage: (message: LiveServerMessage) => void,
    private readonly onConnection: (state: ConsoleState["connection"]) => void,
    private readonly schedule: (fn: () => void, ms: number) => void = (fn, ms) =>
      void setTimeout(fn, ms),
  ) {}

  connect(): void {
    this.onConnection("connecting");
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => this.onConnection("open");
    socket.onmessage = (event) => {
      this.onMessage(JSON.parse(event.data) as LiveServerMessage);
    };
    socket.onclose = () => {
      this.onConnection("closed");
      if (!this.stopped) {
        // resync comes from the server's snapshot on reconnect
        this.schedule(() => this.connect(), this.reconnectDelayMs);
      }
    };
  }

  send(message: unknown): void {
    this.socket?.send(JSON.stringify(message));
  }

  stop(): void {
    this.stopped = true;
    this.socket?.close();
  }
}
