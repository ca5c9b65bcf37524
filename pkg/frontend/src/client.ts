// WebSocket client: hello handshake, pose updates capped at 60/s, reconnect.

import {
  EnvEdit,
  GuidanceFramePayload,
  ReplanNotice,
  ScenarioSync,
  ServerMessage,
} from "./protocol.js";

export interface ClientHandlers {
  onSync?: (sync: ScenarioSync) => void;
  onFrame?: (frame: GuidanceFramePayload) => void;
  onReplan?: (notice: ReplanNotice) => void;
  onError?: (message: string) => void;
  onStatus?: (connected: boolean) => void;
}

const SEND_INTERVAL_MS = 1000 / 60;

export class GuidanceClient {
  private socket: WebSocket | null = null;
  private seq = 0;
  private lastSend = 0;
  private pendingPose: number[] | null = null;
  private pendingVelocity: number[] | null = null;
  private flushTimer: ReturnType<typeof setTimeout> | null = null;
  private closed = false;

  constructor(
    private url: string,
    private handlers: ClientHandlers
  ) {}

  connect(): void {
    this.closed = false;
    this.socket = new WebSocket(this.url);
    this.socket.addEventListener("open", () => {
      this.handlers.onStatus?.(true);
      this.send("hello", {});
    });
    this.socket.addEventListener("message", (event) => {
      const msg = JSON.parse(String(event.data)) as ServerMessage;
      if (msg.kind === "scenario_sync") this.handlers.onSync?.(msg.payload);
      else if (msg.kind === "guidance_frame") this.handlers.onFrame?.(msg.payload);
      else if (msg.kind === "replan_notice") this.handlers.onReplan?.(msg.payload);
      else if (msg.kind === "error") this.handlers.onError?.(msg.payload.message);
    });
    this.socket.addEventListener("close", () => {
      this.handlers.onStatus?.(false);
      if (!this.closed) setTimeout(() => this.connect(), 1000);
    });
    this.socket.addEventListener("error", () => {
      this.socket?.close();
    });
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
  }

  // Pose updates are rate limited to 60/s; the latest pose wins.
  sendPose(pose: number[], velocity: number[]): void {
    this.pendingPose = pose;
    this.pendingVelocity = velocity;
    const now = Date.now();
    if (now - this.lastSend >= SEND_INTERVAL_MS) {
      this.flushPose();
    } else if (this.flushTimer === null) {
      this.flushTimer = setTimeout(
        () => this.flushPose(),
        SEND_INTERVAL_MS - (now - this.lastSend)
      );
    }
  }

  sendEdit(edit: EnvEdit): void {
    this.send("env_edit", edit);
  }

  private flushPose(): void {
    if (this.flushTimer !== null) {
      clearTimeout(this.flushTimer);
      this.flushTimer = null;
    }
    if (this.pendingPose === null) return;
    this.lastSend = Date.now();
    this.send("pose_update", { pose: this.pendingPose, velocity: this.pendingVelocity });
    this.pendingPose = null;
    this.pendingVelocity = null;
  }

  private send(kind: string, payload: unknown): void {
    if (!this.socket || this.socket.readyState !== WebSocket.OPEN) return;
    this.socket.send(JSON.stringify({ kind, session: "ui", seq: this.seq++, payload }));
  }
}
