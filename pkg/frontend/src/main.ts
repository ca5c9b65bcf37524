// Wiring: drag the end-effector, watch beliefs and guides, edit the maze.

import { GuidanceClient } from "./client.js";
import { GuidanceFramePayload, ScenarioSync } from "./protocol.js";
import {
  beliefView,
  fitCamera,
  phaseStrips,
  planColor,
  replanBadgeVisible,
  toWorld,
} from "./viewmodel.js";
import { Scene, drawScene } from "./render.js";

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const barsRoot = document.getElementById("bars")!;
const stripsRoot = document.getElementById("strips")!;
const banner = document.getElementById("banner")!;
const badge = document.getElementById("replan-badge")!;
const toolSelect = document.getElementById("tool") as HTMLSelectElement;

let scene: Scene | null = null;
// Frame buffer of size one: rendering always uses the latest frame.
let latestFrame: GuidanceFramePayload | null = null;
let cursorWorld: number[] | null = null;
let dragging = false;
let lastCursor: { pose: number[]; time: number } | null = null;
const trail: number[][] = [];

const wsUrl = new URLSearchParams(location.search).get("ws") ?? `ws://${location.hostname}:8765/`;

const client = new GuidanceClient(wsUrl, {
  onSync(sync: ScenarioSync) {
    scene = {
      scenario: sync.scenario,
      guides: sync.guides,
      fadingGuides: null,
      fadeStart: 0,
      camera: fitCamera(
        sync.scenario.geometry.workspace.min,
        sync.scenario.geometry.workspace.max,
        canvas.width,
        canvas.height
      ),
      tauMax: sync.params.tau_max,
    };
    trail.length = 0;
  },
  onFrame(frame) {
    latestFrame = frame;
    if (scene && frame.guides) scene.guides = frame.guides;
  },
  onReplan(notice) {
    if (!scene) return;
    scene.fadingGuides = scene.guides;
    scene.fadeStart = Date.now();
    scene.guides = notice.guides;
    flashBanner(`replanned (${notice.trigger}): new guides active`);
  },
  onError(message) {
    flashBanner(`service error: ${message}`, true);
  },
  onStatus(connected) {
    banner.textContent = connected ? "" : "disconnected - retrying...";
    banner.className = connected ? "banner hidden" : "banner error";
  },
});
client.connect();

let bannerTimer: ReturnType<typeof setTimeout> | null = null;
function flashBanner(text: string, isError = false): void {
  banner.textContent = text;
  banner.className = isError ? "banner error" : "banner";
  if (bannerTimer) clearTimeout(bannerTimer);
  bannerTimer = setTimeout(() => {
    banner.className = "banner hidden";
  }, 2500);
}

// -- pointer handling -------------------------------------------------------

canvas.addEventListener("pointerdown", (ev) => {
  if (!scene) return;
  const world = eventWorld(ev);
  if (toolSelect.value === "drag") {
    dragging = true;
    canvas.setPointerCapture(ev.pointerId);
    pushPose(world);
  } else if (toolSelect.value === "delete-wall") {
    const index = wallAt(world);
    if (index !== null) {
      client.sendEdit({ op: "remove_wall", index });
      flashBanner(`wall ${index} removed - replanning`);
    }
  } else if (toolSelect.value === "move-target") {
    client.sendEdit({ op: "move_target", index: 0, pose: world });
    flashBanner("target moved - replanning");
  }
});

canvas.addEventListener("pointermove", (ev) => {
  if (!dragging || !scene) return;
  pushPose(eventWorld(ev));
});

canvas.addEventListener("pointerup", () => {
  dragging = false;
  lastCursor = null;
});

function eventWorld(ev: PointerEvent): number[] {
  const rect = canvas.getBoundingClientRect();
  return toWorld(scene!.camera, ev.clientX - rect.left, ev.clientY - rect.top);
}

function pushPose(world: number[]): void {
  const now = performance.now();
  let velocity = [0, 0];
  if (lastCursor) {
    const dt = Math.max((now - lastCursor.time) / 1000, 1e-3);
    velocity = [(world[0] - lastCursor.pose[0]) / dt, (world[1] - lastCursor.pose[1]) / dt];
  }
  lastCursor = { pose: world, time: now };
  cursorWorld = world;
  trail.push(world);
  if (trail.length > 600) trail.shift();
  client.sendPose(world, velocity);
}

function wallAt(world: number[]): number | null {
  if (!scene) return null;
  const walls = scene.scenario.geometry.walls;
  for (let i = 0; i < walls.length; i++) {
    const w = walls[i];
    if (
      world[0] >= w.min[0] &&
      world[0] <= w.max[0] &&
      world[1] >= w.min[1] &&
      world[1] <= w.max[1]
    ) {
      return i;
    }
  }
  return null;
}

// -- side panel --------------------------------------------------------------

function renderPanel(frame: GuidanceFramePayload): void {
  const view = beliefView(frame);
  barsRoot.innerHTML = view.bars
    .map((bar, i) => {
      const pct = (100 * bar.fraction).toFixed(1);
      const color = bar.freelance ? "#9aa0ad" : planColor(i);
      return `
        <div class="bar-row">
          <span class="bar-label">${bar.label}</span>
          <div class="bar-track">
            <div class="bar-fill" style="width:${pct}%;background:${color}"></div>
          </div>
          <span class="bar-value">${pct}%</span>
        </div>`;
    })
    .join("");
  if (view.warning) {
    barsRoot.innerHTML += `<div class="warn">belief sum ${view.total.toFixed(4)} != 1</div>`;
  }

  stripsRoot.innerHTML = phaseStrips(frame)
    .map((strip) => {
      const cells = strip.cells
        .map(
          (v) =>
            `<span class="cell" style="background:${planColor(strip.plan)};opacity:${(
              0.08 +
              0.92 * v
            ).toFixed(3)}"></span>`
        )
        .join("");
      return `<div class="strip-row"><span class="bar-label">guide ${strip.plan + 1}</span>
              <div class="strip">${cells}</div></div>`;
    })
    .join("");

  badge.className = replanBadgeVisible(frame) ? "badge" : "badge hidden";
}

// -- render loop ---------------------------------------------------------------

function loop(): void {
  if (scene) {
    drawScene(ctx, scene, latestFrame, cursorWorld, trail);
    if (latestFrame) renderPanel(latestFrame);
  }
  requestAnimationFrame(loop);
}
requestAnimationFrame(loop);
