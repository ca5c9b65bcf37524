// Canvas rendering of the maze scene: walls, guides, cursor, wrench arrow.

import { GuidanceFramePayload, GuideEllipse, ScenarioDoc } from "./protocol.js";
import {
  Camera,
  guideEllipses,
  planColor,
  toScreen,
  wrenchArrow,
} from "./viewmodel.js";

export interface Scene {
  scenario: ScenarioDoc;
  guides: GuideEllipse[];
  fadingGuides: GuideEllipse[] | null; // previous guides fading out after replan
  fadeStart: number;
  camera: Camera;
  tauMax: number;
}

const FADE_MS = 900;

export function drawScene(
  ctx: CanvasRenderingContext2D,
  scene: Scene,
  frame: GuidanceFramePayload | null,
  cursorWorld: number[] | null,
  trail: number[][]
): void {
  const { camera, scenario } = scene;
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);

  // workspace
  const ws = scenario.geometry.workspace;
  const [wx0, wy0] = toScreen(camera, [ws.min[0], ws.max[1]]);
  const [wx1, wy1] = toScreen(camera, [ws.max[0], ws.min[1]]);
  ctx.fillStyle = "#10141c";
  ctx.fillRect(wx0, wy0, wx1 - wx0, wy1 - wy0);
  ctx.strokeStyle = "#3a4255";
  ctx.strokeRect(wx0, wy0, wx1 - wx0, wy1 - wy0);

  // walls
  ctx.fillStyle = "#5b6478";
  for (const wall of scenario.geometry.walls) {
    const [x0, y0] = toScreen(camera, [wall.min[0], wall.max[1]]);
    const [x1, y1] = toScreen(camera, [wall.max[0], wall.min[1]]);
    ctx.fillRect(x0, y0, x1 - x0, y1 - y0);
  }

  // guides: fading old chains first, then live chains
  if (scene.fadingGuides) {
    const age = Date.now() - scene.fadeStart;
    const alpha = Math.max(0, 1 - age / FADE_MS);
    if (alpha <= 0) scene.fadingGuides = null;
    else drawChains(ctx, scene.fadingGuides, null, camera, alpha * 0.35, true);
  }
  const belief = frame ? frame.plan_belief : scene.guides.map((g) => g.weight);
  drawChains(ctx, scene.guides, belief, camera, 1.0, false);

  // start and targets
  marker(ctx, toScreen(camera, scenario.start), "#52c979", "S");
  scenario.targets.forEach((t, i) =>
    marker(ctx, toScreen(camera, t), "#e35a5a", i === 0 ? "T" : `T${i + 1}`)
  );

  // operator trail
  if (trail.length > 1) {
    ctx.strokeStyle = "rgba(240,240,240,0.35)";
    ctx.beginPath();
    trail.forEach((p, i) => {
      const [x, y] = toScreen(camera, p);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }

  // cursor and wrench arrow
  if (cursorWorld) {
    const [cx, cy] = toScreen(camera, cursorWorld);
    ctx.fillStyle = "#f0f0f0";
    ctx.beginPath();
    ctx.arc(cx, cy, 6, 0, 2 * Math.PI);
    ctx.fill();
    if (frame) {
      const arrow = wrenchArrow(frame, cursorWorld, camera, scene.tauMax);
      drawArrow(ctx, arrow.from, arrow.to, "#f5d547");
    }
  }
}

function drawChains(
  ctx: CanvasRenderingContext2D,
  guides: GuideEllipse[],
  planBelief: number[] | null,
  camera: Camera,
  alphaScale: number,
  greyed: boolean
): void {
  const belief = planBelief ?? guides.map(() => 0.5);
  for (const e of guideEllipses(guides, belief, camera)) {
    ctx.beginPath();
    ctx.ellipse(e.center[0], e.center[1], e.radiusX, e.radiusY, 0, 0, 2 * Math.PI);
    ctx.globalAlpha = e.opacity * alphaScale;
    ctx.strokeStyle = greyed ? "#7a7a7a" : planColor(e.plan);
    ctx.stroke();
    ctx.globalAlpha = 1.0;
  }
}

function marker(
  ctx: CanvasRenderingContext2D,
  at: [number, number],
  color: string,
  label: string
): void {
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(at[0] - 6, at[1] - 6);
  ctx.lineTo(at[0] + 6, at[1] + 6);
  ctx.moveTo(at[0] - 6, at[1] + 6);
  ctx.lineTo(at[0] + 6, at[1] - 6);
  ctx.stroke();
  ctx.lineWidth = 1;
  ctx.fillStyle = color;
  ctx.fillText(label, at[0] + 8, at[1] - 8);
}

function drawArrow(
  ctx: CanvasRenderingContext2D,
  from: [number, number],
  to: [number, number],
  color: string
): void {
  const dx = to[0] - from[0];
  const dy = to[1] - from[1];
  const len = Math.hypot(dx, dy);
  if (len < 2) return;
  ctx.strokeStyle = color;
  ctx.fillStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(from[0], from[1]);
  ctx.lineTo(to[0], to[1]);
  ctx.stroke();
  const angle = Math.atan2(dy, dx);
  ctx.beginPath();
  ctx.moveTo(to[0], to[1]);
  ctx.lineTo(to[0] - 9 * Math.cos(angle - 0.4), to[1] - 9 * Math.sin(angle - 0.4));
  ctx.lineTo(to[0] - 9 * Math.cos(angle + 0.4), to[1] - 9 * Math.sin(angle + 0.4));
  ctx.closePath();
  ctx.fill();
  ctx.lineWidth = 1;
}
