// Pure view-model helpers: everything rendered is derived from frames here,
// so the headless tests can check display values without a DOM.

import { GuidanceFramePayload, GuideEllipse } from "./protocol.js";

export interface BeliefBar {
  label: string;
  fraction: number; // raw frame value, never renormalized
  freelance: boolean;
}

export interface BeliefView {
  bars: BeliefBar[];
  total: number;
  warning: boolean; // simplex broken beyond tolerance
}

const SIMPLEX_TOLERANCE = 1e-3;

export function beliefView(frame: GuidanceFramePayload): BeliefView {
  const n = frame.plan_belief.length;
  const bars = frame.plan_belief.map((value, i) => ({
    label: i === n - 1 ? "freelance" : `guide ${i + 1}`,
    fraction: value,
    freelance: i === n - 1,
  }));
  const total = frame.plan_belief.reduce((acc, v) => acc + v, 0);
  return { bars, total, warning: Math.abs(total - 1.0) > SIMPLEX_TOLERANCE };
}

export function freelanceBelief(frame: GuidanceFramePayload): number {
  return frame.plan_belief[frame.plan_belief.length - 1];
}

export function replanBadgeVisible(frame: GuidanceFramePayload): boolean {
  return freelanceBelief(frame) > 0.5;
}

export interface PhaseStrip {
  plan: number;
  cells: number[]; // 0..1 intensities, max-normalized for display
}

export function phaseStrips(frame: GuidanceFramePayload): PhaseStrip[] {
  const strips: PhaseStrip[] = [];
  frame.phase_beliefs.forEach((belief, plan) => {
    if (belief.length <= 1) return; // freelance has a single trivial phase
    const peak = Math.max(...belief, 1e-12);
    strips.push({ plan, cells: belief.map((v) => v / peak) });
  });
  return strips;
}

// World (maze meters) to canvas pixels; y flipped so up is up.
export interface Camera {
  offsetX: number;
  offsetY: number;
  scale: number;
  height: number;
}

export function fitCamera(
  workspaceMin: number[],
  workspaceMax: number[],
  width: number,
  height: number,
  margin = 20
): Camera {
  const spanX = workspaceMax[0] - workspaceMin[0];
  const spanY = workspaceMax[1] - workspaceMin[1];
  const scale = Math.min((width - 2 * margin) / spanX, (height - 2 * margin) / spanY);
  return {
    offsetX: margin - workspaceMin[0] * scale,
    offsetY: margin - workspaceMin[1] * scale,
    scale,
    height,
  };
}

export function toScreen(camera: Camera, p: number[]): [number, number] {
  return [camera.offsetX + p[0] * camera.scale, camera.height - (camera.offsetY + p[1] * camera.scale)];
}

export function toWorld(camera: Camera, sx: number, sy: number): [number, number] {
  return [
    (sx - camera.offsetX) / camera.scale,
    (camera.height - sy - camera.offsetY) / camera.scale,
  ];
}

export interface ArrowView {
  from: [number, number];
  to: [number, number];
  magnitude: number;
}

export function wrenchArrow(
  frame: GuidanceFramePayload,
  cursorWorld: number[],
  camera: Camera,
  tauMax: number
): ArrowView {
  const [wx, wy] = frame.wrench;
  const magnitude = Math.hypot(wx, wy);
  // Arrow length saturates at a quarter of the view height at tau_max.
  const pixelsPerUnit = (0.25 * camera.height) / Math.max(tauMax, 1e-9);
  const from = toScreen(camera, cursorWorld);
  const to: [number, number] = [
    from[0] + wx * pixelsPerUnit,
    from[1] - wy * pixelsPerUnit,
  ];
  return { from, to, magnitude };
}

export interface EllipseView {
  center: [number, number];
  radiusX: number;
  radiusY: number;
  plan: number;
  opacity: number;
  freelance: boolean;
}

export function guideEllipses(
  guides: GuideEllipse[],
  planBelief: number[],
  camera: Camera
): EllipseView[] {
  return guides
    .filter((g) => !g.freelance)
    .map((g) => ({
      center: toScreen(camera, g.mean),
      radiusX: g.axes[0] * camera.scale,
      radiusY: g.axes[1] * camera.scale,
      plan: g.plan,
      opacity: 0.15 + 0.85 * (planBelief[g.plan] ?? 0),
      freelance: g.freelance,
    }));
}

export const PLAN_COLORS = ["#4e9af1", "#f1734e", "#52c979", "#c06ee3", "#e3c94b"];

export function planColor(plan: number): string {
  return PLAN_COLORS[plan % PLAN_COLORS.length];
}
