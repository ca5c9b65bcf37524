import { strict as assert } from "node:assert";
import { test } from "node:test";

import { GuidanceFramePayload } from "../src/protocol.js";
import {
  beliefView,
  fitCamera,
  phaseStrips,
  replanBadgeVisible,
  toScreen,
  toWorld,
  wrenchArrow,
} from "../src/viewmodel.js";

function frameWith(planBelief: number[], wrench = [0, 0]): GuidanceFramePayload {
  return {
    tick: 0,
    wrench,
    energy: 1.0,
    plan_belief: planBelief,
    phase_beliefs: [[0.5, 0.3, 0.2], [1.0]],
    responsibilities: [],
    guides_version: 0,
    guides: null,
    events: [],
  };
}

test("belief bars render raw frame values and sum to one", () => {
  const view = beliefView(frameWith([0.6, 0.4]));
  assert.equal(view.bars.length, 2);
  assert.equal(view.bars[0].label, "guide 1");
  assert.equal(view.bars[1].label, "freelance");
  assert.ok(view.bars[1].freelance);
  assert.ok(Math.abs(view.total - 1.0) < 1e-12);
  assert.equal(view.warning, false);
});

test("broken simplex raises the warning instead of renormalizing", () => {
  const view = beliefView(frameWith([0.6, 0.3]));
  assert.equal(view.warning, true);
  // Values must be displayed as-is.
  assert.equal(view.bars[0].fraction, 0.6);
  assert.equal(view.bars[1].fraction, 0.3);
});

test("replan badge appears when the freelance belief crosses one half", () => {
  assert.equal(replanBadgeVisible(frameWith([0.6, 0.4])), false);
  assert.equal(replanBadgeVisible(frameWith([0.45, 0.55])), true);
});

test("phase strips skip the single-phase freelance plan", () => {
  const strips = phaseStrips(frameWith([0.5, 0.5]));
  assert.equal(strips.length, 1);
  assert.equal(strips[0].plan, 0);
  assert.equal(Math.max(...strips[0].cells), 1.0);
});

test("camera round-trips world and screen coordinates", () => {
  const camera = fitCamera([0, 0], [10, 10], 800, 800);
  const world = [3.25, 7.5];
  const [sx, sy] = toScreen(camera, world);
  const back = toWorld(camera, sx, sy);
  assert.ok(Math.abs(back[0] - world[0]) < 1e-9);
  assert.ok(Math.abs(back[1] - world[1]) < 1e-9);
});

test("wrench arrow points along the wrench and saturates at tau_max", () => {
  const camera = fitCamera([0, 0], [10, 10], 800, 800);
  const arrow = wrenchArrow(frameWith([1.0], [2.0, 0.0]), [5, 5], camera, 20);
  assert.ok(arrow.to[0] > arrow.from[0]);
  assert.ok(Math.abs(arrow.to[1] - arrow.from[1]) < 1e-9);
  const long = wrenchArrow(frameWith([1.0], [200.0, 0.0]), [5, 5], camera, 20);
  // length scale: a quarter of view height corresponds to tau_max
  const lenPixels = long.to[0] - long.from[0];
  assert.ok(lenPixels <= 0.25 * 800 * (200 / 20) + 1e-9);
});
