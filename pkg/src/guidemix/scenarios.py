"""Task scenarios: geometry, signed clearances, reward features and weights.

Three scenario families are supported:

* ``maze2d``   - a point particle crosses a thick wall with gaps (2 DoF).
* ``pickplace3d`` - reach small targets past a vertical cylinder (3 DoF).
* ``pole6d``   - translate and rotate a pole through one of two window
  openings in a large wall (6 DoF: x, y, z and Euler angles).

Every clearance function returns meters with the same convention: positive
means clear of obstacles (and inside the permitted region where one
exists), negative means penetrating.  Features and rewards are pure
functions of (scenario, weights), safe for parallel evaluation.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .promp import Array, BasisConfig, DomainError, PhaseGrid, trajectory_from_weights

LOG_2PI = math.log(2.0 * math.pi)

# Feature weights from the published experiments; the maze values are this
# package's own calibration (the 2D task ships without any).
THETA_3D = (-5000.0, -5000.0, 5000.0, 5000.0, -500.0, -50000.0, 50.0)
THETA_6D = (-2.5, -5.0, 1000.0, -5.0, -5.0, -5.0)
THETA_MAZE = (-50.0, -50.0, 50.0, 50.0, -0.5, -5.0)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box in any dimension."""

    lo: Array
    hi: Array

    def __post_init__(self) -> None:
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise DomainError("box needs hi > lo per axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def center(self) -> Array:
        return (self.lo + self.hi) / 2.0

    @property
    def half(self) -> Array:
        return (self.hi - self.lo) / 2.0

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.hi - self.lo))

    def contains(self, p: Array) -> bool:
        return bool(np.all(p >= self.lo) and np.all(p <= self.hi))


def box_sdf(box: Box, points: Array) -> Array:
    """Signed distance to the box surface: negative inside, positive outside."""
    pts = np.atleast_2d(points)
    q = np.abs(pts - box.center) - box.half
    outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
    inside = np.minimum(np.max(q, axis=-1), 0.0)
    d = outside + inside
    return d if np.asarray(points).ndim > 1 else d[0]


@dataclass(frozen=True)
class MazeGeometry:
    workspace: Box
    walls: tuple[Box, ...]


@dataclass(frozen=True)
class PickPlaceGeometry:
    workspace: Box
    cylinder_center: Array  # x, y of the vertical axis
    cylinder_radius: float
    basket: Array

    def __post_init__(self) -> None:
        if self.cylinder_radius <= 0:
            raise DomainError("cylinder radius must be > 0")
        object.__setattr__(self, "cylinder_center", np.asarray(self.cylinder_center, dtype=float))
        object.__setattr__(self, "basket", np.asarray(self.basket, dtype=float))


@dataclass(frozen=True)
class Window:
    """Square opening cut through the wall's full width, axis-aligned in x-z."""

    center_xz: Array
    half_side: float

    def __post_init__(self) -> None:
        if self.half_side <= 0:
            raise DomainError("window half side must be > 0")
        object.__setattr__(self, "center_xz", np.asarray(self.center_xz, dtype=float))


@dataclass(frozen=True)
class PoleGeometry:
    workspace: Box
    wall_center: Array
    wall_half: Array  # half extents along x, y, z
    windows: tuple[Window, ...]
    pole_length: float
    pole_samples: int = 32

    def __post_init__(self) -> None:
        if self.pole_length <= 0:
            raise DomainError("pole length must be > 0")
        wc = np.asarray(self.wall_center, dtype=float)
        wh = np.asarray(self.wall_half, dtype=float)
        for w in self.windows:
            if np.any(np.abs(w.center_xz - wc[[0, 2]]) + w.half_side > wh[[0, 2]]):
                raise DomainError("windows must lie within the wall extent")
        object.__setattr__(self, "wall_center", wc)
        object.__setattr__(self, "wall_half", wh)


@dataclass(frozen=True)
class PlannerHints:
    """Per-scenario planner calibration carried in the scenario file.

    ``var_cap`` bounds the learner's weight variances (the workspace
    diameter squared when unset).  ``fan_scale`` spreads the component seed
    lines transversally as a fraction of the workspace's cross extent so
    that components start in distinct route basins.  ``route_waypoints``
    (full poses) pin seed lines through known openings instead; the learner
    still shapes the paths, clearances, and variances from the reward.
    """

    var_cap: float | None = None
    fan_scale: float = 0.0
    route_waypoints: tuple[tuple[float, ...], ...] = ()


@dataclass(frozen=True)
class Scenario:
    """One task: geometry, reward feature weights, endpoints, basis layout."""

    variant: str  # maze2d | pickplace3d | pole6d
    geometry: MazeGeometry | PickPlaceGeometry | PoleGeometry
    feature_weights: Array
    start: Array
    targets: Array  # (n_targets, n)
    basis: BasisConfig
    phase_steps: int = 20
    sigma_sq: float = 2.0
    completion_radius: float = 0.5
    angle_weight: float = 1.0
    planner: PlannerHints = PlannerHints()

    def __post_init__(self) -> None:
        if self.sigma_sq <= 0:
            raise DomainError("sigma_sq must be > 0")
        theta = np.asarray(self.feature_weights, dtype=float)
        expected = {"maze2d": 6, "pickplace3d": 7, "pole6d": 6}[self.variant]
        if theta.size != expected:
            raise DomainError(f"{self.variant} needs {expected} feature weights, got {theta.size}")
        start = np.asarray(self.start, dtype=float)
        targets = np.atleast_2d(np.asarray(self.targets, dtype=float))
        if targets.shape[0] < 1:
            raise DomainError("scenario needs at least one target")
        n = {"maze2d": 2, "pickplace3d": 3, "pole6d": 6}[self.variant]
        if start.size != n or targets.shape[1] != n or self.basis.n != n:
            raise DomainError(f"{self.variant} poses must have {n} dimensions")
        object.__setattr__(self, "feature_weights", theta)
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "targets", targets)

    @property
    def n(self) -> int:
        return self.basis.n

    @property
    def n_position(self) -> int:
        """Leading pose entries that are Cartesian position."""
        return 3 if self.variant == "pole6d" else self.n

    @property
    def workspace(self) -> Box:
        return self.geometry.workspace

    def pose_box(self) -> Box:
        """Full pose-space extent: the workspace, plus +-pi per Euler angle."""
        ws = self.workspace
        if self.n == self.n_position:
            return ws
        angles = np.full(self.n - self.n_position, math.pi)
        return Box(np.concatenate([ws.lo, -angles]), np.concatenate([ws.hi, angles]))

    def grid(self) -> PhaseGrid:
        return PhaseGrid.uniform(self.phase_steps)

    def with_start(self, anchor: Array) -> "Scenario":
        return dataclasses.replace(self, start=np.asarray(anchor, dtype=float))


# ---------------------------------------------------------------------------
# Clearances


def euler_zyx_matrix(alpha: float, beta: float, gamma: float) -> Array:
    """Rotation from intrinsic Z-Y-X (yaw-pitch-roll) Euler angles."""
    ca, sa = math.cos(alpha), math.sin(alpha)
    cb, sb = math.cos(beta), math.sin(beta)
    cg, sg = math.cos(gamma), math.sin(gamma)
    rz = np.array([[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cg, -sg], [0.0, sg, cg]])
    return rz @ ry @ rx


def pole_points(pose: Array, geom: PoleGeometry, samples: int | None = None) -> Array:
    """Points along the pole segment; at zero rotation the pole lies along +y."""
    k = geom.pole_samples if samples is None else samples
    rot = euler_zyx_matrix(pose[3], pose[4], pose[5])
    axis = rot @ np.array([0.0, 1.0, 0.0])
    ts = np.linspace(-0.5, 0.5, k) * geom.pole_length
    return pose[:3][None, :] + ts[:, None] * axis[None, :]


def wall_solid_clearance(geom: PoleGeometry, points: Array) -> Array:
    """Signed distance to the wall-minus-windows solid; negative = penetrating.

    The solid is the product of its x-z cross section (square with window
    holes) and the wall's y slab, so the exact 3D distance combines the exact
    2D cross-section distance with the 1D slab distance like a box SDF.
    """
    pts = np.atleast_2d(points)
    wc, wh = geom.wall_center, geom.wall_half
    xz = pts[:, [0, 2]]

    # 2D signed distance to the cross-section material (negative inside it).
    q = np.abs(xz - wc[[0, 2]]) - wh[[0, 2]]
    sd_big = np.linalg.norm(np.maximum(q, 0.0), axis=1) + np.minimum(np.max(q, axis=1), 0.0)
    cross = sd_big.copy()
    interior = sd_big < 0
    if np.any(interior):
        hole_sds = []
        for w in geom.windows:
            qw = np.abs(xz - w.center_xz) - w.half_side
            hole_sds.append(
                np.linalg.norm(np.maximum(qw, 0.0), axis=1) + np.minimum(np.max(qw, axis=1), 0.0)
            )
        hole = np.stack(hole_sds, axis=0)  # (n_windows, P)
        in_any_hole = np.any(hole < 0, axis=0)
        # Inside material: nearest boundary is the outer square or a window rim.
        material = interior & ~in_any_hole
        cross[material] = np.maximum(sd_big[material], -np.min(hole[:, material], axis=0))
        # Inside a hole: positive distance to that window's rim.
        cross[in_any_hole] = -np.min(
            np.where(hole[:, in_any_hole] < 0, hole[:, in_any_hole], np.inf), axis=0
        )

    slab = np.abs(pts[:, 1] - wc[1]) - wh[1]
    a = np.maximum(cross, 0.0)
    b = np.maximum(slab, 0.0)
    d = np.hypot(a, b) + np.minimum(np.maximum(cross, slab), 0.0)
    return d if np.asarray(points).ndim > 1 else d[0]


def workspace_clearance(box: Box, points: Array) -> Array:
    """Positive inside the permitted region, negative outside."""
    return -box_sdf(box, points)


def cylinder_clearance(geom: PickPlaceGeometry, points: Array) -> Array:
    """Positive outside the vertical cylinder, negative inside."""
    pts = np.atleast_2d(points)
    d = np.hypot(*(pts[:, :2] - geom.cylinder_center).T) - geom.cylinder_radius
    return d if np.asarray(points).ndim > 1 else d[0]


def maze_wall_clearance(geom: MazeGeometry, points: Array) -> Array:
    """Positive outside every wall block, negative inside the nearest one."""
    pts = np.atleast_2d(points)
    d = np.min(np.stack([box_sdf(w, pts) for w in geom.walls], axis=0), axis=0)
    return d if np.asarray(points).ndim > 1 else d[0]


def signed_distance(s: Scenario, pose: Array, pole_samples: int | None = None) -> float:
    """Overall clearance of one pose: minimum over the variant's constraints."""
    pose = np.asarray(pose, dtype=float)
    if pose.shape != (s.n,):
        raise DomainError(f"pose must have {s.n} dimensions, got {pose.shape}")
    if s.variant == "maze2d":
        g = s.geometry
        return float(min(workspace_clearance(g.workspace, pose), maze_wall_clearance(g, pose)))
    if s.variant == "pickplace3d":
        g = s.geometry
        return float(min(workspace_clearance(g.workspace, pose), cylinder_clearance(g, pose)))
    if s.variant == "pole6d":
        pts = pole_points(pose, s.geometry, pole_samples)
        return float(np.min(wall_solid_clearance(s.geometry, pts)))
    raise DomainError(f"unknown variant {s.variant!r}")


# ---------------------------------------------------------------------------
# Features and reward


def collision_loglik(d_min: float, sigma_sq: float) -> float:
    """Log Gaussian likelihood of the worst clearance; flat for d >= 0."""
    if sigma_sq <= 0:
        raise DomainError("sigma_sq must be > 0")
    base = -0.5 * (LOG_2PI + math.log(sigma_sq))
    if d_min >= 0:
        return base
    return base - d_min * d_min / (2.0 * sigma_sq)


def _step_diffs(traj: Array) -> tuple[Array, Array]:
    """First/second central differences per grid index, one-sided at the ends.

    Differences are per index step (not divided by the phase spacing) so the
    published feature weights keep their balance at task scale.
    """
    t = traj.shape[0]
    vel = np.zeros_like(traj)
    acc = np.zeros_like(traj)
    if t >= 2:
        vel[1:-1] = (traj[2:] - traj[:-2]) / 2.0
        vel[0] = traj[1] - traj[0]
        vel[-1] = traj[-1] - traj[-2]
    if t >= 3:
        acc[1:-1] = traj[2:] - 2.0 * traj[1:-1] + traj[:-2]
        acc[0] = acc[1]
        acc[-1] = acc[-2]
    return vel, acc


def _pose_distance_sq(s: Scenario, a: Array, b: Array) -> float:
    d = a - b
    if s.variant == "pole6d" and s.angle_weight != 1.0:
        d = d.copy()
        d[3:] *= s.angle_weight
    return float(d @ d)


def _endpoint_features(s: Scenario, traj: Array) -> tuple[float, float]:
    d_start_sq = _pose_distance_sq(s, traj[0], s.start)
    d_end_sq = min(_pose_distance_sq(s, traj[-1], t) for t in s.targets)
    return d_start_sq, d_end_sq


def feature_vector(s: Scenario, traj: Array) -> Array:
    """Reward features of a phase-discretized trajectory, ordered per variant."""
    traj = np.atleast_2d(np.asarray(traj, dtype=float))
    if traj.shape[1] != s.n:
        raise DomainError(f"trajectory poses must have {s.n} dimensions")
    vel, acc = _step_diffs(traj)
    sum_vel = float(np.sum(vel * vel))
    sum_acc = float(np.sum(acc * acc))
    d_start_sq, d_end_sq = _endpoint_features(s, traj)

    if s.variant == "maze2d":
        g = s.geometry
        l_box = collision_loglik(float(np.min(workspace_clearance(g.workspace, traj))), s.sigma_sq)
        l_obs = collision_loglik(float(np.min(maze_wall_clearance(g, traj))), s.sigma_sq)
        return np.array([d_start_sq, d_end_sq, l_box, l_obs, sum_vel, sum_acc])

    if s.variant == "pickplace3d":
        g = s.geometry
        l_box = collision_loglik(float(np.min(workspace_clearance(g.workspace, traj))), s.sigma_sq)
        l_obs = collision_loglik(float(np.min(cylinder_clearance(g, traj))), s.sigma_sq)
        height = float(np.sum(np.minimum(0.5, traj[:, 2])))
        return np.array([d_start_sq, d_end_sq, l_box, l_obs, sum_vel, sum_acc, height])

    if s.variant == "pole6d":
        g = s.geometry
        pts = np.concatenate([pole_points(pose, g) for pose in traj], axis=0)
        l_wall = collision_loglik(float(np.min(wall_solid_clearance(g, pts))), s.sigma_sq)
        rot = float(np.sum(traj[:, 3:] ** 2))
        return np.array([d_start_sq, d_end_sq, l_wall, sum_vel, sum_acc, rot])

    raise DomainError(f"unknown variant {s.variant!r}")


def features_3d(traj: Array, s: Scenario) -> Array:
    if s.variant != "pickplace3d":
        raise DomainError(f"features_3d requires pickplace3d, got {s.variant}")
    return feature_vector(s, traj)


def features_6d(traj: Array, s: Scenario) -> Array:
    if s.variant != "pole6d":
        raise DomainError(f"features_6d requires pole6d, got {s.variant}")
    return feature_vector(s, traj)


def episodic_reward(s: Scenario, w: Array) -> float:
    """Weighted feature sum of the trajectory induced by weight vector w."""
    traj = trajectory_from_weights(np.asarray(w, dtype=float), s.grid(), s.basis)
    return float(feature_vector(s, traj) @ s.feature_weights)


# ---------------------------------------------------------------------------
# Presets and files


def maze2d_preset() -> Scenario:
    """Thick wall with two gaps; start on the left, target on the right."""
    workspace = Box(np.array([0.0, 0.0]), np.array([10.0, 10.0]))
    walls = (
        Box(np.array([4.0, 0.0]), np.array([6.0, 2.0])),
        Box(np.array([4.0, 4.0]), np.array([6.0, 6.0])),
        Box(np.array([4.0, 8.0]), np.array([6.0, 10.0])),
    )
    return Scenario(
        variant="maze2d",
        geometry=MazeGeometry(workspace, walls),
        feature_weights=np.array(THETA_MAZE),
        start=np.array([1.5, 5.0]),
        targets=np.array([[8.5, 5.0]]),
        basis=BasisConfig(m=10, n=2),
        phase_steps=20,
        sigma_sq=0.5,
        completion_radius=0.5,
        planner=PlannerHints(var_cap=4.0, fan_scale=0.5),
    )


def pickplace3d_preset() -> Scenario:
    workspace = Box(np.array([-0.8, -0.8, 0.0]), np.array([0.8, 0.8, 1.2]))
    geom = PickPlaceGeometry(
        workspace=workspace,
        cylinder_center=np.array([0.0, 0.0]),
        cylinder_radius=0.12,
        basket=np.array([0.0, -0.6, 0.2]),
    )
    return Scenario(
        variant="pickplace3d",
        geometry=geom,
        feature_weights=np.array(THETA_3D),
        start=np.array([-0.5, 0.0, 0.3]),
        targets=np.array(
            [[0.5, -0.35, 0.1], [0.55, 0.0, 0.1], [0.5, 0.35, 0.1]]
        ),
        basis=BasisConfig(m=7, n=3),
        phase_steps=20,
        completion_radius=0.1,
    )


def pole6d_preset() -> Scenario:
    """Published pole task: 100 m wall, 3 m wide, two 2 m windows."""
    workspace = Box(
        np.array([-46.0, -32.0, -55.0]), np.array([56.0, 22.0, 47.0])
    )
    geom = PoleGeometry(
        workspace=workspace,
        wall_center=np.array([5.0, 0.0, -4.0]),
        wall_half=np.array([50.0, 1.5, 50.0]),
        windows=(
            Window(np.array([2.0, -5.0]), 1.0),
            Window(np.array([8.0, -5.0]), 1.0),
        ),
        pole_length=2.0,
        pole_samples=32,
    )
    return Scenario(
        variant="pole6d",
        geometry=geom,
        feature_weights=np.array(THETA_6D),
        start=np.array([10.0, -30.0, -5.0, 0.0, 0.0, 0.0]),
        targets=np.array([[4.0, 20.0, -5.0, 0.0, 0.0, 0.0]]),
        basis=BasisConfig(m=7, n=6),
        phase_steps=50,  # ~1 m spacing; a 20-step grid tunnels through the wall
        completion_radius=4.0,
        planner=PlannerHints(
            var_cap=25.0,
            route_waypoints=(
                (2.0, 0.0, -5.0, 0.0, 0.0, 0.0),
                (8.0, 0.0, -5.0, 0.0, 0.0, 0.0),
            ),
        ),
    )


PRESETS = {
    "maze2d": maze2d_preset,
    "pickplace3d": pickplace3d_preset,
    "pole6d": pole6d_preset,
}


def _box_to_dict(b: Box) -> dict:
    return {"min": b.lo.tolist(), "max": b.hi.tolist()}


def _box_from_dict(d: dict) -> Box:
    return Box(np.asarray(d["min"]), np.asarray(d["max"]))


def scenario_to_dict(s: Scenario) -> dict:
    if s.variant == "maze2d":
        g = s.geometry
        geometry = {
            "workspace": _box_to_dict(g.workspace),
            "walls": [_box_to_dict(w) for w in g.walls],
        }
    elif s.variant == "pickplace3d":
        g = s.geometry
        geometry = {
            "workspace": _box_to_dict(g.workspace),
            "cylinder": {"center_xy": g.cylinder_center.tolist(), "radius": g.cylinder_radius},
            "basket": g.basket.tolist(),
        }
    else:
        g = s.geometry
        geometry = {
            "workspace": _box_to_dict(g.workspace),
            "wall_center": g.wall_center.tolist(),
            "wall_half_extents": g.wall_half.tolist(),
            "windows": [
                {"center_xz": w.center_xz.tolist(), "half_side": w.half_side} for w in g.windows
            ],
            "pole_length": g.pole_length,
            "pole_samples": g.pole_samples,
        }
    return {
        "variant": s.variant,
        "basis": {"m": s.basis.m, "n": s.basis.n, "h": s.basis.h},
        "phase_steps": s.phase_steps,
        "sigma_sq": s.sigma_sq,
        "feature_weights": s.feature_weights.tolist(),
        "start": s.start.tolist(),
        "targets": s.targets.tolist(),
        "completion_radius": s.completion_radius,
        "angle_weight": s.angle_weight,
        "planner": {
            "var_cap": s.planner.var_cap,
            "fan_scale": s.planner.fan_scale,
            "route_waypoints": [list(w) for w in s.planner.route_waypoints],
        },
        "geometry": geometry,
    }


def scenario_from_dict(doc: dict) -> Scenario:
    variant = doc["variant"]
    g = doc["geometry"]
    if variant == "maze2d":
        geometry: MazeGeometry | PickPlaceGeometry | PoleGeometry = MazeGeometry(
            _box_from_dict(g["workspace"]),
            tuple(_box_from_dict(w) for w in g["walls"]),
        )
    elif variant == "pickplace3d":
        geometry = PickPlaceGeometry(
            workspace=_box_from_dict(g["workspace"]),
            cylinder_center=np.asarray(g["cylinder"]["center_xy"]),
            cylinder_radius=float(g["cylinder"]["radius"]),
            basket=np.asarray(g["basket"]),
        )
    elif variant == "pole6d":
        geometry = PoleGeometry(
            workspace=_box_from_dict(g["workspace"]),
            wall_center=np.asarray(g["wall_center"]),
            wall_half=np.asarray(g["wall_half_extents"]),
            windows=tuple(
                Window(np.asarray(w["center_xz"]), float(w["half_side"])) for w in g["windows"]
            ),
            pole_length=float(g["pole_length"]),
            pole_samples=int(g.get("pole_samples", 32)),
        )
    else:
        raise DomainError(f"unknown variant {variant!r}")
    b = doc["basis"]
    hints = doc.get("planner", {})
    return Scenario(
        variant=variant,
        geometry=geometry,
        feature_weights=np.asarray(doc["feature_weights"]),
        start=np.asarray(doc["start"]),
        targets=np.asarray(doc["targets"]),
        basis=BasisConfig(m=int(b["m"]), n=int(b["n"]), h=float(b.get("h", 1.0))),
        phase_steps=int(doc.get("phase_steps", 20)),
        sigma_sq=float(doc.get("sigma_sq", 2.0)),
        completion_radius=float(doc.get("completion_radius", 0.5)),
        angle_weight=float(doc.get("angle_weight", 1.0)),
        planner=PlannerHints(
            var_cap=hints.get("var_cap"),
            fan_scale=float(hints.get("fan_scale", 0.0)),
            route_waypoints=tuple(tuple(w) for w in hints.get("route_waypoints", [])),
        ),
    )


def apply_edit(s: Scenario, edit: dict) -> Scenario:
    """Apply one environment edit; returns the modified scenario.

    Supported ops: move_target (any variant); add_wall / move_wall /
    remove_wall (maze2d); move_cylinder (pickplace3d); move_window (pole6d).
    """
    op = edit.get("op")
    if op == "move_target":
        targets = s.targets.copy()
        targets[int(edit.get("index", 0))] = np.asarray(edit["pose"], dtype=float)
        return dataclasses.replace(s, targets=targets)
    if s.variant == "maze2d":
        g = s.geometry
        walls = list(g.walls)
        if op == "add_wall":
            walls.append(Box(np.asarray(edit["min"]), np.asarray(edit["max"])))
        elif op == "move_wall":
            walls[int(edit["index"])] = Box(np.asarray(edit["min"]), np.asarray(edit["max"]))
        elif op == "remove_wall":
            walls.pop(int(edit["index"]))
        else:
            raise DomainError(f"unknown maze edit {op!r}")
        if not walls:
            raise DomainError("maze needs at least one wall block")
        return dataclasses.replace(s, geometry=dataclasses.replace(g, walls=tuple(walls)))
    if s.variant == "pickplace3d" and op == "move_cylinder":
        g = dataclasses.replace(s.geometry, cylinder_center=np.asarray(edit["center_xy"]))
        return dataclasses.replace(s, geometry=g)
    if s.variant == "pole6d" and op == "move_window":
        g = s.geometry
        windows = list(g.windows)
        idx = int(edit["index"])
        windows[idx] = Window(np.asarray(edit["center_xz"]), windows[idx].half_side)
        return dataclasses.replace(s, geometry=dataclasses.replace(g, windows=tuple(windows)))
    raise DomainError(f"unknown edit {op!r} for variant {s.variant}")


def save_scenario(s: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(s), indent=2) + "\n")


def load_scenario(path: str | Path) -> Scenario:
    return scenario_from_dict(json.loads(Path(path).read_text()))
