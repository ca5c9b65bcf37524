"""Scripted operators and episode simulation.

The operator is a unit point mass driven by a PD controller toward a moving
desired pose (its intent), plus the guidance wrench in guided modes.  The
scripts stand in for the human operators of the original studies:

* PlanFollower - tracks one guide's mean trajectory with correlated noise.
* Defector     - follows a guide, then breaks away toward another pose.
* PassiveMass  - no intent at all; only the guidance field acts.
* Wanderer     - random-walk intent.

Episodes are deterministic given (scenario, mixture, script, mode, seed):
the same stream of observations, noise and replan results reproduces the
same metrics bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .promp import Array, DomainError, GuideMixture, basis_matrix
from .scenarios import Scenario, signed_distance
from .session import GuidanceFrame, Session, SessionConfig, preset_session_config

MODES = ("guided", "guided-no-replan", "unguided")


@dataclass(frozen=True)
class PlanFollower:
    """Track plan ``plan``'s mean with sloppy aim of scale ``noise``.

    The sloppiness has two parts, both scaled by ``noise``: a per-episode
    constant aim bias (misjudged route) and correlated tremor around it.
    """

    plan: int = 0
    noise: float = 0.0
    speed: float = 0.05  # phase units per second

    def __post_init__(self) -> None:
        if self.noise < 0:
            raise DomainError("noise must be >= 0")


@dataclass(frozen=True)
class Defector(PlanFollower):
    """Follow a plan, then veer toward ``alternate_target`` after ``defect_phase``."""

    defect_phase: float = 0.5
    alternate_target: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        super().__post_init__()
        if not 0.0 < self.defect_phase < 1.0:
            raise DomainError("defect_phase must lie in (0, 1)")


@dataclass(frozen=True)
class PassiveMass:
    """No intent force; the mass only feels guidance and damping."""

    initial_pose: tuple[float, ...] = ()


@dataclass(frozen=True)
class Wanderer:
    """Random-walk intent with per-step scale ``step_sigma``."""

    step_sigma: float = 0.1


@dataclass
class EpisodeMetrics:
    collisions: int
    completion_time: float  # seconds; inf on timeout
    mode: str
    seed: int
    path: Array = field(repr=False, default=None)

    @property
    def completed(self) -> bool:
        return math.isfinite(self.completion_time)


class _OrnsteinUhlenbeck:
    """Correlated noise with stationary standard deviation ``sigma``."""

    def __init__(self, dim: int, sigma: float, tau: float, dt: float, rng):
        self.state = np.zeros(dim)
        self.sigma = sigma
        self.decay = dt / tau
        self.kick = sigma * math.sqrt(2.0 * dt / tau)
        self.rng = rng

    def step(self) -> Array:
        self.state += -self.decay * self.state + self.kick * self.rng.standard_normal(
            self.state.size
        )
        return self.state


class _Intent:
    """Desired-pose schedule for one script bound to a scenario and mixture."""

    def __init__(self, script, scenario: Scenario, mixture: GuideMixture, dt: float, rng):
        self.script = script
        self.scenario = scenario
        self.dt = dt
        self.rng = rng
        self.noise = None
        self.bias = np.zeros(scenario.n)
        if isinstance(script, (PlanFollower, Defector)):
            comp = mixture.components[script.plan]
            phi = basis_matrix(scenario.grid().values, comp.basis)
            self.mean_traj = phi @ comp.mean_w.reshape(comp.basis.n, comp.basis.m).T
            if script.noise > 0:
                self.bias = script.noise * rng.standard_normal(scenario.n)
                self.noise = _OrnsteinUhlenbeck(scenario.n, script.noise, 0.5, dt, rng)
        elif isinstance(script, Wanderer):
            self.walk = scenario.start.copy()

    def initial_pose(self) -> Array:
        if isinstance(self.script, PassiveMass) and self.script.initial_pose:
            return np.asarray(self.script.initial_pose, dtype=float)
        return self.scenario.start.copy()

    def desired_pose(self, t: float) -> Array | None:
        s = self.script
        if isinstance(s, Defector) and s.speed * t >= s.defect_phase:
            wp = np.asarray(s.alternate_target, dtype=float)
        elif isinstance(s, (PlanFollower, Defector)):
            phase = min(s.speed * t, 1.0)
            grid = self.scenario.grid().values
            lo = min(int(phase * (grid.size - 1)), grid.size - 1)
            hi = min(lo + 1, grid.size - 1)
            frac = phase * (grid.size - 1) - lo
            wp = (1.0 - frac) * self.mean_traj[lo] + frac * self.mean_traj[hi]
        elif isinstance(s, Wanderer):
            self.walk = self.walk + s.step_sigma * math.sqrt(self.dt) * self.rng.standard_normal(
                self.scenario.n
            )
            wp = self.walk
        else:  # PassiveMass
            return None
        if self.noise is not None:
            wp = wp + self.bias + self.noise.step()
        return wp


@dataclass(frozen=True)
class OperatorGains:
    """PD gains of the unit-mass operator model."""

    k_p: float = 25.0
    k_d: float = 10.0


def run_episode(
    scenario: Scenario,
    mixture: GuideMixture,
    script,
    mode: str,
    seed: int,
    *,
    session_config: SessionConfig | None = None,
    gains: OperatorGains = OperatorGains(),
    timeout: float = 60.0,
    record_frames: bool = False,
) -> tuple[EpisodeMetrics, list[GuidanceFrame]]:
    """Simulate one episode at the control rate until completion or timeout."""
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
    cfg = session_config if session_config is not None else preset_session_config(scenario)
    if mode != "guided":
        cfg = _without_replanning(cfg)
    rng = np.random.default_rng(seed)
    dt = 1.0 / cfg.guidance.control_rate
    session = Session(scenario, mixture, cfg) if mode != "unguided" else None

    intent = _Intent(script, scenario, mixture, dt, rng)
    x = intent.initial_pose()
    v = np.zeros(scenario.n)
    n_pos = scenario.n_position
    targets = scenario.targets[:, :n_pos]

    collisions = 0
    penetrating = signed_distance(scenario, x) < 0
    completion = math.inf
    frames: list[GuidanceFrame] = []
    path = [x.copy()]
    max_ticks = int(timeout / dt)

    for tick in range(max_ticks):
        t = tick * dt
        force = np.zeros(scenario.n)
        wp = intent.desired_pose(t)
        if wp is not None:
            force += gains.k_p * (wp - x) - gains.k_d * v
        if session is not None:
            frame = session.step(x, v)
            if record_frames:
                frames.append(frame)
            force += frame.wrench

        v = v + dt * force
        x = x + dt * v
        path.append(x.copy())

        live_scenario = session.scenario if session is not None else scenario
        d = signed_distance(live_scenario, x)
        if d < 0 and not penetrating:
            collisions += 1
            penetrating = True
        elif d >= 0:
            penetrating = False

        if np.min(np.linalg.norm(targets - x[None, :n_pos], axis=1)) < scenario.completion_radius:
            completion = (tick + 1) * dt
            break

    metrics = EpisodeMetrics(
        collisions=collisions,
        completion_time=completion,
        mode=mode,
        seed=seed,
        path=np.stack(path),
    )
    return metrics, frames


def _without_replanning(cfg: SessionConfig) -> SessionConfig:
    """Disable the defection trigger only (environment edits still replan)."""
    import dataclasses

    return dataclasses.replace(cfg, defect_trigger_enabled=False)
