"""The control-rate guidance loop: belief update, field, wrench, replanning.

One session owns one mixture, one belief state and one scenario.  Every tick
consumes an observed pose and velocity and produces a guidance frame:

1. transition the plan belief, 2. transition each plan's phase belief,
3. evaluate emission likelihoods at the observation, 4. compute the phase
and plan posteriors, 5. shift the posterior one step ahead (the cue belief),
6. assemble the pose field from the cue beliefs, 7. damp and cap the wrench.

Replanning triggers when the freelance belief crosses one half (the
operator escaped every guide) or after an environment edit.  The replan job
runs through a pluggable executor: the synchronous one computes in place
and hands the result back after a fixed tick latency, keeping batch
simulations deterministic; the threaded one suits interactive serving.
Integration always happens inside a tick: new guides enter with negligible
weight on operator defection, while environment edits replace the old
guides outright.
"""

from __future__ import annotations

from concurrent.futures import Executor, Future
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .field import (
    GuidanceParams,
    PlanMoments,
    field_from_moments,
    log_density_and_grad,
    mixture_pose_moments,
    responsibilities,
    field_geometry,
)
from .intent import BeliefState, FilterParams, filter_step
from .learner import LearnerConfig, LearnerError, learn_mixture, seed_weights
from .promp import Array, DomainError, GuideMixture, ProMP
from .scenarios import Scenario, apply_edit, episodic_reward

REPLAN_DEFECT = "defect"
REPLAN_ENV = "env"


@dataclass(frozen=True)
class SessionConfig:
    """Filter, guidance and replanning parameters of one session."""

    filter_params: FilterParams = FilterParams()
    guidance: GuidanceParams = GuidanceParams()
    integrate_epsilon: float = 1e-3
    replan_enabled: bool = True
    defect_trigger_enabled: bool = True
    replan_cooldown_ticks: int = 100
    replan_latency_ticks: int = 1
    replan_components: int = 2
    replan_iterations: int = 60
    top_k: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.integrate_epsilon < 1.0:
            raise DomainError("integrate_epsilon must lie in (0, 1)")


def preset_session_config(scenario: Scenario, **overrides) -> SessionConfig:
    """Per-task presets: Delta-nu 0 for pick-and-place, 0.5 for the others.

    The maze runs a smaller emission scale: in a 10 m workspace with half
    meter tubes, the default inflation would keep guide emissions above the
    freelance density everywhere, so defection could never be detected.
    """
    delta_nu = 0.0 if scenario.variant == "pickplace3d" else 0.5
    tau_max = {"maze2d": 20.0, "pickplace3d": 30.0, "pole6d": 20.0}[scenario.variant]
    kappa = 8.0 if scenario.variant == "maze2d" else 25.0
    defaults = dict(
        filter_params=FilterParams(
            p_progress=0.8, delta_nu=delta_nu, p_switch=1e-20, emission_scale=kappa
        ),
        guidance=GuidanceParams(k_damp=2.0, tau_max=tau_max, control_rate=100.0),
    )
    defaults.update(overrides)
    return SessionConfig(**defaults)


@dataclass
class GuidanceFrame:
    """Per-tick output of the guidance loop."""

    tick: int
    wrench: Array
    energy: float | None
    plan_belief: Array
    phase_beliefs: list[Array]
    responsibilities: list[tuple[int, int, float]]
    guides_version: int
    guides: list[dict] | None
    events: list[dict]

    def to_dict(self) -> dict:
        return {
            "tick": self.tick,
            "wrench": self.wrench.tolist(),
            "energy": self.energy,
            "plan_belief": self.plan_belief.tolist(),
            "phase_beliefs": [p.tolist() for p in self.phase_beliefs],
            "responsibilities": [
                {"plan": int(p), "phase": int(i), "value": float(v)}
                for p, i, v in self.responsibilities
            ],
            "guides_version": self.guides_version,
            "guides": self.guides,
            "events": self.events,
        }


class SyncReplanner:
    """Runs replan jobs inline; deterministic for batch simulation."""

    def __init__(self) -> None:
        self._result = None

    def submit(self, job: Callable[[], object]) -> None:
        try:
            self._result = ("ok", job())
        except LearnerError as exc:
            self._result = ("error", str(exc))

    def poll(self):
        out, self._result = self._result, None
        return out


class ThreadReplanner:
    """Runs replan jobs on an executor; suits live interactive sessions."""

    def __init__(self, executor: Executor) -> None:
        self._executor = executor
        self._future: Future | None = None

    def submit(self, job: Callable[[], object]) -> None:
        self._future = self._executor.submit(job)

    def poll(self):
        if self._future is None or not self._future.done():
            return None
        future, self._future = self._future, None
        try:
            return ("ok", future.result())
        except LearnerError as exc:
            return ("error", str(exc))


class Session:
    """Owner of one guidance loop; not safe for concurrent stepping."""

    def __init__(
        self,
        scenario: Scenario,
        mixture: GuideMixture,
        config: SessionConfig | None = None,
        replanner=None,
    ) -> None:
        if mixture.freelance is None:
            raise DomainError("guidance sessions need the freelance component")
        self.scenario = scenario
        self.config = config if config is not None else preset_session_config(scenario)
        self.mixture = mixture
        self.grid = scenario.grid()
        self.moments: PlanMoments = mixture_pose_moments(mixture, self.grid)
        self.beliefs = BeliefState.initial(mixture.weights(), self.moments.phase_counts())
        self.tick = 0
        self.guides_version = 0
        self.replan_status = "idle"  # idle | pending
        self.event_log: list[dict] = []
        self._replanner = replanner if replanner is not None else SyncReplanner()
        self._pending_trigger: str | None = None
        self._result_ready_tick = -1
        self._pending_result = None
        self._env_flag = False
        self._last_replan_tick = -(10**9)

    # -- public controls ---------------------------------------------------

    def apply_env_edit(self, edit: dict) -> None:
        """Update the scenario and arm the environment replan trigger."""
        self.scenario = apply_edit(self.scenario, edit)
        self._env_flag = True
        self._log("env_edit", op=str(edit.get("op")))

    def check_replan(self) -> str | None:
        """Pending trigger, if any: environment edits outrank defection."""
        if self._env_flag:
            return REPLAN_ENV
        freelance = float(self.beliefs.plan_belief[-1])
        if freelance > 0.5:
            return REPLAN_DEFECT
        return None

    def guide_geometry(self) -> list[dict]:
        return field_geometry(self.moments, self.beliefs.plan_belief)

    # -- the tick ----------------------------------------------------------

    def step(self, observed_pose: Array, observed_velocity: Array) -> GuidanceFrame:
        events: list[dict] = []
        x = np.asarray(observed_pose, dtype=float)
        v = np.asarray(observed_velocity, dtype=float)
        if x.shape != (self.scenario.n,) or not (
            np.all(np.isfinite(x)) and np.all(np.isfinite(v))
        ):
            events.append(self._log("invalid_observation"))
            frame = self._frame(np.zeros(self.scenario.n), None, events, guides=None)
            self.tick += 1
            return frame

        integrated = self._integrate_if_ready(events)

        out = filter_step(
            self.beliefs,
            self.moments,
            x,
            self.config.filter_params,
            self.mixture.weights(),
        )
        self.beliefs = out.state
        for plan in out.phase_resets:
            events.append(self._log("phase_belief_reset", plan=plan))
        if out.plan_reset:
            events.append(self._log("plan_belief_reset"))

        self._maybe_launch_replan(x, events)

        g_field = field_from_moments(self.moments, self.beliefs.plan_belief, out.cue_beliefs)
        log_p, grad = log_density_and_grad(g_field, x)
        tau = grad - self.config.guidance.k_damp * v
        norm = float(np.linalg.norm(tau))
        if norm > self.config.guidance.tau_max:
            tau *= self.config.guidance.tau_max / norm

        resp = responsibilities(g_field, x)
        top = np.argsort(resp)[::-1][: self.config.top_k]
        top_list = [
            (int(g_field.plan_index[k]), int(g_field.phase_index[k]), float(resp[k])) for k in top
        ]
        frame = self._frame(
            tau,
            -log_p,
            events,
            guides=self.guide_geometry() if (integrated or self.tick == 0) else None,
        )
        frame.responsibilities = top_list
        self.tick += 1
        return frame

    # -- replanning --------------------------------------------------------

    def replan(self, anchor_pose: Array) -> GuideMixture:
        """Learn fresh guides from the anchor pose to the scenario targets."""
        scenario = self.scenario.with_start(np.asarray(anchor_pose, dtype=float))
        var_cap = scenario.planner.var_cap
        if var_cap is None:
            var_cap = scenario.workspace.diameter ** 2
        cfg = LearnerConfig(
            n_components=self.config.replan_components,
            var_cap=var_cap,
            samples_per_component=max(64, 2 * scenario.basis.dim + 1),
            max_iterations=self.config.replan_iterations,
            seed=self.config.seed + self.tick,
            init_means=seed_weights(scenario, self.config.replan_components),
        )
        mixture, _ = learn_mixture(lambda w: episodic_reward(scenario, w), cfg, scenario.basis)
        return mixture

    def integrate_new_plans(
        self, new: GuideMixture | list[ProMP], trigger: str, epsilon: float | None = None
    ) -> None:
        """Fold freshly learned guides into the mixture and beliefs.

        Defection keeps the old guides and appends the new ones with
        negligible weight; an environment change replaces the old guides
        (they are invalid) while the freelance plan keeps its share.
        """
        eps = self.config.integrate_epsilon if epsilon is None else epsilon
        if isinstance(new, GuideMixture):
            new_comps = list(new.components)
            new_weights = np.exp(new.log_weights[: len(new_comps)])
        else:
            new_comps = list(new)
            new_weights = np.full(len(new_comps), 1.0 / max(len(new_comps), 1))
        if not new_comps:
            self._log("integrate_noop", trigger=trigger)
            return

        old_w = self.mixture.weights()
        belief = self.beliefs.plan_belief
        if trigger == REPLAN_DEFECT:
            comps = list(self.mixture.components) + new_comps
            k = len(new_comps)
            weights = np.concatenate([old_w[:-1], np.full(k, eps), old_w[-1:]])
            plan_belief = np.concatenate([belief[:-1], np.full(k, eps), belief[-1:]])
        elif trigger == REPLAN_ENV:
            comps = new_comps
            w_free = float(old_w[-1])
            b_free = float(belief[-1])
            share = new_weights / new_weights.sum()
            weights = np.concatenate([(1.0 - w_free) * share, [w_free]])
            plan_belief = np.concatenate([(1.0 - b_free) * share, [b_free]])
        else:
            raise DomainError(f"unknown replan trigger {trigger!r}")

        weights /= weights.sum()
        plan_belief /= plan_belief.sum()
        self.mixture = GuideMixture(tuple(comps), np.log(weights), self.mixture.freelance)
        self.moments = mixture_pose_moments(self.mixture, self.grid)
        counts = self.moments.phase_counts()
        old_phase = {i: pb for i, pb in enumerate(self.beliefs.phase_beliefs[:-1])}
        phase_beliefs = []
        for p in range(len(comps)):
            if trigger == REPLAN_DEFECT and p < len(old_phase):
                phase_beliefs.append(old_phase[p])
            else:
                phase_beliefs.append(np.full(counts[p], 1.0 / counts[p]))
        phase_beliefs.append(np.ones(1))
        self.beliefs = BeliefState(plan_belief, phase_beliefs)
        self.guides_version += 1
        self._log("integrate", trigger=trigger, added=len(new_comps))

    def _maybe_launch_replan(self, x: Array, events: list[dict]) -> None:
        if not self.config.replan_enabled or self.replan_status != "idle":
            return
        trigger = self.check_replan()
        if trigger is None:
            return
        if trigger == REPLAN_DEFECT:
            # The cooldown only gates defection: it breaks trigger loops while
            # the freelance belief hovers past the threshold.  Environment
            # edits are explicit and replan as soon as the worker is free.
            if not self.config.defect_trigger_enabled:
                return
            if self.tick - self._last_replan_tick < self.config.replan_cooldown_ticks:
                return
        if trigger == REPLAN_ENV:
            self._env_flag = False
        self.replan_status = "pending"
        self._pending_trigger = trigger
        self._result_ready_tick = self.tick + self.config.replan_latency_ticks
        anchor = x.copy()
        events.append(self._log("replan_started", trigger=trigger))
        self._replanner.submit(lambda: self.replan(anchor))

    def _integrate_if_ready(self, events: list[dict]) -> bool:
        if self.replan_status != "pending" or self.tick < self._result_ready_tick:
            return False
        if self._pending_result is None:
            self._pending_result = self._replanner.poll()
            if self._pending_result is None:
                return False  # threaded job still running
        status, payload = self._pending_result
        self._pending_result = None
        self.replan_status = "idle"
        self._last_replan_tick = self.tick
        trigger, self._pending_trigger = self._pending_trigger, None
        if status == "error":
            events.append(self._log("replan_failed", error=payload))
            return False
        self.integrate_new_plans(payload, trigger)
        events.append(self.event_log[-1])
        return True

    # -- helpers -------------------------------------------------------------

    def _frame(
        self, wrench: Array, energy: float | None, events: list[dict], guides
    ) -> GuidanceFrame:
        return GuidanceFrame(
            tick=self.tick,
            wrench=wrench,
            energy=energy,
            plan_belief=self.beliefs.plan_belief.copy(),
            phase_beliefs=[p.copy() for p in self.beliefs.phase_beliefs],
            responsibilities=[],
            guides_version=self.guides_version,
            guides=guides,
            events=events,
        )

    def _log(self, kind: str, **details) -> dict:
        event = {"tick": self.tick, "kind": kind, **details}
        self.event_log.append(event)
        return event
