"""Mixture-of-guides learning by variational inference on the reward.

The target is the (unnormalized) reward distribution exp(r(w)); minimizing
the reverse KL divergence of a weight-space GMM against it is the same
problem as maximizing expected episodic reward plus mixture entropy, since
the partition constant drops out of the argmax.

The scheme per iteration, per component:

1. draw fresh samples from the component, evaluate the reward (non-finite
   rewards are rejected and redrawn),
2. fit a diagonal quadratic surrogate of reward-plus-log-responsibility by
   ridge regression around the component mean,
3. move the component toward the surrogate's induced Gaussian along the
   natural-parameter path, stopping at a KL trust region,
4. update the mixture weights by a tempered softmax on per-component
   evidence (expected reward + entropy - responsibility overlap penalty).

Everything is driven by one seeded generator, so a fixed seed reproduces
the run bit for bit.  Diagonal covariances only, clamped to a configured
band; the variance cap is what keeps the entropy objective bounded.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .promp import (
    Array,
    BasisConfig,
    DomainError,
    GuideMixture,
    ProMP,
    attach_freelance,
    basis_matrix,
    make_freelance,
)
from .scenarios import Scenario, episodic_reward

LOG_2PI = math.log(2.0 * math.pi)
WEIGHT_FLOOR = 1e-8


class LearnerError(RuntimeError):
    """The learner could not make progress (e.g. no finite rewards)."""


RewardFn = Callable[[Array], float]


@dataclass(frozen=True)
class LearnerConfig:
    """Knobs of the mixture learner; ``var_cap`` is mandatory.

    ``init_means`` (one row per component) seeds the component means; rows
    are jittered by the initial standard deviation.  Without seeds the
    components start around the origin.
    """

    n_components: int
    var_cap: float
    samples_per_component: int = 64
    max_iterations: int = 120
    kl_trust_region: float = 0.25
    ridge: float = 1e-6
    var_floor: float = 1e-6
    weight_temperature: float = 0.01
    seed: int = 0
    init_means: Array | None = None
    init_var_scale: float = 0.1
    entropy_samples: int = 256

    def __post_init__(self) -> None:
        if self.n_components < 1:
            raise DomainError("n_components must be >= 1")
        if self.var_cap is None or self.var_cap <= 0:
            raise DomainError("var_cap must be set and > 0 (it bounds the entropy objective)")
        if self.var_floor <= 0 or self.var_cap <= self.var_floor:
            raise DomainError("need 0 < var_floor < var_cap")
        if self.kl_trust_region < 0:
            raise DomainError("kl_trust_region must be >= 0")
        if not 0.0 < self.init_var_scale <= 1.0:
            raise DomainError("init_var_scale must lie in (0, 1]")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    component: int
    expected_reward: float
    entropy: float
    weight: float
    kl_step: float


@dataclass
class LearnerReport:
    """One record per (iteration, component); exports the run as CSV."""

    rows: list[IterationRecord] = dataclasses.field(default_factory=list)

    def iterations(self) -> int:
        return 0 if not self.rows else self.rows[-1].iteration + 1

    def objective_trace(self) -> Array:
        """Per-iteration weighted expected reward plus mixture entropy."""
        out = np.zeros(self.iterations())
        for it in range(self.iterations()):
            recs = [r for r in self.rows if r.iteration == it]
            out[it] = sum(r.weight * r.expected_reward for r in recs) + recs[0].entropy
        return out

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "component", "expected_reward", "entropy", "weight"])
            for r in self.rows:
                writer.writerow([r.iteration, r.component, r.expected_reward, r.entropy, r.weight])


# ---------------------------------------------------------------------------
# Diagonal-Gaussian helpers


def diag_logpdf(w: Array, mean: Array, var: Array) -> Array:
    """Log density of rows of w under N(mean, diag(var))."""
    d = np.atleast_2d(w) - mean[None, :]
    out = -0.5 * np.sum(d * d / var + np.log(var) + LOG_2PI, axis=1)
    return out if np.asarray(w).ndim > 1 else out[0]


def mixture_logpdf(w: Array, means: Array, variances: Array, log_weights: Array) -> Array:
    """Log density of rows of w under the diagonal GMM, stabilized."""
    w2 = np.atleast_2d(w)
    logs = np.stack(
        [log_weights[o] + diag_logpdf(w2, means[o], variances[o]) for o in range(means.shape[0])],
        axis=1,
    )
    top = logs.max(axis=1)
    out = top + np.log(np.sum(np.exp(logs - top[:, None]), axis=1))
    return out if np.asarray(w).ndim > 1 else out[0]


def diag_kl(mean_a: Array, var_a: Array, mean_b: Array, var_b: Array) -> float:
    """KL( N(mean_a, var_a) || N(mean_b, var_b) ) for diagonal Gaussians."""
    return 0.5 * float(
        np.sum(var_a / var_b + (mean_a - mean_b) ** 2 / var_b - 1.0 + np.log(var_b / var_a))
    )


def diag_entropy(var: Array) -> float:
    return 0.5 * float(np.sum(np.log(2.0 * math.pi * math.e * var)))


# ---------------------------------------------------------------------------
# Spec operations


def component_update(
    component: ProMP,
    samples: Array,
    rewards: Array,
    log_responsibilities: Array,
    kl_bound: float,
    *,
    ridge: float = 1e-6,
    var_floor: float = 1e-6,
    var_cap: float,
) -> tuple[ProMP, float, bool]:
    """Trust-region update of one component from its own reward samples.

    Fits ``reward + log responsibility`` with a diagonal quadratic around the
    current mean and moves toward the induced Gaussian along the
    natural-parameter path until KL(new || old) hits the bound.  A surrogate
    that comes out locally convex falls back to a reward-weighted
    mean/variance target under the same bound.  Returns the new component,
    the KL actually used, and whether the fallback fired.
    """
    w = np.atleast_2d(np.asarray(samples, dtype=float))
    y = np.asarray(rewards, dtype=float) + np.asarray(log_responsibilities, dtype=float)
    d = component.basis.dim
    if w.shape[0] < 2 * d + 1:
        raise DomainError(f"need at least {2 * d + 1} samples, got {w.shape[0]}")
    if not np.all(np.isfinite(y)):
        raise DomainError("rewards and responsibilities must be finite")
    mean_old = component.mean_w
    var_old = component.var_w
    if kl_bound == 0.0:
        return component, 0.0, False

    # Standardized local coordinates keep the regression's conditioning
    # independent of the component's current spread.
    std_old = np.sqrt(var_old)
    z = (w - mean_old[None, :]) / std_old[None, :]
    design = np.concatenate([np.ones((w.shape[0], 1)), z, z * z], axis=1)
    gram = design.T @ design
    reg = ridge * w.shape[0] * np.eye(2 * d + 1)
    reg[0, 0] = 0.0  # free intercept
    coef = np.linalg.solve(gram + reg, design.T @ y)
    lin = coef[1 : d + 1] / std_old
    curv = -2.0 * coef[d + 1 :] / var_old

    # Directions with no measurable concavity (noise-level or negative
    # curvature) are treated as flat: the cap precision is their floor, which
    # is where the entropy term pushes a flat direction anyway.  The fallback
    # is reserved for a fit that is convex in every direction at once.
    fallback = bool(np.all(curv < 0.0)) or not np.all(np.isfinite(coef))
    if fallback:
        # Degenerate surrogate: take reward-weighted sample moments instead.
        shifted = y - y.max()
        scale = float(y.std())
        u = np.exp(shifted / scale) if scale > 0 else np.ones_like(y)
        u /= u.sum()
        mean_t = u @ w
        var_t = u @ (w - mean_t[None, :]) ** 2
        var_t = np.clip(var_t, var_floor, var_cap)
    else:
        prec_t = np.maximum(curv, 1.0 / var_cap)
        var_t = 1.0 / prec_t
        mean_t = mean_old + var_t * lin

    mean_new, var_new, kl_used = _trust_region_step(
        mean_old, var_old, mean_t, var_t, kl_bound
    )
    var_new = np.clip(var_new, var_floor, var_cap)
    return ProMP(component.basis, mean_new, var_new), kl_used, fallback


def _trust_region_step(
    mean_old: Array, var_old: Array, mean_t: Array, var_t: Array, kl_bound: float
) -> tuple[Array, Array, float]:
    """Largest step along the natural-parameter path with KL(new||old) <= bound."""
    prec_old = 1.0 / var_old
    prec_t = 1.0 / var_t
    h_old = prec_old * mean_old
    h_t = prec_t * mean_t

    def at(eta: float) -> tuple[Array, Array]:
        prec = (1.0 - eta) * prec_old + eta * prec_t
        var = 1.0 / prec
        return ((1.0 - eta) * h_old + eta * h_t) * var, var

    mean_full, var_full = at(1.0)
    kl_full = diag_kl(mean_full, var_full, mean_old, var_old)
    if kl_full <= kl_bound:
        return mean_full, var_full, kl_full
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        m, v = at(mid)
        if diag_kl(m, v, mean_old, var_old) <= kl_bound:
            lo = mid
        else:
            hi = mid
    m, v = at(lo)
    return m, v, diag_kl(m, v, mean_old, var_old)


def weight_update(per_component_evidence: Array, temperature: float) -> Array:
    """Tempered softmax of per-component evidence; returns normalized log weights.

    Stateless fixed-point form: at zero temperature the weights are the
    uniform prior, and equal evidence always yields equal weights.  Evidence
    is max-shifted (a constant offset cannot change the result) and the
    output is floored so that no component is starved to exactly zero.
    """
    ev = np.asarray(per_component_evidence, dtype=float)
    if not np.all(np.isfinite(ev)):
        raise DomainError("evidence must be finite")
    lw = temperature * (ev - ev.max())
    w = np.exp(lw - lw.max())
    w = np.maximum(w / w.sum(), WEIGHT_FLOOR)
    w /= w.sum()
    return np.log(w)


def entropy_estimate(mixture: GuideMixture, n_samples: int, rng: np.random.Generator) -> float:
    """Monte-Carlo entropy of the weight-space mixture (guides only)."""
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")
    n = mixture.n_components
    if n == 0:
        raise DomainError("mixture has no guide components")
    means = np.stack([c.mean_w for c in mixture.components])
    variances = np.stack([c.var_w for c in mixture.components])
    lw = mixture.log_weights[:n]
    lw = lw - _logsumexp(lw)
    probs = np.exp(lw)
    idx = rng.choice(n, size=n_samples, p=probs)
    w = means[idx] + np.sqrt(variances[idx]) * rng.standard_normal((n_samples, means.shape[1]))
    return float(-np.mean(mixture_logpdf(w, means, variances, lw)))


def _logsumexp(a: Array) -> float:
    top = float(np.max(a))
    return top + float(np.log(np.sum(np.exp(a - top))))


# ---------------------------------------------------------------------------
# The learning loop


def learn_mixture(
    reward: RewardFn, cfg: LearnerConfig, basis: BasisConfig
) -> tuple[GuideMixture, LearnerReport]:
    """Learn a mixture of guides maximizing expected reward plus entropy."""
    d = basis.dim
    if cfg.samples_per_component < 2 * d + 1:
        raise DomainError(
            f"samples_per_component must be >= 2*dim+1 = {2 * d + 1}, "
            f"got {cfg.samples_per_component}"
        )
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_components
    init_var = np.clip(cfg.init_var_scale * cfg.var_cap, cfg.var_floor, cfg.var_cap)
    if cfg.init_means is not None:
        base = np.atleast_2d(np.asarray(cfg.init_means, dtype=float))
        if base.shape != (n, d):
            raise DomainError(f"init_means must have shape ({n}, {d}), got {base.shape}")
    else:
        base = np.zeros((n, d))
    means = base + math.sqrt(init_var) * rng.standard_normal((n, d))
    variances = np.full((n, d), init_var)
    log_w = np.full(n, -math.log(n))
    report = LearnerReport()

    for it in range(cfg.max_iterations):
        batches = [
            _sample_finite_rewards(
                rng, means[o], variances[o], cfg.samples_per_component, reward
            )
            for o in range(n)
        ]
        log_resp = [
            log_w[o]
            + diag_logpdf(batches[o][0], means[o], variances[o])
            - mixture_logpdf(batches[o][0], means, variances, log_w)
            for o in range(n)
        ]

        new_means = np.empty_like(means)
        new_vars = np.empty_like(variances)
        kls = np.empty(n)
        evidence = np.empty(n)
        expected_rewards = np.empty(n)
        for o in range(n):
            w_o, r_o = batches[o]
            comp = ProMP(basis, means[o], variances[o])
            updated, kls[o], _ = component_update(
                comp,
                w_o,
                r_o,
                log_resp[o],
                cfg.kl_trust_region,
                ridge=cfg.ridge,
                var_floor=cfg.var_floor,
                var_cap=cfg.var_cap,
            )
            new_means[o] = updated.mean_w
            new_vars[o] = updated.var_w
            expected_rewards[o] = r_o.mean()
            evidence[o] = r_o.mean() + diag_entropy(new_vars[o]) + log_resp[o].mean()

        log_w = weight_update(evidence, cfg.weight_temperature)
        means, variances = new_means, new_vars

        snapshot = GuideMixture(
            tuple(ProMP(basis, means[o], variances[o]) for o in range(n)), log_w
        )
        h = entropy_estimate(snapshot, cfg.entropy_samples, rng)
        weights = np.exp(log_w)
        for o in range(n):
            report.rows.append(
                IterationRecord(it, o, float(expected_rewards[o]), h, float(weights[o]), float(kls[o]))
            )

    mixture = GuideMixture(tuple(ProMP(basis, means[o], variances[o]) for o in range(n)), log_w)
    return mixture, report


def _sample_finite_rewards(
    rng: np.random.Generator,
    mean: Array,
    var: Array,
    count: int,
    reward: RewardFn,
    max_rounds: int = 20,
) -> tuple[Array, Array]:
    """Draw ``count`` samples with finite rewards, redrawing rejected ones."""
    d = mean.size
    std = np.sqrt(var)
    taken_w: list[Array] = []
    taken_r: list[float] = []
    for _ in range(max_rounds):
        need = count - len(taken_r)
        if need == 0:
            break
        cand = mean[None, :] + std[None, :] * rng.standard_normal((need, d))
        vals = np.array([reward(w) for w in cand], dtype=float)
        ok = np.isfinite(vals)
        taken_w.extend(cand[ok])
        taken_r.extend(vals[ok])
    if len(taken_r) < count:
        raise LearnerError(
            f"reward returned non-finite values for almost every sample "
            f"({len(taken_r)}/{count} usable)"
        )
    return np.stack(taken_w), np.asarray(taken_r)


# ---------------------------------------------------------------------------
# Scenario-level planning


def fit_path_weights(scenario: Scenario, path: Array) -> Array:
    """Least-squares fit of a (T, n) path onto the scenario's basis."""
    cfg = scenario.basis
    phi = basis_matrix(scenario.grid().values, cfg)  # (T, m)
    gram = phi.T @ phi + 1e-9 * np.eye(cfg.m)
    w_mat = np.linalg.solve(gram, phi.T @ np.asarray(path, dtype=float))  # (m, n)
    return w_mat.T.reshape(-1)


def straight_line_weights(scenario: Scenario, targets: Array | None = None) -> Array:
    """Fit of the start-to-target line onto the basis, one row per target."""
    grid = scenario.grid()
    tgts = np.atleast_2d(scenario.targets if targets is None else targets)
    rows = []
    for target in tgts:
        line = scenario.start[None, :] + grid.values[:, None] * (target - scenario.start)[None, :]
        rows.append(fit_path_weights(scenario, line))
    return np.stack(rows)


def _fan_direction(scenario: Scenario) -> Array:
    """Workspace axis (position dims) most orthogonal to the travel direction."""
    ws = scenario.workspace
    n_pos = scenario.n_position
    travel = (scenario.targets[0] - scenario.start)[:n_pos]
    norm = np.linalg.norm(travel)
    u = travel / norm if norm > 0 else np.zeros(n_pos)
    extent = (ws.hi - ws.lo)[:n_pos]
    k = int(np.argmax(extent * (1.0 - np.abs(u))))
    direction = np.zeros(scenario.n)
    direction[k] = 1.0
    return direction


def _waypoint_path(scenario: Scenario, waypoint: Array, target: Array) -> Array:
    """Start-to-target path bent through a waypoint at its arc position."""
    grid = scenario.grid().values
    wp = np.asarray(waypoint, dtype=float)
    a = float(np.linalg.norm(wp - scenario.start))
    b = float(np.linalg.norm(target - wp))
    t_star = a / (a + b) if a + b > 0 else 0.5
    path = np.empty((grid.size, scenario.n))
    first = grid <= t_star
    u = grid[first] / t_star if t_star > 0 else grid[first]
    path[first] = scenario.start[None, :] + u[:, None] * (wp - scenario.start)[None, :]
    v = (grid[~first] - t_star) / (1.0 - t_star) if t_star < 1 else grid[~first]
    path[~first] = wp[None, :] + v[:, None] * (target - wp)[None, :]
    return path


def seed_weights(scenario: Scenario, n_components: int, fan_scale: float | None = None) -> Array:
    """Component seeds: straight lines per target, spread across routes.

    Scenario route waypoints (known openings) pin the seed lines; otherwise a
    positive fan scale bends the seeds through mid waypoints spread across
    the workspace's cross extent.  Either way the components start in
    distinct route basins instead of stacked on one line.
    """
    fan = scenario.planner.fan_scale if fan_scale is None else fan_scale
    waypoints = scenario.planner.route_waypoints
    grid = scenario.grid()
    nu = grid.values[:, None]
    rows = []
    if waypoints:
        for i in range(n_components):
            target = scenario.targets[i % scenario.targets.shape[0]]
            wp = np.asarray(waypoints[i % len(waypoints)], dtype=float)
            rows.append(fit_path_weights(scenario, _waypoint_path(scenario, wp, target)))
        return np.stack(rows)
    if fan > 0.0 and n_components > 1:
        direction = _fan_direction(scenario)
        k = int(np.argmax(direction))
        half_span = fan * float(scenario.workspace.hi[k] - scenario.workspace.lo[k]) / 2.0
        offsets = np.linspace(-half_span, half_span, n_components)
    else:
        offsets = np.zeros(n_components)
        direction = np.zeros(scenario.n)
    for i in range(n_components):
        target = scenario.targets[i % scenario.targets.shape[0]]
        line = scenario.start[None, :] + nu * (target - scenario.start)[None, :]
        # Sine bump: zero at the endpoints, full offset at mid-phase.
        bend = np.sin(math.pi * grid.values)[:, None] * (offsets[i] * direction)[None, :]
        rows.append(fit_path_weights(scenario, line + bend))
    return np.stack(rows)


def scenario_learner_config(
    scenario: Scenario, n_components: int, seed: int = 0, **overrides
) -> LearnerConfig:
    """Config with scenario-calibrated variance cap and fanned seed lines."""
    var_cap = scenario.planner.var_cap
    if var_cap is None:
        var_cap = scenario.workspace.diameter ** 2
    defaults = dict(
        n_components=n_components,
        var_cap=var_cap,
        samples_per_component=max(64, 2 * scenario.basis.dim + 1),
        seed=seed,
        init_means=seed_weights(scenario, n_components),
    )
    defaults.update(overrides)
    return LearnerConfig(**defaults)


def plan_for_scenario(
    scenario: Scenario, cfg: LearnerConfig
) -> tuple[GuideMixture, LearnerReport]:
    """Learn guides for a scenario and attach the workspace freelance plan."""
    mixture, report = learn_mixture(lambda w: episodic_reward(scenario, w), cfg, scenario.basis)
    box = scenario.pose_box()
    return attach_freelance(mixture, make_freelance(box.lo, box.hi)), report
