"""Pose-space guidance field: energy, gradient, responsibilities, wrench.

The mixture of guides plus the current beliefs define a pose-space GMM with
one component per (plan, phase).  Its negative log density is the potential
energy; the gradient of the log density is the raw guidance wrench, which is
damped and magnitude-capped before being applied.

All pose covariances here are diagonal: the weight covariances are diagonal
and the basis matrix is block-diagonal across degrees of freedom, and the
freelance component is constructed axis-aligned.  Every structure is an
immutable snapshot; build once per control tick, query from anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .promp import Array, DomainError, GuideMixture, PhaseGrid, basis_matrix

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class PlanMoments:
    """Per-plan pose means and variances on the phase grid.

    Index ``p`` runs over guide components first; when the mixture has a
    freelance component it is the final plan with a single phase.
    """

    means: tuple[Array, ...]  # per plan: (T_p, n)
    variances: tuple[Array, ...]  # per plan: (T_p, n)
    has_freelance: bool

    @property
    def n_plans(self) -> int:
        return len(self.means)

    @property
    def dim(self) -> int:
        return self.means[0].shape[1]

    def phase_counts(self) -> tuple[int, ...]:
        return tuple(m.shape[0] for m in self.means)


def mixture_pose_moments(mix: GuideMixture, grid: PhaseGrid) -> PlanMoments:
    """Evaluate every component's pose Gaussians on the grid in one pass."""
    means: list[Array] = []
    variances: list[Array] = []
    if mix.components:
        cfg = mix.basis
        phi = basis_matrix(grid.values, cfg)  # (T, m)
        phi_sq = phi * phi
        for comp in mix.components:
            mw = comp.mean_w.reshape(cfg.n, cfg.m)
            vw = comp.var_w.reshape(cfg.n, cfg.m)
            means.append(phi @ mw.T)
            variances.append(phi_sq @ vw.T)
    if mix.freelance is not None:
        means.append(mix.freelance.mean[None, :])
        variances.append(mix.freelance.var_diag()[None, :])
    if not means:
        raise DomainError("mixture has no components at all")
    return PlanMoments(tuple(means), tuple(variances), mix.freelance is not None)


@dataclass(frozen=True)
class PoseFieldGMM:
    """Flattened pose-space GMM over (plan, phase) components."""

    means: Array  # (K, n)
    variances: Array  # (K, n)
    log_weights: Array  # (K,)
    plan_index: Array  # (K,) int
    phase_index: Array  # (K,) int

    @property
    def n_components(self) -> int:
        return int(self.means.shape[0])

    @property
    def dim(self) -> int:
        return int(self.means.shape[1])

    def weights(self) -> Array:
        return np.exp(self.log_weights)


def field_from_moments(
    moments: PlanMoments, plan_belief: Array, phase_beliefs: list[Array]
) -> PoseFieldGMM:
    """Assemble the field with weights p(plan) * p(phase | plan).

    ``phase_beliefs[p]`` must match plan p's phase count (the freelance plan
    has a single phase with the trivial belief [1]).
    """
    plan_belief = np.asarray(plan_belief, dtype=float)
    if plan_belief.size != moments.n_plans or len(phase_beliefs) != moments.n_plans:
        raise DomainError(
            f"beliefs must cover {moments.n_plans} plans, got "
            f"{plan_belief.size}/{len(phase_beliefs)}"
        )
    means, variances, weights, plans, phases = [], [], [], [], []
    for p, (mu, var) in enumerate(zip(moments.means, moments.variances)):
        pb = np.asarray(phase_beliefs[p], dtype=float)
        if pb.size != mu.shape[0]:
            raise DomainError(f"plan {p} phase belief has length {pb.size}, needs {mu.shape[0]}")
        means.append(mu)
        variances.append(var)
        weights.append(plan_belief[p] * pb)
        plans.append(np.full(mu.shape[0], p, dtype=int))
        phases.append(np.arange(mu.shape[0]))
    w = np.concatenate(weights)
    with np.errstate(divide="ignore"):
        log_w = np.log(w)
    return PoseFieldGMM(
        means=np.concatenate(means),
        variances=np.concatenate(variances),
        log_weights=log_w,
        plan_index=np.concatenate(plans),
        phase_index=np.concatenate(phases),
    )


def build_pose_field(
    mix: GuideMixture, plan_belief: Array, phase_beliefs: list[Array], grid: PhaseGrid
) -> PoseFieldGMM:
    """Field straight from a mixture; sessions cache the moments instead."""
    return field_from_moments(mixture_pose_moments(mix, grid), plan_belief, phase_beliefs)


def _component_logpdfs(field: PoseFieldGMM, x: Array) -> Array:
    d = x[None, :] - field.means
    return field.log_weights - 0.5 * np.sum(
        d * d / field.variances + np.log(field.variances) + LOG_2PI, axis=1
    )


def log_density_and_grad(field: PoseFieldGMM, x: Array) -> tuple[float, Array]:
    """Log density of the field GMM and its gradient, log-sum-exp stabilized."""
    x = np.asarray(x, dtype=float)
    if x.shape != (field.dim,):
        raise DomainError(f"pose must have {field.dim} dimensions, got {x.shape}")
    logs = _component_logpdfs(field, x)
    top = np.max(logs)
    if not np.isfinite(top):
        raise DomainError("field has no component with positive weight")
    resp = np.exp(logs - top)
    total = resp.sum()
    log_p = float(top + np.log(total))
    resp /= total
    grad = resp @ ((field.means - x[None, :]) / field.variances)
    return log_p, grad


def responsibilities(field: PoseFieldGMM, x: Array) -> Array:
    """Posterior over (plan, phase) components at pose x; sums to one."""
    logs = _component_logpdfs(field, np.asarray(x, dtype=float))
    top = np.max(logs)
    r = np.exp(logs - top)
    return r / r.sum()


def energy(field: PoseFieldGMM, x: Array) -> float:
    """Potential energy: negative log density."""
    return -log_density_and_grad(field, x)[0]


@dataclass(frozen=True)
class GuidanceParams:
    """Damping gain, wrench cap and control rate for the guidance loop."""

    k_damp: float = 2.0
    tau_max: float = 20.0
    control_rate: float = 100.0

    def __post_init__(self) -> None:
        if self.k_damp < 0:
            raise DomainError("k_damp must be >= 0")
        if self.tau_max <= 0:
            raise DomainError("tau_max must be > 0")
        if self.control_rate <= 0:
            raise DomainError("control_rate must be > 0")


def total_wrench(
    field: PoseFieldGMM, x: Array, xdot: Array, params: GuidanceParams
) -> Array:
    """Damped, magnitude-capped guidance wrench at (pose, velocity)."""
    _, grad = log_density_and_grad(field, x)
    tau = grad - params.k_damp * np.asarray(xdot, dtype=float)
    norm = float(np.linalg.norm(tau))
    if norm > params.tau_max:
        tau = tau * (params.tau_max / norm)
    return tau


def field_geometry(moments: PlanMoments, plan_belief: Array) -> list[dict]:
    """Ellipse-chain export: one entry per (plan, phase) with axis lengths.

    Axis lengths are one standard deviation per pose dimension (the
    covariances are axis-aligned).  Shared by plot emission and the live UI.
    """
    plan_belief = np.asarray(plan_belief, dtype=float)
    chains = []
    for p, (mu, var) in enumerate(zip(moments.means, moments.variances)):
        freelance = moments.has_freelance and p == moments.n_plans - 1
        for i in range(mu.shape[0]):
            chains.append(
                {
                    "plan": p,
                    "phase": i,
                    "freelance": freelance,
                    "mean": mu[i].tolist(),
                    "axes": np.sqrt(var[i]).tolist(),
                    "weight": float(plan_belief[p] / mu.shape[0]),
                }
            )
    return chains
