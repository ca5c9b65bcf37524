"""Bayes filtering of the operator's intended plan and phase.

A hidden Markov model tracks which guide (plan) the operator is following
and how far along it they are.  Phase beliefs advance through a fractional
shifting operator that never pushes mass beyond the final phase; plan
beliefs mix through a small switching probability.  Emissions are the pose
Gaussians of each (plan, phase) with covariance inflated by a scale factor
so the filter does not lock on too quickly.

Haptic cues are computed from the *next* step's phase prior rather than the
posterior, which is what pulls the operator forward along the plan.

All belief updates run in log space with a small floor per entry so that a
vanishing probability can recover (the switching probability alone cannot
resurrect a plan zeroed out in finite precision).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .field import PlanMoments
from .promp import Array, DomainError

LOG_2PI = math.log(2.0 * math.pi)
BELIEF_FLOOR = 1e-12


@dataclass(frozen=True)
class FilterParams:
    """Transition and emission parameters of the intent filter."""

    p_progress: float = 0.8
    delta_nu: float = 0.0
    p_switch: float = 1e-20
    emission_scale: float = 25.0  # covariance multiplier (5 standard deviations)

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_progress <= 1.0:
            raise DomainError("p_progress must lie in [0, 1]")
        if self.delta_nu < 0:
            raise DomainError("delta_nu must be >= 0")
        if not 0.0 <= self.p_switch <= 1.0:
            raise DomainError("p_switch must lie in [0, 1]")
        if self.emission_scale < 1.0:
            raise DomainError("emission_scale must be >= 1")


@dataclass
class BeliefState:
    """Simplex over plans and, per plan, a simplex over that plan's phases."""

    plan_belief: Array
    phase_beliefs: list[Array]

    def __post_init__(self) -> None:
        self.plan_belief = np.asarray(self.plan_belief, dtype=float)
        self.phase_beliefs = [np.asarray(p, dtype=float) for p in self.phase_beliefs]
        if self.plan_belief.size != len(self.phase_beliefs):
            raise DomainError("one phase belief per plan required")
        for p in [self.plan_belief, *self.phase_beliefs]:
            if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-10:
                raise DomainError("beliefs must be simplices")

    @classmethod
    def initial(cls, plan_weights: Array, phase_counts: tuple[int, ...]) -> "BeliefState":
        """Plan belief from the learned mixture weights, uniform phase beliefs."""
        return cls(
            np.asarray(plan_weights, dtype=float).copy(),
            [np.full(t, 1.0 / t) for t in phase_counts],
        )

    def copy(self) -> "BeliefState":
        return BeliefState(self.plan_belief.copy(), [p.copy() for p in self.phase_beliefs])


def shift(p: Array, delta_nu: float) -> Array:
    """Move phase mass forward by delta_nu index units, splitting fractions.

    Mass at index j goes to j + floor(delta_nu) and j + ceil(delta_nu) with
    fractions (1 - frac, frac); anything shifted past the final phase piles
    up there.  Total mass is conserved exactly.
    """
    if delta_nu < 0:
        raise DomainError("delta_nu must be >= 0")
    p = np.asarray(p, dtype=float)
    t = p.size
    whole = int(math.floor(delta_nu))
    frac = delta_nu - whole
    out = np.zeros(t)
    lo = np.minimum(np.arange(t) + whole, t - 1)
    hi = np.minimum(np.arange(t) + whole + 1, t - 1)
    np.add.at(out, lo, (1.0 - frac) * p)
    if frac > 0.0:
        np.add.at(out, hi, frac * p)
    return out


def phase_prior(post_prev: Array, params: FilterParams) -> Array:
    """Transition the phase belief: progress with p_progress, else reset."""
    post_prev = np.asarray(post_prev, dtype=float)
    t = post_prev.size
    return params.p_progress * shift(post_prev, params.delta_nu) + (
        1.0 - params.p_progress
    ) / t


def phase_posterior(prior: Array, emissions: Array) -> tuple[Array, bool]:
    """Bayes update of one plan's phase belief.

    Returns the posterior and a flag that is True when the product vanished
    and the belief was reset to uniform.
    """
    prior = np.asarray(prior, dtype=float)
    emissions = np.asarray(emissions, dtype=float)
    if np.any(emissions < 0):
        raise DomainError("emissions must be nonnegative")
    post = prior * emissions
    total = post.sum()
    if total <= 0.0:
        return np.full(prior.size, 1.0 / prior.size), True
    return post / total, False


def plan_transition(p: Array, p_switch: float, n_plans: int) -> Array:
    """Apply the plan switching kernel: stay with 1 - p_switch, else uniform other."""
    p = np.asarray(p, dtype=float)
    if p_switch == 0.0:
        return p.copy()
    if n_plans < 2:
        raise DomainError("plan switching needs at least two plans")
    return (1.0 - p_switch) * p + p_switch / (n_plans - 1) * (p.sum() - p)


def plan_posterior(
    prior_plans: Array, per_plan_evidence: Array, reset_weights: Array
) -> tuple[Array, bool]:
    """Bayes update of the plan belief; resets to ``reset_weights`` on zero evidence."""
    prior_plans = np.asarray(prior_plans, dtype=float)
    evidence = np.asarray(per_plan_evidence, dtype=float)
    if np.any(evidence < 0):
        raise DomainError("evidence must be nonnegative")
    post = prior_plans * evidence
    total = post.sum()
    if total <= 0.0:
        w = np.asarray(reset_weights, dtype=float)
        return w / w.sum(), True
    return post / total, False


def emission_log_likelihoods(
    moments: PlanMoments, x: Array, kappa: float
) -> list[Array]:
    """Per plan: log N(x; mean, kappa * var) across that plan's phases."""
    if kappa < 1.0:
        raise DomainError("emission scale must be >= 1")
    x = np.asarray(x, dtype=float)
    out = []
    for mu, var in zip(moments.means, moments.variances):
        v = kappa * var
        d = x[None, :] - mu
        out.append(-0.5 * np.sum(d * d / v + np.log(v) + LOG_2PI, axis=1))
    return out


def emission_likelihood(
    moments: PlanMoments, x: Array, plan: int, phase: int, kappa: float
) -> float:
    """Single (plan, phase) emission density, evaluated in log space internally."""
    return float(np.exp(emission_log_likelihoods(moments, x, kappa)[plan][phase]))


def _floor_simplex(p: Array) -> Array:
    p = np.maximum(p, BELIEF_FLOOR)
    return p / p.sum()


@dataclass
class FilterStep:
    """Outcome of one filter tick."""

    state: BeliefState
    cue_beliefs: list[Array]
    phase_resets: list[int] = field(default_factory=list)
    plan_reset: bool = False


def filter_step(
    state: BeliefState,
    moments: PlanMoments,
    x: Array,
    params: FilterParams,
    reset_weights: Array,
) -> FilterStep:
    """One forward-filtering tick over plan and phase beliefs.

    Emissions are max-shifted in log space across all plans before
    exponentiation, which keeps the across-plan evidence comparable without
    underflow.  The freelance plan (single phase) participates like any
    other plan.
    """
    n_plans = state.plan_belief.size
    if n_plans >= 2:
        plan_prior = plan_transition(state.plan_belief, params.p_switch, n_plans)
    else:
        plan_prior = state.plan_belief.copy()  # nothing to switch to

    priors = []
    for p in range(n_plans):
        if state.phase_beliefs[p].size == 1:
            priors.append(np.ones(1))
        else:
            priors.append(phase_prior(state.phase_beliefs[p], params))

    log_emissions = emission_log_likelihoods(moments, x, params.emission_scale)
    top = max(float(np.max(le)) for le in log_emissions)
    emissions = [np.exp(le - top) for le in log_emissions]

    phase_posts: list[Array] = []
    phase_resets: list[int] = []
    evidence = np.empty(n_plans)
    for p in range(n_plans):
        evidence[p] = float(priors[p] @ emissions[p])
        post, was_reset = phase_posterior(priors[p], emissions[p])
        if was_reset:
            phase_resets.append(p)
        phase_posts.append(_floor_simplex(post))

    plan_post, plan_reset = plan_posterior(plan_prior, evidence, reset_weights)
    plan_post = _floor_simplex(plan_post)

    new_state = BeliefState(plan_post, phase_posts)
    cues = cue_belief(new_state, params)
    return FilterStep(new_state, cues, phase_resets, plan_reset)


def cue_belief(state: BeliefState, params: FilterParams) -> list[Array]:
    """Next-step phase priors, used for guidance instead of the posterior."""
    cues = []
    for p in range(state.plan_belief.size):
        if state.phase_beliefs[p].size == 1:
            cues.append(np.ones(1))
        else:
            cues.append(phase_prior(state.phase_beliefs[p], params))
    return cues
