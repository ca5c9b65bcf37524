"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines live.  The
heavyweight fixtures (learned mixtures) are shared across criteria.
"""

import dataclasses
import math
import time

import numpy as np
import pytest

from guidemix import cli
from guidemix.field import (
    energy,
    field_from_moments,
    log_density_and_grad,
    mixture_pose_moments,
    total_wrench,
)
from guidemix.intent import BeliefState, FilterParams, filter_step, shift
from guidemix.learner import (
    LearnerConfig,
    diag_kl,
    learn_mixture,
    plan_for_scenario,
    scenario_learner_config,
)
from guidemix.operators import PlanFollower, run_episode
from guidemix.promp import (
    BasisConfig,
    GuideMixture,
    PhaseGrid,
    ProMP,
    attach_freelance,
    make_freelance,
    trajectory_from_weights,
)
from guidemix.scenarios import maze2d_preset, pole6d_preset, save_scenario, signed_distance
from guidemix.session import GuidanceParams, Session, preset_session_config


def report(name: str, ok: bool, detail: str = "") -> None:
    suffix = f" ({detail})" if detail else ""
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}{suffix}", flush=True)
    assert ok, f"{name}{suffix}"


@pytest.fixture(scope="module")
def maze_mixture():
    s = maze2d_preset()
    cfg = scenario_learner_config(s, n_components=3, seed=0, max_iterations=120)
    mix, _ = plan_for_scenario(s, cfg)
    return s, mix


@pytest.fixture(scope="module")
def pole_mixture():
    s = pole6d_preset()
    cfg = scenario_learner_config(s, n_components=2, seed=0, max_iterations=150)
    mix, _ = plan_for_scenario(s, cfg)
    return s, mix


def random_field(rng, n, max_components=60):
    n_comp = int(rng.integers(1, 4))
    t_o = int(rng.integers(2, max(3, min(19, (max_components - 1) // n_comp))))
    cfg = BasisConfig(m=5, n=n)
    comps = tuple(
        ProMP(cfg, rng.uniform(0, 10, cfg.dim), rng.uniform(0.05, 1.0, cfg.dim))
        for _ in range(n_comp)
    )
    mix = attach_freelance(
        GuideMixture(comps, np.log(np.full(n_comp, 1.0 / n_comp))),
        make_freelance(np.zeros(n), np.full(n, 10.0)),
    )
    moments = mixture_pose_moments(mix, PhaseGrid.uniform(t_o))
    plan = rng.uniform(0.1, 1.0, moments.n_plans)
    plan /= plan.sum()
    phases = []
    for t in moments.phase_counts():
        q = rng.uniform(0.1, 1.0, t)
        phases.append(q / q.sum())
    return field_from_moments(moments, plan, phases)


class TestGradientCorrectness:
    def test_criterion(self):
        rng = np.random.default_rng(2024)
        t0 = time.monotonic()
        worst = 0.0
        for k in range(100):
            n = (2, 3, 6)[k % 3]
            field = random_field(rng, n)
            assert field.n_components <= 61
            anchor = field.means[int(rng.integers(field.n_components))]
            x = anchor + rng.normal(scale=0.3, size=n)
            _, grad = log_density_and_grad(field, x)
            fd = np.empty(n)
            h = 1e-5
            for j in range(n):
                e = np.zeros(n)
                e[j] = h
                fd[j] = (
                    log_density_and_grad(field, x + e)[0]
                    - log_density_and_grad(field, x - e)[0]
                ) / (2 * h)
            rel = np.linalg.norm(grad - fd) / max(np.linalg.norm(grad), 1e-12)
            worst = max(worst, rel)
        elapsed = time.monotonic() - t0
        report(
            "gradient-correctness",
            worst <= 1e-5 and elapsed < 10.0,
            f"worst relative error {worst:.2e}, {elapsed:.1f}s",
        )


class TestShiftFidelity:
    def test_criterion(self):
        ok = True
        ok &= np.allclose(shift(np.array([1.0, 0, 0]), 1.5), [0, 0.5, 0.5], atol=1e-15)
        ok &= np.allclose(shift(np.array([1.0, 0, 0]), 2.0), [0, 0, 1.0], atol=1e-15)
        rng = np.random.default_rng(7)
        worst_mass = 0.0
        for t in range(1, 7):
            for dnu in (0.0, 0.5, 1.0, 1.5, 2.0, 3.2):
                whole = int(math.floor(dnu))
                frac = dnu - whole
                matrix = np.zeros((t, t))
                for j in range(t):
                    matrix[min(j + whole, t - 1), j] += 1.0 - frac
                    matrix[min(j + whole + 1, t - 1), j] += frac
                for _ in range(10):
                    p = rng.uniform(size=t)
                    p /= p.sum()
                    got = shift(p, dnu)
                    ok &= np.allclose(got, matrix @ p, atol=1e-15)
                    worst_mass = max(worst_mass, abs(got.sum() - p.sum()))
        ok &= worst_mass <= 1e-15
        report("shift-operator-fidelity", bool(ok), f"mass defect {worst_mass:.1e}")


class TestLearnerAnalyticRecovery:
    def test_criterion(self):
        basis = BasisConfig(m=4, n=1)
        w_star = np.array([1.0, -2.0, 0.5, 3.0])
        reward = lambda w: -0.5 * float((w - w_star) @ (w - w_star))
        t0 = time.monotonic()
        passed = 0
        kls = []
        for seed in range(10):
            cfg = LearnerConfig(
                n_components=1,
                var_cap=25.0,
                samples_per_component=32,
                max_iterations=80,
                kl_trust_region=0.5,
                seed=seed,
            )
            mix, _ = learn_mixture(reward, cfg, basis)
            c = mix.components[0]
            kl = diag_kl(c.mean_w, c.var_w, w_star, np.ones(4))
            kls.append(kl)
            passed += kl <= 0.05
        elapsed = time.monotonic() - t0
        report(
            "learner-analytic-recovery",
            passed >= 9 and elapsed < 60.0,
            f"{passed}/10 seeds, worst KL {max(kls):.3f}, {elapsed:.1f}s",
        )


class TestMazeMultimodality:
    @staticmethod
    def gap_of(traj):
        inside = (traj[:, 0] >= 4.0) & (traj[:, 0] <= 6.0)
        if not inside.any():
            return None
        y = float(traj[inside, 1].mean())
        if 2.0 <= y <= 4.0:
            return 0
        if 6.0 <= y <= 8.0:
            return 1
        return None

    def test_criterion(self):
        s = maze2d_preset()
        assert s.basis.m == 10
        t0 = time.monotonic()
        successes = 0
        for seed in range(10):
            cfg = scenario_learner_config(s, n_components=3, seed=seed, max_iterations=120)
            mix, _ = plan_for_scenario(s, cfg)
            gaps = set()
            for c in mix.components:
                traj = trajectory_from_weights(c.mean_w, s.grid(), s.basis)
                if min(signed_distance(s, p) for p in traj) >= 0.0:
                    gap = self.gap_of(traj)
                    if gap is not None:
                        gaps.add(gap)
            successes += len(gaps) >= 2
        elapsed = time.monotonic() - t0
        report(
            "maze-multimodality",
            successes >= 8 and elapsed < 300.0,
            f"{successes}/10 seeds, {elapsed:.0f}s",
        )


class TestFilterConvergenceAndDefection:
    def test_criterion(self, maze_mixture):
        s, mix = maze_mixture
        cfg = preset_session_config(s)
        params = cfg.filter_params
        assert params.emission_scale <= 25.0
        moments = mixture_pose_moments(mix, s.grid())
        counts = moments.phase_counts()

        converged = 0
        for seed in range(20):
            rng = np.random.default_rng(1000 + seed)
            # Follow a collision-free plan's tube.
            k = next(
                i
                for i, c in enumerate(mix.components)
                if min(
                    signed_distance(s, p)
                    for p in trajectory_from_weights(c.mean_w, s.grid(), s.basis)
                )
                >= 0
            )
            state = BeliefState.initial(mix.weights(), counts)
            phase = 0.0
            for tick in range(200):
                i = min(int(round(phase)), counts[k] - 1)
                x = moments.means[k][i] + rng.normal(scale=0.05, size=2)
                state = filter_step(state, moments, x, params, mix.weights()).state
                phase = min(phase + params.delta_nu, counts[k] - 1.0)
                if state.plan_belief[k] > 0.9:
                    converged += 1
                    break

        defected = 0
        x_far = np.array([-3.0, -3.0])
        guide_sigma = math.sqrt(max(float(v.max()) for v in moments.variances[:-1]))
        min_dist = min(
            float(np.min(np.linalg.norm(mu - x_far[None, :], axis=1)))
            for mu in moments.means[:-1]
        )
        assert min_dist / guide_sigma > 10.0, "probe must be far from every guide"
        for seed in range(20):
            rng = np.random.default_rng(2000 + seed)
            state = BeliefState.initial(mix.weights(), counts)
            for tick in range(200):
                x = x_far + rng.normal(scale=0.05, size=2)
                state = filter_step(state, moments, x, params, mix.weights()).state
                if state.plan_belief[-1] > 0.5:
                    defected += 1
                    break

        report(
            "filter-convergence-and-defection",
            converged == 20 and defected == 20,
            f"convergence {converged}/20, defection {defected}/20",
        )


class TestEnergyDissipation:
    def test_criterion(self, maze_mixture):
        s, mix = maze_mixture
        rng = np.random.default_rng(99)
        moments = mixture_pose_moments(mix, s.grid())
        params = GuidanceParams(k_damp=2.0, tau_max=1e12)
        dt = 1e-3
        worst = -np.inf
        for _ in range(20):
            plan = rng.uniform(0.1, 1.0, moments.n_plans)
            plan /= plan.sum()
            phases = []
            for t in moments.phase_counts():
                q = rng.uniform(0.1, 1.0, t)
                phases.append(q / q.sum())
            field = field_from_moments(moments, plan, phases)
            x = rng.uniform(1, 9, size=2)
            v = rng.normal(scale=0.5, size=2)
            e = energy(field, x) + 0.5 * float(v @ v)
            for _ in range(10_000):
                tau = total_wrench(field, x, v, params)
                v = v + dt * tau
                x = x + dt * v
                e_next = energy(field, x) + 0.5 * float(v @ v)
                worst = max(worst, e_next - e)
                e = e_next
        report("energy-dissipation", worst <= 1e-6, f"worst energy increment {worst:.2e}")


class TestGuidanceEfficacy:
    def test_criterion(self, pole_mixture):
        s, mix = pole_mixture
        t0 = time.monotonic()
        results = {}
        for mode in ("guided", "guided-no-replan", "unguided"):
            cols, times = [], []
            for seed in range(100):
                script = PlanFollower(plan=seed % 2, noise=0.3, speed=0.05)
                m, _ = run_episode(s, mix, script, mode, seed)
                cols.append(m.collisions)
                times.append(m.completion_time)
            results[mode] = (float(np.median(cols)), float(np.median(times)))
        elapsed = time.monotonic() - t0
        guided_cols, guided_time = results["guided"]
        norep_cols, norep_time = results["guided-no-replan"]
        unguided_cols, _ = results["unguided"]
        ok = (
            guided_cols < unguided_cols
            and guided_time <= 1.1 * norep_time
            and elapsed < 600.0
        )
        report(
            "guidance-efficacy",
            ok,
            f"median collisions guided {guided_cols} vs unguided {unguided_cols}; "
            f"times {guided_time:.1f}s vs no-replan {norep_time:.1f}s; {elapsed:.0f}s",
        )


class TestReplanContinuity:
    def test_criterion(self, maze_mixture):
        s, mix = maze_mixture
        cfg = preset_session_config(s, replan_iterations=60)
        session = Session(s, mix, cfg)
        probe = np.array([2.0, 9.0])
        before = None
        for _ in range(50):
            before = session.step(probe, np.zeros(2)).wrench
        new_mix = session.replan(probe)
        session.integrate_new_plans(new_mix, "defect", epsilon=1e-3)
        after = session.step(probe, np.zeros(2)).wrench
        change = float(np.linalg.norm(after - before))
        bound = 0.01 * cfg.guidance.tau_max
        report(
            "replan-continuity",
            change <= bound,
            f"wrench change {change:.4f} <= {bound:.2f}",
        )


class TestSimulateDeterminism:
    def test_criterion(self, maze_mixture, tmp_path):
        s, mix = maze_mixture
        scenario_path = tmp_path / "scenario.json"
        mixture_path = tmp_path / "mixture.json"
        save_scenario(s, scenario_path)
        mix.save(mixture_path)
        outputs = []
        for k in (0, 1):
            out = tmp_path / f"run{k}"
            cli.main(
                [
                    "simulate",
                    "--scenario", str(scenario_path),
                    "--mixture", str(mixture_path),
                    "--mode", "guided",
                    "--mode", "unguided",
                    "--seeds", "3",
                    "--timeout", "20",
                    "--out", str(out),
                ]
            )
            outputs.append((out / "episodes.csv").read_bytes())
        report("simulate-determinism", outputs[0] == outputs[1], "byte-identical CSV")
