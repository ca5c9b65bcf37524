import json

import numpy as np
import pytest

from guidemix.promp import (
    BasisConfig,
    DomainError,
    GuideMixture,
    PhaseGrid,
    PoseGaussian,
    ProMP,
    attach_freelance,
    basis_vector,
    block_basis,
    make_freelance,
    pose_at_phase,
    sample_weights,
    trajectory_from_weights,
)


def random_promp(rng, m=5, n=2):
    cfg = BasisConfig(m=m, n=n)
    return ProMP(cfg, rng.normal(size=cfg.dim), rng.uniform(0.2, 2.0, size=cfg.dim))


class TestBasisVector:
    def test_two_centers_symmetric_at_half(self):
        np.testing.assert_allclose(basis_vector(0.5, BasisConfig(m=2, n=1)), [0.5, 0.5])

    def test_single_basis_is_constant_one(self):
        for nu in (0.0, 0.37, 1.0):
            np.testing.assert_array_equal(basis_vector(nu, BasisConfig(m=1, n=1)), [1.0])

    def test_matches_direct_evaluation_at_zero(self):
        cfg = BasisConfig(m=3, n=1)
        centers = np.array([0.0, 0.5, 1.0])
        raw = np.exp(-0.5 * (0.0 - centers) ** 2)
        expected = raw / raw.sum()
        got = basis_vector(0.0, cfg)
        np.testing.assert_allclose(got, expected, rtol=1e-15)
        assert got[0] > got[1] > got[2]

    def test_out_of_range_phase_rejected(self):
        with pytest.raises(DomainError):
            basis_vector(-0.01, BasisConfig(m=3, n=1))
        with pytest.raises(DomainError):
            basis_vector(1.01, BasisConfig(m=3, n=1))

    def test_partition_of_unity_random(self):
        rng = np.random.default_rng(0)
        for _ in range(10_000):
            m = int(rng.integers(1, 21))
            nu = float(rng.uniform())
            phi = basis_vector(nu, BasisConfig(m=m, n=1))
            assert np.all(phi >= 0)
            assert abs(phi.sum() - 1.0) < 1e-12


class TestBlockBasis:
    def test_single_dof_equals_basis_vector(self):
        cfg = BasisConfig(m=4, n=1)
        np.testing.assert_array_equal(block_basis(0.3, cfg), basis_vector(0.3, cfg)[None, :])

    def test_two_dof_one_basis_is_identity(self):
        np.testing.assert_array_equal(block_basis(0.7, BasisConfig(m=1, n=2)), np.eye(2))

    def test_block_structure_entrywise(self):
        cfg = BasisConfig(m=3, n=2)
        phi = basis_vector(0.25, cfg)
        dense = np.zeros((2, 6))
        dense[0, :3] = phi
        dense[1, 3:] = phi
        np.testing.assert_allclose(block_basis(0.25, cfg), dense, rtol=0, atol=0)


class TestPoseAtPhase:
    def test_constant_weights_give_constant_pose(self):
        cfg = BasisConfig(m=6, n=3)
        p = ProMP(cfg, np.full(cfg.dim, 2.5), np.ones(cfg.dim))
        for nu in (0.0, 0.41, 1.0):
            np.testing.assert_allclose(pose_at_phase(p, nu).mean, [2.5, 2.5, 2.5], rtol=1e-12)

    def test_single_basis_cov_is_sigma_identity(self):
        cfg = BasisConfig(m=1, n=2)
        p = ProMP(cfg, np.zeros(2), np.array([0.3, 0.3]))
        np.testing.assert_allclose(pose_at_phase(p, 0.5).cov, 0.3 * np.eye(2), rtol=1e-12)

    def test_monte_carlo_covariance_agrees(self):
        rng = np.random.default_rng(7)
        p = random_promp(rng)
        nu = 0.3
        g = pose_at_phase(p, nu)
        n_samp = 100_000
        ws = p.mean_w + np.sqrt(p.var_w) * rng.standard_normal((n_samp, p.basis.dim))
        phi = block_basis(nu, p.basis)
        poses = ws @ phi.T
        emp_cov = np.cov(poses.T)
        # var(sample cov entry) ~ (cov_ii*cov_jj + cov_ij^2)/N
        for i in range(2):
            for j in range(2):
                se = np.sqrt((g.cov[i, i] * g.cov[j, j] + g.cov[i, j] ** 2) / n_samp)
                assert abs(emp_cov[i, j] - g.cov[i, j]) < 3 * se
        se_mean = np.sqrt(np.diag(g.cov) / n_samp)
        assert np.all(np.abs(poses.mean(axis=0) - g.mean) < 4 * se_mean)

    def test_cov_symmetric_psd_random(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            p = random_promp(rng, m=int(rng.integers(1, 9)), n=int(rng.integers(1, 5)))
            g = pose_at_phase(p, float(rng.uniform()))
            np.testing.assert_allclose(g.cov, g.cov.T, atol=1e-12)
            assert np.min(np.linalg.eigvalsh(g.cov)) >= -1e-10


class TestSampleWeights:
    def test_tiny_variance_returns_mean(self):
        cfg = BasisConfig(m=2, n=1)
        p = ProMP(cfg, np.array([1.0, -2.0]), np.full(2, 1e-30))
        got = sample_weights(p, np.random.default_rng(0))
        np.testing.assert_allclose(got, p.mean_w, atol=1e-13)

    def test_fixed_seed_is_deterministic(self):
        rng = np.random.default_rng(5)
        p = random_promp(rng)
        a = sample_weights(p, np.random.default_rng(42))
        b = sample_weights(p, np.random.default_rng(42))
        np.testing.assert_array_equal(a, b)

    def test_law_of_large_numbers(self):
        rng = np.random.default_rng(11)
        p = random_promp(rng)
        n = 100_000
        samples = np.stack([sample_weights(p, rng) for _ in range(1000)])
        # Vectorized draws for the bulk; loop above exercises the API shape.
        samples = np.concatenate(
            [samples, p.mean_w + np.sqrt(p.var_w) * rng.standard_normal((n - 1000, p.basis.dim))]
        )
        tol = 4 * np.sqrt(p.var_w / n)
        assert np.all(np.abs(samples.mean(axis=0) - p.mean_w) < tol)


class TestTrajectoryFromWeights:
    def test_constant_weights_constant_trajectory(self):
        cfg = BasisConfig(m=4, n=2)
        grid = PhaseGrid.uniform(7)
        w = np.concatenate([np.full(4, 1.0), np.full(4, -3.0)])
        traj = trajectory_from_weights(w, grid, cfg)
        np.testing.assert_allclose(traj, np.tile([1.0, -3.0], (7, 1)), rtol=1e-12)

    def test_one_step_grid_returns_pose_at_sole_value(self):
        cfg = BasisConfig(m=3, n=2)
        grid = PhaseGrid.uniform(1)
        rng = np.random.default_rng(1)
        w = rng.normal(size=cfg.dim)
        traj = trajectory_from_weights(w, grid, cfg)
        np.testing.assert_allclose(traj[0], block_basis(float(grid.values[0]), cfg) @ w)

    def test_matches_pose_at_phase_means(self):
        rng = np.random.default_rng(2)
        cfg = BasisConfig(m=5, n=3)
        grid = PhaseGrid.uniform(9)
        w = rng.normal(size=cfg.dim)
        p = ProMP(cfg, w, np.full(cfg.dim, 1e-12))
        traj = trajectory_from_weights(w, grid, cfg)
        for i, nu in enumerate(grid.values):
            np.testing.assert_allclose(traj[i], pose_at_phase(p, float(nu)).mean, rtol=1e-10)

    def test_length_mismatch_rejected(self):
        with pytest.raises(DomainError):
            trajectory_from_weights(np.zeros(5), PhaseGrid.uniform(3), BasisConfig(m=3, n=2))


class TestAffinePushforward:
    def test_sampled_weights_match_pose_distribution(self):
        rng = np.random.default_rng(13)
        p = random_promp(rng, m=6, n=2)
        nu = 0.62
        g = pose_at_phase(p, nu)
        phi = block_basis(nu, p.basis)
        n = 50_000
        poses = np.stack([phi @ sample_weights(p, rng) for _ in range(200)])
        ws = p.mean_w + np.sqrt(p.var_w) * rng.standard_normal((n - 200, p.basis.dim))
        poses = np.concatenate([poses, ws @ phi.T])
        se_mean = np.sqrt(np.diag(g.cov) / n)
        assert np.all(np.abs(poses.mean(axis=0) - g.mean) < 3 * se_mean)
        emp = np.cov(poses.T)
        for i in range(2):
            for j in range(2):
                se = np.sqrt((g.cov[i, i] * g.cov[j, j] + g.cov[i, j] ** 2) / n)
                assert abs(emp[i, j] - g.cov[i, j]) < 3 * se


class TestGuideMixture:
    def make_mixture(self, rng, n_comp=2, with_freelance=True):
        comps = tuple(random_promp(rng) for _ in range(n_comp))
        if with_freelance:
            free = make_freelance(np.array([0.0, 0.0]), np.array([10.0, 10.0]))
            lw = np.log(np.full(n_comp + 1, 1.0 / (n_comp + 1)))
            return GuideMixture(comps, lw, free)
        lw = np.log(np.full(n_comp, 1.0 / n_comp))
        return GuideMixture(comps, lw)

    def test_weights_must_normalize(self):
        rng = np.random.default_rng(0)
        comps = (random_promp(rng),)
        with pytest.raises(DomainError):
            GuideMixture(comps, np.array([0.1]))

    def test_freelance_variance_covers_workspace(self):
        free = make_freelance(np.array([0.0, 0.0]), np.array([10.0, 10.0]))
        diam_sq = 200.0
        assert np.all(free.var_diag() >= diam_sq - 1e-9)

    def test_roundtrip_is_lossless(self, tmp_path):
        rng = np.random.default_rng(9)
        mix = self.make_mixture(rng)
        path = tmp_path / "mix.json"
        mix.save(path)
        back = GuideMixture.load(path)
        assert back.n_components == mix.n_components
        np.testing.assert_array_equal(back.log_weights, mix.log_weights)
        for a, b in zip(back.components, mix.components):
            np.testing.assert_array_equal(a.mean_w, b.mean_w)
            np.testing.assert_array_equal(a.var_w, b.var_w)
            assert a.basis == b.basis
        np.testing.assert_array_equal(back.freelance.mean, mix.freelance.mean)
        np.testing.assert_array_equal(back.freelance.cov, mix.freelance.cov)

    def test_document_fields(self):
        rng = np.random.default_rng(4)
        doc = self.make_mixture(rng).to_dict()
        assert set(doc) == {"m", "n", "h", "mean_w", "var_w", "log_weights", "freelance"}
        json.dumps(doc)  # must be a plain document

    def test_freelance_only_mixture_roundtrip(self, tmp_path):
        free = make_freelance(np.array([0.0, 0.0]), np.array([10.0, 10.0]))
        mix = GuideMixture((), np.zeros(1), free)
        path = tmp_path / "freelance.json"
        mix.save(path)
        back = GuideMixture.load(path)
        assert back.n_components == 0
        assert back.n_plans == 1
        np.testing.assert_array_equal(back.freelance.mean, free.mean)
        np.testing.assert_array_equal(back.freelance.cov, free.cov)

    def test_attach_freelance_renormalizes(self):
        rng = np.random.default_rng(6)
        mix = self.make_mixture(rng, with_freelance=False)
        out = attach_freelance(mix, make_freelance(np.zeros(2), np.full(2, 10.0)))
        w = out.weights()
        assert abs(w.sum() - 1.0) < 1e-10
        assert abs(w[-1] - 1.0 / 3.0) < 1e-10

    def test_at_most_one_freelance(self):
        rng = np.random.default_rng(8)
        mix = self.make_mixture(rng)
        with pytest.raises(DomainError):
            attach_freelance(mix, mix.freelance)


class TestPoseGaussianValidation:
    def test_asymmetric_cov_rejected(self):
        with pytest.raises(DomainError):
            PoseGaussian(np.zeros(2), np.array([[1.0, 0.5], [0.2, 1.0]]))

    def test_nonpositive_diag_rejected(self):
        with pytest.raises(DomainError):
            PoseGaussian(np.zeros(2), np.diag([1.0, 0.0]))
