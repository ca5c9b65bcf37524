"""Phase-indexed trajectory distributions over radial basis function weights.

A movement is represented as a linear combination of normalized Gaussian
basis functions of the phase (progress) variable.  A Gaussian over the
weight vector therefore induces a Gaussian over poses at every phase, and a
weighted set of such weight-space Gaussians forms a mixture of guides.  One
optional extra member, the "freelance" component, is a single broad
pose-space Gaussian covering the whole workspace; it stands for "the
operator follows no guide".

All types are immutable after construction and all operations are pure, so
they are safe to evaluate concurrently.  Random sampling takes an explicit
caller-owned generator.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

Array = np.ndarray


class DomainError(ValueError):
    """An argument fell outside an operation's documented domain."""


def _freeze(a: Array) -> Array:
    out = np.array(a, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class BasisConfig:
    """Radial basis layout: m functions per degree of freedom, n DoF.

    Centers sit at (c-1)/(m-1) for c = 1..m, so they span [0, 1] inclusive.
    ``h`` scales the (dimensionless) bandwidth; h=1 gives a Gaussian of unit
    width in phase units.
    """

    m: int
    n: int
    h: float = 1.0

    def __post_init__(self) -> None:
        if self.m < 1:
            raise DomainError(f"m must be >= 1, got {self.m}")
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        if not self.h > 0:
            raise DomainError(f"h must be > 0, got {self.h}")

    @property
    def dim(self) -> int:
        """Length of the stacked weight vector (m per DoF)."""
        return self.m * self.n

    @property
    def centers(self) -> Array:
        if self.m == 1:
            return np.zeros(1)
        return np.linspace(0.0, 1.0, self.m)


def basis_vector(nu: float, cfg: BasisConfig) -> Array:
    """Normalized Gaussian RBF activations at phase ``nu``; sums to 1."""
    if not 0.0 <= nu <= 1.0:
        raise DomainError(f"phase must lie in [0, 1], got {nu}")
    if cfg.m == 1:
        # Degenerate center formula; the normalized limit is the constant basis.
        return np.ones(1)
    raw = np.exp(-0.5 * ((nu - cfg.centers) / cfg.h) ** 2)
    return raw / raw.sum()


def basis_matrix(values: Array, cfg: BasisConfig) -> Array:
    """Stack basis_vector rows for many phases at once; shape (len(values), m)."""
    values = np.asarray(values, dtype=float)
    if np.any(values < 0.0) or np.any(values > 1.0):
        raise DomainError("all phases must lie in [0, 1]")
    if cfg.m == 1:
        return np.ones((values.size, 1))
    raw = np.exp(-0.5 * ((values[:, None] - cfg.centers[None, :]) / cfg.h) ** 2)
    return raw / raw.sum(axis=1, keepdims=True)


def block_basis(nu: float, cfg: BasisConfig) -> Array:
    """Block-diagonal basis matrix: row d holds phi(nu) in block d, zeros elsewhere."""
    return np.kron(np.eye(cfg.n), basis_vector(nu, cfg))


@dataclass(frozen=True)
class PhaseGrid:
    """Discretization of the phase interval into T ordered values."""

    values: Array

    def __post_init__(self) -> None:
        vals = _freeze(np.atleast_1d(self.values))
        if vals.size < 1:
            raise DomainError("phase grid needs at least one value")
        if np.any(np.diff(vals) <= 0):
            raise DomainError("phase values must be strictly increasing")
        if vals.size >= 2 and not (vals[0] == 0.0 and vals[-1] == 1.0):
            raise DomainError("multi-point grids must span [0, 1] inclusive")
        object.__setattr__(self, "values", vals)

    @classmethod
    def uniform(cls, steps: int) -> "PhaseGrid":
        if steps < 1:
            raise DomainError(f"steps must be >= 1, got {steps}")
        if steps == 1:
            # A one-point grid sits at the end of the movement.
            return cls(np.array([1.0]))
        return cls(np.linspace(0.0, 1.0, steps))

    @property
    def steps(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class PoseGaussian:
    """Gaussian over poses: mean (n,) and symmetric positive-definite cov (n, n)."""

    mean: Array
    cov: Array

    def __post_init__(self) -> None:
        mean = _freeze(np.atleast_1d(self.mean))
        cov = _freeze(np.atleast_2d(self.cov))
        if cov.shape != (mean.size, mean.size):
            raise DomainError(f"cov shape {cov.shape} does not match mean length {mean.size}")
        if not np.allclose(cov, cov.T, atol=1e-12):
            raise DomainError("cov must be symmetric within 1e-12")
        if np.any(np.diag(cov) <= 0):
            raise DomainError("cov must have strictly positive diagonal")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return int(self.mean.size)

    def var_diag(self) -> Array:
        return np.diag(self.cov).copy()


@dataclass(frozen=True)
class ProMP:
    """Diagonal Gaussian over basis weights; induces pose Gaussians per phase."""

    basis: BasisConfig
    mean_w: Array
    var_w: Array

    def __post_init__(self) -> None:
        mean_w = _freeze(np.atleast_1d(self.mean_w))
        var_w = _freeze(np.atleast_1d(self.var_w))
        d = self.basis.dim
        if mean_w.size != d or var_w.size != d:
            raise DomainError(
                f"mean_w/var_w must have length m*n = {d}, got {mean_w.size}/{var_w.size}"
            )
        if np.any(var_w <= 0):
            raise DomainError("every entry of var_w must be > 0")
        object.__setattr__(self, "mean_w", mean_w)
        object.__setattr__(self, "var_w", var_w)

    def pose_mean(self, phi: Array) -> Array:
        """Pose mean given basis activations phi (m,): one dot product per DoF."""
        return self.mean_w.reshape(self.basis.n, self.basis.m) @ phi

    def pose_var(self, phi: Array) -> Array:
        """Per-DoF pose variance (the pose covariance is diagonal across DoF)."""
        return self.var_w.reshape(self.basis.n, self.basis.m) @ (phi * phi)


def pose_at_phase(p: ProMP, nu: float) -> PoseGaussian:
    """Pose distribution at one phase: mean Phi*mu, cov Phi*diag(var)*Phi^T."""
    phi = basis_vector(nu, p.basis)
    mean = p.pose_mean(phi)
    # Dense for uniform downstream handling; DoF blocks make it diagonal here.
    cov = np.diag(p.pose_var(phi))
    return PoseGaussian(mean, cov)


def sample_weights(p: ProMP, rng: np.random.Generator) -> Array:
    """One draw from the weight distribution; deterministic under a fixed seed."""
    return p.mean_w + np.sqrt(p.var_w) * rng.standard_normal(p.basis.dim)


def trajectory_from_weights(w: Array, grid: PhaseGrid, cfg: BasisConfig) -> Array:
    """Poses at every grid phase for a concrete weight vector; shape (T, n)."""
    w = np.asarray(w, dtype=float)
    if w.shape != (cfg.dim,):
        raise DomainError(f"weight vector must have length m*n = {cfg.dim}, got {w.shape}")
    phi = basis_matrix(grid.values, cfg)  # (T, m)
    return phi @ w.reshape(cfg.n, cfg.m).T  # (T, n)


@dataclass(frozen=True)
class GuideMixture:
    """Weighted guides plus an optional single-phase freelance component.

    ``log_weights`` covers the guide components and, when present, the
    freelance component as its final entry; the exponentials sum to one.
    """

    components: tuple[ProMP, ...]
    log_weights: Array
    freelance: PoseGaussian | None = None

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        lw = _freeze(np.atleast_1d(self.log_weights))
        expected = len(comps) + (1 if self.freelance is not None else 0)
        if lw.size != expected:
            raise DomainError(f"log_weights must have length {expected}, got {lw.size}")
        total = np.exp(lw).sum()
        if abs(total - 1.0) > 1e-10:
            raise DomainError(f"exp(log_weights) must sum to 1, got {total}")
        if comps:
            base = comps[0].basis
            for c in comps[1:]:
                if c.basis != base:
                    raise DomainError("all components must share one basis config")
            if self.freelance is not None and self.freelance.dim != base.n:
                raise DomainError("freelance dimension must match the basis DoF count")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "log_weights", lw)

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def n_plans(self) -> int:
        """Guide components plus the freelance plan when present."""
        return len(self.components) + (1 if self.freelance is not None else 0)

    @property
    def basis(self) -> BasisConfig:
        if not self.components:
            raise DomainError("mixture has no guide components")
        return self.components[0].basis

    def weights(self) -> Array:
        return np.exp(self.log_weights)

    def to_dict(self) -> dict:
        if self.components:
            b = self.basis
            m, n, h = b.m, b.n, b.h
        elif self.freelance is not None:
            m, n, h = 0, self.freelance.dim, 1.0
        else:
            raise DomainError("cannot serialize an empty mixture")
        doc = {
            "m": m,
            "n": n,
            "h": h,
            "mean_w": [c.mean_w.tolist() for c in self.components],
            "var_w": [c.var_w.tolist() for c in self.components],
            "log_weights": self.log_weights.tolist(),
            "freelance": None,
        }
        if self.freelance is not None:
            doc["freelance"] = {
                "mean": self.freelance.mean.tolist(),
                "var": self.freelance.var_diag().tolist(),
            }
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "GuideMixture":
        freelance = None
        if doc.get("freelance") is not None:
            f = doc["freelance"]
            freelance = PoseGaussian(np.asarray(f["mean"]), np.diag(np.asarray(f["var"])))
        comps = []
        if doc["mean_w"]:
            cfg = BasisConfig(m=int(doc["m"]), n=int(doc["n"]), h=float(doc["h"]))
            comps = [
                ProMP(cfg, np.asarray(mw), np.asarray(vw))
                for mw, vw in zip(doc["mean_w"], doc["var_w"])
            ]
        return cls(tuple(comps), np.asarray(doc["log_weights"]), freelance)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "GuideMixture":
        return cls.from_dict(json.loads(Path(path).read_text()))


def make_freelance(workspace_lo: Array, workspace_hi: Array) -> PoseGaussian:
    """Workspace-covering Gaussian: centered, variance = squared diameter per axis."""
    lo = np.asarray(workspace_lo, dtype=float)
    hi = np.asarray(workspace_hi, dtype=float)
    diam_sq = float(np.sum((hi - lo) ** 2))
    if diam_sq <= 0:
        raise DomainError("workspace must have positive extent")
    return PoseGaussian((lo + hi) / 2.0, np.diag(np.full(lo.size, diam_sq)))


def attach_freelance(
    mixture: GuideMixture, freelance: PoseGaussian, weight: float | None = None
) -> GuideMixture:
    """Add the freelance plan; default weight is an even share among all plans."""
    if mixture.freelance is not None:
        raise DomainError("mixture already has a freelance component")
    n = mixture.n_components
    if weight is None:
        weight = 1.0 / (n + 1)
    if not 0.0 < weight < 1.0:
        raise DomainError(f"freelance weight must lie in (0, 1), got {weight}")
    lw = np.concatenate([mixture.log_weights + math.log1p(-weight), [math.log(weight)]])
    lw -= _logsumexp(lw)
    return GuideMixture(mixture.components, lw, freelance)


def _logsumexp(a: Array) -> float:
    m = np.max(a)
    if not np.isfinite(m):
        return float(m)
    return float(m + np.log(np.sum(np.exp(a - m))))
