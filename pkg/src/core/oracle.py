"""Exact ground truth for total variation distances and Bayes balanced accuracy.

TVD follows the factor-2 convention: delta = 2 * sup_Z |P_A(Z) - P_B(Z)|,
ranging over [0, 2], so the expected balanced accuracy of the balanced Bayes
rule is 1/2 + delta/4.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import brentq
from scipy.stats import norm

from .errors import UsageError
from ..utils.rng import substream

logger = logging.getLogger(__name__)

# Quadrature half-width in standard deviations; tail mass beyond is < 1e-14.
QUADRATURE_SIGMAS = 8.0


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Probability vector over symbols 0..support-1.

    Attributes:
        probs: Non-negative probabilities summing to one
    """

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 1 or probs.shape[0] < 1:
            raise UsageError("probabilities must be a non-empty vector")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise UsageError(f"probabilities must be finite and >= 0, got {probs.tolist()}")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise UsageError(f"probabilities sum to {probs.sum()!r}, not 1")
        object.__setattr__(self, "probs", probs)

    @property
    def support(self) -> int:
        return int(self.probs.shape[0])

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``size`` symbols."""
        return rng.choice(self.support, size=size, p=self.probs)


@dataclass(frozen=True, eq=False)
class GaussianSpec:
    """Gaussian with diagonal covariance.

    Attributes:
        mean: Mean vector (d,)
        var: Per-dimension variances (d,), all positive
    """

    mean: np.ndarray
    var: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        var = np.atleast_1d(np.asarray(self.var, dtype=np.float64))
        if mean.shape != var.shape or mean.ndim != 1:
            raise UsageError(f"mean {mean.shape} and variance {var.shape} disagree")
        if np.any(var <= 0):
            raise UsageError(f"variances must be positive, got {var.tolist()}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "var", var)

    @property
    def dim(self) -> int:
        return int(self.mean.shape[0])

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(self.var)

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``size`` vectors, shape (size, dim)."""
        return self.mean + self.std * rng.standard_normal((size, self.dim))


def tvd_discrete(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """Total variation distance sum_x |p(x) - q(x)|, in [0, 2]."""
    if p.support != q.support:
        raise UsageError(f"support sizes differ ({p.support} vs {q.support})")
    return float(np.abs(p.probs - q.probs).sum())


def tvd_gaussian_1d(a: GaussianSpec, b: GaussianSpec, resolution: int = 20001) -> float:
    """Integral of |density_a - density_b| by composite Simpson quadrature.

    The grid covers +-8 standard deviations around both means.

    Args:
        a: First Gaussian (dimension 1)
        b: Second Gaussian (dimension 1)
        resolution: Number of grid points (made odd)

    Returns:
        TVD estimate in [0, 2]
    """
    if a.dim != 1 or b.dim != 1:
        raise UsageError("tvd_gaussian_1d needs one-dimensional Gaussians")
    if resolution < 3:
        raise UsageError(f"resolution must be >= 3, got {resolution}")
    if resolution % 2 == 0:
        resolution += 1

    mu_a, mu_b = float(a.mean[0]), float(b.mean[0])
    sd_a, sd_b = float(a.std[0]), float(b.std[0])
    lo = min(mu_a - QUADRATURE_SIGMAS * sd_a, mu_b - QUADRATURE_SIGMAS * sd_b)
    hi = max(mu_a + QUADRATURE_SIGMAS * sd_a, mu_b + QUADRATURE_SIGMAS * sd_b)
    grid = np.linspace(lo, hi, resolution)
    gap = np.abs(norm.pdf(grid, mu_a, sd_a) - norm.pdf(grid, mu_b, sd_b))
    return float(min(2.0, max(0.0, simpson(gap, x=grid))))


def tvd_gaussian_equal_var(gap: float, sigma: float = 1.0) -> float:
    """Closed form 2 * (2 Phi(|gap| / (2 sigma)) - 1) for equal variances."""
    if sigma <= 0:
        raise UsageError(f"sigma must be positive, got {sigma}")
    return float(2.0 * (2.0 * norm.cdf(abs(gap) / (2.0 * sigma)) - 1.0))


def mean_gap_for_tvd(delta: float, sigma: float = 1.0) -> float:
    """Mean distance between two equal-variance 1-D Gaussians with TVD ``delta``.

    Inverts ``tvd_gaussian_1d`` numerically with Brent's method.
    """
    if not 0.0 <= delta < 2.0:
        raise UsageError(f"delta must lie in [0, 2), got {delta}")
    if delta == 0.0:
        return 0.0
    base = GaussianSpec(mean=[0.0], var=[sigma * sigma])

    def residual(gap: float) -> float:
        other = GaussianSpec(mean=[gap], var=[sigma * sigma])
        return tvd_gaussian_1d(base, other) - delta

    return float(brentq(residual, 0.0, 40.0 * sigma, xtol=1e-12))


def bayes_predict(p: DiscreteDistribution, q: DiscreteDistribution, x: int) -> int:
    """Balanced Bayes rule: class 1 iff q(x) >= p(x).

    Args:
        p: Distribution of class 0
        q: Distribution of class 1
        x: Symbol

    Returns:
        Predicted class, 0 or 1
    """
    if p.support != q.support:
        raise UsageError(f"support sizes differ ({p.support} vs {q.support})")
    if not 0 <= x < p.support:
        raise UsageError(f"symbol {x} outside support 0..{p.support - 1}")
    return int(q.probs[x] >= p.probs[x])


def expected_bayes_ba(delta: float) -> float:
    """Expected balanced accuracy of the balanced Bayes rule, 1/2 + delta/4."""
    if not 0.0 <= delta <= 2.0:
        raise UsageError(f"delta must lie in [0, 2], got {delta}")
    return 0.5 + 0.25 * delta


def ba_to_tvd(ba: float) -> float:
    """Convert a balanced accuracy back to TVD units, clamped to [0, 2]."""
    return float(min(2.0, max(0.0, 4.0 * (ba - 0.5))))


def monte_carlo_bayes_ba(
    p: DiscreteDistribution,
    q: DiscreteDistribution,
    m: int,
    n: int,
    trials: int,
    seed: int = 0,
) -> Tuple[float, float]:
    """Average balanced accuracy of the Bayes rule on sampled datasets.

    Each trial draws m symbols from ``p`` (class 0) and n from ``q``
    (class 1) with its own generator and scores the balanced Bayes rule.

    Args:
        p: Distribution of class 0
        q: Distribution of class 1
        m: Class-0 sample size
        n: Class-1 sample size
        trials: Number of trials
        seed: Run seed

    Returns:
        Tuple of (mean balanced accuracy, standard error of the mean)
    """
    if min(m, n, trials) < 1:
        raise UsageError(f"m, n and trials must be >= 1 (got {m}, {n}, {trials})")
    if p.support != q.support:
        raise UsageError(f"support sizes differ ({p.support} vs {q.support})")

    predicts_one = q.probs >= p.probs
    scores = np.empty(trials)
    for trial in range(trials):
        rng = substream(seed, "montecarlo", trial)
        sample_a = p.sample(m, rng)
        sample_b = q.sample(n, rng)
        scores[trial] = 0.5 * (
            np.mean(~predicts_one[sample_a]) + np.mean(predicts_one[sample_b])
        )

    mean = float(scores.mean())
    stderr = float(scores.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    logger.debug(f"Monte Carlo Bayes BA over {trials} trials: {mean:.4f} +- {stderr:.4f}")
    return mean, stderr
