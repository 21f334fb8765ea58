"""Two-component Gaussian model of per-class logit gradients.

Negative samples (label != c) contribute gradients around ``-mu_n``,
positive samples around ``1 - mu_p``. DuRM adds an independent zero-mean
perturbation of standard deviation ``sigma_d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian import normal_pdf
from .quadrature import integrate


@dataclass(frozen=True)
class GradientMixture:
    alpha: float
    mu_n: float
    sigma_n: float
    mu_p: float
    sigma_p: float
    sigma_d: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if not (self.sigma_n > 0 and self.sigma_p > 0):
            raise ValueError("sigma_n and sigma_p must be positive")
        if self.sigma_d < 0:
            raise ValueError("sigma_d must be non-negative")

    @property
    def negative_mean(self) -> float:
        return -self.mu_n

    @property
    def positive_mean(self) -> float:
        return 1.0 - self.mu_p


def mixture_pdf(m: GradientMixture, g):
    return m.alpha * normal_pdf(g, m.negative_mean, m.sigma_n) + (1.0 - m.alpha) * normal_pdf(
        g, m.positive_mean, m.sigma_p
    )


def mixture_mean(m: GradientMixture) -> float:
    return m.alpha * m.negative_mean + (1.0 - m.alpha) * m.positive_mean


def durm_variance(m: GradientMixture) -> tuple[float, float]:
    """Gradient variance without and with the dummy perturbation.

    The gradient is modelled as the weighted sum ``alpha*g_n + (1-alpha)*g_p``
    of independent components, hence ``alpha^2 s_n^2 + (1-alpha)^2 s_p^2``;
    the perturbation is independent, so its variance simply adds.
    """
    var_erm = m.alpha**2 * m.sigma_n**2 + (1.0 - m.alpha) ** 2 * m.sigma_p**2
    return var_erm, var_erm + m.sigma_d**2


def sample_gradients(m: GradientMixture, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``n`` ERM gradients and their DuRM counterparts (same draws plus noise)."""
    g_n = rng.normal(m.negative_mean, m.sigma_n, n)
    g_p = rng.normal(m.positive_mean, m.sigma_p, n)
    g = m.alpha * g_n + (1.0 - m.alpha) * g_p
    noise = rng.normal(0.0, m.sigma_d, n) if m.sigma_d > 0 else np.zeros(n)
    return g, g + noise


def fit_mixture(grads, labels, k: int, sigma_floor: float = 1e-12) -> GradientMixture:
    """Method-of-moments fit of the two components to logit gradients of class ``k``.

    ``grads`` are recorded loss gradients ``p - y`` (rows are samples); they
    are negated to match the model's sign. ``alpha`` is set to the fraction
    of negative samples, which is a modelling choice rather than something
    the model pins down.
    """
    g = -np.asarray(grads, dtype=np.float64)[:, k]
    pos = np.asarray(labels) == k
    if pos.all() or not pos.any():
        raise ValueError("need both positive and negative samples for class k")
    neg_g, pos_g = g[~pos], g[pos]
    return GradientMixture(
        alpha=float(np.mean(~pos)),
        mu_n=float(-neg_g.mean()),
        sigma_n=max(float(neg_g.std()), sigma_floor),
        mu_p=float(1.0 - pos_g.mean()),
        sigma_p=max(float(pos_g.std()), sigma_floor),
    )


def gaussian_product_params(mu1: float, s1: float, mu2: float, s2: float) -> tuple[float, float, float]:
    """Write ``N(x; mu1, s1^2) * N(x; mu2, s2^2)`` as ``scale * N(x; mean, var)``."""
    if not (s1 > 0 and s2 > 0):
        raise ValueError("standard deviations must be positive")
    v1, v2 = s1 * s1, s2 * s2
    mean = (mu1 * v2 + mu2 * v1) / (v1 + v2)
    var = v1 * v2 / (v1 + v2)
    scale = math.exp(-((mu1 - mu2) ** 2) / (2.0 * v1 + 2.0 * v2)) / (2.0 * math.pi * s1 * s2) * math.sqrt(
        2.0 * math.pi * var
    )
    return mean, var, scale


def zero_mean_cross_moment(s1: float, s2: float, tol: float = 1e-13) -> float:
    """``integral of g * f1(g) * f2(g) dg`` for zero-mean Gaussians f1, f2.

    This is the cross term in the independence step of the variance
    argument; the integrand is odd, so the exact value is 0.
    """
    half = 40.0 * max(s1, s2)
    return integrate(lambda g: g * normal_pdf(g, 0.0, s1) * normal_pdf(g, 0.0, s2), -half, half, tol=tol).value
