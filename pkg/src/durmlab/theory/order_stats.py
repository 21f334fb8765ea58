"""Minimum order statistic of T Gaussian gradient draws.

``prob_min_ge`` compares the minimum of T draws from the ERM gradient
distribution with the minimum of T draws from the (wider) DuRM one.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .gaussian import normal_logpdf, normal_logsf, normal_pdf, normal_sf
from .quadrature import QuadResult, QuadratureError, integrate

LOG_SPACE_ABOVE_T = 1000
MC_CHUNK = 10_000


@dataclass(frozen=True)
class OrderStatsSpec:
    mu: float
    sigma: float
    T: int

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if int(self.T) != self.T or self.T < 1:
            raise ValueError(f"T must be a positive integer, got {self.T}")


def min_order_cdf(spec: OrderStatsSpec, g):
    """``1 - (1 - F(g))^T``."""
    return -np.expm1(spec.T * normal_logsf(g, spec.mu, spec.sigma))


def min_order_pdf(spec: OrderStatsSpec, g):
    """``T (1 - F(g))^(T-1) f(g)``."""
    if spec.T == 1:
        return normal_pdf(g, spec.mu, spec.sigma)
    log_pdf = (
        math.log(spec.T)
        + (spec.T - 1) * normal_logsf(g, spec.mu, spec.sigma)
        + normal_logpdf(g, spec.mu, spec.sigma)
    )
    return np.exp(log_pdf)


def _integrand(spec_erm: OrderStatsSpec, spec_durm: OrderStatsSpec):
    T = spec_erm.T
    a, b = (spec_erm.mu, spec_erm.sigma), (spec_durm.mu, spec_durm.sigma)
    if T > LOG_SPACE_ABOVE_T:
        def f(x):
            return np.exp(
                math.log(T) + T * normal_logsf(x, *a) + (T - 1) * normal_logsf(x, *b) + normal_logpdf(x, *b)
            )
    else:
        def f(x):
            return T * normal_sf(x, *a) ** T * normal_sf(x, *b) ** (T - 1) * normal_pdf(x, *b)
    return f


def min_order_quadrature(
    spec_erm: OrderStatsSpec,
    spec_durm: OrderStatsSpec,
    tol: float = 1e-10,
    max_evaluations: int = 500_000,
    max_residual: float = 1e-8,
) -> QuadResult:
    """``P(min of ERM draws >= min of DuRM draws)`` by adaptive quadrature.

    Integrates ``T (1-F_erm)^T (1-F_durm)^(T-1) f_durm`` over
    ``[mu_lo - 12 s_max, mu_hi + 12 s_max]``.
    """
    _check_pair(spec_erm, spec_durm)
    s = max(spec_erm.sigma, spec_durm.sigma)
    lo = min(spec_erm.mu, spec_durm.mu) - 12.0 * s
    hi = max(spec_erm.mu, spec_durm.mu) + 12.0 * s
    res = integrate(_integrand(spec_erm, spec_durm), lo, hi, tol=tol, max_evaluations=max_evaluations)
    if res.residual > max_residual:
        raise QuadratureError("quadrature did not converge", res.residual, res.value)
    return res


@dataclass
class MonteCarloResult:
    value: float
    stderr: float
    replicas: int


def _mc_chunk(spec_erm, spec_durm, n, seed_seq) -> int:
    rng = np.random.default_rng(seed_seq)
    T = spec_erm.T
    g = spec_erm.mu + spec_erm.sigma * rng.standard_normal((n, T))
    gh = spec_durm.mu + spec_durm.sigma * rng.standard_normal((n, T))
    # ties count toward the >= event
    return int(np.count_nonzero(g.min(axis=1) >= gh.min(axis=1)))


def min_order_monte_carlo(
    spec_erm: OrderStatsSpec,
    spec_durm: OrderStatsSpec,
    replicas: int,
    seed: int = 0,
    jobs: int = 1,
) -> MonteCarloResult:
    """Monte Carlo estimate of the same probability.

    Replicas are split into fixed-size chunks, each with its own child seed,
    so the estimate does not depend on ``jobs``.
    """
    _check_pair(spec_erm, spec_durm)
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    sizes = [MC_CHUNK] * (replicas // MC_CHUNK)
    if replicas % MC_CHUNK:
        sizes.append(replicas % MC_CHUNK)
    seqs = np.random.SeedSequence(int(seed)).spawn(len(sizes))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            hits = sum(pool.map(lambda a: _mc_chunk(spec_erm, spec_durm, *a), zip(sizes, seqs)))
    else:
        hits = sum(_mc_chunk(spec_erm, spec_durm, n, s) for n, s in zip(sizes, seqs))
    p = hits / replicas
    return MonteCarloResult(p, math.sqrt(max(p * (1.0 - p), 0.0) / replicas), replicas)


def prob_min_ge(
    spec_erm: OrderStatsSpec,
    spec_durm: OrderStatsSpec,
    method: str = "quadrature",
    budget: int | None = None,
    seed: int = 0,
) -> float:
    """``P(g_(1) >= g_hat_(1))``; ``budget`` is the node budget or the replica count."""
    if method == "quadrature":
        return min_order_quadrature(spec_erm, spec_durm, max_evaluations=budget or 500_000).value
    if method == "monte_carlo":
        return min_order_monte_carlo(spec_erm, spec_durm, budget or 100_000, seed).value
    raise ValueError(f"unknown method {method!r}")


def _check_pair(a: OrderStatsSpec, b: OrderStatsSpec) -> None:
    if a.T != b.T:
        raise ValueError(f"step counts differ: {a.T} vs {b.T}")
