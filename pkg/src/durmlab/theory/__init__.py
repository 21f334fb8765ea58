from .gaussian import normal_cdf, normal_logsf, normal_pdf, normal_sf
from .mixture import (
    GradientMixture,
    durm_variance,
    fit_mixture,
    gaussian_product_params,
    mixture_mean,
    mixture_pdf,
    sample_gradients,
    zero_mean_cross_moment,
)
from .order_stats import (
    MonteCarloResult,
    OrderStatsSpec,
    min_order_cdf,
    min_order_monte_carlo,
    min_order_pdf,
    min_order_quadrature,
    prob_min_ge,
)
from .quadrature import QuadratureError, QuadResult, integrate

__all__ = [
    "GradientMixture",
    "MonteCarloResult",
    "OrderStatsSpec",
    "QuadResult",
    "QuadratureError",
    "durm_variance",
    "fit_mixture",
    "gaussian_product_params",
    "integrate",
    "min_order_cdf",
    "min_order_monte_carlo",
    "min_order_pdf",
    "min_order_quadrature",
    "mixture_mean",
    "mixture_pdf",
    "normal_cdf",
    "normal_logsf",
    "normal_pdf",
    "normal_sf",
    "prob_min_ge",
    "sample_gradients",
    "zero_mean_cross_moment",
]
