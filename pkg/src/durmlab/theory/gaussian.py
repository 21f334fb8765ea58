"""Gaussian density, CDF and survival function.

CDF and survival use ``scipy.special.erfc``/``log_ndtr`` (Cephes), whose
relative error is around 1e-15 over the double range, well inside 1e-12.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erfc, log_ndtr

_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def normal_pdf(x, mu: float = 0.0, sigma: float = 1.0):
    z = (np.asarray(x, dtype=np.float64) - mu) / sigma
    return np.exp(-0.5 * z * z) / (sigma * math.sqrt(2.0 * math.pi))


def normal_logpdf(x, mu: float = 0.0, sigma: float = 1.0):
    z = (np.asarray(x, dtype=np.float64) - mu) / sigma
    return -0.5 * z * z - _LOG_SQRT_2PI - math.log(sigma)


def normal_cdf(x, mu: float = 0.0, sigma: float = 1.0):
    z = (np.asarray(x, dtype=np.float64) - mu) / sigma
    return 0.5 * erfc(-z / _SQRT2)


def normal_sf(x, mu: float = 0.0, sigma: float = 1.0):
    """``1 - F(x)``, accurate in the upper tail."""
    z = (np.asarray(x, dtype=np.float64) - mu) / sigma
    return 0.5 * erfc(z / _SQRT2)


def normal_logsf(x, mu: float = 0.0, sigma: float = 1.0):
    z = (np.asarray(x, dtype=np.float64) - mu) / sigma
    return log_ndtr(-z)
