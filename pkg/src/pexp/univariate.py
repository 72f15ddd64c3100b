"""Univariate p-exponential distribution, density c_p * exp(-|x|^p / p).

For p = 1 this is the standard Laplace distribution, for p = 2 the standard
normal.  The normalizing constant is c_p = 1 / (2 p^{1/p} Gamma(1 + 1/p)).
All functions accept scalars or numpy arrays in ``x`` / ``u`` and are pure;
sampling takes an explicit ``numpy.random.Generator``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special


@dataclass(frozen=True)
class PExpParams:
    """Exponent p of the distribution, restricted to [1, 2]."""

    p: float

    def __post_init__(self):
        if not (1.0 <= self.p <= 2.0):
            raise ValueError(f"p must lie in [1, 2], got {self.p}")

    @property
    def norm_const(self) -> float:
        """c_p = 1 / (2 p^{1/p} Gamma(1 + 1/p))."""
        p = self.p
        return 1.0 / (2.0 * p ** (1.0 / p) * math.gamma(1.0 + 1.0 / p))

    @property
    def tail_lower_const(self) -> float:
        """r1 = 2 c_p e^{-1/p}, the slope of the lower bound P(|xi| <= x) >= r1 x on (0, 1]."""
        return 2.0 * self.norm_const * math.exp(-1.0 / self.p)


def pdf(params: PExpParams, x):
    """Density c_p exp(-|x|^p / p)."""
    x = np.asarray(x, dtype=float)
    out = params.norm_const * np.exp(-np.abs(x) ** params.p / params.p)
    return out if out.ndim else float(out)


def log_pdf(params: PExpParams, x):
    x = np.asarray(x, dtype=float)
    out = math.log(params.norm_const) - np.abs(x) ** params.p / params.p
    return out if out.ndim else float(out)


def _cdf_generic(params: PExpParams, x):
    """CDF via the regularized lower incomplete gamma of |x|^p / p with shape 1/p."""
    x = np.asarray(x, dtype=float)
    p = params.p
    return 0.5 * (1.0 + np.sign(x) * special.gammainc(1.0 / p, np.abs(x) ** p / p))


def cdf(params: PExpParams, x):
    """P(X <= x).  Closed forms at p = 1 (Laplace) and p = 2 (normal)."""
    x = np.asarray(x, dtype=float)
    if params.p == 1.0:
        out = np.where(x < 0, 0.5 * np.exp(-np.abs(x)), 1.0 - 0.5 * np.exp(-np.abs(x)))
    elif params.p == 2.0:
        out = special.ndtr(x)
    else:
        out = _cdf_generic(params, x)
    return out if out.ndim else float(out)


def _quantile_generic(params: PExpParams, u):
    u = np.asarray(u, dtype=float)
    p = params.p
    mag = (p * special.gammaincinv(1.0 / p, np.abs(2.0 * u - 1.0))) ** (1.0 / p)
    return np.sign(u - 0.5) * mag


def quantile(params: PExpParams, u):
    """Inverse CDF on (0, 1)."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0.0) or np.any(u >= 1.0):
        raise ValueError("quantile requires 0 < u < 1")
    if params.p == 1.0:
        out = np.where(u < 0.5, np.log(2.0 * u), -np.log(2.0 * (1.0 - u)))
    elif params.p == 2.0:
        out = special.ndtri(u)
    else:
        out = _quantile_generic(params, u)
    return out if out.ndim else float(out)


def sample(params: PExpParams, rng: np.random.Generator, size=None):
    """Exact draw: |X| = (p G)^{1/p} with G ~ Gamma(1/p, 1), independent random sign."""
    p = params.p
    g = rng.standard_gamma(1.0 / p, size=size)
    signs = np.where(rng.random(size=size) < 0.5, -1.0, 1.0)
    out = signs * (p * g) ** (1.0 / p)
    return out if np.ndim(out) else float(out)


def moment(params: PExpParams, k: int) -> float:
    """E|X|^k = p^{k/p} Gamma((k+1)/p) / Gamma(1/p), k >= 1.  Odd signed moments vanish."""
    if k < 1 or int(k) != k:
        raise ValueError("moment order k must be a positive integer")
    p = params.p
    return p ** (k / p) * math.exp(special.gammaln((k + 1) / p) - special.gammaln(1 / p))


def variance(params: PExpParams) -> float:
    return moment(params, 2)
