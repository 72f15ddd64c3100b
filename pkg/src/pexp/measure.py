"""The p-exponential measure: prior sampling and direct checks of its properties.

A measure is the law of (gamma_ell xi_ell) with xi i.i.d. from the univariate
p-exponential distribution.  Dyadic draws are identified with random
functions on [0, 1] through a Faber-Schauder hat expansion
psi_{kl}(x) = 2^{k/2} Lambda(2^k x - (l - 1)), with Lambda the unit triangle
peaking at 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import univariate
from .sequences import BesovParams, CoefVec, ScalingSpec, besov_weights, z_norm_p


@dataclass(frozen=True)
class PExpMeasure:
    params: univariate.PExpParams
    spec: ScalingSpec

    def __post_init__(self):
        if self.params.p != self.spec.p:
            raise ValueError("params.p and spec.p must agree")


def pexp_measure(spec: ScalingSpec) -> PExpMeasure:
    return PExpMeasure(univariate.PExpParams(spec.p), spec)


@dataclass(frozen=True)
class WaveletBasis:
    """Faber-Schauder hat system on [0, 1].

    Each psi_{kl} is supported on [(l-1) 2^{-k}, l 2^{-k}] with peak 2^{k/2}.
    Hats at one level have disjoint interiors, so the level sup bound holds
    with levelsup_constant 1; the Lipschitz bound |psi(x)-psi(y)| <=
    C1 2^{3k/2} |x-y| holds with C1 = 2.
    """

    levels: int
    kind: str = "faber-schauder"
    holder_constant: float = 2.0
    holder_exponent: float = 1.0
    levelsup_constant: float = 1.0

    def __post_init__(self):
        if self.kind != "faber-schauder":
            raise ValueError(f"unsupported basis kind {self.kind!r}")
        if self.levels < 0:
            raise ValueError("levels must be >= 0")

    @property
    def n_coefficients(self) -> int:
        return 2 ** (self.levels + 1) - 1

    def node_grid(self) -> np.ndarray:
        """Dyadic nodes of level K+1; a piecewise-linear expansion attains its
        sup-norm on this grid."""
        m = 2 ** (self.levels + 1)
        return np.arange(m + 1) / m

    def gather(self, x: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
        """Per level k, the flat coefficient index and hat value at each point.

        Only one hat per level is nonzero at any x, so evaluation is a gather.
        """
        x = np.asarray(x, dtype=float)
        out = []
        for k in range(self.levels + 1):
            pos = np.clip((x * 2**k).astype(int), 0, 2**k - 1)  # l - 1
            t = x * 2**k - pos
            val = 2 ** (k / 2.0) * np.maximum(1.0 - np.abs(2.0 * t - 1.0), 0.0)
            out.append((2**k - 1 + pos, val))
        return out

    def evaluation_matrix(self, x: np.ndarray) -> np.ndarray:
        """Dense (len(x), n_coefficients) matrix of hat values."""
        x = np.asarray(x, dtype=float)
        mat = np.zeros((len(x), self.n_coefficients))
        rows = np.arange(len(x))
        for idx, val in self.gather(x):
            mat[rows, idx] += val
        return mat


def sample_prior(m: PExpMeasure, rng: np.random.Generator) -> CoefVec:
    """One draw u_ell = gamma_ell xi_ell."""
    xi = univariate.sample(m.params, rng, size=m.spec.size)
    values = m.spec.gamma() * xi
    if m.spec.scheme == "dyadic":
        return CoefVec.dyadic(values, m.spec.levels)
    return CoefVec.linear(values)


def sample_prior_block(m: PExpMeasure, rng: np.random.Generator, count: int) -> np.ndarray:
    """(count, size) array of independent draws; rows are i.i.d. prior samples."""
    xi = univariate.sample(m.params, rng, size=(count, m.spec.size))
    return m.spec.gamma() * xi


def evaluate_function(u: CoefVec, basis: WaveletBasis, xgrid) -> np.ndarray:
    """Pointwise sum over levels of u_{kl} psi_{kl}(x); exact for the hat system."""
    if u.scheme != "dyadic":
        raise ValueError("evaluate_function requires a dyadic coefficient vector")
    if u.levels > basis.levels:
        raise ValueError("coefficient levels exceed basis levels")
    xgrid = np.asarray(xgrid, dtype=float)
    out = np.zeros_like(xgrid)
    for k, (idx, val) in enumerate(basis.gather(xgrid)):
        if k > u.levels:
            break
        out += u.values[idx] * val
    return out


def sup_norm_exact(u: CoefVec, basis: WaveletBasis) -> float:
    """Sup norm of the expansion, evaluated exactly on the level K+1 nodes."""
    vals = evaluate_function(u, basis, basis.node_grid())
    return float(np.abs(vals).max())


@dataclass
class RegularityRow:
    s: float
    truncations: np.ndarray
    median_norms: np.ndarray
    slope: float
    verdict: str


def regularity_scan(
    m: PExpMeasure,
    s_grid,
    q: float,
    trials: int,
    rng: np.random.Generator,
    truncations=None,
    slope_threshold: float = 0.05,
    increment_threshold: float = 0.01,
) -> list[RegularityRow]:
    """Empirical norm-growth verdicts across truncations for each smoothness s.

    CONVERGED when the median norm stabilizes (relative increment below 1%),
    DIVERGING when it grows as a power of N (log-log slope above 0.05).
    """
    if trials < 30:
        raise ValueError("regularity_scan needs at least 30 trials")
    if truncations is None:
        truncations = 2 ** np.arange(6, 15)
    truncations = np.asarray(truncations, dtype=int)
    nmax = int(truncations.max())
    spec_full = ScalingSpec(
        m.spec.p, m.spec.alpha, m.spec.d, m.spec.lam, "linear", n=nmax
    )
    gamma = spec_full.gamma()
    s_grid = np.atleast_1d(np.asarray(s_grid, dtype=float))
    norms = np.empty((trials, len(s_grid), len(truncations)))
    for t in range(trials):
        xi = univariate.sample(m.params, rng, size=nmax)
        u = gamma * xi
        for i, s in enumerate(s_grid):
            w = besov_weights(BesovParams(s, q, m.spec.d), nmax)
            csum = np.cumsum(w * np.abs(u) ** q)
            norms[t, i] = csum[truncations - 1] ** (1.0 / q)
    rows = []
    for i, s in enumerate(s_grid):
        med = np.median(norms[:, i, :], axis=0)
        slope = np.polyfit(np.log(truncations), np.log(med), 1)[0]
        last_inc = med[-1] / med[-2] - 1.0
        if slope > slope_threshold:
            verdict = "DIVERGING"
        elif last_inc < increment_threshold:
            verdict = "CONVERGED"
        else:
            verdict = "UNDECIDED"
        rows.append(RegularityRow(float(s), truncations, med, float(slope), verdict))
    return rows


@dataclass
class AndersonResult:
    p_centered: float
    p_shifted: float
    stderr: float
    verdict: str


def anderson_check(
    m: PExpMeasure, eps: float, shift, mc_samples: int, rng: np.random.Generator
) -> AndersonResult:
    """MC comparison of mu(eps B + x) against mu(eps B) for a centered l2 ball.

    PASS when the shifted estimate does not exceed the centered one by more
    than three joint standard errors.
    """
    n = m.spec.size
    if n > 50:
        raise ValueError("anderson_check requires truncation <= 50")
    shift = np.asarray(shift, dtype=float)
    if shift.shape != (n,):
        raise ValueError("shift length must match the spec truncation")
    gamma = m.spec.gamma()
    hits_c = 0
    hits_s = 0
    block = 200_000
    done = 0
    while done < mc_samples:
        b = min(block, mc_samples - done)
        u = gamma * univariate.sample(m.params, rng, size=(b, n))
        hits_c += int((np.sum(u**2, axis=1) <= eps**2).sum())
        hits_s += int((np.sum((u - shift) ** 2, axis=1) <= eps**2).sum())
        done += b
    p_c = hits_c / mc_samples
    p_s = hits_s / mc_samples
    se = float(
        np.sqrt(p_c * (1 - p_c) / mc_samples + p_s * (1 - p_s) / mc_samples)
    )
    verdict = "PASS" if p_s <= p_c + 3.0 * se else "FAIL"
    return AndersonResult(p_c, p_s, se, verdict)


@dataclass
class DecenteringResult:
    lhs: float
    rhs: float
    shift_cost: float
    achieved_tol: float
    verdict: str


class QuadratureError(RuntimeError):
    """Raised when the ball-probability quadrature fails to converge."""


@lru_cache(maxsize=8)
def _leggauss(nodes: int):
    return np.polynomial.legendre.leggauss(nodes)


def _gl_panels(splits, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights on [-pi/2, pi/2], panel-split at the
    given interior angles (where the integrand loses smoothness)."""
    t, w = _leggauss(nodes)
    pts = [-0.5 * np.pi]
    pts += sorted(s for s in splits if -0.5 * np.pi < s < 0.5 * np.pi)
    pts.append(0.5 * np.pi)
    xs, ws = [], []
    for lo, hi in zip(pts[:-1], pts[1:]):
        xs.append(0.5 * (lo + hi) + 0.5 * (hi - lo) * t)
        ws.append(0.5 * (hi - lo) * w)
    return np.concatenate(xs), np.concatenate(ws)


def _kink_angles_sin(c: float, r: float) -> list[float]:
    """Angles where c + r sin(theta) crosses zero (density cusp of f_p)."""
    if r > 0 and abs(c) < r:
        return [float(np.arcsin(-c / r))]
    return []


def _kink_angles_cos(c: float, r: float) -> list[float]:
    """Angles where r cos(theta) equals |c| (CDF-difference cusp)."""
    if r > 0 and abs(c) < r:
        a = float(np.arccos(abs(c) / r))
        return [-a, a]
    return []


def _ball_probability(m: PExpMeasure, eps: float, center: np.ndarray, nodes: int) -> float:
    """mu(eps B_{l2} + center) in dimension <= 3 by iterated Gauss-Legendre.

    The innermost axis is integrated exactly through the univariate CDF;
    outer axes use the substitution x = c + eps sin(theta), which removes the
    square-root edge singularity, with panels split where the p-exponential
    density or the inner CDF difference loses smoothness.
    """
    gamma = m.spec.gamma()
    dim = m.spec.size
    pr = m.params

    def F(i, x):
        return univariate.cdf(pr, x / gamma[i])

    def f(i, x):
        return univariate.pdf(pr, np.asarray(x) / gamma[i]) / gamma[i]

    if dim == 1:
        return float(F(0, center[0] + eps) - F(0, center[0] - eps))

    if dim == 2:
        splits = _kink_angles_sin(center[0], eps) + _kink_angles_cos(center[1], eps)
        theta, wts = _gl_panels(splits, nodes)
        x1 = center[0] + eps * np.sin(theta)
        r = eps * np.cos(theta)
        inner = F(1, center[1] + r) - F(1, center[1] - r)
        return float(np.sum(wts * f(0, x1) * inner * eps * np.cos(theta)))

    if dim == 3:
        splits = (
            _kink_angles_sin(center[0], eps)
            + _kink_angles_cos(center[1], eps)
            + _kink_angles_cos(center[2], eps)
        )
        theta, wts = _gl_panels(splits, nodes)
        x1 = center[0] + eps * np.sin(theta)
        rho = eps * np.cos(theta)
        mid = np.empty_like(theta)
        for j, rj in enumerate(rho):
            sp = _kink_angles_sin(center[1], rj) + _kink_angles_cos(center[2], rj)
            phi, wphi = _gl_panels(sp, nodes)
            x2 = center[1] + rj * np.sin(phi)
            r2 = rj * np.cos(phi)
            inner = F(2, center[2] + r2) - F(2, center[2] - r2)
            mid[j] = np.sum(wphi * f(1, x2) * inner * rj * np.cos(phi))
        return float(np.sum(wts * f(0, x1) * mid * eps * np.cos(theta)))
    raise ValueError("decentering quadrature supports dimension <= 3")


def decentering_check(
    m: PExpMeasure, eps: float, h, nodes: int = 200, conv_tol: float = 1e-9
) -> DecenteringResult:
    """Quadrature check of mu(eps B + h) >= exp(-||h||_Z^p / p) mu(eps B).

    Deterministic: both sides are computed by the same iterated quadrature so
    the h = 0 case is an exact identity.
    """
    dim = m.spec.size
    if dim > 3:
        raise ValueError("decentering_check requires dimension <= 3")
    h = np.asarray(h, dtype=float)
    if h.shape != (dim,):
        raise ValueError("shift length must match the spec truncation")
    lhs = _ball_probability(m, eps, h, nodes)
    centered = _ball_probability(m, eps, np.zeros(dim), nodes)
    cost = float(np.exp(-z_norm_p(h, m.spec) / m.spec.p))
    rhs = cost * centered
    # convergence estimate against a coarser rule
    lhs_lo = _ball_probability(m, eps, h, max(40, nodes * 4 // 5))
    achieved = abs(lhs - lhs_lo) / max(lhs, 1e-300)
    if achieved > max(conv_tol, 1e-6):
        raise QuadratureError(
            f"ball-probability quadrature not converged: relative change {achieved:.2e}"
        )
    verdict = "PASS" if lhs >= rhs * (1.0 - 1e-6) else "FAIL"
    return DecenteringResult(lhs, rhs, cost, achieved, verdict)
