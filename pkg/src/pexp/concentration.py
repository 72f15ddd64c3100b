"""Numerical evaluation of the concentration function phi_w(eps).

phi_w(eps) = (1/p) inf { ||h||_Z^p : ||h - w||_2 <= eps } - log mu(eps B).

The approximation term is solved exactly: the objective is coordinate
separable and convex, so an outer bisection on the KKT multiplier combined
with per-coordinate one-dimensional solves reaches machine-level KKT
residuals.  The small-ball term is Monte Carlo with Wilson confidence
intervals mapped through -log.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import univariate
from .measure import PExpMeasure, WaveletBasis
from .sequences import ScalingSpec, coef_values


class ZeroHitsError(RuntimeError):
    """No Monte Carlo draw landed inside the ball; raise eps or samples."""


class SolverError(RuntimeError):
    """Projection solver failed to reach its residual target."""


class SmallBallResolutionError(RuntimeError):
    """Required small-ball probability below the Monte Carlo guard."""


P_MIN_GUARD = 1e-4  # smallest probability treated as MC-estimable at desk scale


@dataclass
class ConcEstimate:
    eps: float
    inf_term: float
    argmin: np.ndarray
    neglog_smallball: float
    neglog_ci: tuple[float, float]
    phi: float


@dataclass
class SmallBallEstimate:
    eps: float
    p_hat: float
    neglog: float
    ci: tuple[float, float]
    hits: int
    samples: int


def _inner_solve(a, c, lam, p, with_bracket=False):
    """argmin_h c h^p + lam (h - a)^2 over h >= 0, coordinatewise (a >= 0)."""
    if p == 1.0:
        h = np.maximum(a - c / (2.0 * lam), 0.0)
        return (h, h, h) if with_bracket else h
    if p == 2.0:
        h = lam * a / (lam + c)
        return (h, h, h) if with_bracket else h
    # safeguarded Newton on g(h) = c p h^{p-1} - 2 lam (a - h), increasing on (0, a]
    lo = np.zeros_like(a)
    hi = a.copy()
    h = 0.5 * a
    for _ in range(90):
        g = c * p * h ** (p - 1.0) - 2.0 * lam * (a - h)
        pos = g > 0
        hi = np.where(pos, h, hi)
        lo = np.where(pos, lo, h)
        dg = c * p * (p - 1.0) * np.maximum(h, 1e-300) ** (p - 2.0) + 2.0 * lam
        step = np.where(dg > 0, g / np.where(dg > 0, dg, 1.0), 0.0)
        h_new = h - step
        inside = (h_new > lo) & (h_new < hi)
        h = np.where(inside, h_new, 0.5 * (lo + hi))
    return (h, lo, hi) if with_bracket else h


def inf_term_exact(w, eps: float, spec: ScalingSpec) -> tuple[float, np.ndarray]:
    """min sum gamma^{-p} |h|^p subject to ||h - w||_2 <= eps, solved by KKT.

    Returns the optimal value (the p-th power of the Z-norm, without the 1/p
    factor) and the minimizer.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    w = coef_values(w)
    if len(w) != spec.size:
        raise ValueError("w length must match the spec truncation")
    a = np.abs(w)
    sgn = np.sign(w)
    p = spec.p
    c = spec.gamma() ** (-p)
    if math.sqrt(float((w**2).sum())) <= eps:
        return 0.0, np.zeros_like(w)

    def residual(lam):
        h = _inner_solve(a, c, lam, p)
        return math.sqrt(float(((h - a) ** 2).sum())), h

    lam_hi = 1.0
    r_hi, _ = residual(lam_hi)
    while r_hi > eps:
        lam_hi *= 4.0
        if lam_hi > 1e305:
            raise SolverError("multiplier bracket overflow")
        r_hi, _ = residual(lam_hi)
    lam_lo = 0.0
    for _ in range(220):
        lam = 0.5 * (lam_lo + lam_hi)
        if lam == lam_lo or lam == lam_hi:
            break
        r, _ = residual(lam)
        if r > eps:
            lam_lo = lam
        else:
            lam_hi = lam
    r, h = residual(lam_hi)
    if abs(r - eps) > 1e-10 * eps + 1e-14:
        raise SolverError(f"primal residual {abs(r - eps):.3e} above tolerance")
    kkt = _kkt_residual(a, c, lam_hi, p)
    if kkt > 1e-9:
        raise SolverError(f"KKT residual {kkt:.3e} above 1e-9")
    value = float((c * h**p).sum())
    return value, sgn * h


def _kkt_residual(a, c, lam, p) -> float:
    """Per-coordinate optimality residual: the stationarity defect, except
    where the solve certifies the root through a sign bracket, in which case
    the relative bracket width bounds the error (the raw defect is
    ill-conditioned where the gradient of h^{p-1} blows up near zero)."""
    h, lo, hi = _inner_solve(a, c, lam, p, with_bracket=True)
    scale = c * p * np.maximum(a, 1e-300) ** (p - 1.0) + 2.0 * lam * a + 1e-300
    active = h > 0
    res = np.zeros_like(h)
    ha = np.where(active, h, 1.0)
    res[active] = np.abs(c * p * ha ** (p - 1.0) - 2.0 * lam * (a - ha))[active]
    if p == 1.0:
        res[~active] = np.maximum(2.0 * lam * a - c, 0.0)[~active]
    rel = res / scale
    bracket = (hi - lo) / np.maximum(a, 1e-300)
    return float(np.minimum(rel, bracket).max(initial=0.0))


def inf_term_truncation_ub(w, eps: float, spec: ScalingSpec) -> tuple[float, int]:
    """Upper bound from the proof construction: keep the first L coordinates,
    L minimal with ||h_{1:L} - w||_2 <= eps.  Always >= the exact value."""
    w = coef_values(w)
    if len(w) != spec.size:
        raise ValueError("w length must match the spec truncation")
    total = float((w**2).sum())
    if math.sqrt(total) <= eps:
        return 0.0, 0
    # tail2[L] = sum_{ell > L} w_ell^2 for L = 0..N
    tail2 = np.concatenate([[total], total - np.cumsum(w**2)])
    ok = np.sqrt(np.maximum(tail2, 0.0)) <= eps
    L = int(np.argmax(ok))
    c = spec.gamma() ** (-spec.p)
    value = float((c[:L] * np.abs(w[:L]) ** spec.p).sum())
    return value, L


def _wilson_ci(hits: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    ph = hits / n
    denom = 1.0 + z**2 / n
    center = (ph + z**2 / (2 * n)) / denom
    half = z * math.sqrt(ph * (1 - ph) / n + z**2 / (4 * n**2)) / denom
    return max(center - half, 0.0), min(center + half, 1.0)


def _norm_samples(
    m: PExpMeasure,
    norm: str,
    samples: int,
    rng: np.random.Generator,
    basis: WaveletBasis | None,
    block: int,
) -> np.ndarray:
    gamma = m.spec.gamma()
    ncoef = m.spec.size
    out = np.empty(samples)
    if norm == "sup":
        if m.spec.scheme != "dyadic":
            raise ValueError("sup-norm small balls require the dyadic scheme")
        if basis is None:
            basis = WaveletBasis(m.spec.levels)
        Psi = basis.evaluation_matrix(basis.node_grid())[:, :ncoef]
    done = 0
    while done < samples:
        b = min(block, samples - done)
        mags = (m.spec.p * rng.standard_gamma(1.0 / m.spec.p, size=(b, ncoef))) ** (
            1.0 / m.spec.p
        )
        if norm == "l2":
            # signs are irrelevant for the l2 norm
            out[done : done + b] = np.sqrt(((mags * gamma) ** 2).sum(axis=1))
        elif norm == "sup":
            signs = np.where(rng.random((b, ncoef)) < 0.5, -1.0, 1.0)
            u = signs * mags * gamma
            out[done : done + b] = np.abs(u @ Psi.T).max(axis=1)
        else:
            raise ValueError(f"unknown norm {norm!r}")
        done += b
    return out


def smallball_mc(
    m: PExpMeasure,
    eps,
    norm: str = "l2",
    samples: int = 10**6,
    rng: np.random.Generator | None = None,
    basis: WaveletBasis | None = None,
    block: int = 50_000,
):
    """-log mu(eps B) by Monte Carlo; eps may be a scalar or a grid.

    Returns a SmallBallEstimate (or a list of them for a grid).  Raises
    ZeroHitsError when no draw lands inside a ball.
    """
    if rng is None:
        rng = np.random.default_rng()
    eps_arr = np.atleast_1d(np.asarray(eps, dtype=float))
    if (eps_arr <= 0).any():
        raise ValueError("eps must be positive")
    norms = _norm_samples(m, norm, samples, rng, basis, block)
    norms.sort()
    results = []
    for e in eps_arr:
        hits = int(np.searchsorted(norms, e, side="right"))
        if hits == 0:
            raise ZeroHitsError(
                f"no draws inside the ball at eps={e}; raise eps or samples"
            )
        ph = hits / samples
        lo, hi = _wilson_ci(hits, samples)
        results.append(
            SmallBallEstimate(
                float(e),
                ph,
                -math.log(ph),
                (-math.log(hi), -math.log(lo) if lo > 0 else math.inf),
                hits,
                samples,
            )
        )
    return results[0] if np.isscalar(eps) or np.ndim(eps) == 0 else results


def smallball_slope(estimates) -> tuple[float, float]:
    """OLS slope of log(-log p) against log(eps) with its standard error."""
    x = np.log([e.eps for e in estimates])
    y = np.log([e.neglog for e in estimates])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    dof = max(len(x) - 2, 1)
    se = math.sqrt(float(resid @ resid) / dof / float(((x - x.mean()) ** 2).sum()))
    return float(slope), se


def concentration_fn(
    w,
    eps: float,
    m: PExpMeasure,
    norm: str = "l2",
    mc_samples: int = 10**5,
    rng: np.random.Generator | None = None,
    basis: WaveletBasis | None = None,
) -> ConcEstimate:
    """Assemble phi_w(eps) = inf_term / p + neglog small ball.

    Rescaling by lam factors out exactly: the approximation term is lam^{-p}
    times its unit-scaling value (same minimizer), and the centered ball of
    radius eps under the rescaled measure is the ball of radius eps / lam
    under the unit-scaling measure.
    """
    lam = m.spec.lam
    unit = PExpMeasure(m.params, m.spec.unit())
    value, argmin = inf_term_exact(w, eps, unit.spec)
    value *= lam ** (-m.spec.p)
    sb = smallball_mc(unit, eps / lam, norm, mc_samples, rng, basis)
    phi = value / m.spec.p + sb.neglog
    return ConcEstimate(float(eps), value, argmin, sb.neglog, sb.ci, phi)


def fg_values(p: float, alpha: float, d: int, setting: str, a: float, eps: float):
    """The complexity-bound functions f(a), g(eps) for the two settings.

    l2:  f(a) = a^p (1 v a^{(2d - pd)/(d + 2 alpha)}),
         g(e) = 2 (1 v e^{-2d/(d + 2 alpha)}).
    sup: f(a) = c a^{(2 - p + 2 alpha p)/(2 alpha)} with c = 1 reported here,
         g(e) = e^{-1/alpha}.
    """
    if a <= 0 or eps <= 0:
        raise ValueError("a and eps must be positive")
    if setting == "l2":
        f = a**p * max(1.0, a ** ((2 * d - p * d) / (d + 2 * alpha)))
        g = 2.0 * max(1.0, eps ** (-2 * d / (d + 2 * alpha)))
        return f, g
    if setting == "sup":
        f = a ** ((2 - p + 2 * alpha * p) / (2 * alpha))
        g = eps ** (-1.0 / alpha)
        return f, g
    raise ValueError(f"unknown setting {setting!r}")


def rate_solve_numeric(
    w,
    m: PExpMeasure,
    n: float,
    mc_samples: int = 10**5,
    rng: np.random.Generator | None = None,
    norm: str = "l2",
    grid_tol: float = 0.02,
    basis: WaveletBasis | None = None,
) -> float:
    """Smallest grid eps with phi_w(eps) <= n eps^2, using the CI upper bound.

    phi is decreasing and n eps^2 increasing, so the crossing is unique; the
    search bisects in log eps.  Raises SmallBallResolutionError when the
    crossing requires probabilities below the MC guard.
    """
    if rng is None:
        rng = np.random.default_rng()
    if n < 1:
        raise ValueError("n must be >= 1")
    guard = -math.log(P_MIN_GUARD)

    def exceeds(e) -> bool:
        """True when phi_w(e) provably exceeds n e^2 at CI confidence."""
        try:
            est = concentration_fn(w, e, m, norm, mc_samples, rng, basis)
        except ZeroHitsError as exc:
            if n * e**2 < guard:
                return True
            raise SmallBallResolutionError(
                f"small-ball probability at eps={e:.4g} below the MC guard; reduce n"
            ) from exc
        if est.neglog_smallball > guard:
            if n * e**2 < est.neglog_ci[0]:
                return True
            raise SmallBallResolutionError(
                f"small-ball probability at eps={e:.4g} below the MC guard; reduce n"
            )
        return est.inf_term / m.spec.p + est.neglog_ci[1] > n * e**2

    # initial scale: prior root-mean-square size
    e_hi = math.sqrt(float((m.spec.gamma() ** 2).sum()) * univariate.variance(m.params))
    for _ in range(60):
        if not exceeds(e_hi):
            break
        e_hi *= 2.0
    else:
        raise SolverError("failed to bracket the rate equation from above")
    e_lo = e_hi
    for _ in range(60):
        e_lo *= 0.5
        if exceeds(e_lo):
            break
    while e_hi / e_lo > 1.0 + grid_tol:
        mid = math.sqrt(e_lo * e_hi)
        if exceeds(mid):
            e_lo = mid
        else:
            e_hi = mid
    return e_hi
