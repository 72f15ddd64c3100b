import math

import numpy as np
import pytest

from pexp.measure import (
    PExpMeasure,
    WaveletBasis,
    anderson_check,
    decentering_check,
    evaluate_function,
    pexp_measure,
    regularity_scan,
    sample_prior,
    sample_prior_block,
    sup_norm_exact,
)
from pexp.sequences import CoefVec, ScalingSpec
from pexp.univariate import PExpParams, cdf, variance


def lin_spec(p, alpha, n, lam=1.0):
    return ScalingSpec(p, alpha, 1, lam, "linear", n=n)


def test_measure_requires_matching_p():
    with pytest.raises(ValueError):
        PExpMeasure(PExpParams(1.0), lin_spec(2.0, 1.0, 4))


def test_degenerate_lambda_rejected():
    with pytest.raises(ValueError):
        lin_spec(2.0, 1.0, 4, lam=0.0)


def test_prior_coordinate_variances():
    # Var(u_ell) = gamma_ell^2 E xi^2 at ell in {1, 10, 100}
    m = pexp_measure(lin_spec(1.5, 1.0, 128))
    rng = np.random.default_rng(21)
    draws = sample_prior_block(m, rng, 10**5)
    g = m.spec.gamma()
    v2 = variance(m.params)
    for ell in (1, 10, 100):
        emp = draws[:, ell - 1].var()
        target = g[ell - 1] ** 2 * v2
        se = target * math.sqrt(2.0 / len(draws)) * 2  # generous spread for 4th moments
        assert abs(emp - target) < 3 * se + 1e-12


def test_prior_mean_squared_norm():
    m = pexp_measure(lin_spec(2.0, 1.0, 256))
    rng = np.random.default_rng(22)
    draws = sample_prior_block(m, rng, 2 * 10**4)
    emp = (draws**2).sum(axis=1).mean()
    target = float((m.spec.gamma() ** 2).sum())
    assert abs(emp - target) < 4 * (draws**2).sum(axis=1).std() / math.sqrt(len(draws))


def test_prior_coordinates_independent():
    m = pexp_measure(lin_spec(1.0, 1.0, 8))
    rng = np.random.default_rng(23)
    draws = sample_prior_block(m, rng, 10**5)
    z = (draws - draws.mean(axis=0)) / draws.std(axis=0)
    corr = (z[:, 2] * z[:, 5]).mean()
    assert abs(corr) < 3.0 / math.sqrt(len(draws))


def test_draws_l2_norm_stabilizes():
    # gamma in l2 so ||u||_2 converges with the truncation: extending each
    # draw from 2^8 to 2^12 coordinates barely moves its norm
    rng = np.random.default_rng(24)
    m_large = pexp_measure(lin_spec(1.5, 1.0, 2**12))
    draws = sample_prior_block(m_large, rng, 400)
    full = np.linalg.norm(draws, axis=1)
    head = np.linalg.norm(draws[:, : 2**8], axis=1)
    assert np.median((full - head) / full) < 1e-3


def test_sample_prior_returns_coefvec():
    m = pexp_measure(ScalingSpec(1.5, 1.0, scheme="dyadic", levels=4))
    u = sample_prior(m, np.random.default_rng(0))
    assert u.scheme == "dyadic" and u.levels == 4 and len(u) == 31


# --- wavelet basis -----------------------------------------------------------


def test_evaluate_zero_function():
    basis = WaveletBasis(4)
    u = CoefVec.dyadic(np.zeros(31), 4)
    assert np.all(evaluate_function(u, basis, np.linspace(0, 1, 17)) == 0)


def test_evaluate_single_level0_hat():
    basis = WaveletBasis(3)
    vals = np.zeros(15)
    vals[0] = 1.0
    u = CoefVec.dyadic(vals, 3)
    x = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    np.testing.assert_allclose(evaluate_function(u, basis, x), [0, 0.5, 1.0, 0.5, 0])


def test_evaluate_is_linear_in_coefficients():
    basis = WaveletBasis(5)
    rng = np.random.default_rng(25)
    x = rng.random(50)
    a = rng.normal(size=63)
    b = rng.normal(size=63)
    fa = evaluate_function(CoefVec.dyadic(a, 5), basis, x)
    fb = evaluate_function(CoefVec.dyadic(b, 5), basis, x)
    fab = evaluate_function(CoefVec.dyadic(2 * a - 3 * b, 5), basis, x)
    np.testing.assert_allclose(fab, 2 * fa - 3 * fb, atol=1e-12)


def test_sup_norm_level_bound():
    # ||u||_inf <= sum_k 2^{k/2} max_l |u_kl| for the hat system
    basis = WaveletBasis(6)
    rng = np.random.default_rng(26)
    vals = rng.normal(size=127)
    u = CoefVec.dyadic(vals, 6)
    dense = np.abs(evaluate_function(u, basis, np.linspace(0, 1, 4097))).max()
    ks = np.concatenate([np.full(2**k, k) for k in range(7)])
    bound = sum(
        2.0 ** (k / 2) * np.abs(vals[ks == k]).max() for k in range(7)
    )
    assert dense <= bound + 1e-12
    assert sup_norm_exact(u, basis) >= dense - 1e-12


def test_sup_norm_exact_on_node_grid():
    basis = WaveletBasis(4)
    rng = np.random.default_rng(27)
    u = CoefVec.dyadic(rng.normal(size=31), 4)
    exact = sup_norm_exact(u, basis)
    dense = np.abs(evaluate_function(u, basis, np.linspace(0, 1, 2**12 + 1))).max()
    assert exact == pytest.approx(dense, rel=1e-12)


# --- regularity scan ---------------------------------------------------------


@pytest.mark.slow
def test_regularity_scan_verdicts():
    m = pexp_measure(lin_spec(1.5, 1.0, 2**14))
    rng = np.random.default_rng(28)
    rows = regularity_scan(m, [0.5, 1.0, 1.5], 2.0, 40, rng)
    verdicts = {r.s: r.verdict for r in rows}
    assert verdicts[0.5] == "CONVERGED"
    assert verdicts[1.0] == "DIVERGING"
    assert verdicts[1.5] == "DIVERGING"


def test_regularity_scan_needs_trials():
    m = pexp_measure(lin_spec(1.5, 1.0, 64))
    with pytest.raises(ValueError):
        regularity_scan(m, [0.5], 2.0, 10, np.random.default_rng(0))


# --- Anderson inequality -----------------------------------------------------


def test_anderson_zero_shift_exact_tie():
    m = pexp_measure(lin_spec(1.0, 1.0, 3))
    res = anderson_check(m, 1.0, np.zeros(3), 10**5, np.random.default_rng(29))
    assert res.p_centered == res.p_shifted
    assert res.verdict == "PASS"


def test_anderson_unit_shift():
    m = pexp_measure(lin_spec(1.0, 1.0, 3))
    res = anderson_check(m, 1.0, [1.0, 0.0, 0.0], 2 * 10**5, np.random.default_rng(30))
    assert res.p_shifted <= res.p_centered
    assert res.verdict == "PASS"


def test_anderson_random_shifts_pass():
    rng = np.random.default_rng(31)
    for p in (1.0, 1.5, 2.0):
        m = pexp_measure(lin_spec(p, 1.0, 3))
        for _ in range(4):
            shift = rng.normal(scale=0.7, size=3)
            res = anderson_check(m, 1.0, shift, 10**5, rng)
            assert res.verdict == "PASS"


def test_anderson_rejects_large_dimension():
    m = pexp_measure(lin_spec(1.0, 1.0, 60))
    with pytest.raises(ValueError):
        anderson_check(m, 1.0, np.zeros(60), 100, np.random.default_rng(0))


# --- decentering bound -------------------------------------------------------


def test_decentering_zero_shift_identity():
    m = pexp_measure(lin_spec(1.5, 1.0, 2))
    res = decentering_check(m, 0.6, np.zeros(2))
    assert res.lhs == res.rhs
    assert res.verdict == "PASS"


def test_decentering_laplace_univariate_analytic():
    # gamma_1 = 1: lhs = F(1.5) - F(0.5), rhs = e^{-1} (2 F(0.5) - 1)
    m = pexp_measure(lin_spec(1.0, 1.0, 1))
    res = decentering_check(m, 0.5, [1.0])
    F = lambda x: cdf(PExpParams(1.0), x)
    assert res.lhs == pytest.approx(F(1.5) - F(0.5), rel=1e-12)
    assert res.rhs == pytest.approx(math.exp(-1.0) * (2 * F(0.5) - 1), rel=1e-12)
    assert res.verdict == "PASS"


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0])
@pytest.mark.parametrize("dim", [1, 2, 3])
def test_decentering_passes_random_shifts(p, dim):
    rng = np.random.default_rng(1000 + dim)
    m = pexp_measure(lin_spec(p, 1.0, dim))
    h = rng.normal(scale=0.5, size=dim)
    res = decentering_check(m, 0.7, h)
    assert res.verdict == "PASS"
    assert res.achieved_tol < 1e-9
