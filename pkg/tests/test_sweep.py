import math

import numpy as np
import pytest

from kinlangevin.errors import UnstableParametersError
from kinlangevin.gaussian_exact import (
    ProductGaussianLaw,
    log1p_chi2_gaussian,
    product_pi_law,
    propagate_discrete,
    tv_upper_from_chi2,
    warm_start_law,
)
from kinlangevin.kernel import FrictionStep, compute_coefficients
from kinlangevin.sweep import (
    matched_bias_eta_overdamped,
    run_sweep,
    steps_to_accuracy_kinetic,
    steps_to_accuracy_overdamped,
    theory_eta_overdamped,
)


def test_theory_eta_overdamped_formula():
    eps, n, L, C_P, chi2 = 0.1, 16, 1.0, 1.0, 10.0
    t = C_P * math.log(chi2 / eps)
    mix = math.sqrt(n) + math.sqrt(math.log1p(chi2))
    assert theory_eta_overdamped(eps, n, L, C_P, chi2) == pytest.approx(
        eps ** 2 / (L * L * t * mix * mix), rel=1e-14)


def test_kinetic_scan_agrees_with_law_propagation_oracle():
    # the scan's first crossing must match a direct law propagation
    lambdas = [1.0] * 8
    beta, eta, chi2, eps = 1.0, 0.02, 5.0, 0.3
    k = steps_to_accuracy_kinetic(lambdas, beta, eta, chi2, eps, 100_000)
    assert k > 0
    cf = compute_coefficients(FrictionStep(beta, eta))
    pi = product_pi_law(lambdas)
    law_prev = propagate_discrete(warm_start_law(lambdas, chi2), lambdas, cf, k - 1)
    law_k = propagate_discrete(law_prev, lambdas, cf, 1)
    assert tv_upper_from_chi2(math.expm1(log1p_chi2_gaussian(law_k, pi))) <= eps
    assert tv_upper_from_chi2(math.expm1(log1p_chi2_gaussian(law_prev, pi))) > eps


def test_overdamped_scan_first_crossing_brackets_threshold():
    lambdas = [1.0] * 4
    eta, chi2, eps = 0.01, 5.0, 0.3
    k = steps_to_accuracy_overdamped(lambdas, eta, chi2, eps, 1_000_000)
    assert k > 0

    def total_tv(steps):
        share = math.log1p(chi2) / len(lambdas)
        m = math.sqrt(share)
        v = 1.0
        a = 1.0 - eta
        for _ in range(steps):
            m = a * m
            v = a * a * v + 2.0 * eta
        A0 = 2.0 / v - 1.0
        val = math.sqrt(1.0 / (A0 * v * v)) * math.exp(
            0.5 * (2 * m / v) ** 2 / A0 - m * m / v)
        return tv_upper_from_chi2(math.expm1(len(lambdas) * math.log1p(val - 1.0)))

    assert total_tv(k) <= eps < total_tv(k - 1)


def test_scan_immediate_success_returns_zero():
    assert steps_to_accuracy_kinetic([1.0], 1.0, 0.01, 0.05, 0.9, 100) == 0


def test_scan_cap_returns_minus_one():
    assert steps_to_accuracy_kinetic([1.0] * 16, 1.0, 1e-4, 10.0, 0.1, 50) == -1


def test_scan_rejects_unstable_parameters():
    with pytest.raises(UnstableParametersError):
        steps_to_accuracy_kinetic([4.0], 0.5, 3.0, 10.0, 0.1, 100)
    with pytest.raises(UnstableParametersError):
        steps_to_accuracy_overdamped([1.0], 2.5, 10.0, 0.1, 100)


def test_matched_bias_eta_equalizes_stationary_kl():
    from kinlangevin.gaussian_exact import discrete_stationary, pi_mode_law, kl_gaussian_2d
    lams = np.array([1.0])
    mults = np.array([1.0])
    beta, eta_kin = 1.0, 0.05
    eta_od = matched_bias_eta_overdamped(lams, mults, beta, eta_kin)
    cf = compute_coefficients(FrictionStep(beta, eta_kin))
    kin_bias = kl_gaussian_2d(discrete_stationary(1.0, cf), pi_mode_law(1.0))
    v = 2.0 * eta_od / (1.0 - (1.0 - eta_od) ** 2)
    od_bias = 0.5 * (v - 1.0 - math.log(v))
    assert od_bias == pytest.approx(kin_bias, rel=1e-6)


def test_run_sweep_theory_mode_scaling():
    rows = run_sweep([4, 16], [1.0], 0.2, 10.0, "theory")
    assert [r.n for r in rows] == [4, 16]
    for r in rows:
        assert not r.capped
        assert r.steps_overdamped > r.steps_kinetic
        assert r.ratio == r.steps_overdamped / r.steps_kinetic
        assert r.beta_kinetic == 1.0
    assert rows[1].ratio > rows[0].ratio


def test_run_sweep_matched_bias_mode_is_flat():
    rows = run_sweep([4, 64], [1.0], 0.2, 10.0, "matched_bias")
    assert not any(r.capped for r in rows)
    # equal-bias matching removes the dimension separation by design
    assert rows[1].ratio == pytest.approx(rows[0].ratio, rel=0.15)


def test_run_sweep_trivial_dimension_one():
    rows = run_sweep([1], [1.0], 0.5, 2.0, "theory")
    r = rows[0]
    assert not r.capped
    assert r.steps_kinetic <= 200 and r.steps_overdamped <= 200
    assert 0.1 <= r.ratio <= 10.0


def test_run_sweep_looser_accuracy_never_needs_more_steps():
    tight = run_sweep([16], [1.0], 0.1, 10.0, "theory")[0]
    # same step sizes, looser target: re-scan with the tight etas
    k_kin_loose = steps_to_accuracy_kinetic([1.0] * 16, tight.beta_kinetic,
                                            tight.eta_kinetic, 10.0, 0.2,
                                            5_000_000)
    k_od_loose = steps_to_accuracy_overdamped([1.0] * 16, tight.eta_overdamped,
                                              10.0, 0.2, 5_000_000)
    assert k_kin_loose <= tight.steps_kinetic
    assert k_od_loose <= tight.steps_overdamped


def test_run_sweep_capped_rows_are_flagged():
    rows = run_sweep([16], [1.0], 0.1, 10.0, "theory", max_steps=10)
    assert rows[0].capped
    assert rows[0].steps_kinetic == -1 or rows[0].steps_overdamped == -1
    assert math.isnan(rows[0].ratio)


def test_run_sweep_validation():
    with pytest.raises(ValueError):
        run_sweep([4], [1.0], 0.1, 10.0, "bogus")
    with pytest.raises(ValueError):
        run_sweep([4], [-1.0], 0.1, 10.0, "theory")
    with pytest.raises(ValueError):
        run_sweep([0], [1.0], 0.1, 10.0, "theory")


def test_run_sweep_tiles_eigenvalue_pattern():
    rows = run_sweep([4], [1.0, 2.0], 0.2, 10.0, "theory")
    assert rows[0].steps_kinetic > 0
    # L = 2, C_P = 1: log-concave friction is 1/sqrt(C_P) = 1
    assert rows[0].beta_kinetic == 1.0
