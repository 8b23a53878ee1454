import math

import numpy as np
import pytest

from kinlangevin.kernel import (
    SERIES_THRESHOLD,
    FrictionStep,
    compute_coefficients,
    sample_noise,
    step_mean,
    _direct_a_pos_grad,
    _series_a_pos_grad,
)

# (beta, eta) -> (a, b, c, pos_grad, pos_vel, vel_decay), evaluated in
# 40-digit arithmetic and rounded to double.
REFERENCE = {
    (1.0, 0.001): (6.661668999166913e-10, 0.001998001332666933, 9.99000583083419e-07,
                   4.998333749916681e-07, 0.0009995001666250084, 0.999000499833375),
    (0.003, 2.0): (0.015928201168764093, 0.01192828713806946, 0.011928251353336871,
                   1.9960059928071938, 1.9940119820215784, 0.9940179640539353),
    (7.0, 0.002): (3.694388164740773e-08, 0.02761163319875311, 2.7611182217583426e-05,
                   1.9906992420796629e-06, 0.0019860651053054424, 0.9860975442628619),
    (1.0, math.log(2)): (0.1362943611198906, 0.75, 0.25,
                         0.1931471805599453, 0.5, 0.5),
    (2.5, 0.8): (0.24368407904923468, 0.9816843611112658, 0.2990580289662035,
                 0.18165364531785805, 0.3458658867053549, 0.13533528323661267),
    (500.0, 0.01): (2.8107625552266318e-05, 0.9999546000702375, 0.001973139011863183,
                    1.6026951787996342e-05, 0.001986524106001829, 0.006737946999085467),
    (0.001, 5.0): (0.08302156119983635, 0.009950166250831947, 0.02487536380342687,
                   12.479192682313353, 4.987520807317687, 0.9950124791926823),
    (40.0, 0.0001): (2.658681578691835e-11, 0.00796808516293937, 3.984037269421409e-07,
                     4.9933399946702207e-09, 9.980026640021319e-05, 0.9960079893439915),
}


def test_zero_step_is_identity():
    cf = compute_coefficients(FrictionStep(1.0, 0.0))
    assert cf.is_identity
    assert cf.vel_decay == 1.0
    for field in ("pos_vel", "pos_grad", "vel_grad", "a", "b", "c"):
        assert getattr(cf, field) == 0.0


@pytest.mark.parametrize("beta,eta", sorted(REFERENCE))
def test_reference_values(beta, eta):
    a, b, c, pg, pv, vd = REFERENCE[(beta, eta)]
    cf = compute_coefficients(FrictionStep(beta, eta))
    assert cf.a == pytest.approx(a, rel=1e-12)
    assert cf.b == pytest.approx(b, rel=1e-12)
    assert cf.c == pytest.approx(c, rel=1e-12)
    assert cf.pos_grad == pytest.approx(pg, rel=1e-12)
    assert cf.pos_vel == pytest.approx(pv, rel=1e-12)
    assert cf.vel_grad == cf.pos_vel
    assert cf.vel_decay == pytest.approx(vd, rel=1e-12)


def test_log2_point_psd_margin():
    cf = compute_coefficients(FrictionStep(1.0, math.log(2)))
    assert cf.a * cf.b - cf.c ** 2 == pytest.approx(0.03972077083991796, rel=1e-10)


def test_small_eta_leading_order():
    cf = compute_coefficients(FrictionStep(2.0, 1e-6))
    ratio = cf.a / ((2.0 / 3.0) * 2.0 * 1e-6 ** 3)
    assert abs(ratio - 1.0) <= 1e-5


@pytest.mark.parametrize("beta,eta", [
    (0.0, 0.1), (-1.0, 0.1), (math.nan, 0.1), (math.inf, 0.1),
    (1.0, -0.1), (1.0, math.nan), (1.0, math.inf),
])
def test_invalid_parameters(beta, eta):
    with pytest.raises(ValueError):
        FrictionStep(beta, eta)


def test_invariants_on_log_grid():
    betas = np.logspace(-3, 3, 101)
    etas = np.concatenate([[0.0], np.logspace(-6, 1, 101)])
    for beta in betas:
        for eta in etas:
            cf = compute_coefficients(FrictionStep(beta, eta))
            u = beta * eta
            assert cf.a >= 0.0
            assert 0.0 <= cf.b <= 1.0
            # b rounds to exactly 1.0 once exp(-2u) < 2^-53
            if u <= 18.0:
                assert cf.b < 1.0
            assert cf.c >= 0.0
            assert cf.a * cf.b - cf.c ** 2 >= 0.0
            if eta > 0.0:
                assert cf.a * cf.b - cf.c ** 2 > 0.0


def test_series_direct_agree_at_threshold():
    for beta in np.logspace(-3, 3, 31):
        eta = SERIES_THRESHOLD / beta
        u = beta * eta
        a_s, pg_s = _series_a_pos_grad(u, eta)
        a_d, pg_d = _direct_a_pos_grad(beta, u)
        assert a_d == pytest.approx(a_s, rel=1e-10)
        assert pg_d == pytest.approx(pg_s, rel=1e-10)


def test_small_u_asymptotics():
    u = 1e-4
    for beta in np.logspace(-3, 3, 41):
        eta = u / beta
        cf = compute_coefficients(FrictionStep(beta, eta))
        assert cf.a / ((2.0 / 3.0) * beta * eta ** 3) == pytest.approx(1.0, rel=1e-3)
        assert cf.b / (2.0 * beta * eta) == pytest.approx(1.0, rel=1e-3)
        assert cf.c / (beta * eta ** 2) == pytest.approx(1.0, rel=1e-3)


def test_step_mean_identity_at_zero_step():
    cf = compute_coefficients(FrictionStep(2.0, 0.0))
    x = np.array([1.0, -2.0])
    y = np.array([0.5, 3.0])
    g = np.array([10.0, -7.0])
    xm, ym = step_mean(cf, x, y, g)
    assert np.array_equal(xm, x)
    assert np.array_equal(ym, y)


def test_step_mean_log2_example():
    cf = compute_coefficients(FrictionStep(1.0, math.log(2)))
    xm, ym = step_mean(cf, [0.0], [1.0], [0.0])
    assert xm[0] == pytest.approx(0.5, rel=1e-14)
    assert ym[0] == pytest.approx(0.5, rel=1e-14)


def test_step_mean_velocity_dies_at_long_steps():
    cf = compute_coefficients(FrictionStep(1.0, 1e3))
    _, ym = step_mean(cf, [0.0], [5.0], [0.0])
    assert abs(ym[0]) < 1e-300


def test_step_mean_dimension_mismatch():
    cf = compute_coefficients(FrictionStep(1.0, 0.1))
    with pytest.raises(ValueError, match="dimension mismatch"):
        step_mean(cf, [0.0, 1.0], [0.0], [0.0])


def test_sample_noise_zero_eta_is_zero_and_draws_nothing():
    cf = compute_coefficients(FrictionStep(1.0, 0.0))
    rng = np.random.default_rng(0)
    xi_x, xi_y = sample_noise(cf, 4, rng)
    assert np.array_equal(xi_x, np.zeros(4))
    assert np.array_equal(xi_y, np.zeros(4))
    # the stream was not advanced
    assert np.random.default_rng(0).standard_normal(1) == rng.standard_normal(1)


def test_sample_noise_matches_covariance():
    cf = compute_coefficients(FrictionStep(1.0, math.log(2)))
    rng = np.random.default_rng(2024)
    xi_x, xi_y = sample_noise(cf, 10 ** 6, rng)
    emp = np.cov(np.stack([xi_x, xi_y]))
    assert emp[0, 0] == pytest.approx(cf.a, abs=5e-3)
    assert emp[1, 1] == pytest.approx(cf.b, abs=5e-3)
    assert emp[0, 1] == pytest.approx(cf.c, abs=5e-3)
    corr = emp[0, 1] / math.sqrt(emp[0, 0] * emp[1, 1])
    assert corr == pytest.approx(cf.c / math.sqrt(cf.a * cf.b), abs=5e-3)
    assert abs(xi_x.mean()) < 4 * math.sqrt(cf.a / 1e6)
    assert abs(xi_y.mean()) < 4 * math.sqrt(cf.b / 1e6)


def test_sample_noise_empirical_correlation_small_eta():
    cf = compute_coefficients(FrictionStep(2.0, 0.01))
    rng = np.random.default_rng(7)
    xi_x, xi_y = sample_noise(cf, 10 ** 6, rng)
    emp = np.cov(np.stack([xi_x, xi_y]))
    corr = emp[0, 1] / math.sqrt(emp[0, 0] * emp[1, 1])
    assert corr == pytest.approx(cf.c / math.sqrt(cf.a * cf.b), abs=5e-3)


def test_sample_noise_deterministic():
    cf = compute_coefficients(FrictionStep(1.0, 0.3))
    a = sample_noise(cf, 100, np.random.default_rng(5))
    b = sample_noise(cf, 100, np.random.default_rng(5))
    assert np.array_equal(a[0], b[0])
    assert np.array_equal(a[1], b[1])


def test_noise_factor_clamp_and_rejection():
    from kinlangevin.kernel import KernelCoefficients
    base = compute_coefficients(FrictionStep(1.0, 0.1))
    ortho = base.a - base.c ** 2 / base.b
    nudged = KernelCoefficients(
        beta=base.beta, eta=base.eta, vel_decay=base.vel_decay,
        pos_vel=base.pos_vel, pos_grad=base.pos_grad, vel_grad=base.vel_grad,
        a=base.c ** 2 / base.b - 1e-16, b=base.b, c=base.c)
    sb, cb, so = nudged.noise_factors()
    assert so == 0.0
    bad = KernelCoefficients(
        beta=base.beta, eta=base.eta, vel_decay=base.vel_decay,
        pos_vel=base.pos_vel, pos_grad=base.pos_grad, vel_grad=base.vel_grad,
        a=base.c ** 2 / base.b - 1e-12, b=base.b, c=base.c)
    with pytest.raises(ValueError, match="not PSD"):
        bad.noise_factors()
    assert ortho > 0  # the real coefficients never need the clamp here
