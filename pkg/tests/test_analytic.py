import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from pilot_reuse.analytic import (AnalyticIntermediates, alzer_terms, b_omega, ccdf_theorem1,
                                  cell_throughput, i_omega, mixture_integral,
                                  normalized_guard_area, optimal_delta_throughput, p_omega,
                                  solve_min_delta, spectral_efficiency, y_of_delta)
from pilot_reuse.config import SystemConfig, db_to_linear
from pilot_reuse.montecarlo import CcdfCurve
from pilot_reuse.numerics import QuadratureError, QuadratureSpec

LAM = 2.8e-5
T10 = 10.0


def quad_oracle(f, a, b, points=()):
    edges = [a, *points, b]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-12, limit=500)
        total += val
    return total


def p_omega_oracle(omega, lam, alpha, eps):
    k = omega * alpha * eps
    scale = 1.0 / math.sqrt(math.pi * lam)
    return quad_oracle(lambda r: r ** k * 2 * math.pi * lam * r * math.exp(-math.pi * lam * r * r),
                       0.0, math.inf, points=(scale, 4 * scale, 12 * scale))


def i_omega_oracle(omega, lam, alpha, d):
    return quad_oracle(lambda x: 2 * math.pi * lam * x ** (1 - omega * alpha), d, math.inf,
                       points=(2 * d, 10 * d))


# -- moments -------------------------------------------------------------------

def test_p_omega_examples():
    assert p_omega(1, LAM, 4.0, 0.0) == 1.0 and p_omega(2, LAM, 4.0, 0.0) == 1.0
    assert p_omega(1, LAM, 4.0, 0.5) == pytest.approx(1 / (math.pi * LAM), rel=1e-14)
    assert p_omega(2, LAM, 4.0, 0.5) == pytest.approx(p_omega_oracle(2, LAM, 4.0, 0.5), rel=1e-8)


def test_i_omega_examples():
    assert i_omega(1, 1 / math.pi, 4.0, 1.0) == pytest.approx(1.0, rel=1e-14)
    assert i_omega(1, LAM, 4.0, 1e6) <= 2 * math.pi * LAM * 1e-12
    d = 2 * SystemConfig().inradius * math.sqrt(3)
    assert i_omega(2, LAM, 3.8, d) == pytest.approx(i_omega_oracle(2, LAM, 3.8, d), rel=1e-8)
    assert i_omega(1, LAM, 4.0, d) > 0
    with pytest.raises(ValueError):
        i_omega(1, LAM, 4.0, 0.0)


def test_moments_against_quadrature_randomized():
    rng = np.random.default_rng(2024)
    for _ in range(50):
        alpha = rng.uniform(2.5, 6.0)
        eps = rng.uniform(0.0, 1.0)
        lam = 10 ** rng.uniform(-6, -3)
        d = rng.uniform(0.3, 4.0) / math.sqrt(lam)
        delta = rng.uniform(1.0, 10.0)
        for w in (1, 2):
            assert p_omega(w, lam, alpha, eps) == pytest.approx(p_omega_oracle(w, lam, alpha, eps), rel=1e-8)
            assert i_omega(w, lam, alpha, d) == pytest.approx(i_omega_oracle(w, lam, alpha, d), rel=1e-8)
            area = normalized_guard_area(delta)
            z = w * alpha * eps / 2
            gam = quad_oracle(lambda t: t ** z * math.exp(-t), 0.0, math.inf, points=(1.0, 10.0, 60.0))
            tail = quad_oracle(lambda s: s ** (-w * alpha / 2), area, math.inf, points=(2 * area, 20 * area))
            assert b_omega(w, alpha, eps, area) == pytest.approx(gam * tail, rel=1e-8)


@given(st.floats(2.5, 6), st.floats(0, 1), st.floats(1e-6, 1e-3), st.floats(1, 10), st.sampled_from([1, 2]))
def test_b_omega_is_density_free_product(alpha, eps, lam, delta, w):
    big_r = (2 * math.sqrt(3) * lam) ** -0.5
    d = 2 * big_r * math.sqrt(delta)
    via_density = (p_omega(w, lam, alpha, eps) * i_omega(w, lam, alpha, d)
                   * (math.pi * lam) ** (-w * alpha * (1 - eps) / 2))
    assert b_omega(w, alpha, eps, math.pi * lam * d * d) == pytest.approx(via_density, rel=1e-10)
    assert normalized_guard_area(delta) == pytest.approx(math.pi * lam * d * d, rel=1e-12)


def test_alzer_weights_sum_to_one():
    for n in range(1, 8):
        az = alzer_terms(n)
        assert az.weights.sum() == pytest.approx(1.0)
        assert az.eta == pytest.approx(n * math.factorial(n) ** (-1 / n))
    assert alzer_terms(1).eta == 1.0


def test_serving_density_integrates_to_one():
    terms = AnalyticIntermediates.from_config(SystemConfig())
    assert quad_oracle(lambda x: float(terms.f(x)), 0, math.inf, points=(100, 300, 1000)) == \
        pytest.approx(1.0, abs=1e-10)


def test_mixture_integral_against_quadrature():
    c1, c2, delta, p = np.array([-0.3, -2.0]), np.array([-0.1, -0.5]), 3.0, 1.0
    got = mixture_integral(c1, c2, delta, p)
    for i in range(2):
        def g(u):
            return (math.exp(c1[i] * u ** -p) / delta + (1 - 1 / delta) * math.exp(c2[i] * u ** -p)) * math.exp(-u)
        assert got[i] == pytest.approx(quad_oracle(g, 0.0, math.inf, points=(0.1, 1.0, 10.0)), abs=1e-10)
    assert np.allclose(mixture_integral(np.zeros(3), np.zeros(3), 2.0, 1.0), 1.0)


@given(st.floats(0, 500), st.floats(0, 200))
def test_l_in_unit_interval(x, t):
    terms = AnalyticIntermediates.from_config(SystemConfig(m_antennas=64))
    val = terms.l(np.array([x]), t, 1)
    assert np.all((val > 0) & (val <= 1 + 1e-12))
    if t == 0:
        assert val == pytest.approx(1.0)


# -- coverage ------------------------------------------------------------------

def test_ccdf_zero_threshold_is_one():
    assert ccdf_theorem1(0.0, SystemConfig()) == pytest.approx(1.0, abs=1e-6)
    assert y_of_delta(2.5, 0.0, SystemConfig()) == pytest.approx(1.0, abs=1e-6)


def test_ccdf_monotone_in_threshold_and_antennas():
    t = db_to_linear(np.arange(-10.0, 31.0, 2.0))
    lo = ccdf_theorem1(t, SystemConfig(m_antennas=64))
    hi = ccdf_theorem1(t, SystemConfig(m_antennas=500))
    assert np.all(np.diff(lo) <= 1e-9) and np.all(np.diff(hi) <= 1e-9)
    assert np.all(hi >= lo - 1e-9)
    t5 = db_to_linear(5.0)
    assert ccdf_theorem1(t5, SystemConfig(m_antennas=500)) > ccdf_theorem1(t5, SystemConfig(m_antennas=64))


def test_noise_lowers_coverage():
    t = db_to_linear(np.array([0.0, 10.0]))
    clean = ccdf_theorem1(t, SystemConfig())
    noisy = ccdf_theorem1(t, SystemConfig(sigma2=1e-9))
    assert np.all(noisy < clean)
    assert np.allclose(y_of_delta(3, t, SystemConfig(sigma2=1e-9)), noisy)


def test_density_invariance_without_noise():
    t = db_to_linear(np.array([0.0, 10.0, 20.0]))
    a = ccdf_theorem1(t, SystemConfig(lambda_b=LAM))
    b = ccdf_theorem1(t, SystemConfig(lambda_b=4 * LAM))
    assert np.max(np.abs(a - b)) < 1e-3


def test_reuse_form_matches_distance_form_random_points():
    rng = np.random.default_rng(77)
    for _ in range(20):
        cfg = SystemConfig(m_antennas=int(rng.integers(16, 512)), epsilon=float(rng.uniform(0, 1)),
                           k_users=int(rng.integers(1, 16)), alpha=float(rng.uniform(3, 5)),
                           lambda_b=float(10 ** rng.uniform(-6, -4)), alzer_n=3)
        delta = float(rng.uniform(1, 8))
        t = float(db_to_linear(rng.uniform(-5, 25)))
        direct = ccdf_theorem1(t, cfg.replace(delta=delta))
        assert y_of_delta(delta, t, cfg) == pytest.approx(direct, abs=1e-4)


def test_y_nondecreasing_in_delta():
    ys = [y_of_delta(d, T10, SystemConfig(m_antennas=500)) for d in np.linspace(1, 8, 29)]
    assert np.all(np.diff(ys) >= -1e-9)
    assert ys[-1] > ys[0]


def test_coefficient_variants_are_close():
    t = db_to_linear(np.array([0.0, 10.0]))
    base = ccdf_theorem1(t, SystemConfig())
    for cfg in (SystemConfig(b_coefficient="appendix"), SystemConfig(interference_users="k_minus_1")):
        other = ccdf_theorem1(t, cfg)
        assert np.max(np.abs(other - base)) < 0.05
        assert np.allclose(y_of_delta(3, t, cfg), other, atol=1e-4)


def test_quadrature_failure_is_reported():
    with pytest.raises(QuadratureError, match="error bound"):
        ccdf_theorem1(10.0, SystemConfig(), spec=QuadratureSpec(rtol=1e-14, atol=0.0, max_intervals=2))


# -- minimum reuse -------------------------------------------------------------

def test_min_delta_trivial_target():
    res = solve_min_delta(1e-6, T10, SystemConfig(m_antennas=500))
    assert res.feasible and res.delta_int == 1


def test_min_delta_infeasible_target():
    res = solve_min_delta(0.999, db_to_linear(15.0), SystemConfig(m_antennas=64), delta_max=20)
    assert not res.feasible and res.delta_int is None
    dense = [y_of_delta(d, db_to_linear(15.0), SystemConfig(m_antennas=64)) for d in np.linspace(1, 20, 96)]
    assert max(dense) < 0.999


def test_min_delta_bracketing():
    cfg = SystemConfig(m_antennas=500)
    gamma = 0.95 * y_of_delta(2.0, T10, cfg)
    res = solve_min_delta(gamma, T10, cfg)
    assert res.feasible and res.delta_real <= 2.0 and res.delta_int <= 2
    assert y_of_delta(res.delta_real, T10, cfg) >= gamma
    assert y_of_delta(res.delta_real - 0.1, T10, cfg) < gamma
    grid = np.arange(1.0, 2.0 + 1e-9, 0.001)
    first = grid[np.argmax([y_of_delta(d, T10, cfg) >= gamma for d in grid])]
    assert res.delta_real == pytest.approx(first, abs=2e-3)


def test_min_delta_rejects_bad_gamma():
    with pytest.raises(ValueError):
        solve_min_delta(1.0, T10, SystemConfig())


# -- rate and throughput -------------------------------------------------------

def test_spectral_efficiency_trivial():
    t_max = db_to_linear(21.0)
    assert spectral_efficiency(lambda t: np.ones_like(t), t_max) == pytest.approx(math.log2(1 + t_max), rel=1e-10)
    assert spectral_efficiency(lambda t: np.ones_like(t), t_max) == pytest.approx(6.987, abs=1e-3)
    assert spectral_efficiency(lambda t: np.zeros_like(t), t_max) == 0.0
    curve = CcdfCurve([0.0, t_max], [1.0, 1.0])
    assert spectral_efficiency(curve, t_max) == pytest.approx(math.log2(1 + t_max))


def test_spectral_efficiency_against_trapezoid():
    cfg = SystemConfig(m_antennas=500)
    t_max = cfg.t_max
    tau = spectral_efficiency(lambda t: ccdf_theorem1(t, cfg), t_max)
    grid = np.linspace(0.0, t_max, 2000)
    oracle = np.trapezoid(ccdf_theorem1(grid, cfg) / (1 + grid), grid) / math.log(2)
    assert tau == pytest.approx(oracle, rel=1e-3)


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_spectral_efficiency_monotone(a, b):
    lo, hi = min(a, b), max(a, b)
    t_max = 100.0
    f_lo = spectral_efficiency(lambda t: lo / (1 + 0.1 * t), t_max)
    f_hi = spectral_efficiency(lambda t: hi / (1 + 0.1 * t), t_max)
    assert f_lo <= f_hi + 1e-12


def test_cell_throughput_examples():
    assert cell_throughput(10, 5, 50, 3.0) == 0.0
    assert cell_throughput(10, 3, 200, 1.0) == pytest.approx(8.5)
    with pytest.raises(ValueError):
        cell_throughput(10, 6, 50, 1.0)


def test_optimal_delta_trivial_cases():
    cfg = SystemConfig()
    assert optimal_delta_throughput(cfg, [1], tau0_fn=lambda d: 2.0).delta_star == 1
    res = optimal_delta_throughput(cfg, range(1, 9), tau0_fn=lambda d: 2.0)
    assert res.delta_star == 1 and np.all(np.diff(res.tau_s) < 0)


@pytest.mark.parametrize("t_c", [50, 200, 500])
@pytest.mark.parametrize("m", [100, 500])
def test_throughput_optimum_small(t_c, m):
    cfg = SystemConfig(m_antennas=m, t_coherence=t_c, epsilon=0.5, t_max_db=21.0)
    res = optimal_delta_throughput(cfg, range(1, min(8, t_c // cfg.k_users) + 1))
    assert res.delta_star in (1, 2, 3)
