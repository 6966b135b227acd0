"""
norms 测试：Parseval 与二维求积、上确界范数、Carleson 盒、Beltrami 网格、发散判定
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.special import beta as beta_fn

from errors import PreconditionError
from norms import (
    DEFAULT_LADDER,
    FPRIME_POWER,
    PSI_POWER,
    BeltramiGrid,
    PolarGrid,
    WeightedIntegralSpec,
    besov_norm,
    bergman_norm,
    box_measure,
    carleson_box_measure,
    dirichlet_norm,
    disc_integral,
    divergence_verdict,
    hyp_L2_norm,
    little_bloch_profile,
    modulus_power,
    polar,
    remark_family,
    sup_hyp_norm,
    sup_norm,
    weighted_fprime_integral,
)
from pre_schwarzian import oqco_membership, pre_schwarzian
from series_core import PowerSeries


def test_bergman_norm_monomial():
    phi = PowerSeries.polynomial([0, 0, 0, 1.0], 16)
    assert bergman_norm(phi) == pytest.approx(np.sqrt(np.pi / 4), rel=1e-15)


def test_dirichlet_norm():
    assert dirichlet_norm(PowerSeries.identity(8)) == pytest.approx(np.sqrt(np.pi))
    with pytest.raises(PreconditionError):
        dirichlet_norm(PowerSeries.polynomial([1.0, 1.0], 8))


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=20, deadline=None, derandomize=True)
def test_bergman_parseval_matches_quadrature(seed):
    rng = np.random.default_rng(seed)
    degree = int(rng.integers(1, 65))
    c = (rng.standard_normal(degree) + 1j * rng.standard_normal(degree)) / np.sqrt(np.arange(1, degree + 1))
    phi = PowerSeries.polynomial(c, 128)
    quad_result = disc_integral(modulus_power(phi, 2.0), alpha=0.0, n_radial=64, n_angular=256)
    assert quad_result.converged
    assert np.sqrt(quad_result.value) == pytest.approx(bergman_norm(phi), rel=1e-8)


def test_disc_integral_weights():
    ones = polar(lambda z: np.ones(z.shape))
    assert disc_integral(ones, alpha=-0.5).value == pytest.approx(2 * np.pi, rel=1e-10)
    assert disc_integral(polar(lambda z: np.abs(z) ** 2)).value == pytest.approx(np.pi / 2, rel=1e-12)
    with pytest.raises(PreconditionError):
        disc_integral(ones, alpha=-1.0)


def test_sup_hyp_norm_of_identity():
    report = sup_hyp_norm(PowerSeries.identity(8))
    assert report.converged
    assert report.norm == pytest.approx(2 / (3 * np.sqrt(3)), rel=1e-8)


def test_weighted_integrals():
    f = PowerSeries.identity(8)
    assert weighted_fprime_integral(f, WeightedIntegralSpec(2.0, 0.0)) == pytest.approx(np.pi)
    psi = weighted_fprime_integral(f, WeightedIntegralSpec(4.0, 0.5, PSI_POWER))
    # 2π ∫ r^5 (1-r²)^{1/2} dr = π B(3, 3/2)
    assert psi == pytest.approx(np.pi * beta_fn(3, 1.5), rel=1e-10)
    with pytest.raises(PreconditionError):
        WeightedIntegralSpec(0.0, 0.0)
    with pytest.raises(PreconditionError):
        WeightedIntegralSpec(2.0, -1.5, FPRIME_POWER)


def test_besov_norm_of_identity():
    report = besov_norm(PowerSeries.identity(8), 2.0)
    assert report.norm == pytest.approx(np.sqrt(np.pi))
    with pytest.raises(PreconditionError):
        besov_norm(PowerSeries.identity(8), 1.0)


def test_little_bloch_profile():
    assert little_bloch_profile(PowerSeries.identity(64)).decaying
    n = np.arange(1, 512)
    c = np.zeros(512, dtype=complex)
    c[1:] = ((-1.0) ** (n + 1) + 3.0) / n
    assert not little_bloch_profile(PowerSeries(c)).decaying


def test_box_measure_closed_form():
    for r in (0.0, 0.5, 0.9, 0.999):
        expected = 2 * np.pi * (1 - r) * (1 - r * r) ** 1.5 / 3
        assert box_measure(r, 0.5) == pytest.approx(expected, rel=1e-12)


def test_carleson_constant():
    report = carleson_box_measure(4.0, 2.0)
    assert report.finite
    assert report.constant > 0
    with pytest.raises(PreconditionError):
        carleson_box_measure(2.0, 2.0)


def test_beltrami_constant_field():
    grid = BeltramiGrid.from_function(lambda z: 0.5 * np.ones(z.shape), [1.5, 2.0, 4.0], 32, 16,
                                      decay='bounded')
    assert sup_norm(grid) == pytest.approx(0.5)
    exact, _ = quad(lambda r: 2 * np.pi * r * 0.25 / (r * r - 1) ** 2, 1.5, 4.0)
    report = hyp_L2_norm(grid)
    assert report.norm ** 2 == pytest.approx(exact, rel=1e-9)
    assert report.tail_bound > 0


def test_beltrami_grid_must_avoid_disc():
    with pytest.raises(PreconditionError):
        BeltramiGrid.from_function(lambda z: 0 * z, [1.0, 2.0])


def test_divergence_verdict():
    ladder = list(DEFAULT_LADDER)
    assert divergence_verdict(ladder, [1.0, 1.0, 1.0, 1.0])[0] == 'member'
    assert divergence_verdict(ladder, [0.0, 0.0, 0.0, 0.0])[0] == 'member'
    growing = np.sqrt(np.log(ladder) * 10.0)
    verdict, slope = divergence_verdict(ladder, growing)
    assert verdict == 'diverging'
    assert slope == pytest.approx(10.0)
    assert divergence_verdict(ladder, [1.0, 1.01, 1.02, 1.03])[0] == 'inconclusive'


def test_koebe_squared_norm_grows_like_log(koebe):
    verdict = oqco_membership(koebe)
    assert verdict.verdict == 'diverging'
    assert verdict.growth == pytest.approx(10 * np.pi, rel=0.1)


def test_remark_family_norms():
    sup_values, bergman_sq = [], []
    for t in (0.9, 0.99, 0.999):
        phi = remark_family(t)
        s = np.sqrt(abs(np.log(1 - t)))
        sup_values.append(sup_hyp_norm(phi, PolarGrid(16, 32)).norm)
        bergman_sq.append(bergman_norm(phi) ** 2)
        assert sup_values[-1] == pytest.approx(1 / s, rel=1e-6)
        expected = np.pi * np.arctanh(t * t) / (t * t * abs(np.log(1 - t)))
        assert bergman_sq[-1] == pytest.approx(expected, rel=1e-10)
    assert sup_values[0] > sup_values[1] > sup_values[2]
    assert bergman_sq[0] > bergman_sq[1] > bergman_sq[2]
    assert bergman_sq[-1] == pytest.approx(np.pi / 2, rel=0.05)


def test_remark_family_domain():
    with pytest.raises(PreconditionError):
        remark_family(1.0)


def test_pre_schwarzian_of_koebe_coefficients(koebe):
    a = pre_schwarzian(koebe)
    n = np.arange(8)
    np.testing.assert_allclose(a.coeffs[:8], 3.0 + (-1.0) ** n, rtol=1e-12)
