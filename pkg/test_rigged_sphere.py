"""
rigged_sphere 测试：带边球面校验、缝合、坐标卡、Oqc₀(Σ)、模空间等价
"""

import numpy as np
import pytest

from errors import (
    ChartIncompatibleError,
    ConfigurationError,
    DegenerationError,
    PreconditionError,
)
from rigged_sphere import (
    BorderedSphere,
    Chart,
    NChart,
    NonOverlappingMaps,
    RiggedSphere,
    adapted_nchart,
    boundary_separation,
    chart_independence_check,
    cusp_control,
    moduli_equivalent,
    oqco_on_sphere,
    random_chart,
    sew_caps,
)
from series_core import PowerSeries
from welding import CircleHomeo

PUNCTURES = [0j, 1 + 0j, 0.5 + 0.8j, -0.6 + 0.5j]


def small_maps(punctures=PUNCTURES, check=True) -> NonOverlappingMaps:
    return NonOverlappingMaps([PowerSeries.polynomial([p, 0.1, 0.01], 64) for p in punctures],
                              punctures, check)


def two_caps():
    return [PowerSeries.polynomial([-0.5, 0.3], 64), PowerSeries.polynomial([0.5, 0.3], 64)]


def test_bordered_sphere_validation():
    assert BorderedSphere(two_caps()).n == 2
    with pytest.raises(PreconditionError):
        BorderedSphere([])
    with pytest.raises(PreconditionError):
        BorderedSphere([PowerSeries.polynomial([0.0, 0.0, 0.3], 64)])
    with pytest.raises(PreconditionError):
        BorderedSphere([PowerSeries.polynomial([0.0, 0.3], 64), PowerSeries.polynomial([0.1, 0.3], 64)])


def test_boundary_separation():
    assert boundary_separation(two_caps()) == pytest.approx(0.4, rel=1e-6)
    nested = [PowerSeries.polynomial([0.0, 0.5], 64), PowerSeries.polynomial([0.1, 0.1], 64)]
    assert boundary_separation(nested) == 0.0


def test_rigged_sphere_json():
    rigged = RiggedSphere(BorderedSphere(two_caps()), [CircleHomeo.identity(), CircleHomeo.sine(0.02)])
    back = RiggedSphere.from_json(rigged.to_json())
    assert back.base.n == 2
    np.testing.assert_allclose(back.riggings[1].coef, rigged.riggings[1].coef)
    with pytest.raises(ConfigurationError):
        RiggedSphere(BorderedSphere(two_caps()), [CircleHomeo.identity()])
    with pytest.raises(ConfigurationError):
        RiggedSphere.from_json({'caps': []})


def test_sew_single_cap_with_rotation():
    rigged = RiggedSphere(BorderedSphere([PowerSeries.identity(64)]), [CircleHomeo.rotation(0.4)])
    result = sew_caps(rigged)
    assert result.residuals[0] < 1e-10
    phi = result.maps.maps[0]
    assert phi.coeffs[1] == pytest.approx(np.exp(0.4j), abs=1e-10)
    np.testing.assert_allclose(phi.coeffs[2:], 0.0, atol=1e-10)
    assert result.punctures == [0j]


def test_sew_two_caps():
    rigged = RiggedSphere(BorderedSphere(two_caps()),
                          [CircleHomeo.sine(0.05, 1, 0.3), CircleHomeo.sine(0.03, 2)])
    result = sew_caps(rigged)
    assert max(result.residuals) < 1e-10
    assert result.punctures[0] == 0
    assert result.punctures[1] == pytest.approx(1.0, abs=1e-12)
    assert boundary_separation(result.maps.maps) > 0
    assert len(result.to_json()['residuals']) == 2


def test_non_overlapping_maps_validation():
    with pytest.raises(PreconditionError):
        NonOverlappingMaps([PowerSeries.polynomial([0.0, 0.1], 16)], [0.5])
    with pytest.raises(ConfigurationError):
        NonOverlappingMaps([PowerSeries.polynomial([0.0, 0.1], 16)], [0j, 1 + 0j])
    with pytest.raises(DegenerationError):
        small_maps([0j, 0.15 + 0j])


def test_non_overlapping_maps_json():
    maps = small_maps()
    back = NonOverlappingMaps.from_json(maps.to_json())
    assert back.punctures == maps.punctures
    np.testing.assert_array_equal(back.maps[2].coeffs, maps.maps[2].coeffs)


def test_chart_validation():
    chart = Chart.translation(0.2, 0.2, 0.5)
    assert abs(chart(0.2)[0]) == 0.0
    np.testing.assert_array_equal(chart.pre_schwarzian([0.1, 0.3]), [0.0, 0.0])
    with pytest.raises(PreconditionError):
        Chart(np.array([[1.0, 0.0], [1.0, 1.0]]), 0j, -0.9, 0.5)
    with pytest.raises(PreconditionError):
        Chart(np.eye(2), 0.5, 0.5, 0.2)


def test_chart_pre_schwarzian_of_mobius():
    chart = Chart(np.array([[1.0, 0.0], [0.5, 1.0]]), 0j, 0j, 0.5)
    assert chart.pre_schwarzian(0.2) == pytest.approx(-1.0 / 1.1)


def test_nchart_rejects_overlapping_domains():
    a = Chart.translation(0j, 0j, 0.5)
    b = Chart.translation(0.8, 0.8, 0.5)
    with pytest.raises(PreconditionError):
        NChart([a, b])
    c = Chart.translation(1.0, 1.0, 0.5)
    assert NChart([a, c]).with_chart(1, Chart.translation(1.0, 1.0, 0.4)).charts[1].radius == 0.4


def test_adapted_nchart():
    nchart = adapted_nchart(small_maps([0j, 1 + 0j]))
    # 半径 = 像的半径 0.11 + 0.45 × 余量 0.78
    assert [c.radius for c in nchart.charts] == pytest.approx([0.461, 0.461], rel=1e-9)
    with pytest.raises(ChartIncompatibleError):
        adapted_nchart(small_maps([0j, 0.15 + 0j], check=False))


def test_oqco_on_sphere_members_and_cusp():
    maps = small_maps()
    verdicts = oqco_on_sphere(maps, adapted_nchart(maps))
    assert [v.verdict for v in verdicts] == ['member'] * 4

    identity = NonOverlappingMaps([PowerSeries.identity(64)], [0j])
    assert oqco_on_sphere(identity, adapted_nchart(identity))[0].verdict == 'member'

    cusp = NonOverlappingMaps([cusp_control()], [0j])
    assert oqco_on_sphere(cusp, NChart([Chart.translation(0j, 0j, 1.0)]))[0].verdict == 'diverging'


def test_oqco_on_sphere_chart_errors():
    maps = small_maps([0j, 1 + 0j])
    with pytest.raises(ConfigurationError):
        oqco_on_sphere(maps, NChart([Chart.translation(0j, 0j, 0.5)]))
    tight = NChart([Chart.translation(0j, 0j, 0.05), Chart.translation(1.0, 1.0, 0.5)])
    with pytest.raises(ChartIncompatibleError):
        oqco_on_sphere(maps, tight)


def test_chart_independence_with_scaling():
    maps = small_maps([0j, 1 + 0j])
    chart_a = adapted_nchart(maps)
    base = chart_a.charts[0]
    scaled = Chart(np.array([[2.0, 0.0], [0.0, 1.0]]), base.point, base.center, base.radius)
    report = chart_independence_check(maps, chart_a, chart_a.with_chart(0, scaled))
    assert report.agree and report.bound_holds and report.passed
    assert report.minkowski[0][1] == 0.0


def test_chart_independence_with_random_charts(rng):
    maps = small_maps()
    chart_a = adapted_nchart(maps)
    chart_b = NChart([random_chart(c, rng) for c in chart_a.charts])
    report = chart_independence_check(maps, chart_a, chart_b)
    assert report.passed
    assert report.to_json()['agree'] is True


def test_moduli_equivalence_under_mobius():
    a = small_maps()
    sigma = np.array([[1.0, 0.2], [0.1, 1.0]])
    b = a.transform(sigma, n=128)
    report = moduli_equivalent(a, b)
    assert report.equivalent
    assert report.puncture_error < 1e-12
    assert report.boundary_distance < 1e-10
    assert len(report.to_json()['sigma']) == 4


def test_moduli_rejects_rotated_map():
    a = small_maps()
    rot = np.exp(0.3j)
    maps = list(a.maps)
    maps[3] = PowerSeries.polynomial([PUNCTURES[3], 0.1 * rot, 0.01 * rot * rot], 64)
    report = moduli_equivalent(a, NonOverlappingMaps(maps, PUNCTURES))
    assert not report.equivalent
    assert report.puncture_error < 1e-12
    assert report.boundary_distance > 1e-3


def test_moduli_preconditions():
    with pytest.raises(PreconditionError):
        moduli_equivalent(small_maps([0j, 1 + 0j]), small_maps([0j, 1 + 0j]))
    with pytest.raises(PreconditionError):
        moduli_equivalent(small_maps(), small_maps(PUNCTURES[:3]))


def test_sewn_maps_are_members_in_any_chart(rng):
    rigged = RiggedSphere(BorderedSphere(two_caps()),
                          [CircleHomeo.sine(0.05, 1, 0.3), CircleHomeo.sine(0.03, 2)])
    maps = sew_caps(rigged).maps
    chart = adapted_nchart(maps)
    assert [v.verdict for v in oqco_on_sphere(maps, chart)] == ['member'] * 2
    for _ in range(5):
        drawn = NChart([random_chart(c, rng) for c in chart.charts])
        assert [v.verdict for v in oqco_on_sphere(maps, drawn)] == ['member'] * 2
