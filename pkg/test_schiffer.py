"""
schiffer 测试：Möbius 三点解、交比坐标、配置校验、圆盘闭式解、CR 模板
"""

import numpy as np
import pytest

from errors import (
    CapDegenerateError,
    ConditioningError,
    ConfigurationError,
    DegenerationError,
    PreconditionError,
)
from schiffer import (
    INF,
    SWEEP_COLUMNS,
    ClassifyingCoordinate,
    ParametricDisc,
    PuncturedSphereConfig,
    cap_maps,
    classify,
    cr_stencil,
    default_config,
    holomorphy_probe,
    mobius_apply,
    round_disc_lambda,
    schiffer_vary,
    sweep,
    three_point_mobius,
)

LAM = 0.3 + 0.8j
CENTER = 0.5 - 0.6j


def test_three_point_mobius():
    p = [0j, 1 + 0j, INF]
    q = [1 + 0j, 2j, -1 + 0j]
    m = three_point_mobius(p, q)
    np.testing.assert_allclose(mobius_apply(m, p), q, atol=1e-14)
    assert np.linalg.det(m) == pytest.approx(1.0)

    p = [0.5j, -1 + 0j, 2 + 1j]
    q = [0j, INF, 3 + 0j]
    out = mobius_apply(three_point_mobius(p, q), p)
    assert abs(out[0]) < 1e-14
    assert not np.isfinite(out[1]) or abs(out[1]) > 1e12
    assert out[2] == pytest.approx(3.0)


def test_three_point_mobius_rejects_coincident_points():
    with pytest.raises(ConditioningError):
        three_point_mobius([0j, 0j, 1 + 0j], [0j, 1 + 0j, 2 + 0j])


def test_mobius_apply_at_infinity():
    m = np.array([[2.0, 1.0], [1.0, 1.0]])
    out = mobius_apply(m, [INF, -1.0, 0.0])
    assert out[0] == 2.0
    assert np.isinf(out[1])
    assert out[2] == 1.0


def test_classify_is_mobius_invariant():
    assert classify([0j, 1 + 0j, INF, LAM]).values[0] == pytest.approx(LAM)
    m = np.array([[2.0, 1.0 + 1.0j], [0.5j, 1.0]])
    moved = mobius_apply(m, [0j, 1 + 0j, INF, LAM])
    assert classify(moved).values[0] == pytest.approx(LAM, abs=1e-12)


def test_classify_errors():
    with pytest.raises(PreconditionError):
        classify([0j, 1 + 0j, INF])
    with pytest.raises(DegenerationError):
        classify([0j, 1 + 0j, INF, 1 + 0j])
    with pytest.raises(DegenerationError):
        ClassifyingCoordinate([0j])


def test_config_validation():
    with pytest.raises(PreconditionError):
        PuncturedSphereConfig([0j, 1 + 0j, INF])
    with pytest.raises(PreconditionError):
        PuncturedSphereConfig([0j, 1 + 0j, INF, LAM], [ParametricDisc(0.1, 0.2)])
    with pytest.raises(PreconditionError):
        PuncturedSphereConfig([0j, 1 + 0j, INF, LAM],
                              [ParametricDisc(CENTER, 0.25), ParametricDisc(CENTER + 0.4, 0.25)])
    with pytest.raises(CapDegenerateError):
        PuncturedSphereConfig([0j, 1 + 0j, INF, LAM], [ParametricDisc(CENTER, 0.25)], [0.07])
    with pytest.raises(ConfigurationError):
        PuncturedSphereConfig([0j, 1 + 0j, INF, LAM], [ParametricDisc(CENTER, 0.25)], [0j, 0j])
    with pytest.raises(PreconditionError):
        ParametricDisc(0j, 0.0)


def test_config_json():
    config = default_config().with_epsilon([1e-3 + 2e-3j])
    data = config.to_json()
    assert data['punctures'][2] == 'inf'
    back = PuncturedSphereConfig.from_json(data)
    assert back.punctures[:2] == [0j, 1 + 0j]
    assert np.isinf(back.punctures[2])
    assert back.epsilon == config.epsilon
    with pytest.raises(ConfigurationError):
        PuncturedSphereConfig.from_json({'punctures': ['north', 0, 1, 2]})


def test_cap_maps_agree_on_circle():
    caps = cap_maps(0.1 - 0.05j)
    assert caps.boundary_gap < 1e-14
    z = np.array([0.3 + 0.1j])
    np.testing.assert_allclose(caps.w(z), z + (0.1 - 0.05j) * np.conj(z))
    with pytest.raises(CapDegenerateError):
        cap_maps(1.0)


def test_zero_variation_keeps_punctures():
    result = schiffer_vary(default_config())
    assert result.residuals == [0.0]
    assert classify(result.punctures).values[0] == pytest.approx(LAM)


def test_round_disc_matches_closed_form():
    eps = 1e-3 - 5e-4j
    result = schiffer_vary(default_config().with_epsilon([eps]))
    assert result.residuals[0] < 1e-10
    assert np.isinf(result.punctures[2])
    lam = classify(result.punctures).values[0]
    assert abs(lam - round_disc_lambda(LAM, CENTER, eps)) < 1e-8
    assert abs(lam - LAM) > 1e-4


def test_schiffer_guard():
    with pytest.raises(PreconditionError):
        schiffer_vary(default_config().with_epsilon([0.03]))
    with pytest.raises(ConfigurationError):
        schiffer_vary(default_config(), order=[1])


def test_cr_stencil_on_synthetic_maps():
    holo = cr_stencil(np.exp, 0.2 + 0.1j, (4e-3, 2e-3, 1e-3))
    assert holo.decreasing
    assert holo.derivative == pytest.approx(np.exp(0.2 + 0.1j), rel=1e-6)
    for row in holo.rows:
        assert row.ratio == pytest.approx(row.delta ** 2 / 6, rel=1e-3)

    anti = cr_stencil(np.conj, 0.2 + 0.1j, (4e-3, 2e-3, 1e-3))
    assert anti.anti_holomorphic
    assert anti.ratios[-1] > 1e6


def test_holomorphy_accepts_synthetic_evaluator():
    report = holomorphy_probe(default_config(), evaluator=lambda e: LAM + np.conj(e))
    assert report.anti_holomorphic
    assert report.to_json()['anti_holomorphic'] is True


def test_holomorphy_on_round_disc():
    report = holomorphy_probe(default_config())
    assert report.ratios[-1] < 1e-3
    exact = 1 / (LAM - CENTER) + (1 - LAM) / CENTER - LAM / (1 - CENTER)
    assert report.derivative == pytest.approx(exact, rel=1e-3)


def test_sweep_rows():
    rows = sweep(default_config(), radius=1e-3, steps=2, jobs=2)
    assert len(SWEEP_COLUMNS) == 5
    assert len(rows) == 4
    for eps_re, eps_im, lam_re, lam_im, residual in rows:
        expected = round_disc_lambda(LAM, CENTER, complex(eps_re, eps_im))
        assert abs(complex(lam_re, lam_im) - expected) < 1e-8
        assert residual < 1e-10


def _two_discs(epsilon) -> PuncturedSphereConfig:
    base = default_config()
    return PuncturedSphereConfig(base.punctures, base.discs + [ParametricDisc(-0.5 + 0.5j, 0.2)], epsilon)


def test_two_disc_order_independence():
    config = _two_discs([1e-3, 5e-4j])
    forward = schiffer_vary(config, order=[0, 1])
    backward = schiffer_vary(config, order=[1, 0])
    assert forward.order == [0, 1] and backward.order == [1, 0]
    lam_f = classify(forward.punctures).values[0]
    lam_b = classify(backward.punctures).values[0]
    assert abs(lam_f - lam_b) < 1e-7
    assert abs(lam_f - LAM) > 1e-4


def test_two_disc_with_idle_disc_reduces_to_one():
    eps = 1e-3 - 5e-4j
    pair = schiffer_vary(_two_discs([eps, 0j]))
    single = schiffer_vary(default_config().with_epsilon([eps]))
    assert pair.residuals[1] == 0.0
    lam = classify(pair.punctures).values[0]
    assert lam == pytest.approx(classify(single.punctures).values[0], abs=1e-12)
    assert abs(lam - round_disc_lambda(LAM, CENTER, eps)) < 1e-8


def test_config_guard():
    # |ε/r²| = 0.16
    with pytest.raises(PreconditionError):
        default_config().with_guard(0.1).with_epsilon([0.01])
    with pytest.raises(PreconditionError):
        default_config().with_epsilon([0.01]).with_guard(0.1)
    with pytest.raises(ConfigurationError):
        default_config().with_guard(1.5)
    with pytest.raises(ConfigurationError):
        PuncturedSphereConfig([0j, 1 + 0j, INF, LAM], guard=0.0)

    loose = default_config().with_guard(0.5).with_epsilon([0.025])
    back = PuncturedSphereConfig.from_json(loose.to_json())
    assert back.guard == 0.5
    assert back.epsilon == [0.025 + 0j]
    assert PuncturedSphereConfig.from_json({'punctures': [[0, 0], [1, 0], 'inf', [0.3, 0.8]]}).guard == 0.3
    # 调用方显式给出的阈值优先
    with pytest.raises(PreconditionError):
        schiffer_vary(loose, guard=0.3)
