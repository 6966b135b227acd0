#!/usr/bin/env python3
"""
亏格 0 的带边 / 带装配球面

1. BorderedSphere / RiggedSphere: 帽子嵌入 Ψ_i 与装配 h_i（ψ_i = Ψ_i∘h_i）
2. sew_caps: 逐个缝上单位圆盘，得到刺点与互不重叠的映射 φ_i
3. n-坐标卡、Oqc₀(Σ) 成员判定与坐标卡无关性
4. moduli_equivalent: 前三个刺点的 Möbius 匹配
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from errors import (
    ChartIncompatibleError,
    ConfigurationError,
    DegenerationError,
    PreconditionError,
)
from norms import DEFAULT_LADDER
from pre_schwarzian import MembershipVerdict, minkowski_terms, oqco_membership, univalence_check
from schiffer import (
    is_infinite,
    mobius_apply,
    normalize_sl2,
    three_point_mobius,
    _decode_point,
    _encode_point,
)
from series_core import INTERIOR, PowerSeries, next_power_of_two, sample_circle
from welding import WELD_GUARD, WELD_MAX_ITER, WELD_TOL, CircleHomeo, glue_disc

BOUNDARY_TOL = 1e-6


def boundary_samples(s: PowerSeries, m: int = 512) -> np.ndarray:
    return sample_circle(s, 1.0, max(m, next_power_of_two(2 * s.N))).values


def _inside(curve: np.ndarray, points: np.ndarray) -> np.ndarray:
    """points 中哪些点被闭曲线 curve 环绕"""
    closed = np.append(curve, curve[0])
    angles = np.angle(closed[1:, None] - points[None, :]) - np.angle(closed[:-1, None] - points[None, :])
    angles = (angles + np.pi) % (2 * np.pi) - np.pi
    return np.abs(np.sum(angles, axis=0)) > np.pi


def boundary_separation(series: Sequence[PowerSeries], m: int = 512) -> float:
    """各边界曲线采样点之间的最小距离；曲线相交或一个圆盘含在另一个之内时返回 0"""
    curves = [boundary_samples(s, m) for s in series]
    best = float('inf')
    for i, a in enumerate(curves):
        tree = cKDTree(np.column_stack([a.real, a.imag]))
        for j, b in enumerate(curves):
            if j == i:
                continue
            if np.any(_inside(a, b)):
                return 0.0
            if j > i:
                dist, _ = tree.query(np.column_stack([b.real, b.imag]))
                best = min(best, float(np.min(dist)))
    return best


@dataclass
class BorderedSphere:
    """Ĉ 去掉 n 个帽子闭像后的带边曲面；边界 C_i = Ψ_i(S¹) 按顺序编号"""
    caps: List[PowerSeries]
    check: bool = True

    def __post_init__(self):
        if not self.caps:
            raise PreconditionError("至少需要一个帽子")
        if not self.check:
            return
        for i, cap in enumerate(self.caps):
            verdict = univalence_check(cap, m=512)
            if verdict.status != 'pass':
                raise PreconditionError(f"帽子 {i} 未通过单叶性检验: {verdict.status} {verdict.reason}")
        if len(self.caps) > 1 and not boundary_separation(self.caps) > 0:
            raise PreconditionError("帽子的闭像相交")

    @property
    def n(self) -> int:
        return len(self.caps)


@dataclass
class RiggedSphere:
    base: BorderedSphere
    riggings: List[CircleHomeo]

    def __post_init__(self):
        if len(self.riggings) != self.base.n:
            raise ConfigurationError(f"装配个数 {len(self.riggings)} 与边界个数 {self.base.n} 不一致")

    def to_json(self) -> Dict:
        return {
            'caps': [c.to_json() for c in self.base.caps],
            'riggings': [h.to_json() for h in self.riggings],
        }

    @classmethod
    def from_json(cls, data: Dict) -> 'RiggedSphere':
        try:
            caps = [PowerSeries.from_json(c) for c in data['caps']]
            riggings = [CircleHomeo.from_json(h) for h in data['riggings']]
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise ConfigurationError(f"RiggedSphere JSON 格式错误: {e}")
        return cls(BorderedSphere(caps), riggings)


@dataclass
class NonOverlappingMaps:
    """φ_i(0) = p_i，各 φ_i(𝔻) 的闭包两两不交"""
    maps: List[PowerSeries]
    punctures: List[complex]
    check: bool = True

    def __post_init__(self):
        self.punctures = [complex(p) for p in self.punctures]
        if len(self.maps) != len(self.punctures):
            raise ConfigurationError("映射个数与刺点个数不一致")
        for i, (phi, p) in enumerate(zip(self.maps, self.punctures)):
            if abs(phi.coeffs[0] - p) > 1e-9 * max(1.0, abs(p)):
                raise PreconditionError(f"φ_{i}(0) = {phi.coeffs[0]} 不等于刺点 {p}")
        if self.check and len(self.maps) > 1 and not boundary_separation(self.maps) > 0:
            raise DegenerationError("映射像的闭包相交")

    @property
    def n(self) -> int:
        return len(self.maps)

    def transform(self, sigma, n: Optional[int] = None) -> 'NonOverlappingMaps':
        """σ∘φ_i（σ 的极点必须在所有像的闭包之外）"""
        maps = [PowerSeries.from_callable(lambda z, phi=phi: mobius_apply(sigma, phi.evaluate(z)),
                                          n or phi.N)
                for phi in self.maps]
        punctures = [complex(p) for p in mobius_apply(sigma, self.punctures)]
        return NonOverlappingMaps(maps, punctures, self.check)

    def to_json(self) -> Dict:
        return {
            'punctures': [_encode_point(p) for p in self.punctures],
            'maps': [phi.to_json() for phi in self.maps],
        }

    @classmethod
    def from_json(cls, data: Dict) -> 'NonOverlappingMaps':
        try:
            maps = [PowerSeries.from_json(s) for s in data['maps']]
            punctures = [_decode_point(p) for p in data['punctures']]
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise ConfigurationError(f"NonOverlappingMaps JSON 格式错误: {e}")
        return cls(maps, punctures)


# ----------------------------------------------------------------------
# 缝合
# ----------------------------------------------------------------------
@dataclass
class SewingResult:
    maps: NonOverlappingMaps
    residuals: List[float]

    @property
    def punctures(self) -> List[complex]:
        return self.maps.punctures

    def to_json(self) -> Dict:
        data = self.maps.to_json()
        data['residuals'] = [float(r) for r in self.residuals]
        return data


def _normalize_affine(maps: List[PowerSeries]) -> List[PowerSeries]:
    """p₁ ↦ 0, p₂ ↦ 1（只有一个刺点时只平移）"""
    p1 = complex(maps[0].coeffs[0])
    scale = complex(maps[1].coeffs[0]) - p1 if len(maps) > 1 else 1.0
    if scale == 0:
        raise DegenerationError("前两个刺点重合")
    out = []
    for phi in maps:
        c = (phi.coeffs - np.eye(1, phi.N, 0).ravel() * p1) / scale
        out.append(PowerSeries(c, INTERIOR, phi.truncation_loss, phi.tail_mass))
    return out


def sew_caps(rigged: RiggedSphere, tol: float = WELD_TOL, max_iter: int = WELD_MAX_ITER,
             guard: float = WELD_GUARD) -> SewingResult:
    """
    依次缝上 n 个帽子

    第 i 步: 把单位圆盘沿 ζ ~ Ψ_i(h_i(ζ)) 粘上，焊接得到单值化 Φ_i；
    帽子像成为 φ_i，其余边界嵌入与已建好的 φ_j 都经 Φ_i 推送。
    """
    caps = list(rigged.base.caps)
    built: Dict[int, PowerSeries] = {}
    residuals = []
    for i in range(rigged.base.n):
        gluing = glue_disc(caps[i], rigged.riggings[i], tol=tol, max_iter=max_iter, guard=guard)
        residuals.append(gluing.residual)
        for j in built:
            built[j] = gluing.push_series(built[j])
        for j in range(i + 1, rigged.base.n):
            caps[j] = gluing.push_series(caps[j])
        built[i] = gluing.cap_image()
        current = [built[j] for j in sorted(built)] + caps[i + 1:]
        if len(current) > 1 and not boundary_separation(current) > 0:
            raise DegenerationError(f"缝合第 {i} 个帽子后圆盘重叠")
    maps = _normalize_affine([built[i] for i in range(rigged.base.n)])
    return SewingResult(NonOverlappingMaps(maps, [complex(m.coeffs[0]) for m in maps]), residuals)


# ----------------------------------------------------------------------
# 坐标卡
# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class Chart:
    """Möbius 坐标卡 ζ，ζ(p) = 0，定义域为圆盘 E = D(center, radius)"""
    matrix: np.ndarray
    point: complex
    center: complex
    radius: float

    def __post_init__(self):
        m = normalize_sl2(self.matrix)
        object.__setattr__(self, 'matrix', m)
        if abs(complex(mobius_apply(m, self.point)[0])) > 1e-10:
            raise PreconditionError("坐标卡必须把刺点送到 0")
        c = m[1, 0]
        if c != 0 and abs(-m[1, 1] / c - self.center) <= self.radius:
            raise PreconditionError("坐标卡的极点落在定义域内")

    @classmethod
    def translation(cls, point: complex, center: complex, radius: float) -> 'Chart':
        return cls(np.array([[1, -point], [0, 1]], dtype=complex), point, center, radius)

    def __call__(self, z) -> np.ndarray:
        return mobius_apply(self.matrix, z)

    def pre_schwarzian(self, w) -> np.ndarray:
        """Möbius (aw+b)/(cw+d) 的 A = -2c/(cw+d)"""
        c, d = self.matrix[1, 0], self.matrix[1, 1]
        return -2.0 * c / (c * np.asarray(w, dtype=complex) + d)

    def contains_closure(self, phi: PowerSeries) -> bool:
        return float(np.max(np.abs(boundary_samples(phi) - self.center))) < self.radius

    def compose(self, phi: PowerSeries, n: Optional[int] = None) -> PowerSeries:
        """ζ∘φ 的级数"""
        return PowerSeries.from_callable(lambda z: self(phi.evaluate(z)), n or phi.N)


@dataclass
class NChart:
    charts: List[Chart]

    def __post_init__(self):
        for i, a in enumerate(self.charts):
            for b in self.charts[i + 1:]:
                if abs(a.center - b.center) < a.radius + b.radius:
                    raise PreconditionError("n-坐标卡的定义域相交")

    @property
    def n(self) -> int:
        return len(self.charts)

    def with_chart(self, i: int, chart: Chart) -> 'NChart':
        charts = list(self.charts)
        charts[i] = chart
        return NChart(charts)


def adapted_nchart(maps: NonOverlappingMaps) -> NChart:
    """以刺点为中心的平移坐标卡，半径取在各像与相邻圆盘之间"""
    reach = [float(np.max(np.abs(boundary_samples(phi) - p)))
             for phi, p in zip(maps.maps, maps.punctures)]
    charts = []
    for i, p in enumerate(maps.punctures):
        slack = min([abs(p - q) - reach[i] - reach[j]
                     for j, q in enumerate(maps.punctures) if j != i] or [reach[i]])
        if slack <= 0:
            raise ChartIncompatibleError(f"刺点 {p} 周围放不下与其它坐标卡不交的圆盘")
        charts.append(Chart.translation(p, p, reach[i] + 0.45 * slack))
    return NChart(charts)


def random_chart(base: Chart, rng: np.random.Generator, strength: float = 0.2) -> Chart:
    """
    同一定义域上的随机 Möbius 坐标卡 ζ(z) = s e^{iα}(z-p)/(1 + b(z-p))

    |b| <= strength/radius，使极点 p - 1/b 远在定义域之外。
    """
    p = base.point
    scale = float(np.exp(rng.uniform(-0.5, 0.5)))
    rot = np.exp(1j * rng.uniform(0.0, 2 * np.pi))
    b = strength / base.radius * rng.uniform(0.0, 1.0) * np.exp(1j * rng.uniform(0.0, 2 * np.pi))
    matrix = np.array([[scale * rot, -scale * rot * p], [b, 1.0 - b * p]], dtype=complex)
    return Chart(matrix, p, base.center, base.radius)


def cusp_control(point: complex = 0j, size: float = 0.3, n: int = 64) -> PowerSeries:
    """p + s(z - z²/2)：f'(1) = 0，A(f) = -1/(1-z) 不在 A₁² 中"""
    return PowerSeries.polynomial([point, size, -size / 2.0], n)


# ----------------------------------------------------------------------
# Oqc₀(Σ)
# ----------------------------------------------------------------------
def oqco_on_sphere(maps: NonOverlappingMaps, chart: NChart,
                   ladder: Sequence[int] = DEFAULT_LADDER) -> List[MembershipVerdict]:
    """对每个 i 判定 ζ_i∘φ_i ∈ Oqc₀"""
    if chart.n != maps.n:
        raise ConfigurationError("坐标卡个数与映射个数不一致")
    verdicts = []
    n = max(ladder)
    for i, (phi, zeta) in enumerate(zip(maps.maps, chart.charts)):
        if not zeta.contains_closure(phi):
            raise ChartIncompatibleError(f"φ_{i}(𝔻) 的闭包不在坐标卡 {i} 的定义域内")
        verdicts.append(oqco_membership(zeta.compose(phi, max(n, phi.N)), ladder))
    return verdicts


@dataclass
class ChartIndependenceReport:
    verdicts_a: List[MembershipVerdict]
    verdicts_b: List[MembershipVerdict]
    minkowski: List[Tuple[float, float, float]] = field(default_factory=list)
    tolerance: float = 1e-6

    @property
    def agree(self) -> bool:
        return all(a.verdict == b.verdict for a, b in zip(self.verdicts_a, self.verdicts_b))

    @property
    def bound_holds(self) -> bool:
        return all(lhs <= h + f + self.tolerance for lhs, h, f in self.minkowski)

    @property
    def passed(self) -> bool:
        return self.agree and self.bound_holds

    def to_json(self) -> Dict:
        return {
            'agree': self.agree,
            'bound_holds': self.bound_holds,
            'verdicts_a': [v.to_json() for v in self.verdicts_a],
            'verdicts_b': [v.to_json() for v in self.verdicts_b],
            'minkowski': [list(row) for row in self.minkowski],
        }


def chart_independence_check(maps: NonOverlappingMaps, chart_a: NChart, chart_b: NChart,
                             ladder: Sequence[int] = DEFAULT_LADDER) -> ChartIndependenceReport:
    """两组坐标卡下的判定逐项一致，并检验转移映射 η_i∘ζ_i⁻¹ 上的 Minkowski 界"""
    verdicts_a = oqco_on_sphere(maps, chart_a, ladder)
    verdicts_b = oqco_on_sphere(maps, chart_b, ladder)
    report = ChartIndependenceReport(verdicts_a, verdicts_b)
    for phi, zeta, eta in zip(maps.maps, chart_a.charts, chart_b.charts):
        transition = normalize_sl2(eta.matrix @ np.array([[zeta.matrix[1, 1], -zeta.matrix[0, 1]],
                                                          [-zeta.matrix[1, 0], zeta.matrix[0, 0]]]))
        c, d = transition[1, 0], transition[1, 1]
        g = zeta.compose(phi, max(64, phi.N))
        report.minkowski.append(minkowski_terms(lambda w: -2.0 * c / (c * w + d), g))
    return report


# ----------------------------------------------------------------------
# 模空间等价
# ----------------------------------------------------------------------
@dataclass
class EquivalenceReport:
    equivalent: bool
    sigma: np.ndarray
    puncture_error: float
    boundary_distance: float

    def to_json(self) -> Dict:
        return {
            'equivalent': self.equivalent,
            'sigma': [[complex(v).real, complex(v).imag] for v in self.sigma.ravel()],
            'puncture_error': self.puncture_error,
            'boundary_distance': self.boundary_distance,
        }


def _point_gap(a: complex, b: complex) -> float:
    if is_infinite(a) or is_infinite(b):
        return 0.0 if is_infinite(a) and is_infinite(b) else float('inf')
    return abs(a - b)


def moduli_equivalent(a: NonOverlappingMaps, b: NonOverlappingMaps,
                      tol: float = BOUNDARY_TOL, m: int = 512) -> EquivalenceReport:
    """
    σ 由 a 的前三个刺点到 b 的前三个刺点唯一确定；
    接受当且仅当 σ 匹配全部刺点且 sup|σ∘φ_i^a - φ_i^b| < tol
    """
    if a.n != b.n:
        raise PreconditionError("两个配置的刺点个数不同")
    if a.n < 3:
        raise PreconditionError("少于 3 个刺点时不支持 Möbius 归一化")
    sigma = three_point_mobius(a.punctures[:3], b.punctures[:3])
    pushed = mobius_apply(sigma, a.punctures)
    puncture_error = max(_point_gap(p, q) for p, q in zip(pushed, b.punctures))
    distance = 0.0
    for phi_a, phi_b in zip(a.maps, b.maps):
        k = max(m, next_power_of_two(2 * max(phi_a.N, phi_b.N)))
        za = mobius_apply(sigma, boundary_samples(phi_a, k))
        zb = boundary_samples(phi_b, k)
        distance = max(distance, float(np.max(np.abs(za - zb))))
    equivalent = puncture_error < tol and distance < tol
    return EquivalenceReport(bool(equivalent), sigma, float(puncture_error), distance)
