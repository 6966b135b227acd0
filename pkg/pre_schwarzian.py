#!/usr/bin/env python3
"""
前 Schwarz 坐标模块

χ(f) = (A(f), f'(0))，A(f) = f''/f'：
1. 计算 A(f)、逆映射 χ⁻¹
2. 复合转移公式 A(h∘f) = A(h)∘f·f' + A(f)
3. Oqc₀ 成员判定（截断 Bergman 范数阶梯）
4. 数值单叶性证书与开性探测
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree

from errors import PreconditionError, SingularInputError, UnsupportedKindError
from norms import (
    DEFAULT_LADDER,
    DIVERGENCE_THRESHOLD,
    SLOPE_THRESHOLD,
    bergman_norm,
    disc_integral,
    divergence_verdict,
    ring_samples,
)
from series_core import (
    INTERIOR,
    PowerSeries,
    compose,
    default_samples,
    differentiate,
    divide,
    exp_series,
    fit_interior,
    integrate0,
    multiply,
    sample_circle,
    CircleSamples,
)

# A(h) 可以是级数，也可以是逐点函数（h 在单位圆盘外也有定义时）
PreSchwarzianLike = Union[PowerSeries, Callable[[np.ndarray], np.ndarray]]

PASS = 'pass'
FAIL = 'fail'
INCONCLUSIVE = 'inconclusive'


@dataclass(frozen=True, eq=False)
class PreSchwarzianCoords:
    """χ 像: phi 存放 A(f)，d 存放 f'(0)"""
    phi: PowerSeries
    d: complex

    def __post_init__(self):
        if self.phi.kind != INTERIOR:
            raise UnsupportedKindError("A(f) 必须是内部级数")
        if self.d == 0:
            raise PreconditionError("f'(0) 不能为 0")

    def to_json(self) -> Dict:
        d = complex(self.d)
        return {'phi': self.phi.to_json(), 'd': [d.real, d.imag]}

    @classmethod
    def from_json(cls, data: Dict) -> 'PreSchwarzianCoords':
        re, im = data['d']
        return cls(PowerSeries.from_json(data['phi']), complex(re, im))


@dataclass
class MembershipVerdict:
    ladder: List[int]
    norms: List[float]
    verdict: str
    growth: float

    def to_json(self) -> Dict:
        return {
            'ladder': list(self.ladder),
            'norms': [float(x) for x in self.norms],
            'verdict': self.verdict,
            'growth': float(self.growth),
        }


@dataclass
class UnivalenceVerdict:
    status: str
    witness: Optional[Tuple[complex, complex]] = None
    resolution: int = 0
    min_derivative: float = 0.0
    winding: int = 0
    reason: str = ''

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_json(self) -> Dict:
        witness = None
        if self.witness is not None:
            witness = [[complex(z).real, complex(z).imag] for z in self.witness]
        return {
            'status': self.status,
            'witness': witness,
            'resolution': self.resolution,
            'min_derivative': self.min_derivative,
            'winding': self.winding,
            'reason': self.reason,
        }


# ----------------------------------------------------------------------
# A(f) 与 χ
# ----------------------------------------------------------------------
def pre_schwarzian(f: PowerSeries) -> PowerSeries:
    """
    截断商 f''/f'

    f' 与 f'' 在截断内是精确多项式，商的下标 0..N-3 与无穷级数一致；
    最后两项置零并记录 truncation_loss。
    """
    if f.kind != INTERIOR:
        raise UnsupportedKindError("pre_schwarzian 只支持内部级数")
    if f.N < 4:
        raise PreconditionError(f"截断过短: N={f.N}")
    df = differentiate(f)
    scale = max(float(np.max(np.abs(df.coeffs))), 1e-300)
    if abs(df.coeffs[0]) <= 1e-14 * scale:
        raise SingularInputError("f'(0) = 0，A(f) 无定义")
    q = divide(differentiate(df), df)
    c = q.coeffs.copy()
    c[-2:] = 0.0
    return PowerSeries(c, INTERIOR, True, q.tail_mass)


def pre_schwarzian_at(h: PowerSeries, w) -> np.ndarray:
    """逐点 h''(w)/h'(w)；多项式 h 可在单位圆盘外求值"""
    w = np.asarray(w, dtype=complex)
    k = np.arange(h.N)
    d1 = h.coeffs[1:] * k[1:]
    d2 = d1[1:] * k[1:-1]
    return np.polynomial.polynomial.polyval(w, d2) / np.polynomial.polynomial.polyval(w, d1)


def chi(f: PowerSeries) -> PreSchwarzianCoords:
    return PreSchwarzianCoords(pre_schwarzian(f), complex(f.coeffs[1]))


def chi_inverse(coords: PreSchwarzianCoords) -> PowerSeries:
    """f(z) = d ∫₀^z exp(∫₀^u φ) du"""
    g = integrate0(coords.phi)
    return integrate0(exp_series(g)).scale(coords.d)


# ----------------------------------------------------------------------
# 复合转移公式
# ----------------------------------------------------------------------
def _pointwise(a_h: PreSchwarzianLike) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(a_h, PowerSeries):
        return a_h.evaluate
    return a_h


def transfer_compose(a_h: PreSchwarzianLike, f: PowerSeries,
                     m: Optional[int] = None) -> PowerSeries:
    """
    A(h∘f) = A(h)∘f·f' + A(f)

    Args:
        a_h: A(h) 的级数（要求 sup|f| < 1）或逐点函数（在 f(𝔻̄) 上全纯即可）
        f: 内层映射
    """
    df = differentiate(f)
    if isinstance(a_h, PowerSeries):
        term = multiply(compose(a_h, f, m), df)
    else:
        m = m or default_samples(f.N)
        fv = sample_circle(f, 1.0, m).values
        dv = sample_circle(df, 1.0, m).values
        term = fit_interior(CircleSamples(a_h(fv) * dv), f.N)
    return term + pre_schwarzian(f)


def minkowski_terms(a_h: PreSchwarzianLike, f: PowerSeries,
                    n_radial: int = 64) -> Tuple[float, float, float]:
    """
    Minkowski 不等式三项

    Returns:
        (‖A(h∘f)‖, (∬|A(h)∘f|²|f'|² dA)^{1/2}, ‖A(f)‖)；
        第二项即 ∬_{f(𝔻)}|A(h)|² dA 经变量替换后的求积
    """
    lhs = bergman_norm(transfer_compose(a_h, f))
    pointwise = _pointwise(a_h)
    df = differentiate(f)
    m = max(256, 2 * f.N)

    def integrand(radii, n_angular):
        fv = ring_samples(f, radii, n_angular)
        dv = ring_samples(df, radii, n_angular)
        return np.abs(pointwise(fv)) ** 2 * np.abs(dv) ** 2

    quad = disc_integral(integrand, alpha=0.0, n_radial=n_radial, n_angular=m)
    rhs_h = float(np.sqrt(max(quad.value, 0.0)))
    rhs_f = bergman_norm(pre_schwarzian(f))
    return lhs, rhs_h, rhs_f


# ----------------------------------------------------------------------
# 成员判定
# ----------------------------------------------------------------------
def oqco_membership(f: PowerSeries, ladder: Sequence[int] = DEFAULT_LADDER,
                    threshold: float = DIVERGENCE_THRESHOLD,
                    slope_threshold: float = SLOPE_THRESHOLD) -> MembershipVerdict:
    """
    A(f) ∈ A₁² 的截断阶梯判定

    截断 n 的 A(f) 在下标 0..n-3 上精确，所以一次计算后按阶梯截取即可；
    阶梯超过 f 的截断时使用全部系数。
    """
    a = pre_schwarzian(f)
    norms = []
    for n in ladder:
        keep = max(n - 2, 1) if n <= f.N else a.N
        norms.append(bergman_norm(a.truncate(keep)))
    verdict, slope = divergence_verdict(ladder, norms, threshold, slope_threshold)
    return MembershipVerdict(list(ladder), norms, verdict, slope)


# ----------------------------------------------------------------------
# 单叶性证书
# ----------------------------------------------------------------------
def _orientation(a, b, c):
    return (b.real - a.real) * (c.imag - a.imag) - (b.imag - a.imag) * (c.real - a.real)


def _segments_cross(p1, p2, q1, q2, eps: float) -> bool:
    """闭线段相交（含共线重叠）"""
    d1 = _orientation(q1, q2, p1)
    d2 = _orientation(q1, q2, p2)
    d3 = _orientation(p1, p2, q1)
    d4 = _orientation(p1, p2, q2)
    if ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and \
            ((d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)):
        return True

    def on_segment(a, b, c):
        return (min(a.real, b.real) - 1e-14 <= c.real <= max(a.real, b.real) + 1e-14 and
                min(a.imag, b.imag) - 1e-14 <= c.imag <= max(a.imag, b.imag) + 1e-14)

    return ((abs(d1) <= eps and on_segment(q1, q2, p1)) or
            (abs(d2) <= eps and on_segment(q1, q2, p2)) or
            (abs(d3) <= eps and on_segment(p1, p2, q1)) or
            (abs(d4) <= eps and on_segment(p1, p2, q2)))


def _cyclic_gap(i: int, j: int, m: int) -> int:
    d = abs(i - j) % m
    return min(d, m - d)


def curve_crossing(curve: np.ndarray) -> Optional[Tuple[int, int, str]]:
    """
    闭多边形的第一处自交

    Returns:
        (i, j, 原因) 或 None；i, j 为顶点/线段起点下标
    """
    m = curve.size
    seg_len = np.abs(np.roll(curve, -1) - curve)
    max_seg = float(np.max(seg_len))
    scale = max(float(np.max(np.abs(curve - np.mean(curve)))), 1e-300)
    eps = 1e-12 * scale * scale

    tree = cKDTree(np.column_stack([curve.real, curve.imag]))
    for i, j in sorted(tree.query_pairs(1e-12 * scale)):
        return i, j, 'coincident boundary samples'

    mids = (curve + np.roll(curve, -1)) / 2.0
    mid_tree = cKDTree(np.column_stack([mids.real, mids.imag]))
    for i, j in sorted(mid_tree.query_pairs(max_seg * (1.0 + 1e-9))):
        if _cyclic_gap(i, j, m) <= 1:
            continue
        if _segments_cross(curve[i], curve[(i + 1) % m], curve[j], curve[(j + 1) % m], eps):
            return i, j, 'boundary self-intersection'
    return None


def univalence_check(f: PowerSeries, m: int = 1024, n_rings: int = 32) -> UnivalenceVerdict:
    """
    数值单叶性证书（不是证明）

    1. 半径 r = 1 - 1/M 的边界多边形不自交（KD 树筛选候选线段对）
    2. f' 在极坐标网格上不为零
    3. 像曲线绕 f(0) 的环绕数为 1
    曲线在分辨率以下自我靠近但未相交时返回 inconclusive。
    """
    r = 1.0 - 1.0 / m
    z = r * np.exp(2j * np.pi * np.arange(m) / m)
    curve = ring_samples(f, np.array([r]), m)[0]
    seg_len = np.abs(np.roll(curve, -1) - curve)
    max_seg = float(np.max(seg_len))

    crossing = curve_crossing(curve)
    if crossing is not None:
        i, j, reason = crossing
        return UnivalenceVerdict(FAIL, (z[i], z[j]), m, reason=reason)

    # f' 非零
    radii = np.linspace(0.0, r, n_rings)
    deriv = np.abs(ring_samples(differentiate(f), radii, min(m, 512)))
    min_deriv = float(np.min(deriv))
    if min_deriv <= 1e-12 * max(float(np.max(deriv)), 1e-300):
        j, k = np.unravel_index(int(np.argmin(deriv)), deriv.shape)
        zc = radii[j] * np.exp(2j * np.pi * k / deriv.shape[1])
        return UnivalenceVerdict(FAIL, (zc, zc), m, min_deriv, reason='critical point')

    winding = int(round(float(np.sum(np.diff(np.unwrap(np.angle(
        np.append(curve, curve[0]) - f.coeffs[0]))))) / (2 * np.pi)))
    if winding != 1:
        return UnivalenceVerdict(FAIL, (z[0], z[0]), m, min_deriv, winding, reason='winding number')

    # 近似自触：欧氏距离低于分辨率而沿曲线弧长很长
    arc = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = arc[-1]
    tree = cKDTree(np.column_stack([curve.real, curve.imag]))
    for i, j in sorted(tree.query_pairs(max_seg)):
        along = abs(arc[j] - arc[i])
        along = min(along, total - along)
        if along > 10.0 * max_seg:
            return UnivalenceVerdict(INCONCLUSIVE, (z[i], z[j]), m, min_deriv, winding,
                                     reason='near self-contact below resolution')
    return UnivalenceVerdict(PASS, None, m, min_deriv, winding)


# ----------------------------------------------------------------------
# 开性探测
# ----------------------------------------------------------------------
@dataclass
class OpennessReport:
    radius: float
    center: complex
    trials: int
    largest_passing: float
    results: Dict[float, bool] = field(default_factory=dict)
    failures: List[str] = field(default_factory=list)

    def to_json(self) -> Dict:
        return {
            'radius': self.radius,
            'center': [self.center.real, self.center.imag],
            'trials': self.trials,
            'largest_passing': self.largest_passing,
            'results': {repr(k): v for k, v in self.results.items()},
            'failures': self.failures,
        }


def random_direction(n: int, size: float, rng: np.random.Generator, degree: int = 6) -> PowerSeries:
    """Bergman 范数为 size 的随机低阶方向"""
    c = np.zeros(n, dtype=complex)
    k = min(degree, n - 2)
    c[:k] = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) / np.arange(1, k + 1)
    direction = PowerSeries(c)
    norm = bergman_norm(direction)
    return direction.scale(size / norm if norm > 0 else 0.0)


def openness_probe(f: PowerSeries, radius: float, center: complex = 0.0, trials: int = 8,
                   scales: Sequence[float] = (1e-3, 1e-2, 1e-1), seed: int = 0,
                   m: int = 1024) -> OpennessReport:
    """
    沿随机 φ 方向扰动 χ(f)，检验扰动后仍单叶且 f(𝔻) 闭包仍在圆盘 E 内

    Returns:
        每个尺度是否全部通过，以及全部通过的最大尺度（都不通过时为 0）

    Raises:
        PreconditionError: f 本身没有通过 univalence_check
    """
    start = univalence_check(f, m)
    if not start.passed:
        raise PreconditionError(f"openness_probe 要求 f 单叶，当前判定 {start.status}: {start.reason}")
    base = chi(f)
    rng = np.random.default_rng(seed)
    report = OpennessReport(radius, complex(center), trials, 0.0)
    for delta in sorted(scales):
        ok = True
        for t in range(trials):
            psi = random_direction(f.N, delta, rng)
            g = chi_inverse(PreSchwarzianCoords(base.phi + psi, base.d))
            verdict = univalence_check(g, m)
            reach = float(np.max(np.abs(sample_circle(g, 1.0, max(m, 2 * g.N)).values - center)))
            if not verdict.passed or reach >= radius:
                ok = False
                report.failures.append(
                    f"δ={delta:g} trial={t}: univalence={verdict.status}, sup|f-c|={reach:.6g}")
                break
        report.results[delta] = ok
        if ok:
            report.largest_passing = max(report.largest_passing, delta)
    return report
