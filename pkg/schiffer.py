#!/usr/bin/env python3
"""
Schiffer 变分模块（亏格 0）

1. Möbius 工具（SL(2,ℂ) 矩阵，支持 ∞）
2. 带刺点与参数圆盘的球面配置 PuncturedSphereConfig
3. 帽子映射 v^ε(z) = z + ε/z，w^ε(z) = z + εz̄
4. schiffer_vary: 逐个圆盘做焊接缝合，推送刺点
5. classify: 前三个刺点归一到 0, 1, ∞ 后的交比坐标
6. holomorphy_probe: 四点 Cauchy–Riemann 模板
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import (
    CapDegenerateError,
    ConditioningError,
    ConfigurationError,
    DegenerationError,
    PreconditionError,
)
from series_core import EXTERIOR, PowerSeries
from welding import (
    WELD_GUARD,
    WELD_MAX_ITER,
    CircleHomeo,
    glue_disc,
    theodorsen_map,
)

SCHIFFER_GUARD = 0.3
PROBE_TOL = 1e-12
DELTA_LADDER = (4e-3, 2e-3, 1e-3)
INF = complex(np.inf, 0.0)


# ----------------------------------------------------------------------
# Möbius
# ----------------------------------------------------------------------
def is_infinite(z) -> bool:
    return not np.isfinite(complex(z))


def normalize_sl2(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    det = np.linalg.det(m)
    if det == 0:
        raise ConditioningError("Möbius 矩阵奇异")
    return m / np.sqrt(det)


def mobius_inverse(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


def mobius_apply(m, z) -> np.ndarray:
    """(az+b)/(cz+d)，∞ ↦ a/c，分母为零 ↦ ∞"""
    m = np.asarray(m, dtype=complex)
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty(z.shape, dtype=complex)
    inf = ~np.isfinite(z)
    out[inf] = INF if c == 0 else a / c
    zf = z[~inf]
    num = a * zf + b
    den = c * zf + d
    with np.errstate(divide='ignore', invalid='ignore'):
        out[~inf] = np.where(den == 0, INF, num / np.where(den == 0, 1.0, den))
    return out


def _to_zero_one_inf(p1: complex, p2: complex, p3: complex) -> np.ndarray:
    """把 (p1, p2, p3) 送到 (0, 1, ∞) 的矩阵"""
    if is_infinite(p1):
        m = [[0, p2 - p3], [1, -p3]]
    elif is_infinite(p2):
        m = [[1, -p1], [1, -p3]]
    elif is_infinite(p3):
        m = [[1, -p1], [0, p2 - p1]]
    else:
        m = [[p2 - p3, -p1 * (p2 - p3)], [p2 - p1, -p3 * (p2 - p1)]]
    m = np.asarray(m, dtype=complex)
    size = float(np.max(np.abs(m)))
    det = np.linalg.det(m)
    if size == 0 or abs(det) <= 1e-13 * size * size:
        raise ConditioningError(f"三点 ({p1}, {p2}, {p3}) 重合或近乎重合")
    return m


def three_point_mobius(p: Sequence[complex], q: Sequence[complex]) -> np.ndarray:
    """p1→q1, p2→q2, p3→q3 的唯一 SL(2,ℂ) 矩阵"""
    tp = _to_zero_one_inf(*p)
    tq = _to_zero_one_inf(*q)
    return normalize_sl2(mobius_inverse(tq) @ tp)


# ----------------------------------------------------------------------
# 配置
# ----------------------------------------------------------------------
def _encode_point(z: complex):
    z = complex(z)
    return 'inf' if is_infinite(z) else [z.real, z.imag]


def _decode_point(v) -> complex:
    if isinstance(v, str):
        if v.lower() in ('inf', 'infinity', '∞'):
            return INF
        raise ConfigurationError(f"无法解析的点: {v}")
    re, im = v
    return complex(re, im)


@dataclass(frozen=True)
class ParametricDisc:
    """仿射坐标卡 ξ(z) = (z - c)/r"""
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise PreconditionError(f"圆盘半径必须为正，当前 r={self.radius}")

    def embedding(self, n: int = 64) -> PowerSeries:
        return PowerSeries.polynomial([self.center, self.radius], n)

    def to_json(self) -> Dict:
        return {'center': _encode_point(self.center), 'radius': self.radius}


@dataclass
class PuncturedSphereConfig:
    punctures: List[complex]
    discs: List[ParametricDisc] = field(default_factory=list)
    epsilon: List[complex] = field(default_factory=list)
    guard: float = SCHIFFER_GUARD

    def __post_init__(self):
        if not 0.0 < self.guard < 1.0:
            raise ConfigurationError(f"Schiffer 保护阈值必须在 (0,1) 内，当前 {self.guard}")
        self.punctures = [complex(p) for p in self.punctures]
        self.epsilon = [complex(e) for e in self.epsilon] or [0j] * len(self.discs)
        if len(self.punctures) < 4:
            raise PreconditionError(f"至少需要 4 个刺点，当前 {len(self.punctures)} 个")
        if len(self.epsilon) != len(self.discs):
            raise ConfigurationError("epsilon 个数必须与圆盘个数一致")
        _require_distinct(self.punctures)
        for i, a in enumerate(self.discs):
            for b in self.discs[i + 1:]:
                if abs(a.center - b.center) <= a.radius + b.radius:
                    raise PreconditionError("参数圆盘的闭包相交")
            for p in self.punctures:
                if not is_infinite(p) and abs(p - a.center) <= a.radius:
                    raise PreconditionError(f"刺点 {p} 落在圆盘 {a.center}±{a.radius} 内")
        for i, (e, d) in enumerate(zip(self.epsilon, self.discs)):
            if abs(e) >= d.radius ** 2:
                raise CapDegenerateError(f"|ε|={abs(e):.3g} >= r²={d.radius ** 2:.3g}，v^ε 不再单射")
            if abs(e) > self.guard * d.radius ** 2:
                raise PreconditionError(
                    f"圆盘 {i}: |ε/r²| = {abs(e) / d.radius ** 2:.3g} 超过保护阈值 {self.guard}")

    def with_epsilon(self, epsilon: Sequence[complex]) -> 'PuncturedSphereConfig':
        return PuncturedSphereConfig(list(self.punctures), list(self.discs), list(epsilon), self.guard)

    def with_guard(self, guard: float) -> 'PuncturedSphereConfig':
        return PuncturedSphereConfig(list(self.punctures), list(self.discs), list(self.epsilon), guard)

    def to_json(self) -> Dict:
        return {
            'punctures': [_encode_point(p) for p in self.punctures],
            'discs': [d.to_json() for d in self.discs],
            'epsilon': [_encode_point(e) for e in self.epsilon],
            'guard': self.guard,
        }

    @classmethod
    def from_json(cls, data: Dict) -> 'PuncturedSphereConfig':
        try:
            punctures = [_decode_point(p) for p in data['punctures']]
            discs = [ParametricDisc(_decode_point(d['center']), float(d['radius']))
                     for d in data.get('discs', [])]
            epsilon = [_decode_point(e) for e in data.get('epsilon', [])]
            guard = float(data.get('guard', SCHIFFER_GUARD))
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise ConfigurationError(f"配置 JSON 格式错误: {e}")
        return cls(punctures, discs, epsilon, guard)


def _require_distinct(points: Sequence[complex], tol: float = 1e-12):
    pts = [complex(p) for p in points]
    for i, a in enumerate(pts):
        for b in pts[i + 1:]:
            if is_infinite(a) and is_infinite(b):
                raise DegenerationError("两个刺点都在 ∞")
            if not is_infinite(a) and not is_infinite(b) and abs(a - b) <= tol * max(1.0, abs(a)):
                raise DegenerationError(f"刺点 {a} 与 {b} 重合")


# ----------------------------------------------------------------------
# 帽子映射
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class RealLinearMap:
    """w^ε(z) = z + εz̄"""
    epsilon: complex

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return z + self.epsilon * np.conj(z)


@dataclass(frozen=True, eq=False)
class CapMaps:
    v: PowerSeries
    w: RealLinearMap
    boundary_gap: float


def cap_maps(epsilon: complex, m: int = 256) -> CapMaps:
    """v^ε 作为外部级数 [1, 0, ε]，w^ε 为实线性映射；在 S¹ 上两者一致（z̄ = 1/z）"""
    epsilon = complex(epsilon)
    if abs(epsilon) >= 1.0:
        raise CapDegenerateError(f"|ε| = {abs(epsilon):.4g} >= 1，帽子退化")
    v = PowerSeries(np.array([1.0, 0.0, epsilon]), EXTERIOR)
    w = RealLinearMap(epsilon)
    z = np.exp(2j * np.pi * np.arange(m) / m)
    gap = float(np.max(np.abs(v.evaluate(z) - w(z))))
    return CapMaps(v, w, gap)


def cap_circle_map(epsilon_xi: complex, n: int = 128) -> CircleHomeo:
    """
    帽子 D^ε（v^ε(S¹) 围成的区域）的 Riemann 映射 f 的边界对应

    f(e^{is}) = v^ε(e^{iS(s)})，于是帽子边界点 e^{is} 粘到 ξ 坐标中的 e^{iS(s)}。
    """
    eps = complex(epsilon_xi)
    if eps == 0:
        return CircleHomeo.identity()
    result = theodorsen_map(lambda t: np.exp(1j * t) + eps * np.exp(-1j * t),
                            lambda t: 1j * np.exp(1j * t) - 1j * eps * np.exp(-1j * t),
                            center=0j, reference=1.0, n=n)
    return result.correspondence


# ----------------------------------------------------------------------
# 变分
# ----------------------------------------------------------------------
@dataclass
class VariationResult:
    punctures: List[complex]
    residuals: List[float]
    order: List[int]

    def to_json(self) -> Dict:
        return {
            'punctures': [_encode_point(p) for p in self.punctures],
            'residuals': [float(r) for r in self.residuals],
            'order': self.order,
        }


def schiffer_vary(config: PuncturedSphereConfig, order: Optional[Sequence[int]] = None,
                  guard: Optional[float] = None, tol: float = 1e-10,
                  max_iter: int = WELD_MAX_ITER, weld_guard: float = WELD_GUARD) -> VariationResult:
    """
    逐个圆盘把帽子 D^{ε_i} 沿 v^{ε_i}∘ξ_i 缝回，并把刺点与其余圆盘推送到新球面

    ε 以球面坐标计量，第 i 个圆盘的单位圆参数为 ε_i / r_i²。
    后续圆盘使用被推送后的（一般不再是圆的）嵌入作为坐标卡。
    guard 缺省取 config.guard。
    """
    guard = config.guard if guard is None else guard
    order = list(range(len(config.discs))) if order is None else list(order)
    if sorted(order) != list(range(len(config.discs))):
        raise ConfigurationError(f"非法的缝合顺序: {order}")

    embeddings = {i: d.embedding() for i, d in enumerate(config.discs)}
    points = np.array(config.punctures, dtype=complex)
    residuals = []
    for step, i in enumerate(order):
        eps_xi = config.epsilon[i] / config.discs[i].radius ** 2
        if eps_xi == 0:
            residuals.append(0.0)
            continue
        if abs(eps_xi) > guard:
            raise PreconditionError(f"圆盘 {i}: |ε/r²| = {abs(eps_xi):.3g} 超过保护阈值 {guard}")
        gluing = glue_disc(embeddings[i], cap_circle_map(eps_xi), tol=tol,
                           max_iter=max_iter, guard=weld_guard)
        points = gluing.push(points)
        for j in order[step + 1:]:
            embeddings[j] = gluing.push_series(embeddings[j])
        residuals.append(gluing.residual)
    pushed = [complex(p) for p in points]
    _require_distinct(pushed, tol=1e-9)
    return VariationResult(pushed, residuals, order)


@dataclass
class ClassifyingCoordinate:
    values: List[complex]

    def __post_init__(self):
        for v in self.values:
            if is_infinite(v) or abs(v) < 1e-14 or abs(v - 1) < 1e-14:
                raise DegenerationError(f"交比坐标 {v} 退化到 0, 1 或 ∞")

    def to_json(self) -> Dict:
        return {'values': [[complex(v).real, complex(v).imag] for v in self.values]}


def classify(punctures) -> ClassifyingCoordinate:
    """前三个刺点送到 0, 1, ∞，其余点的像即坐标"""
    if isinstance(punctures, PuncturedSphereConfig):
        punctures = punctures.punctures
    pts = [complex(p) for p in punctures]
    if len(pts) < 4:
        raise PreconditionError(f"至少需要 4 个刺点，当前 {len(pts)} 个")
    _require_distinct(pts)
    t = normalize_sl2(_to_zero_one_inf(*pts[:3]))
    return ClassifyingCoordinate([complex(v) for v in mobius_apply(t, pts[3:])])


# ----------------------------------------------------------------------
# Cauchy–Riemann 模板
# ----------------------------------------------------------------------
@dataclass
class HolomorphyRow:
    delta: float
    d_eps: complex
    d_epsbar: complex

    @property
    def ratio(self) -> float:
        if self.d_eps == 0:
            return float('inf')
        return abs(self.d_epsbar) / abs(self.d_eps)


@dataclass
class HolomorphyReport:
    rows: List[HolomorphyRow]

    @property
    def ratios(self) -> List[float]:
        return [r.ratio for r in self.rows]

    @property
    def decreasing(self) -> bool:
        """δ 减小时比值单调下降（允许 2 倍噪声）"""
        r = self.ratios
        return all(b <= 2.0 * a for a, b in zip(r[:-1], r[1:])) and r[-1] <= r[0]

    @property
    def anti_holomorphic(self) -> bool:
        last = self.rows[-1]
        return abs(last.d_eps) <= 1e-8 * max(abs(last.d_epsbar), 1e-300)

    @property
    def derivative(self) -> complex:
        return self.rows[-1].d_eps

    def to_json(self) -> Dict:
        return {
            'rows': [{'delta': r.delta, 'd_eps': [r.d_eps.real, r.d_eps.imag],
                      'd_epsbar': [r.d_epsbar.real, r.d_epsbar.imag], 'ratio': r.ratio}
                     for r in self.rows],
            'decreasing': self.decreasing,
            'anti_holomorphic': self.anti_holomorphic,
        }


def cr_stencil(func: Callable[[complex], complex], z0: complex,
               deltas: Sequence[float]) -> HolomorphyReport:
    """∂ = (D_x - iD_y)/2，∂̄ = (D_x + iD_y)/2，中心差分"""
    rows = []
    for delta in deltas:
        dx = (func(z0 + delta) - func(z0 - delta)) / (2 * delta)
        dy = (func(z0 + 1j * delta) - func(z0 - 1j * delta)) / (2 * delta)
        rows.append(HolomorphyRow(delta, complex(0.5 * (dx - 1j * dy)), complex(0.5 * (dx + 1j * dy))))
    return HolomorphyReport(rows)


def holomorphy_probe(config: PuncturedSphereConfig, disc_index: int = 0,
                     deltas: Sequence[float] = DELTA_LADDER, component: int = 0,
                     evaluator: Optional[Callable[[complex], complex]] = None,
                     tol: float = PROBE_TOL) -> HolomorphyReport:
    """
    λ(ε) 关于第 disc_index 个 ε 的 CR 比值 |∂λ/∂ε̄| / |∂λ/∂ε|

    evaluator 可以替换真实的 Schiffer 求解（用于合成对照）。
    """
    base = list(config.epsilon)
    if evaluator is None:
        def evaluator(e: complex) -> complex:
            eps = list(base)
            eps[disc_index] = e
            varied = schiffer_vary(config.with_epsilon(eps), tol=tol)
            return classify(varied.punctures).values[component]
    return cr_stencil(evaluator, base[disc_index], deltas)


# ----------------------------------------------------------------------
# 扫描
# ----------------------------------------------------------------------
SWEEP_COLUMNS = ('eps_re', 'eps_im', 'lambda_re', 'lambda_im', 'residual')


def sweep(config: PuncturedSphereConfig, disc_index: int = 0, radius: float = 1e-2,
          steps: int = 5, component: int = 0, jobs: int = 1,
          tol: float = 1e-10) -> List[Tuple[float, float, float, float, float]]:
    """ε 在 [-radius, radius]² 方格上的 λ 扫描，每行 (ε_re, ε_im, λ_re, λ_im, residual)"""
    axis = np.linspace(-radius, radius, steps)
    grid = [complex(x, y) for y in axis for x in axis]

    def run(e: complex):
        eps = list(config.epsilon)
        eps[disc_index] = config.epsilon[disc_index] + e
        varied = schiffer_vary(config.with_epsilon(eps), tol=tol)
        lam = classify(varied.punctures).values[component]
        residual = max(varied.residuals) if varied.residuals else 0.0
        return (eps[disc_index].real, eps[disc_index].imag, lam.real, lam.imag, residual)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run, grid))
    return [run(e) for e in grid]


def default_config(lam: complex = 0.3 + 0.8j, center: complex = 0.5 - 0.6j,
                   radius: float = 0.25) -> PuncturedSphereConfig:
    """四刺点 (0, 1, ∞, λ) 加一个参数圆盘"""
    return PuncturedSphereConfig([0j, 1 + 0j, INF, lam], [ParametricDisc(center, radius)], [0j])


def round_disc_lambda(lam: complex, center: complex, epsilon: complex) -> complex:
    """
    圆盘情形的闭式解：外部单值化恰为 x ↦ x + ε/(x - c)，
    刺点 (0, 1, ∞, λ) 的新交比坐标
    """
    c = complex(center)
    e = complex(epsilon)
    return (lam + e / (lam - c) + e / c) / (1 + e / (1 - c) + e / c)
