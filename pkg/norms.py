#!/usr/bin/env python3
"""
范数与积分泛函模块

Bergman A₁²、A₁^∞、Dirichlet、Besov B^p、小 Bloch 衰减、
𝔻* 上 Beltrami 系数的双曲 L²、加权积分 ∬|f'|^p(1-|z|²)^α，以及 Carleson 盒测度。
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.special import roots_jacobi

from errors import PreconditionError
from series_core import INTERIOR, PowerSeries, differentiate, next_power_of_two

DEFAULT_LADDER = (64, 128, 256, 512)
DIVERGENCE_THRESHOLD = 1e3
SLOPE_THRESHOLD = 0.5
ANNULUS_CUTOFF = 4.0

FPRIME_POWER = 'fprime_power'
PHI_SQUARED = 'phi_squared'
PSI_POWER = 'psi_power'

# 圆环上的被积函数: (radii, n_angular) -> 形状 (len(radii), n_angular) 的实数组
RingIntegrand = Callable[[np.ndarray, int], np.ndarray]


@dataclass
class NormReport:
    """范数报告: { "norm": 值, "converged": 是否收敛, "grid": {...} }"""
    norm: float
    converged: bool
    grid: Dict = field(default_factory=dict)
    lower_bound: bool = False

    def to_json(self) -> Dict:
        return {
            'norm': float(self.norm),
            'converged': bool(self.converged),
            'grid': self.grid,
            'lower_bound': bool(self.lower_bound),
        }


@dataclass
class QuadratureResult:
    value: float
    converged: bool
    n_radial: int
    n_angular: int


@dataclass(frozen=True)
class WeightedIntegralSpec:
    """∬ |·|^p (1-|z|²)^α dA 的参数（p > 0，α > -1）"""
    p: float
    alpha: float
    role: str = FPRIME_POWER

    def __post_init__(self):
        if not self.p > 0:
            raise PreconditionError(f"指数 p 必须为正，当前 p={self.p}")
        if not self.alpha > -1:
            raise PreconditionError(f"权指数 α 必须 > -1，当前 α={self.alpha}")
        if self.role not in (FPRIME_POWER, PHI_SQUARED, PSI_POWER):
            raise PreconditionError(f"未知被积函数角色: {self.role}")


@dataclass(frozen=True)
class PolarGrid:
    """极坐标网格：前一半半径均匀分布，后一半几何逼近 r=1"""
    n_radial: int = 64
    n_angular: int = 256
    min_gap: float = 1e-6

    def radii(self) -> np.ndarray:
        half = self.n_radial // 2
        inner = np.linspace(0.0, 0.9, half, endpoint=False)
        outer = 1.0 - np.geomspace(0.1, self.min_gap, self.n_radial - half)
        return np.concatenate([inner, outer])

    def refined(self) -> 'PolarGrid':
        return PolarGrid(2 * self.n_radial, 2 * self.n_angular, self.min_gap)

    def to_json(self) -> Dict:
        return {'n_radial': self.n_radial, 'n_angular': self.n_angular, 'min_gap': self.min_gap}


# ----------------------------------------------------------------------
# 采样 / 求积基础
# ----------------------------------------------------------------------
def ring_samples(s: PowerSeries, radii, n_angular: int) -> np.ndarray:
    """
    在若干同心圆上对内部级数求值

    Returns:
        形状 (len(radii), n_angular) 的复数组；N > n_angular 时按模折叠，
        在单位根上的取值仍然精确
    """
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    k = np.arange(s.N)
    width = max(s.N, n_angular)
    chunk = max(1, 2 ** 21 // width)
    out = np.empty((radii.size, n_angular), dtype=complex)
    for start in range(0, radii.size, chunk):
        rr = radii[start:start + chunk]
        scaled = s.coeffs[None, :] * rr[:, None] ** k[None, :]
        if s.N <= n_angular:
            folded = np.zeros((rr.size, n_angular), dtype=complex)
            folded[:, :s.N] = scaled
        else:
            blocks = -(-s.N // n_angular)
            padded = np.zeros((rr.size, blocks * n_angular), dtype=complex)
            padded[:, :s.N] = scaled
            folded = padded.reshape(rr.size, blocks, n_angular).sum(axis=1)
        out[start:start + rr.size] = n_angular * np.fft.ifft(folded, axis=1)
    return out


def polar(func: Callable[[np.ndarray], np.ndarray]) -> RingIntegrand:
    """把 z 的函数包装成圆环被积函数"""
    def integrand(radii: np.ndarray, n_angular: int) -> np.ndarray:
        theta = 2 * np.pi * np.arange(n_angular) / n_angular
        return func(radii[:, None] * np.exp(1j * theta)[None, :])
    return integrand


def modulus_power(s: PowerSeries, p: float) -> RingIntegrand:
    return lambda radii, m: np.abs(ring_samples(s, radii, m)) ** p


def jacobi_radial(n: int, alpha: float) -> Tuple[np.ndarray, np.ndarray]:
    """∫_0^1 (1-r)^α g(r) dr ≈ Σ w_j g(r_j) 的 Gauss–Jacobi 节点"""
    x, w = roots_jacobi(n, alpha, 0.0)
    return (1.0 + x) / 2.0, w * 2.0 ** (-alpha - 1.0)


def disc_integral(integrand: RingIntegrand, alpha: float = 0.0, n_radial: int = 96,
                  n_angular: int = 256, rtol: float = 1e-8) -> QuadratureResult:
    """
    ∬_𝔻 integrand (1-|z|²)^α dA

    径向 Gauss–Jacobi（把 (1-r)^α 吸收进权函数，解析地去掉 r=1 处的可积奇性），
    角向梯形公式；与两倍径向节点的结果比较给出收敛标志。
    """
    if not alpha > -1:
        raise PreconditionError(f"权指数 α 必须 > -1，当前 α={alpha}")

    def once(nr: int) -> float:
        r, w = jacobi_radial(nr, alpha)
        ring_means = np.mean(integrand(r, n_angular), axis=1) * 2 * np.pi
        return float(np.sum(w * (1.0 + r) ** alpha * r * ring_means))

    coarse = once(n_radial)
    fine = once(2 * n_radial)
    scale = max(abs(fine), 1e-300)
    converged = abs(fine - coarse) <= rtol * scale or (fine == 0.0 and coarse == 0.0)
    return QuadratureResult(fine, converged, 2 * n_radial, n_angular)


def _angular_count(s: PowerSeries, minimum: int = 256) -> int:
    return max(minimum, next_power_of_two(2 * s.N))


def _require_interior(s: PowerSeries):
    if s.kind != INTERIOR:
        raise PreconditionError("该范数只对内部级数定义")


# ----------------------------------------------------------------------
# Parseval 型范数
# ----------------------------------------------------------------------
def bergman_norm(phi: PowerSeries) -> float:
    """‖φ‖_{A₁²} = sqrt(π Σ |a_n|²/(n+1))，截断上的精确 Parseval"""
    _require_interior(phi)
    n = np.arange(phi.N)
    return float(np.sqrt(np.pi * np.sum(np.abs(phi.coeffs) ** 2 / (n + 1))))


def dirichlet_norm(psi: PowerSeries) -> float:
    """(∬|ψ'|² dA)^{1/2} = sqrt(π Σ n|a_n|²)，要求 ψ(0)=0"""
    _require_interior(psi)
    scale = max(float(np.max(np.abs(psi.coeffs))), 1.0)
    if abs(psi.coeffs[0]) > 1e-12 * scale:
        raise PreconditionError(f"Dirichlet 范数要求 ψ(0)=0，当前 ψ(0)={psi.coeffs[0]:.3g}")
    n = np.arange(psi.N)
    return float(np.sqrt(np.pi * np.sum(n * np.abs(psi.coeffs) ** 2)))


# ----------------------------------------------------------------------
# 上确界范数
# ----------------------------------------------------------------------
def _grid_max(phi: PowerSeries, grid: PolarGrid) -> Tuple[float, float, float]:
    radii = grid.radii()
    weight = (1.0 - radii ** 2)[:, None]
    values = weight * np.abs(ring_samples(phi, radii, grid.n_angular))
    j, k = np.unravel_index(int(np.argmax(values)), values.shape)
    return float(values[j, k]), float(radii[j]), 2 * np.pi * k / grid.n_angular


def _polish(phi: PowerSeries, r0: float, t0: float, start: float) -> float:
    def objective(x):
        z = x[0] * np.exp(1j * x[1])
        return -(1.0 - x[0] ** 2) * abs(complex(phi.evaluate(z)))

    res = minimize(objective, x0=np.array([r0, t0]), method='Nelder-Mead',
                   bounds=[(0.0, 1.0 - 1e-12), (None, None)],
                   options={'xatol': 1e-10, 'fatol': 1e-15, 'maxiter': 2000})
    return max(start, -float(res.fun))


def sup_hyp_norm(phi: PowerSeries, grid: Optional[PolarGrid] = None, tol: float = 1e-6,
                 max_refinements: int = 3) -> NormReport:
    """
    ‖φ‖_{A₁^∞} = sup (1-|z|²)|φ(z)|

    网格最大值经 Nelder–Mead 局部加细，网格加倍直到变化 < tol；
    达到上限仍未收敛时作为下界报告。
    """
    _require_interior(phi)
    grid = grid or PolarGrid()
    previous = None
    value = 0.0
    for _ in range(max_refinements + 1):
        raw, r0, t0 = _grid_max(phi, grid)
        value = _polish(phi, r0, t0, raw)
        if previous is not None and abs(value - previous) <= tol * max(value, 1e-300):
            return NormReport(value, True, grid.to_json())
        if previous is not None and value == previous == 0.0:
            return NormReport(value, True, grid.to_json())
        previous = value
        grid = grid.refined()
    return NormReport(value, False, grid.to_json(), lower_bound=True)


# ----------------------------------------------------------------------
# 加权积分
# ----------------------------------------------------------------------
def besov_norm(f: PowerSeries, p: float, n_radial: int = 96) -> NormReport:
    """|f(0)| + (∬|f'|^p (1-|z|²)^{p-2} dA)^{1/p}，p ∈ (1, ∞)"""
    _require_interior(f)
    if not 1.0 < p < np.inf:
        raise PreconditionError(f"Besov 指数必须在 (1,∞) 内，当前 p={p}")
    df = differentiate(f)
    m = _angular_count(f)
    quad = disc_integral(modulus_power(df, p), alpha=p - 2.0, n_radial=n_radial, n_angular=m)
    value = abs(f.coeffs[0]) + max(quad.value, 0.0) ** (1.0 / p)
    return NormReport(value, quad.converged, {'n_radial': quad.n_radial, 'n_angular': m})


def weighted_integral(f: PowerSeries, spec: WeightedIntegralSpec,
                      n_radial: int = 96) -> QuadratureResult:
    _require_interior(f)
    target = differentiate(f) if spec.role == FPRIME_POWER else f
    p = 2.0 if spec.role == PHI_SQUARED else spec.p
    return disc_integral(modulus_power(target, p), alpha=spec.alpha, n_radial=n_radial,
                         n_angular=_angular_count(f))


def weighted_fprime_integral(f: PowerSeries, spec: WeightedIntegralSpec,
                             n_radial: int = 96) -> float:
    """∬_𝔻 |f'|^p (1-|z|²)^α dA（按 spec.role 也可积 |φ|² 或 |ψ|^p）"""
    return max(weighted_integral(f, spec, n_radial).value, 0.0)


# ----------------------------------------------------------------------
# 小 Bloch
# ----------------------------------------------------------------------
@dataclass
class LittleBlochProfile:
    radii: List[float]
    maxima: List[float]
    decaying: bool

    def to_json(self) -> Dict:
        return {'radii': self.radii, 'maxima': self.maxima, 'decaying': self.decaying}


def little_bloch_profile(g: PowerSeries, n_angular: int = 256) -> LittleBlochProfile:
    """
    (1-r²)·max_{|z|=r}|g'(z)| 沿几何阶梯 1-r = 2^{-k/2}

    阶梯停在截断尺度 N(1-r) >= 16，之后的值只反映截断而非函数本身。
    """
    _require_interior(g)
    top = max(5, int(np.floor(2 * np.log2(max(g.N, 32) / 16.0))))
    radii = 1.0 - 2.0 ** (-np.arange(2, top + 1) / 2.0)
    dg = differentiate(g)
    maxima = (1.0 - radii ** 2) * np.max(np.abs(ring_samples(dg, radii, n_angular)), axis=1)
    q = max(2, maxima.size // 4)
    tail = maxima[-q:]
    slack = 1e-12 * max(float(np.max(maxima)), 1e-300)
    decaying = bool(np.all(np.diff(tail) <= slack) and tail[-1] < tail[0])
    return LittleBlochProfile(radii.tolist(), maxima.tolist(), decaying)


# ----------------------------------------------------------------------
# 𝔻* 上的 Beltrami 系数
# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class BeltramiGrid:
    """
    𝔸(1, R_out) 上极坐标网格的 μ 采样

    radii 包含各径向段的端点（权重为 0），使上确界能看到端点值。
    decay: 'bounded'（|μ| 有界）或 'inverse_square'（|μ| ≲ |z|^{-2}），决定尾部估计。
    """
    radii: np.ndarray
    radial_weights: np.ndarray
    n_angles: int
    values: np.ndarray
    r_out: float
    decay: str = 'inverse_square'

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        if radii.size == 0 or float(np.min(radii)) <= 1.0:
            raise PreconditionError("Beltrami 网格必须严格位于闭单位圆盘之外")
        if not np.all(np.isfinite(self.values)):
            raise PreconditionError("μ 采样含非有限值")
        if self.decay not in ('bounded', 'inverse_square'):
            raise PreconditionError(f"未知衰减类型: {self.decay}")

    @classmethod
    def from_function(cls, mu: Callable[[np.ndarray], np.ndarray], breaks: Sequence[float],
                      n_radial: int = 32, n_angles: int = 256,
                      decay: str = 'inverse_square') -> 'BeltramiGrid':
        breaks = [float(b) for b in breaks]
        if breaks[0] <= 1.0:
            raise PreconditionError("Beltrami 网格必须严格位于闭单位圆盘之外")
        x, w = np.polynomial.legendre.leggauss(n_radial)
        radii, weights = [], []
        for a, b in zip(breaks[:-1], breaks[1:]):
            radii.extend([a, *(a + (b - a) * (x + 1) / 2), b])
            weights.extend([0.0, *(w * (b - a) / 2), 0.0])
        radii = np.array(radii)
        theta = 2 * np.pi * np.arange(n_angles) / n_angles
        values = np.asarray(mu(radii[:, None] * np.exp(1j * theta)[None, :]), dtype=complex)
        return cls(radii, np.array(weights), n_angles, values, breaks[-1], decay)


@dataclass
class HypL2Report:
    norm: float
    tail_bound: float
    converged: bool = True

    def to_json(self) -> Dict:
        return {'norm': self.norm, 'tail_bound': self.tail_bound, 'converged': self.converged}


def hyp_L2_norm(mu: BeltramiGrid) -> HypL2Report:
    """(∬ (|z|²-1)^{-2} |μ|² dA)^{1/2}：截断圆环上求积 + 解析尾部界"""
    r = np.asarray(mu.radii)
    ring = np.mean(np.abs(mu.values) ** 2, axis=1) * 2 * np.pi
    bulk = float(np.sum(mu.radial_weights * r / (r ** 2 - 1.0) ** 2 * ring))
    R = mu.r_out
    edge = float(np.max(np.abs(mu.values[np.argmin(np.abs(r - R))])))
    if mu.decay == 'bounded':
        tail_sq = np.pi * edge ** 2 / (R ** 2 - 1.0)
    else:
        c = edge * R ** 2
        tail_sq = 2 * np.pi * c ** 2 * R ** -6 / 6.0 / (1.0 - R ** -2) ** 2
    norm = float(np.sqrt(bulk))
    return HypL2Report(norm, float(np.sqrt(bulk + tail_sq)) - norm)


def sup_norm(mu: BeltramiGrid) -> float:
    return float(np.max(np.abs(mu.values)))


# ----------------------------------------------------------------------
# Carleson 盒
# ----------------------------------------------------------------------
@dataclass
class CarlesonReport:
    radii: List[float]
    measures: List[float]
    constant: float
    finite: bool

    def to_json(self) -> Dict:
        return {'radii': self.radii, 'measures': self.measures,
                'constant': self.constant, 'finite': self.finite}


def box_measure(r: float, weight_exponent: float = 0.5, n_nodes: int = 32) -> float:
    """
    μ(S(z))，|z| = r，dμ = (1-|ζ|²)^γ dA

    S(z) = {1-|ζ| <= 1-|z|, |arg(zζ̄)/2π| <= (1-|z|)/2}，角宽 2π(1-|z|)。
    """
    gamma = weight_exponent
    s, w = jacobi_radial(n_nodes, gamma)
    rho = r + (1.0 - r) * s
    radial = (1.0 - r) ** (gamma + 1.0) * float(np.sum(w * (1.0 + rho) ** gamma * rho))
    width = min(2 * np.pi * (1.0 - r), 2 * np.pi)
    return width * radial


def carleson_box_measure(q: float, p: float, weight_exponent: float = 0.5,
                         z_grid: Optional[Sequence[complex]] = None) -> CarlesonReport:
    """
    在网格上检验 μ(S(z))^{1/q} <= C {log((1+|z|)/(1-|z|))}^{-1/p'}

    Returns:
        网格上使不等式成立的最小 C
    """
    if not 1.0 < p < q < np.inf:
        raise PreconditionError(f"需要 1 < p < q < ∞，当前 p={p}, q={q}")
    if z_grid is None:
        z_grid = np.concatenate([np.linspace(0.0, 0.9, 19), 1.0 - np.geomspace(0.1, 1e-6, 21)])
    radii = np.unique(np.abs(np.asarray(z_grid, dtype=complex)))
    radii = radii[radii < 1.0]
    p_conj = p / (p - 1.0)
    measures = np.array([box_measure(r, weight_exponent) for r in radii])
    logs = np.log((1.0 + radii) / (1.0 - radii))
    ratios = np.where(radii > 0, measures ** (1.0 / q) * logs ** (1.0 / p_conj), 0.0)
    constant = float(np.max(ratios))
    return CarlesonReport(radii.tolist(), measures.tolist(), constant, bool(np.isfinite(constant)))


# ----------------------------------------------------------------------
# 发散判定
# ----------------------------------------------------------------------
def divergence_verdict(ladder: Sequence[int], norms: Sequence[float],
                       threshold: float = DIVERGENCE_THRESHOLD,
                       slope_threshold: float = SLOPE_THRESHOLD,
                       stable_rtol: float = 1e-3,
                       zero_floor: float = 1e-12) -> Tuple[str, float]:
    """
    截断范数阶梯的判定规则

    平方范数对 ln N 回归的斜率超过 slope_threshold，或范数超过 threshold → diverging；
    最后两级相对变化 <= stable_rtol，或末级范数低于舍入量级 zero_floor → member；
    否则 inconclusive。
    """
    norms = np.asarray(norms, dtype=float)
    slope = float(np.polyfit(np.log(np.asarray(ladder, dtype=float)), norms ** 2, 1)[0])
    if norms[-1] > threshold or slope > slope_threshold:
        return 'diverging', slope
    change = abs(norms[-1] - norms[-2])
    if change <= stable_rtol * max(norms[-1], 1e-300) or norms[-1] <= zero_floor:
        return 'member', slope
    return 'inconclusive', slope


# ----------------------------------------------------------------------
# 拓扑非等价的例子
# ----------------------------------------------------------------------
def remark_family(t: float) -> PowerSeries:
    """φ_t(z) = 1/(sqrt|log(1-t)| (1-t²z²))，截断使略去的尾部 < 1e-17"""
    if not 0.0 < t < 1.0:
        raise PreconditionError(f"t 必须在 (0,1) 内，当前 t={t}")
    terms = int(np.ceil(np.log(1e-17) / np.log(t * t))) + 1
    n = max(64, next_power_of_two(2 * terms + 2))
    c = np.zeros(n, dtype=complex)
    k = np.arange(0, n, 2)
    c[k] = t ** k / np.sqrt(abs(np.log(1.0 - t)))
    return PowerSeries(c)
