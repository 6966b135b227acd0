#!/usr/bin/env python3
"""
共形焊接模块

1. CircleHomeo: 解析圆周同胚（提升 θ ↦ θ + u(θ)，u 用实 Fourier 系数存储）
2. weld: 归一化焊接 F(0)=0, G(∞)=∞, G'(∞)=1，使 F = G∘h 于 S¹
3. build_extension / qs0_certify: 显式拟共形延拓与 QS₀ 证书
4. theodorsen_map / glue_disc: 星形解析 Jordan 曲线的 Riemann 映射与单个圆盘的缝合
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import solve_triangular

from errors import (
    ConfigurationError,
    ConvergenceError,
    DegenerationError,
    ExtensionInvalidError,
    OrientationError,
    PreconditionError,
    SolverBreakdownError,
    WeldKitError,
)
from norms import ANNULUS_CUTOFF, BeltramiGrid, hyp_L2_norm, sup_norm
from pre_schwarzian import MembershipVerdict, oqco_membership, univalence_check, curve_crossing
from series_core import (
    EXTERIOR,
    INTERIOR,
    CircleSamples,
    PowerSeries,
    fit_exterior,
    fit_interior,
    next_power_of_two,
    sample_circle,
)

WELD_TOL = 1e-10
WELD_MAX_ITER = 50
WELD_GUARD = 0.5


def _grid(m: int) -> np.ndarray:
    return 2 * np.pi * np.arange(m) / m


# ----------------------------------------------------------------------
# 圆周同胚
# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class CircleHomeo:
    """
    h(e^{iθ}) = e^{i(θ + u(θ))}

    Args:
        coef: 复向量 p_k = a_k - i b_k，u(θ) = Re Σ p_k e^{ikθ}
              （a_0 为平均位移，a_k/b_k 为 cos/sin 系数）
        margin: 解析带宽 ρ，u 可延拓到 |Im θ| < ρ；三角多项式为 inf
    """
    coef: np.ndarray
    margin: float = float('inf')

    def __post_init__(self):
        p = np.array(self.coef, dtype=complex).ravel()
        if p.size == 0:
            p = np.zeros(1, dtype=complex)
        if not np.all(np.isfinite(p)):
            raise PreconditionError("位移系数含非有限值")
        p[0] = p[0].real
        p.setflags(write=False)
        object.__setattr__(self, 'coef', p)
        if not self.margin > 0:
            raise PreconditionError(f"解析带宽必须为正，当前 ρ={self.margin}")
        m = max(256, next_power_of_two(8 * p.size))
        slope = self.derivative(_grid(m))
        if float(np.min(slope)) <= 0.0:
            raise OrientationError(f"1 + u' 的最小值 {float(np.min(slope)):.3g} <= 0，不再保持定向")

    # ---- 构造 ----
    @classmethod
    def identity(cls) -> 'CircleHomeo':
        return cls(np.zeros(1))

    @classmethod
    def rotation(cls, alpha: float) -> 'CircleHomeo':
        return cls(np.array([alpha]))

    @classmethod
    def mobius(cls, a: complex) -> 'CircleHomeo':
        """圆盘自同构 h_a(z) = (z+a)/(1+āz)：u(θ) = -2 arg(1 + ā e^{iθ})"""
        a = complex(a)
        if abs(a) >= 1.0:
            raise PreconditionError(f"需要 |a| < 1，当前 |a|={abs(a)}")
        if a == 0:
            return cls.identity()
        terms = max(2, int(np.ceil(np.log(1e-18) / np.log(abs(a)))) + 1)
        k = np.arange(1, terms)
        p = np.zeros(terms, dtype=complex)
        p[1:] = 2j * (-1.0) ** (k + 1) * np.conj(a) ** k / k
        return cls(p, margin=float(np.log(1.0 / abs(a))))

    @classmethod
    def sine(cls, amplitude: float, k: int = 1, phase: float = 0.0) -> 'CircleHomeo':
        """u(θ) = amplitude·sin(kθ + phase)"""
        p = np.zeros(k + 1, dtype=complex)
        p[k] = -1j * amplitude * np.exp(1j * phase)
        return cls(p)

    @classmethod
    def from_samples(cls, u, margin: Optional[float] = None) -> 'CircleHomeo':
        """由均匀网格上的位移采样拟合（rfft），尾部低于舍入误差的系数被截去"""
        u = np.asarray(u, dtype=float)
        m = u.size
        spec = np.fft.rfft(u) / m
        p = 2.0 * spec[:(m + 1) // 2]
        p[0] = spec[0]
        scale = max(float(np.max(np.abs(p))), 1.0)
        keep = np.nonzero(np.abs(p) > 1e-15 * scale)[0]
        top = int(keep[-1]) + 1 if keep.size else 1
        p = p[:top]
        return cls(p, margin=margin if margin is not None else estimate_margin(p))

    # ---- 求值 ----
    @property
    def K(self) -> int:
        return self.coef.size - 1

    def displacement(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return np.real(np.polynomial.polynomial.polyval(np.exp(1j * theta), self.coef))

    def lift(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return theta + self.displacement(theta)

    def derivative(self, theta) -> np.ndarray:
        """1 + u'(θ)"""
        theta = np.asarray(theta, dtype=float)
        k = np.arange(self.coef.size)
        du = np.real(np.polynomial.polynomial.polyval(np.exp(1j * theta), 1j * k * self.coef))
        return 1.0 + du

    def apply(self, theta) -> np.ndarray:
        """h(e^{iθ})"""
        return np.exp(1j * self.lift(theta))

    def samples(self, m: int) -> np.ndarray:
        """均匀网格上的 u（K < m/2 时用 irfft）"""
        if self.K >= m // 2:
            return self.displacement(_grid(m))
        spec = np.zeros(m // 2 + 1, dtype=complex)
        spec[0] = self.coef[0]
        spec[1:self.coef.size] = self.coef[1:] / 2.0
        return np.fft.irfft(spec * m, n=m)

    def oscillation(self, m: int = 1024) -> float:
        """sup|u - mean u|"""
        m = max(m, next_power_of_two(4 * self.coef.size))
        return float(np.max(np.abs(self.samples(m) - self.coef[0].real)))

    @property
    def is_identity(self) -> bool:
        return bool(np.all(self.coef == 0))

    # ---- Laurent 延拓 ----
    def laurent(self, z) -> np.ndarray:
        """U(z) = a_0 + Σ (p_k z^k + conj(p_k) z^{-k})/2，在 S¹ 上等于 u"""
        z = np.asarray(z, dtype=complex)
        half = self.coef.copy()
        half[1:] /= 2.0
        pos = np.polynomial.polynomial.polyval(z, half)
        neg = np.polynomial.polynomial.polyval(1.0 / z, np.conj(half)) - np.conj(half[0])
        return pos + neg

    def laurent_rate(self, z) -> np.ndarray:
        """z·U'(z)"""
        z = np.asarray(z, dtype=complex)
        k = np.arange(self.coef.size)
        half = self.coef * k / 2.0
        return (np.polynomial.polynomial.polyval(z, half) -
                np.polynomial.polynomial.polyval(1.0 / z, np.conj(half)))

    # ---- JSON ----
    def to_json(self) -> Dict:
        return {
            'displacement': [[float(p.real), float(-p.imag)] for p in self.coef],
            'margin': None if np.isinf(self.margin) else float(self.margin),
        }

    @classmethod
    def from_json(cls, data: Dict) -> 'CircleHomeo':
        try:
            p = np.array([complex(a, -b) for a, b in data['displacement']], dtype=complex)
            margin = data.get('margin')
            margin = float('inf') if margin is None else float(margin)
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise ConfigurationError(f"圆周同胚 JSON 格式错误: {e}")
        return cls(p, margin=margin)


def estimate_margin(coef: np.ndarray) -> float:
    """由 Fourier 系数的几何衰减率估计解析带宽"""
    mags = np.abs(np.asarray(coef))
    k = np.arange(mags.size)
    scale = float(np.max(mags)) if mags.size else 0.0
    mask = (k >= 1) & (mags > 1e-14 * max(scale, 1e-300))
    if np.count_nonzero(mask) < 3:
        return float('inf')
    slope = float(np.polyfit(k[mask], np.log(mags[mask]), 1)[0])
    if slope >= 0:
        return 1e-3
    return -slope


def _refit(lift_fn: Callable[[np.ndarray], np.ndarray], start: int, margin: float,
           cap: int = 8192) -> CircleHomeo:
    """对新的提升函数逐级加倍采样直到频谱尾部可以忽略"""
    m = start
    while True:
        theta = _grid(m)
        u = lift_fn(theta) - theta
        spec = np.abs(np.fft.rfft(u)) / m
        tail = float(np.max(spec[3 * spec.size // 4:])) if spec.size > 4 else 0.0
        if tail <= 1e-15 * max(float(np.max(spec)), 1.0) or m >= cap:
            return CircleHomeo.from_samples(u, margin=margin)
        m *= 2


def compose_homeo(h1: CircleHomeo, h2: CircleHomeo) -> CircleHomeo:
    """h1∘h2：u = u2 + u1(θ + u2)；解析带宽取两者最小值减去一半作为安全项"""
    if h2.is_identity:
        return h1
    if h1.is_identity:
        return h2
    margin = 0.5 * min(h1.margin, h2.margin)
    start = max(256, next_power_of_two(8 * (h1.coef.size + h2.coef.size)))
    return _refit(lambda t: h1.lift(h2.lift(t)), start, margin)


def _invert_lift(h: CircleHomeo, phi: np.ndarray, iters: int = 60) -> np.ndarray:
    """逐点 Newton 求解 θ + u(θ) = φ"""
    t = phi - h.displacement(phi)
    for _ in range(iters):
        step = (h.lift(t) - phi) / h.derivative(t)
        t = t - step
        if float(np.max(np.abs(step))) < 1e-15:
            break
    return t


def invert_homeo(h: CircleHomeo) -> CircleHomeo:
    if h.is_identity:
        return h
    if h.K == 0:
        return CircleHomeo.rotation(-float(h.coef[0].real))
    start = max(256, next_power_of_two(8 * h.coef.size))
    return _refit(lambda phi: _invert_lift(h, phi), start, 0.5 * h.margin)


# ----------------------------------------------------------------------
# 焊接
# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class WeldingPair:
    """F 内部（F(0)=0），G 外部 w + g_0 + g_1/w + ...（G'(∞)=1）"""
    F: PowerSeries
    G: PowerSeries
    residual: float = float('nan')
    iterations: int = 0

    def __post_init__(self):
        if self.F.kind != INTERIOR or self.G.kind != EXTERIOR:
            raise PreconditionError("WeldingPair 需要内部 F 和外部 G")
        if self.F.coeffs[0] != 0:
            raise PreconditionError("F(0) 必须为 0")
        if self.G.coeffs[0] != 1:
            raise PreconditionError("G'(∞) 必须为 1")

    def to_json(self) -> Dict:
        return {
            'F': self.F.to_json(),
            'G': self.G.to_json(),
            'residual': float(self.residual),
            'iterations': self.iterations,
        }

    @classmethod
    def from_json(cls, data: Dict) -> 'WeldingPair':
        return cls(PowerSeries.from_json(data['F']), PowerSeries.from_json(data['G']),
                   float(data.get('residual', float('nan'))), int(data.get('iterations', 0)))


def _pack_pair(F: np.ndarray, G: np.ndarray) -> 'WeldingPair':
    f = np.zeros(F.size + 1, dtype=complex)
    f[1:] = F
    g = np.zeros(G.size + 1, dtype=complex)
    g[0] = 1.0
    g[1:] = G
    return WeldingPair(PowerSeries(f), PowerSeries(g, EXTERIOR))


def _initial_vector(initial: Optional[WeldingPair], n: int) -> np.ndarray:
    x = np.zeros(2 * n - 1, dtype=complex)
    if initial is None:
        return x
    f = initial.F.coeffs[1:n]
    g = initial.G.coeffs[1:n + 1]
    x[:f.size] = f
    x[n - 1:n - 1 + g.size] = g
    return x


def _welding_system(h: CircleHomeo, n: int, m: int) -> Tuple[np.ndarray, np.ndarray]:
    """Σ f_k e^{ikθ} - Σ g_k e^{-ikφ} = e^{iφ}，φ = θ + u(θ)"""
    theta = _grid(m)
    phi = h.lift(theta)
    interior = np.exp(1j * np.outer(theta, np.arange(1, n)))
    exterior = -np.exp(-1j * np.outer(phi, np.arange(n)))
    return np.hstack([interior, exterior]), np.exp(1j * phi)


def _newton_step(a: np.ndarray, b: np.ndarray, x0: np.ndarray) -> np.ndarray:
    """泛函关于系数线性，Newton 步即最小二乘解（QR + 三角回代）"""
    q, r = np.linalg.qr(a)
    diag = np.abs(np.diag(r))
    if float(np.min(diag)) <= 1e-13 * float(np.max(diag)):
        raise SolverBreakdownError("焊接线性系统秩亏")
    delta = solve_triangular(r, q.conj().T @ (b - a @ x0))
    return x0 + delta


def _alternating_projection(h: CircleHomeo, n: int, m: int, x0: np.ndarray,
                            tol: float, max_iter: int) -> np.ndarray:
    """交替投影：F ← P₊[G∘h]，G ← w + P₋[F∘h⁻¹ - w]"""
    theta = _grid(m)
    phi = h.lift(theta)
    back = _invert_lift(h, theta)
    f, g = x0[:n - 1].copy(), x0[n - 1:].copy()
    kf, kg = np.arange(1, n), np.arange(n)
    for _ in range(max_iter):
        gh = np.exp(1j * phi) + np.exp(-1j * np.outer(phi, kg)) @ g
        f_new = (np.fft.fft(gh) / m)[1:n]
        fb = np.exp(1j * np.outer(back, kf)) @ f_new - np.exp(1j * theta)
        g_new = np.fft.ifft(fb)[:n]
        change = max(float(np.max(np.abs(f_new - f))), float(np.max(np.abs(g_new - g))))
        f, g = f_new, g_new
        if change < tol:
            break
    return np.concatenate([f, g])


def invert_exterior(G: PowerSeries, targets, seed=None, iters: int = 60,
                    tol: float = 1e-14) -> Tuple[np.ndarray, np.ndarray]:
    """
    逐点 Newton 求 G(w) = x

    未收敛的点用循环相邻已收敛点的解重新起步一次（边界连续性）。

    Returns:
        (w, ok) ok 为每个点是否收敛且 |w| >= 1
    """
    x = np.atleast_1d(np.asarray(targets, dtype=complex))
    lead = G.coeffs[0]
    w = (x - G.coeffs[1]) / lead if seed is None else np.array(seed, dtype=complex)

    def solve(w):
        with np.errstate(all='ignore'):
            for _ in range(iters):
                step = (G.evaluate(w) - x) / G.derivative_at(w)
                step = np.where(np.isfinite(step), step, 0.0)
                w = w - step
                if float(np.max(np.abs(step))) < tol:
                    break
            err = np.abs(G.evaluate(w) - x)
        ok = np.isfinite(err) & (err <= 1e-11 * np.maximum(np.abs(x), 1.0)) & (np.abs(w) >= 1.0 - 1e-9)
        return w, ok

    w, ok = solve(w)
    if not np.all(ok) and np.any(ok):
        idx = np.arange(x.size)
        good = idx[ok]
        nearest = good[np.argmin(np.abs(idx[:, None] - good[None, :]), axis=1)]
        w2, ok2 = solve(np.where(ok, w, w[nearest]))
        w, ok = np.where(ok, w, w2), ok | ok2
    return w, ok


def welding_residual(pair: WeldingPair, h: CircleHomeo, m: Optional[int] = None) -> float:
    """sup_θ |G⁻¹(F(e^{iθ})) - h(e^{iθ})|；G⁻¹ 失败的点使残差为 +∞"""
    m = m or max(1024, next_power_of_two(4 * max(pair.F.N, pair.G.N)))
    target = sample_circle(pair.F, 1.0, m).values
    w, ok = invert_exterior(pair.G, target)
    if not np.all(ok):
        return float('inf')
    return float(np.max(np.abs(w - h.apply(_grid(m)))))


def weld(h: CircleHomeo, tol: float = WELD_TOL, max_iter: int = WELD_MAX_ITER,
         guard: float = WELD_GUARD, initial: Optional[WeldingPair] = None,
         n_start: int = 32, n_max: int = 512) -> WeldingPair:
    """
    归一化共形焊接

    每一轮在截断 n 上做一次阻尼 Newton（此处步长为 1 的最小二乘解），
    系统秩亏时退回交替投影；残差未达到 tol 时截断加倍。

    Raises:
        PreconditionError: sup|u - mean u| 超过 guard
        ConvergenceError: max_iter 轮或 n_max 截断后残差仍 >= tol
        SolverBreakdownError: 解出的 F 不是单叶的
    """
    osc = h.oscillation()
    if osc > guard:
        raise PreconditionError(f"sup|u - mean u| = {osc:.4g} 超出焊接收敛范围 {guard}")

    n = n_start
    residual = float('inf')
    for rounds in range(1, max_iter + 1):
        m = max(256, next_power_of_two(4 * n))
        a, b = _welding_system(h, n, m)
        x0 = _initial_vector(initial, n)
        try:
            x = _newton_step(a, b, x0)
        except SolverBreakdownError:
            x = _alternating_projection(h, n, m, x0, tol * 1e-2, max(max_iter, 200))
        pair = _pack_pair(x[:n - 1], x[n - 1:])
        residual = welding_residual(pair, h)
        if residual < tol:
            verdict = univalence_check(pair.F, m=max(512, 2 * m))
            if verdict.status == 'fail':
                raise SolverBreakdownError(f"焊接解 F 非单叶: {verdict.reason}")
            g_curve = sample_circle(pair.G, 1.0, max(512, 2 * m)).values
            if curve_crossing(g_curve) is not None:
                raise SolverBreakdownError("焊接解 G 的边界曲线自交")
            return WeldingPair(pair.F, pair.G, residual, rounds)
        if 2 * n > n_max:
            break
        n *= 2
    raise ConvergenceError(f"焊接未收敛: 截断 {n} 时残差 {residual:.3g} >= {tol:g}", residual)


# ----------------------------------------------------------------------
# 显式拟共形延拓（解析圆环 + 径向延拓）
# ----------------------------------------------------------------------
@dataclass
class ExtensionField:
    """
    H 在 𝔸(1,R) 上为 z·exp(iU(z))（μ = 0），|z| >= R 时 H(ρe^{iθ}) = (ρ/R)·H(Re^{iθ})
    """
    grid: BeltramiGrid
    radius: float
    sup: float
    hyp_l2: float
    tail_bound: float

    def to_json(self) -> Dict:
        return {
            'radius': self.radius,
            'sup': self.sup,
            'hyp_l2': self.hyp_l2,
            'tail_bound': self.tail_bound,
            'r_out': self.grid.r_out,
        }


def extension_radius(h: CircleHomeo) -> float:
    return float(min(np.exp(h.margin / 2.0), 2.0))


def radial_dilatation(h: CircleHomeo, radius: float) -> Callable[[np.ndarray], np.ndarray]:
    """|z| >= R 上 μ(z) = e^{2iθ}(-iw)/(2+iw)，w = zU'(z) 取在 Re^{iθ}；沿射线不变"""
    def mu(z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        theta = np.angle(z)
        w = h.laurent_rate(radius * np.exp(1j * theta))
        value = np.exp(2j * theta) * (-1j * w) / (2.0 + 1j * w)
        return np.where(np.abs(z) >= radius, value, 0.0)
    return mu


def build_extension(h: CircleHomeo, r_out: float = ANNULUS_CUTOFF, n_radial: int = 32,
                    n_angles: int = 256) -> ExtensionField:
    """
    构造 h 的拟共形延拓并计算 μ 的 sup 与 L²_hyp 范数

    Raises:
        ExtensionInvalidError: 采样上 ‖μ‖∞ >= 1
    """
    radius = extension_radius(h)
    if not 1.0 < radius < r_out:
        raise PreconditionError(f"延拓半径 R={radius} 不在 (1, R_out={r_out}) 内")
    breaks = [1.0 + (radius - 1.0) / 8.0, radius, r_out]
    grid = BeltramiGrid.from_function(radial_dilatation(h, radius), breaks, n_radial,
                                      n_angles, decay='bounded')
    sup = sup_norm(grid)
    if sup >= 1.0:
        raise ExtensionInvalidError(f"‖μ‖∞ = {sup:.4g} >= 1，延拓不是拟共形的")
    report = hyp_L2_norm(grid)
    return ExtensionField(grid, radius, sup, report.norm, report.tail_bound)


@dataclass
class QS0Report:
    guo_hui: bool
    welding: bool
    extension: Optional[ExtensionField] = None
    membership: Optional[MembershipVerdict] = None
    residual: float = float('nan')
    notes: List[str] = field(default_factory=list)

    @property
    def agree(self) -> bool:
        return self.guo_hui == self.welding

    @property
    def passed(self) -> bool:
        return self.guo_hui and self.welding

    def to_json(self) -> Dict:
        return {
            'guo_hui': self.guo_hui,
            'welding': self.welding,
            'agree': self.agree,
            'extension': self.extension.to_json() if self.extension else None,
            'membership': self.membership.to_json() if self.membership else None,
            'residual': self.residual,
            'notes': self.notes,
        }


def qs0_certify(h: CircleHomeo, tol: float = WELD_TOL, max_iter: int = WELD_MAX_ITER,
                guard: float = WELD_GUARD, r_out: float = ANNULUS_CUTOFF) -> QS0Report:
    """两条 QS₀ 证书：延拓的 μ ∈ L²_hyp ∩ L^∞_1，以及焊接内映射 F ∈ Oqc₀"""
    report = QS0Report(False, False)
    try:
        ext = build_extension(h, r_out=r_out)
        report.extension = ext
        report.guo_hui = bool(np.isfinite(ext.hyp_l2) and ext.sup < 1.0)
    except WeldKitError as e:
        report.notes.append(f"extension: {e}")
    try:
        pair = weld(h, tol=tol, max_iter=max_iter, guard=guard)
        report.residual = pair.residual
        report.membership = oqco_membership(pair.F)
        report.welding = report.membership.verdict == 'member'
    except WeldKitError as e:
        report.notes.append(f"welding: {e}")
    return report


# ----------------------------------------------------------------------
# Theodorsen 共形映射
# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class ConformalMapResult:
    """
    星形曲线的 Riemann 映射

    interior: f: 𝔻 → 内部，f(0)=center，f'(0)>0
    exterior: R: 𝔻* → 外部，R(∞)=∞，R'(∞)=scale>0
    correspondence: 边界对应 s ↦ t，f(e^{is}) = γ(t(s))
    """
    series: PowerSeries
    correspondence: CircleHomeo
    scale: float
    center: complex
    iterations: int

    def inverse(self, x) -> np.ndarray:
        """外部映射的逆（Newton）"""
        if self.series.kind != EXTERIOR:
            raise PreconditionError("只有外部映射提供逆")
        x = np.atleast_1d(np.asarray(x, dtype=complex))
        w, ok = invert_exterior(self.series, x, seed=(x - self.center) / self.scale)
        if not np.all(ok):
            raise DegenerationError("点落在被替换圆盘的闭包内，无法反求外部坐标")
        return w


def conjugate_function(v: np.ndarray) -> np.ndarray:
    """周期实函数的共轭函数（FFT 乘 -i·sign(k)）"""
    m = v.size
    spec = np.fft.fft(v)
    k = np.fft.fftfreq(m, 1.0 / m)
    spec = spec * (-1j * np.sign(k))
    if m % 2 == 0:
        spec[m // 2] = 0.0
    return np.real(np.fft.ifft(spec))


def theodorsen_map(curve: Callable[[np.ndarray], np.ndarray],
                   dcurve: Callable[[np.ndarray], np.ndarray],
                   center: complex = 0j, reference: complex = 1 + 0j,
                   side: str = INTERIOR, n: int = 128, m: Optional[int] = None,
                   tol: float = 1e-13, max_iter: int = 500) -> ConformalMapResult:
    """
    Theodorsen 共轭函数迭代

    曲线 γ(t) 关于 center 星形，极角 A(t) = t + arg(reference) + Arg((γ(t)-c)e^{-it}/reference)。
    内部: Θ = s + C[log|γ(A⁻¹Θ) - c|]；外部: Θ = s - C[L]，R'(∞) = exp(mean L)。
    """
    m = m or max(512, next_power_of_two(4 * n))
    s = _grid(m)
    ref = complex(reference) / abs(complex(reference))
    ref_arg = float(np.angle(ref))
    sign = 1.0 if side == INTERIOR else -1.0

    def polar_angle(t):
        return t + ref_arg + np.angle((curve(t) - center) * np.exp(-1j * t) / ref)

    def invert_angle(theta):
        t = theta - ref_arg
        for _ in range(50):
            rate = np.imag(dcurve(t) / (curve(t) - center))
            step = (polar_angle(t) - theta) / rate
            t = t - step
            if float(np.max(np.abs(step))) < 1e-15:
                break
        return t

    theta = s.copy()
    t = invert_angle(theta)
    for iteration in range(1, max_iter + 1):
        log_r = np.log(np.abs(curve(t) - center))
        theta_new = s + sign * conjugate_function(log_r)
        change = float(np.max(np.abs(theta_new - theta)))
        theta = theta_new
        t = invert_angle(theta)
        if change < tol:
            break
    else:
        raise ConvergenceError(f"Theodorsen 迭代未收敛: 最后变化 {change:.3g}", change)

    boundary = curve(t)
    log_r = np.log(np.abs(boundary - center))
    correspondence = CircleHomeo.from_samples(t - s)
    samples = CircleSamples(boundary)
    if side == INTERIOR:
        series = fit_interior(samples, n)
        scale = float(abs(series.coeffs[1]))
    else:
        series = fit_exterior(samples, n)
        scale = float(np.exp(np.mean(log_r)))
    return ConformalMapResult(series, correspondence, scale, complex(center), iteration)


# ----------------------------------------------------------------------
# 单个圆盘的缝合
# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class DiscGluing:
    """
    把单位圆盘沿 ζ ~ Ψ(g(ζ)) 缝到 Ĉ∖Ψ(𝔻) 上后的单值化

    Φ(x) = Ψ(0) + a·G(R⁻¹(x)) 在外部（Φ(∞)=∞，Φ'(∞)=1），帽子像为 Ψ(0) + a·F。
    """
    embedding: PowerSeries
    exterior: ConformalMapResult
    circle_map: CircleHomeo
    pair: WeldingPair

    @property
    def anchor(self) -> complex:
        return complex(self.embedding.coeffs[0])

    @property
    def scale(self) -> float:
        return self.exterior.scale

    @property
    def residual(self) -> float:
        return self.pair.residual

    def push(self, points) -> np.ndarray:
        """外部点的像；∞ 保持 ∞，落入圆盘闭包的点报错"""
        points = np.atleast_1d(np.asarray(points, dtype=complex))
        out = np.full(points.shape, np.inf + 0j)
        finite = np.isfinite(points)
        if np.any(finite):
            w = self.exterior.inverse(points[finite])
            if float(np.min(np.abs(w))) <= 1.0 + 1e-12:
                raise DegenerationError("点落在被替换圆盘的闭包上")
            out[finite] = self.anchor + self.scale * self.pair.G.evaluate(w)
        return out

    def push_series(self, s: PowerSeries, n: Optional[int] = None) -> PowerSeries:
        n = n or s.N
        m = max(1024, next_power_of_two(4 * n))
        values = self.push(sample_circle(s, 1.0, m).values)
        return fit_interior(CircleSamples(values), n)

    def cap_image(self, n: Optional[int] = None) -> PowerSeries:
        F = self.pair.F.resize(n or self.pair.F.N).scale(self.scale)
        c = F.coeffs.copy()
        c[0] = self.anchor
        return PowerSeries(c, INTERIOR, F.truncation_loss, F.tail_mass)


def exterior_riemann_map(embedding: PowerSeries, n: int = 64) -> ConformalMapResult:
    """Ĉ∖Ψ(𝔻̄) 的外部 Riemann 映射；仿射 Ψ 时一步精确"""
    center = complex(embedding.coeffs[0])
    reference = complex(embedding.coeffs[1])
    return theodorsen_map(lambda t: embedding.evaluate(np.exp(1j * t)),
                          lambda t: 1j * np.exp(1j * t) * embedding.derivative_at(np.exp(1j * t)),
                          center=center, reference=reference, side=EXTERIOR, n=n)


def glue_disc(embedding: PowerSeries, cap_map: CircleHomeo, tol: float = WELD_TOL,
              max_iter: int = WELD_MAX_ITER, guard: float = WELD_GUARD) -> DiscGluing:
    """
    单步缝合

    Args:
        embedding: 单叶 Ψ，Ψ(𝔻) 为被替换的圆盘
        cap_map: 帽子边界点 ζ 粘到 Ψ(g(ζ))
    """
    exterior = exterior_riemann_map(embedding)
    circle_map = compose_homeo(invert_homeo(exterior.correspondence), cap_map)
    pair = weld(circle_map, tol=tol, max_iter=max_iter, guard=guard)
    return DiscGluing(embedding, exterior, circle_map, pair)
