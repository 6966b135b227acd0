#!/usr/bin/env python3
"""
分析引理的数值检验

每个 check_* 返回 CheckReport：记录测得的量与 (value, op, bound) 条目，
通过标志只由这些条目决定，可以从报告本身重新计算。
run_suite 按清单在线程池中并发执行全部检验，写出 CSV / JSON 与运行日志。
"""

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar

from errors import ConfigurationError, PreconditionError, WeldKitError
from norms import (
    DIVERGENCE_THRESHOLD,
    FPRIME_POWER,
    PSI_POWER,
    WeightedIntegralSpec,
    bergman_norm,
    carleson_box_measure,
    dirichlet_norm,
    disc_integral,
    ring_samples,
    weighted_fprime_integral,
)
from pre_schwarzian import (
    PreSchwarzianCoords,
    chi,
    chi_inverse,
    minkowski_terms,
    pre_schwarzian,
    pre_schwarzian_at,
    random_direction,
    transfer_compose,
    univalence_check,
)
from reports import append_log, write_csv, write_json
from schiffer import DELTA_LADDER, HolomorphyReport, cr_stencil
from series_core import PowerSeries, differentiate, next_power_of_two
from welding import CircleHomeo, compose_homeo, invert_homeo, qs0_certify

STANDARD_SEEDS = 50
STANDARD_DEGREE = 6
COEFFICIENT_BUDGET = 0.3
DIRECTION_SIZE = 0.1
T_GRID = (-1.0, -0.5, 0.0, 0.5, 1.0)
REMAINDER_LADDER = (0.08, 0.04, 0.02)
STENCIL_STEP = 1e-3
CR_LIMIT = 1e-3
NOISE_FLOOR = 1e-10
MINKOWSKI_H = (0.0, 1.0, 0.25)

SUITE_COLUMNS = ('check', 'seed', 'passed', 'min_slack', 'digest')

_OPS: Dict[str, Callable[[float, float], bool]] = {
    '<=': lambda a, b: a <= b,
    '<': lambda a, b: a < b,
    '>=': lambda a, b: a >= b,
    '>': lambda a, b: a > b,
    '==': lambda a, b: a == b,
}


# ----------------------------------------------------------------------
# 报告
# ----------------------------------------------------------------------
@dataclass
class CheckEntry:
    label: str
    value: float
    op: str
    bound: float

    def __post_init__(self):
        if self.op not in _OPS:
            raise ConfigurationError(f"未知比较符: {self.op}")
        self.value = float(self.value)
        self.bound = float(self.bound)

    def holds(self) -> bool:
        return bool(_OPS[self.op](self.value, self.bound))

    @property
    def slack(self) -> float:
        if self.op in ('<=', '<'):
            return self.bound - self.value
        if self.op in ('>=', '>'):
            return self.value - self.bound
        return 0.0 if self.holds() else -abs(self.value - self.bound)

    def to_json(self) -> Dict:
        return {'label': self.label, 'value': self.value, 'op': self.op, 'bound': self.bound}


def inputs_digest(inputs: Dict) -> str:
    text = json.dumps(inputs, sort_keys=True, default=repr)
    return hashlib.sha256(text.encode('utf-8')).hexdigest()[:16]


@dataclass
class CheckReport:
    name: str
    digest: str
    measured: Dict[str, object] = field(default_factory=dict)
    entries: List[CheckEntry] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    passed: bool = False

    @classmethod
    def build(cls, name: str, inputs: Dict, measured: Dict, entries: List[CheckEntry],
              notes: Optional[List[str]] = None) -> 'CheckReport':
        report = cls(name, inputs_digest(inputs), measured, entries, notes or [])
        report.passed = report.reevaluate()
        return report

    def reevaluate(self) -> bool:
        return bool(self.entries) and all(e.holds() for e in self.entries)

    @property
    def min_slack(self) -> float:
        return min((e.slack for e in self.entries), default=float('nan'))

    def to_json(self) -> Dict:
        return {
            'name': self.name,
            'digest': self.digest,
            'passed': self.passed,
            'measured': self.measured,
            'entries': [e.to_json() for e in self.entries],
            'notes': self.notes,
        }

    @classmethod
    def from_json(cls, data: Dict) -> 'CheckReport':
        try:
            entries = [CheckEntry(e['label'], e['value'], e['op'], e['bound']) for e in data['entries']]
            return cls(data['name'], data['digest'], data.get('measured', {}), entries,
                       list(data.get('notes', [])), bool(data['passed']))
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise ConfigurationError(f"CheckReport JSON 格式错误: {e}")


def _flag(label: str, ok: bool) -> CheckEntry:
    return CheckEntry(label, 1.0 if ok else 0.0, '==', 1.0)


def _le(label: str, value: float, bound: float, rtol: float = 1e-9) -> CheckEntry:
    """value <= bound，容差按量级放宽"""
    return CheckEntry(label, value, '<=', bound + rtol * max(abs(bound), abs(value), 1e-300))


# ----------------------------------------------------------------------
# 标准族
# ----------------------------------------------------------------------
def standard_family(seed: int, n: int = 64, degree: int = STANDARD_DEGREE,
                    budget: float = COEFFICIENT_BUDGET) -> PowerSeries:
    """f₀ = z + Σ_{k=2..degree} c_k z^k，Σ k|c_k| <= budget（系数判据保证单叶）"""
    rng = np.random.default_rng(seed)
    k = np.arange(2, degree + 1)
    c = rng.standard_normal(k.size) + 1j * rng.standard_normal(k.size)
    c *= budget * rng.uniform(0.5, 1.0) / float(np.sum(k * np.abs(c)))
    return PowerSeries.polynomial(np.concatenate([[0.0, 1.0], c]), n)


def standard_psi(seed: int, n: int = 64, degree: int = 4) -> PowerSeries:
    """ψ(0) = 0，Dirichlet 范数为 1 的随机多项式"""
    rng = np.random.default_rng(10_000 + seed)
    c = np.zeros(degree + 1, dtype=complex)
    c[1:] = rng.standard_normal(degree) + 1j * rng.standard_normal(degree)
    psi = PowerSeries.polynomial(c, n)
    return psi.scale(1.0 / dirichlet_norm(psi))


@dataclass
class HolomorphicCurveSpec:
    """t ↦ χ⁻¹(A(f₀) + tφ, q(t))，q 为 t 的多项式系数，q[0] = f₀'(0)"""
    base: PreSchwarzianCoords
    direction: PowerSeries
    q: Tuple[complex, ...]
    t_grid: Tuple[float, ...] = T_GRID

    def __post_init__(self):
        self.q = tuple(complex(c) for c in self.q)
        if abs(self.q[0] - self.base.d) > 1e-12 * max(1.0, abs(self.base.d)):
            raise PreconditionError("q(0) 必须等于 f₀'(0)")
        for t in self.t_grid:
            if self.q_at(t) == 0:
                raise PreconditionError(f"q 在 t={t} 处为 0")

    def q_at(self, t: complex) -> complex:
        return complex(np.polynomial.polynomial.polyval(t, self.q))

    def coords(self, t: complex) -> PreSchwarzianCoords:
        return PreSchwarzianCoords(self.base.phi + self.direction.scale(t), self.q_at(t))

    def f(self, t: complex) -> PowerSeries:
        return chi_inverse(self.coords(t))

    def describe(self) -> Dict:
        return {
            'phi0': self.base.phi.to_json(),
            'direction': self.direction.to_json(),
            'q': [[c.real, c.imag] for c in self.q],
            't_grid': list(self.t_grid),
        }

    @classmethod
    def constant(cls, f0: PowerSeries) -> 'HolomorphicCurveSpec':
        base = chi(f0)
        return cls(base, PowerSeries.constant(0.0, f0.N), (base.d,))


def standard_curve(seed: int, n: int = 64, size: float = DIRECTION_SIZE) -> HolomorphicCurveSpec:
    """标准族的曲线：q(t) = d₀(1 + t/10)，方向的 Bergman 范数为 size"""
    f0 = standard_family(seed, n)
    base = chi(f0)
    rng = np.random.default_rng(20_000 + seed)
    return HolomorphicCurveSpec(base, random_direction(n, size, rng), (base.d, base.d / 10.0))


# ----------------------------------------------------------------------
# Minkowski
# ----------------------------------------------------------------------
def _require_admissible(h: PowerSeries, f: PowerSeries):
    hf = PowerSeries.from_callable(lambda z: h.evaluate(f.evaluate(z)), max(64, 2 * f.N))
    verdict = univalence_check(hf, m=512)
    if not verdict.passed:
        raise PreconditionError(f"h 在 f(𝔻) 闭包附近不是单叶的: {verdict.status} {verdict.reason}")


def check_minkowski(h: PowerSeries, f: PowerSeries) -> CheckReport:
    """‖A(h∘f)‖ <= (∬_{f(𝔻)}|A(h)|² dA)^{1/2} + ‖A(f)‖"""
    _require_admissible(h, f)
    lhs, rhs_h, rhs_f = minkowski_terms(lambda w: pre_schwarzian_at(h, w), f)
    measured = {'lhs': lhs, 'rhs_h': rhs_h, 'rhs_f': rhs_f, 'slack': rhs_h + rhs_f - lhs}
    return CheckReport.build('minkowski', {'h': h.to_json(), 'f': f.to_json()}, measured,
                             [_le('minkowski', lhs, rhs_h + rhs_f)])


# ----------------------------------------------------------------------
# Hardy–Littlewood
# ----------------------------------------------------------------------
def hardy_littlewood_sides(F: PowerSeries, p: float, alpha: float) -> Tuple[float, float]:
    """(∬|F|^p(1-|z|²)^α, ∬|F'|^p(1-|z|²)^{p+α} + |F(0)|^p)"""
    lhs = weighted_fprime_integral(F, WeightedIntegralSpec(p, alpha, PSI_POWER))
    rhs = weighted_fprime_integral(F, WeightedIntegralSpec(p, p + alpha, FPRIME_POWER))
    return lhs, rhs + abs(F.coeffs[0]) ** p


def check_hardy_littlewood(family: Union[PowerSeries, Sequence[PowerSeries]], p: float = 2.0,
                           alpha: float = 0.0, spread: float = 10.0) -> CheckReport:
    """每个 F 的经验常数 C = LHS/RHS 有限，族内 max C / min C < spread"""
    if isinstance(family, PowerSeries):
        family = [family]
    entries, constants, sides = [], [], []
    for i, F in enumerate(family):
        lhs, rhs = hardy_littlewood_sides(F, p, alpha)
        sides.append((lhs, rhs))
        if rhs == 0.0:
            entries.append(_le(f'F{i}: zero', lhs, 0.0))
            continue
        c = lhs / rhs
        constants.append(c)
        entries.append(CheckEntry(f'F{i}: C', c, '<', DIVERGENCE_THRESHOLD))
    ratio = max(constants) / min(constants) if constants and min(constants) > 0 else 1.0
    if len(constants) > 1:
        entries.append(CheckEntry('C spread', ratio, '<', spread))
    measured = {'constants': constants, 'sides': [list(s) for s in sides],
                'constant': max(constants, default=0.0), 'spread': ratio}
    inputs = {'family': [F.to_json() for F in family], 'p': p, 'alpha': alpha}
    return CheckReport.build('hardy_littlewood', inputs, measured, entries)


# ----------------------------------------------------------------------
# Carleson 链
# ----------------------------------------------------------------------
def carleson_profile(r, beta: float) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return (1.0 - r * r) ** (1.5 / beta) * np.log((1.0 + r) / (1.0 - r))


def check_carleson_chain(beta: float = 2.0, z_grid: Optional[Sequence[float]] = None) -> CheckReport:
    """
    (1-r²)^{3/(2β)} log((1+r)/(1-r)) 在 [0, 1-1e-8] 上有界且在端点趋于 0；
    盒测度 μ(S(z)) <= 4π(1-|z|²)^{3/2}/3
    """
    if not beta > 1.0:
        raise PreconditionError(f"需要 β > 1，当前 β={beta}")
    r = np.concatenate([np.linspace(0.0, 0.9, 91), 1.0 - np.geomspace(0.1, 1e-8, 141)[1:]])
    values = carleson_profile(r, beta)
    i = int(np.argmax(values))
    peak, r_peak = float(values[i]), float(r[i])
    if 0 < i < r.size - 1:
        try:
            res = minimize_scalar(lambda x: -float(carleson_profile(x, beta)),
                                  bracket=(r[i - 1], r[i], r[i + 1]), method='golden')
        except ValueError:
            res = None
        if res is not None and -res.fun >= peak and 0.0 <= res.x < 1.0:
            peak, r_peak = float(-res.fun), float(res.x)

    last_decade = values[r >= 1.0 - 1e-7]
    decaying = bool(np.all(np.diff(last_decade) <= 0.0))
    endpoint = float(values[-1])

    box = carleson_box_measure(2.0 * beta, 2.0, 0.5, z_grid)
    radii = np.asarray(box.radii)
    bounds = 4.0 * np.pi * (1.0 - radii ** 2) ** 1.5 / 3.0
    ratio = float(np.max(np.asarray(box.measures) / bounds))

    measured = {'peak': peak, 'r_peak': r_peak, 'endpoint': endpoint,
                'box_ratio': ratio, 'box_constant': box.constant}
    entries = [
        CheckEntry('f(0)', float(values[0]), '==', 0.0),
        CheckEntry('peak finite', peak, '<', DIVERGENCE_THRESHOLD),
        _flag('tail decreasing', decaying),
        CheckEntry('endpoint / peak', endpoint / peak, '<', 0.05),
        _le('box bound', ratio, 1.0),
    ]
    return CheckReport.build('carleson_chain', {'beta': beta}, measured, entries)


# ----------------------------------------------------------------------
# ARS 嵌入
# ----------------------------------------------------------------------
def ars_sides(psi: PowerSeries, beta: float) -> Tuple[float, float]:
    """((∬|ψ|^{2β}(1-|z|²)^{1/2})^{1/(2β)}, Dirichlet 范数)"""
    integral = weighted_fprime_integral(psi, WeightedIntegralSpec(2.0 * beta, 0.5, PSI_POWER))
    return integral ** (1.0 / (2.0 * beta)), dirichlet_norm(psi)


def check_ars_embedding(family: Union[PowerSeries, Sequence[PowerSeries]], beta: float = 2.0,
                        spread: float = 10.0) -> CheckReport:
    if isinstance(family, PowerSeries):
        family = [family]
    entries, constants, sides = [], [], []
    for i, psi in enumerate(family):
        lhs, d = ars_sides(psi, beta)
        sides.append((lhs, d))
        if d == 0.0:
            entries.append(_le(f'psi{i}: zero', lhs, 0.0))
            continue
        constants.append(lhs / d)
        entries.append(CheckEntry(f"psi{i}: C'", lhs / d, '<', DIVERGENCE_THRESHOLD))
    ratio = max(constants) / min(constants) if constants and min(constants) > 0 else 1.0
    if len(constants) > 1:
        entries.append(CheckEntry("C' spread", ratio, '<', spread))
    measured = {'constants': constants, 'sides': [list(s) for s in sides],
                'constant': max(constants, default=0.0), 'spread': ratio}
    inputs = {'family': [p.to_json() for p in family], 'beta': beta}
    return CheckReport.build('ars_embedding', inputs, measured, entries)


# ----------------------------------------------------------------------
# 沿曲线的一致有界
# ----------------------------------------------------------------------
def _curve_members(curve: HolomorphicCurveSpec) -> Tuple[List[PowerSeries], List[str]]:
    members, failures = [], []
    for t in curve.t_grid:
        f = curve.f(t)
        verdict = univalence_check(f, m=512)
        if not verdict.passed:
            failures.append(f"t={t:g}: univalence {verdict.status} {verdict.reason}")
        members.append(f)
    return members, failures


def _uniform_entries(values: Sequence[float], label: str) -> List[CheckEntry]:
    values = np.asarray(values, dtype=float)
    return [_le(f'{label}: max <= 2 median', float(np.max(values)), 2.0 * float(np.median(values)))]


def check_uniform_fprime(curve: HolomorphicCurveSpec, p: float = 4.0,
                         alpha: float = -0.5) -> CheckReport:
    """∬|f_t'|^p(1-|z|²)^α dA 在 t 网格上的最大值不超过中位数的 2 倍"""
    spec = WeightedIntegralSpec(p, alpha, FPRIME_POWER)
    members, failures = _curve_members(curve)
    inputs = {'curve': curve.describe(), 'p': p, 'alpha': alpha}
    if failures:
        return CheckReport.build('uniform_fprime', inputs, {}, [_flag('univalent', False)], failures)
    values = [weighted_fprime_integral(f, spec) for f in members]
    spread = max(values) / min(values) if min(values) > 0 else float('inf')
    measured = {'values': values, 'spread': spread}
    entries = [_flag('univalent', True)] + _uniform_entries(values, 'fprime')
    return CheckReport.build('uniform_fprime', inputs, measured, entries)


def wulfs_integral(f: PowerSeries, psi: PowerSeries, beta: float, n_radial: int = 96) -> float:
    """∬|f'|²|ψ|^β dA"""
    df = differentiate(f)
    m = max(256, next_power_of_two(2 * max(f.N, psi.N)))

    def integrand(radii, n_angular):
        return np.abs(ring_samples(df, radii, n_angular)) ** 2 * \
            np.abs(ring_samples(psi, radii, n_angular)) ** beta

    return max(disc_integral(integrand, 0.0, n_radial, m).value, 0.0)


def check_wulfs(curve: HolomorphicCurveSpec, psi: PowerSeries, beta: float = 2.0) -> CheckReport:
    """
    ∬|f_t'|²|ψ|^β dA 沿 t 网格一致有界，并逐点检验 Cauchy–Schwarz 链
    ∬|f'|²|ψ|^β <= (∬|f'|⁴(1-|z|²)^{-1/2})^{1/2}(∬|ψ|^{2β}(1-|z|²)^{1/2})^{1/2}
    """
    if not beta > 1.0:
        raise PreconditionError(f"需要 β > 1，当前 β={beta}")
    dirichlet_norm(psi)
    members, failures = _curve_members(curve)
    inputs = {'curve': curve.describe(), 'psi': psi.to_json(), 'beta': beta}
    if failures:
        return CheckReport.build('wulfs', inputs, {}, [_flag('univalent', False)], failures)
    psi_part = weighted_fprime_integral(psi, WeightedIntegralSpec(2.0 * beta, 0.5, PSI_POWER))
    values, chain = [], []
    entries = [_flag('univalent', True)]
    for t, f in zip(curve.t_grid, members):
        value = wulfs_integral(f, psi, beta)
        f_part = weighted_fprime_integral(f, WeightedIntegralSpec(4.0, -0.5, FPRIME_POWER))
        bound = math.sqrt(f_part * psi_part)
        values.append(value)
        chain.append(bound)
        entries.append(_le(f't={t:g}: cauchy-schwarz', value, bound))
    entries += _uniform_entries(values, 'wulfs')
    return CheckReport.build('wulfs', inputs, {'values': values, 'chain': chain}, entries)


# ----------------------------------------------------------------------
# 左复合的全纯性
# ----------------------------------------------------------------------
def _composed_coords(h: PowerSeries, curve: HolomorphicCurveSpec, t: complex) -> Tuple[PowerSeries, complex]:
    """χ(h∘f_t) = (A(h)∘f_t·f_t' + A(f_t), h'(f_t(0))·f_t'(0))"""
    f = curve.f(t)
    a = transfer_compose(lambda w: pre_schwarzian_at(h, w), f)
    d = complex(h.derivative_at(f.coeffs[0])) * complex(f.coeffs[1])
    return a, d


def _stencil_ok(report: HolomorphyReport, limit: float) -> Tuple[bool, float]:
    worst = max(report.ratios)
    return (worst < NOISE_FLOOR or (report.decreasing and report.ratios[-1] < limit)), worst


def _coords_distance(a: Tuple[PowerSeries, complex], b: Tuple[PowerSeries, complex]) -> float:
    return bergman_norm(a[0] - b[0]) + abs(a[1] - b[1])


def check_left_composition_holo(h: PowerSeries, curve: HolomorphicCurveSpec,
                                points: Sequence[complex] = (0.3, 0.5j, -0.6 + 0.2j),
                                deltas: Sequence[float] = DELTA_LADDER,
                                ladder: Sequence[float] = REMAINDER_LADDER,
                                step: float = STENCIL_STEP, limit: float = CR_LIMIT,
                                antiholomorphic: complex = 0.0) -> CheckReport:
    """
    t ↦ χ(h∘f_t) 的 Cauchy–Riemann 模板（点求值泛函与 d 坐标）及二阶 Taylor 余项的 |t|³ 标度

    antiholomorphic 往每个点泛函里注入 c·t̄，作为必须失败的对照。
    """
    cache: Dict[complex, Tuple[PowerSeries, complex]] = {}

    def coords(t: complex) -> Tuple[PowerSeries, complex]:
        t = complex(t)
        if t not in cache:
            cache[t] = _composed_coords(h, curve, t)
        return cache[t]

    entries, notes = [], []
    ratios = {}
    for j, z in enumerate(points):
        def functional(t: complex, z=z) -> complex:
            return complex(coords(t)[0].evaluate(z)) + antiholomorphic * np.conj(t)
        ok, worst = _stencil_ok(cr_stencil(functional, 0j, deltas), limit)
        ratios[f'E{j}'] = worst
        entries.append(_flag(f'CR E(z={complex(z)})', ok))
    ok, worst = _stencil_ok(cr_stencil(lambda t: coords(t)[1], 0j, deltas), limit)
    ratios['d'] = worst
    entries.append(_flag('CR d', ok))

    # 5 点模板求 χ'(0), χ''(0)
    c0 = coords(0.0)
    cp1, cm1, cp2, cm2 = coords(step), coords(-step), coords(2 * step), coords(-2 * step)
    first = ((cm2[0] - cp2[0] + (cp1[0] - cm1[0]).scale(8.0)).scale(1.0 / (12 * step)),
             (cm2[1] - cp2[1] + 8.0 * (cp1[1] - cm1[1])) / (12 * step))
    second = (((cp1[0] + cm1[0]).scale(16.0) - cp2[0] - cm2[0] - c0[0].scale(30.0)).scale(1.0 / (12 * step ** 2)),
              (16.0 * (cp1[1] + cm1[1]) - cp2[1] - cm2[1] - 30.0 * c0[1]) / (12 * step ** 2))
    remainders = []
    for t in ladder:
        taylor = (c0[0] + first[0].scale(t) + second[0].scale(t * t / 2.0),
                  c0[1] + first[1] * t + second[1] * t * t / 2.0)
        remainders.append(_coords_distance(coords(t), taylor))
    scaled = [r / t ** 3 for r, t in zip(remainders, ladder)]
    floor = 1e-12 * (1.0 + bergman_norm(c0[0]) + abs(c0[1]))
    if max(remainders) <= floor:
        spread = 1.0
        notes.append("余项在舍入噪声以下")
    else:
        spread = max(scaled) / min(scaled) if min(scaled) > 0 else float('inf')
    entries.append(CheckEntry('remainder |t|^3 spread', spread, '<=', 3.0))

    # 各项界：‖A(h)∘f_t·f_t'‖ 沿网格有界
    terms = []
    for t in curve.t_grid:
        a, _ = coords(t)
        terms.append(bergman_norm(a - pre_schwarzian(curve.f(t))))
    entries.append(CheckEntry('term bound M', max(terms), '<', DIVERGENCE_THRESHOLD))

    measured = {'cr_ratios': ratios, 'remainders': remainders, 'scaled': scaled,
                'spread': spread, 'term_bound': max(terms)}
    inputs = {'h': h.to_json(), 'curve': curve.describe(), 'points': [[complex(z).real, complex(z).imag] for z in points],
              'antiholomorphic': [complex(antiholomorphic).real, complex(antiholomorphic).imag]}
    return CheckReport.build('left_composition_holo', inputs, measured, entries, notes)


# ----------------------------------------------------------------------
# QS₀ 对复合与求逆封闭
# ----------------------------------------------------------------------
def check_qso_closure(h1: CircleHomeo, h2: CircleHomeo) -> CheckReport:
    inputs = {'h1': h1.to_json(), 'h2': h2.to_json()}
    pre = [qs0_certify(h1), qs0_certify(h2)]
    if not all(r.passed for r in pre):
        notes = [n for r in pre for n in r.notes]
        raise PreconditionError(f"输入同胚未通过 QS₀ 证书: {'; '.join(notes) or '成员判定失败'}")
    composed = qs0_certify(compose_homeo(h1, h2))
    inverted = qs0_certify(invert_homeo(h1))
    measured = {'composition': composed.to_json(), 'inverse': inverted.to_json()}
    entries = [
        _flag('composition certified', composed.passed),
        _flag('inverse certified', inverted.passed),
    ]
    return CheckReport.build('qso_closure', inputs, measured, entries, composed.notes + inverted.notes)


def standard_homeos(seed: int, amplitude: float = 0.05) -> Tuple[CircleHomeo, CircleHomeo]:
    rng = np.random.default_rng(30_000 + seed)
    return tuple(CircleHomeo.sine(amplitude * rng.uniform(0.2, 1.0), int(rng.integers(1, 4)),
                                  rng.uniform(0.0, 2 * np.pi))
                 for _ in range(2))


# ----------------------------------------------------------------------
# 套件
# ----------------------------------------------------------------------
MINKOWSKI_SERIES = PowerSeries.polynomial(MINKOWSKI_H, 64)


def _job_minkowski(seed: int, params: Dict) -> CheckReport:
    return check_minkowski(MINKOWSKI_SERIES, standard_family(seed))


def _job_hardy_littlewood(seeds: Sequence[int], params: Dict) -> CheckReport:
    return check_hardy_littlewood([standard_family(s) for s in seeds],
                                  params.get('p', 2.0), params.get('alpha', 0.0))


def _job_ars(seeds: Sequence[int], params: Dict) -> CheckReport:
    return check_ars_embedding([standard_psi(s) for s in seeds], params.get('beta', 2.0))


def _job_carleson(_, params: Dict) -> CheckReport:
    return check_carleson_chain(params.get('beta', 2.0))


def _job_uniform(seed: int, params: Dict) -> CheckReport:
    return check_uniform_fprime(standard_curve(seed), params.get('p', 4.0), params.get('alpha', -0.5))


def _job_wulfs(seed: int, params: Dict) -> CheckReport:
    return check_wulfs(standard_curve(seed), standard_psi(seed), params.get('beta', 2.0))


def _job_left(seed: int, params: Dict) -> CheckReport:
    return check_left_composition_holo(MINKOWSKI_SERIES, standard_curve(seed))


def _job_qso(seed: int, params: Dict) -> CheckReport:
    return check_qso_closure(*standard_homeos(seed))


# 'seed': 每个种子一个作业；'family': 全部种子一个作业；'single': 与种子无关
CHECKS: Dict[str, Tuple[str, Callable[..., CheckReport]]] = {
    'minkowski': ('seed', _job_minkowski),
    'hardy_littlewood': ('family', _job_hardy_littlewood),
    'ars_embedding': ('family', _job_ars),
    'carleson_chain': ('single', _job_carleson),
    'uniform_fprime': ('seed', _job_uniform),
    'wulfs': ('seed', _job_wulfs),
    'left_composition_holo': ('seed', _job_left),
    'qso_closure': ('seed', _job_qso),
}


def standard_manifest(seeds: int = STANDARD_SEEDS, start: int = 0,
                      include_qso: bool = True) -> Dict:
    checks = [
        {'name': 'minkowski'},
        {'name': 'hardy_littlewood', 'params': {'p': 2.0, 'alpha': 0.0}},
        {'name': 'ars_embedding', 'params': {'beta': 2.0}},
        {'name': 'carleson_chain', 'params': {'beta': 2.0}},
        {'name': 'carleson_chain', 'params': {'beta': 4.0}},
        {'name': 'uniform_fprime', 'params': {'p': 4.0, 'alpha': -0.5}},
        {'name': 'wulfs', 'params': {'beta': 2.0}},
        {'name': 'wulfs', 'params': {'beta': 4.0}},
        {'name': 'left_composition_holo'},
    ]
    if include_qso:
        checks.append({'name': 'qso_closure'})
    return {'seeds': list(range(start, start + seeds)), 'checks': checks}


def _expand(manifest: Dict) -> List[Tuple[str, Optional[int], Callable[[], CheckReport]]]:
    seeds = manifest.get('seeds', STANDARD_SEEDS)
    if isinstance(seeds, int):
        seeds = list(range(seeds))
    jobs = []
    for item in manifest.get('checks', []):
        name = item.get('name')
        if name not in CHECKS:
            raise ConfigurationError(f"未知检验: {name}")
        mode, runner = CHECKS[name]
        params = dict(item.get('params', {}))
        label = name + ''.join(f' {k}={v}' for k, v in sorted(params.items()))
        item_seeds = item.get('seeds', seeds)
        if mode == 'seed':
            for s in item_seeds:
                jobs.append((label, s, lambda s=s, r=runner, p=params: r(s, p)))
        elif mode == 'family':
            jobs.append((label, None, lambda r=runner, p=params, ss=list(item_seeds): r(ss, p)))
        else:
            jobs.append((label, None, lambda r=runner, p=params: r(None, p)))
    return jobs


@dataclass
class SuiteResult:
    rows: List[Tuple]
    reports: List[Dict]

    @property
    def passed(self) -> bool:
        return all(row[2] for row in self.rows)


def _run_job(label: str, seed: Optional[int], job: Callable[[], CheckReport]) -> CheckReport:
    try:
        return job()
    except WeldKitError as e:
        report = CheckReport.build(label, {'check': label, 'seed': seed}, {'error': str(e)},
                                   [_flag('completed', False)], [f"{type(e).__name__}: {e}"])
        return report


def run_suite(manifest: Dict, jobs: int = 1, output_dir: Optional[Union[str, Path]] = None,
              logs_dir: Optional[Union[str, Path]] = None) -> SuiteResult:
    """执行清单中的全部检验；写出 suite.csv / suite.json（给出 output_dir 时）"""
    expanded = _expand(manifest)
    start_time = datetime.now()
    print(f"📊 共 {len(expanded)} 个检验作业，{max(jobs, 1)} 个线程")

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(lambda j: _run_job(*j), expanded))
    else:
        reports = [_run_job(*j) for j in expanded]

    rows, payload = [], []
    for (label, seed, _), report in zip(expanded, reports):
        rows.append((label, '' if seed is None else seed, report.passed, report.min_slack, report.digest))
        data = report.to_json()
        data['label'] = label
        data['seed'] = seed
        payload.append(data)
        mark = '✅' if report.passed else '❌'
        suffix = '' if seed is None else f" seed={seed}"
        print(f"{mark} {label}{suffix}")

    result = SuiteResult(rows, payload)
    passed = sum(1 for r in rows if r[2])
    print(f"📊 通过 {passed}/{len(rows)}")
    if output_dir is not None:
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / 'suite.csv', SUITE_COLUMNS, rows)
        write_json(out / 'suite.json', {'passed': result.passed, 'reports': payload})
        print(f"💾 结果已保存: {out.absolute()}")
    if logs_dir is not None:
        summary = [f"✅ 通过: {passed}", f"❌ 失败: {len(rows) - passed}"]
        summary += [f"   • {r[0]} seed={r[1]}" for r in rows if not r[2]]
        append_log(logs_dir, start_time, datetime.now(), 'verify-suite', summary)
    return result
