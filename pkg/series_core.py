#!/usr/bin/env python3
"""
截断幂级数运算模块

所有其它模块共用的函数表示：
1. 内部级数 Σ c_n z^n（单位圆盘上全纯）
2. 外部级数 c_0 w + c_1 + c_2/w + ...（∞ 附近全纯）
3. 圆周采样 / FFT 拟合、乘法、复合、指数、对数导数
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from errors import (
    ConfigurationError,
    DomainError,
    PreconditionError,
    SingularInputError,
    UnsupportedKindError,
)

INTERIOR = 'interior'
EXTERIOR = 'exterior'

DEFAULT_TRUNCATION = 256
DEFAULT_SAMPLES = 1024
TAIL_THRESHOLD = 1e-10


HORNER_LIMIT = 128
POWER_BLOCK = 128


def polyval(z, coeffs: np.ndarray) -> np.ndarray:
    """Σ c_k z^k；长级数按块展开成幂向量做矩阵乘法"""
    z = np.asarray(z, dtype=complex)
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.size <= HORNER_LIMIT:
        return np.polynomial.polynomial.polyval(z, coeffs)
    nq = -(-coeffs.size // POWER_BLOCK)
    padded = np.zeros(nq * POWER_BLOCK, dtype=complex)
    padded[:coeffs.size] = coeffs
    blocks = padded.reshape(nq, POWER_BLOCK)
    flat = z.ravel()
    out = np.empty(flat.size, dtype=complex)
    chunk = max(1, 2 ** 20 // (nq + POWER_BLOCK))
    for start in range(0, flat.size, chunk):
        zc = flat[start:start + chunk, None]
        low = np.ones((zc.shape[0], POWER_BLOCK), dtype=complex)
        low[:, 1:] = np.cumprod(np.broadcast_to(zc, (zc.shape[0], POWER_BLOCK - 1)), axis=1)
        step = low[:, -1:] * zc
        high = np.ones((zc.shape[0], nq), dtype=complex)
        if nq > 1:
            high[:, 1:] = np.cumprod(np.broadcast_to(step, (zc.shape[0], nq - 1)), axis=1)
        out[start:start + chunk] = np.sum((low @ blocks.T) * high, axis=1)
    return out.reshape(z.shape)


def is_power_of_two(m: int) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


def next_power_of_two(n: int) -> int:
    m = 1
    while m < n:
        m *= 2
    return m


def default_samples(n: int) -> int:
    """给定截断 N 的默认采样数（至少 4N，且不少于 DEFAULT_SAMPLES）"""
    return max(DEFAULT_SAMPLES, next_power_of_two(4 * n))


def _relative_tail(coeffs: np.ndarray, n: int, stop: Optional[int] = None) -> float:
    total = float(np.sum(np.abs(coeffs)))
    if total == 0.0:
        return 0.0
    return float(np.sum(np.abs(coeffs[n:stop]))) / total


@dataclass(frozen=True, eq=False)
class PowerSeries:
    """
    截断幂级数（不可变）

    Args:
        coeffs: 复系数向量。内部级数下标 n 对应 z^n；
                外部级数下标 k 对应 w^{1-k}（coeffs[0] 乘 w）
        kind: 'interior' 或 'exterior'
        truncation_loss: 运算中是否丢弃了最高次系数
        tail_mass: 采样拟合时被截掉部分的相对质量
    """
    coeffs: np.ndarray
    kind: str = INTERIOR
    truncation_loss: bool = False
    tail_mass: float = 0.0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if c.size < 2:
            raise ConfigurationError(f"截断长度必须 >= 2，当前为 {c.size}")
        if not np.all(np.isfinite(c)):
            raise PreconditionError("系数中含有 NaN 或 Inf")
        if self.kind not in (INTERIOR, EXTERIOR):
            raise UnsupportedKindError(f"未知级数类型: {self.kind}")
        c.setflags(write=False)
        object.__setattr__(self, 'coeffs', c)

    # ------------------------------------------------------------------
    # 构造
    # ------------------------------------------------------------------
    @classmethod
    def identity(cls, n: int = DEFAULT_TRUNCATION) -> 'PowerSeries':
        c = np.zeros(n, dtype=complex)
        c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, value: complex, n: int = DEFAULT_TRUNCATION) -> 'PowerSeries':
        c = np.zeros(n, dtype=complex)
        c[0] = value
        return cls(c)

    @classmethod
    def polynomial(cls, coeffs: Sequence[complex], n: Optional[int] = None,
                   kind: str = INTERIOR) -> 'PowerSeries':
        """由有限个系数构造，补零到长度 n"""
        coeffs = np.asarray(coeffs, dtype=complex)
        n = max(n or DEFAULT_TRUNCATION, 2)
        if coeffs.size > n:
            raise ConfigurationError(f"系数个数 {coeffs.size} 超过截断 {n}")
        c = np.zeros(n, dtype=complex)
        c[:coeffs.size] = coeffs
        return cls(c, kind=kind)

    @classmethod
    def from_callable(cls, func: Callable[[np.ndarray], np.ndarray],
                      n: int = DEFAULT_TRUNCATION, m: Optional[int] = None,
                      r: float = 1.0) -> 'PowerSeries':
        """在半径 r 的圆上采样全纯函数 func，再用 FFT 拟合前 n 个系数"""
        m = m or default_samples(n)
        _check_samples(m, n)
        z = r * np.exp(2j * np.pi * np.arange(m) / m)
        values = np.asarray(func(z), dtype=complex)
        return fit_interior(CircleSamples(values, r=r), n)

    # ------------------------------------------------------------------
    # 基本属性
    # ------------------------------------------------------------------
    @property
    def N(self) -> int:
        return self.coeffs.size

    @property
    def under_resolved(self) -> bool:
        return self.tail_mass > TAIL_THRESHOLD

    @property
    def is_identity(self) -> bool:
        if self.kind != INTERIOR:
            return False
        e1 = np.zeros(self.N, dtype=complex)
        e1[1] = 1.0
        return bool(np.array_equal(self.coeffs, e1))

    def evaluate(self, z) -> np.ndarray:
        """在点 z 处求值（内部级数 Σ c_n z^n；外部级数 w·Σ c_k w^{-k}）"""
        z = np.asarray(z, dtype=complex)
        if self.kind == INTERIOR:
            return polyval(z, self.coeffs)
        with np.errstate(divide='ignore', invalid='ignore'):
            inv = np.where(np.isinf(z), 0.0, 1.0 / np.where(z == 0, 1.0, z))
            out = z * polyval(inv, self.coeffs)
        return np.where(np.isinf(z), np.inf + 0j, out)

    def derivative_at(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if self.kind == INTERIOR:
            k = np.arange(1, self.N)
            return polyval(z, self.coeffs[1:] * k)
        # G'(w) = Σ c_k (1-k) w^{-k}
        k = np.arange(self.N)
        return polyval(1.0 / z, self.coeffs * (1 - k))

    def value_at_zero(self) -> complex:
        if self.kind != INTERIOR:
            raise UnsupportedKindError("外部级数在 0 处无定义")
        return complex(self.coeffs[0])

    def resize(self, n: int) -> 'PowerSeries':
        c = np.zeros(n, dtype=complex)
        k = min(n, self.N)
        c[:k] = self.coeffs[:k]
        lost = self.truncation_loss or bool(np.any(self.coeffs[k:] != 0))
        return PowerSeries(c, self.kind, lost, self.tail_mass)

    def truncate(self, n: int) -> 'PowerSeries':
        """保留前 n 个系数，长度不变"""
        c = self.coeffs.copy()
        c[n:] = 0.0
        return PowerSeries(c, self.kind, self.truncation_loss, self.tail_mass)

    def _binary(self, other: 'PowerSeries', sign: float) -> 'PowerSeries':
        if other.kind != self.kind:
            raise UnsupportedKindError("不同类型的级数不能相加")
        n = max(self.N, other.N)
        a, b = self.resize(n), other.resize(n)
        return PowerSeries(a.coeffs + sign * b.coeffs, self.kind,
                           a.truncation_loss or b.truncation_loss,
                           max(a.tail_mass, b.tail_mass))

    def __add__(self, other: 'PowerSeries') -> 'PowerSeries':
        return self._binary(other, 1.0)

    def __sub__(self, other: 'PowerSeries') -> 'PowerSeries':
        return self._binary(other, -1.0)

    def __neg__(self) -> 'PowerSeries':
        return self.scale(-1.0)

    def scale(self, c: complex) -> 'PowerSeries':
        return PowerSeries(self.coeffs * c, self.kind, self.truncation_loss, self.tail_mass)

    def __mul__(self, c: complex) -> 'PowerSeries':
        if isinstance(c, PowerSeries):
            return multiply(self, c)
        return self.scale(c)

    __rmul__ = __mul__

    # ------------------------------------------------------------------
    # JSON 交换格式
    # ------------------------------------------------------------------
    def to_json(self) -> Dict:
        return {
            'kind': self.kind,
            'coeffs': [[float(c.real), float(c.imag)] for c in self.coeffs],
        }

    @classmethod
    def from_json(cls, data: Dict) -> 'PowerSeries':
        try:
            coeffs = np.array([complex(re, im) for re, im in data['coeffs']], dtype=complex)
            kind = data.get('kind', INTERIOR)
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise ConfigurationError(f"级数 JSON 格式错误: {e}")
        if kind not in (INTERIOR, EXTERIOR):
            raise ConfigurationError(f"级数 JSON 中未知的 kind: {kind!r}")
        if coeffs.size < 2 or not np.all(np.isfinite(coeffs)):
            raise ConfigurationError(f"级数 JSON 需要至少 2 个有限系数，当前 {coeffs.size} 个")
        return cls(coeffs, kind=kind)


@dataclass(frozen=True, eq=False)
class CircleSamples:
    """半径 r 圆周上 M 个等距点的采样值（M 为 2 的幂）"""
    values: np.ndarray
    r: float = 1.0
    kind: str = INTERIOR

    def __post_init__(self):
        v = np.array(self.values, dtype=complex).ravel()
        if not is_power_of_two(v.size) or v.size < 2:
            raise ConfigurationError(f"采样数必须是 2 的幂，当前为 {v.size}")
        v.setflags(write=False)
        object.__setattr__(self, 'values', v)

    @property
    def M(self) -> int:
        return self.values.size

    def points(self) -> np.ndarray:
        return self.r * np.exp(2j * np.pi * np.arange(self.M) / self.M)

    def to_json(self) -> Dict:
        return {
            'r': self.r,
            'kind': self.kind,
            'values': [[float(v.real), float(v.imag)] for v in self.values],
        }


def _check_samples(m: int, n: int):
    if not is_power_of_two(m):
        raise ConfigurationError(f"采样数 M={m} 不是 2 的幂")
    if m < 2 * n:
        raise ConfigurationError(f"混叠保护: 需要 M >= 2N，当前 M={m}, N={n}")


def _require_interior(s: PowerSeries, op: str):
    if s.kind != INTERIOR:
        raise UnsupportedKindError(f"{op} 只支持内部级数")


# ----------------------------------------------------------------------
# 微积分
# ----------------------------------------------------------------------
def differentiate(s: PowerSeries) -> PowerSeries:
    """逐项求导，长度 N-1 补零到 N"""
    _require_interior(s, "differentiate")
    c = np.zeros(s.N, dtype=complex)
    c[:-1] = s.coeffs[1:] * np.arange(1, s.N)
    return PowerSeries(c, INTERIOR, s.truncation_loss, s.tail_mass)


def integrate0(s: PowerSeries) -> PowerSeries:
    """0 处取值为 0 的原函数；z^N 项被丢弃时记录 truncation_loss"""
    _require_interior(s, "integrate0")
    c = np.zeros(s.N, dtype=complex)
    c[1:] = s.coeffs[:-1] / np.arange(1, s.N)
    lost = s.truncation_loss or bool(s.coeffs[-1] != 0)
    return PowerSeries(c, INTERIOR, lost, s.tail_mass)


# ----------------------------------------------------------------------
# 乘法 / 复合
# ----------------------------------------------------------------------
def multiply(a: PowerSeries, b: PowerSeries) -> PowerSeries:
    """截断 Cauchy 乘积：圆周采样相乘后逆变换"""
    _require_interior(a, "multiply")
    _require_interior(b, "multiply")
    n = max(a.N, b.N)
    m = next_power_of_two(2 * n)
    va = sample_circle(a.resize(n), 1.0, m).values
    vb = sample_circle(b.resize(n), 1.0, m).values
    full = np.fft.fft(va * vb) / m
    tail = _relative_tail(full, n)
    return PowerSeries(full[:n], INTERIOR,
                       a.truncation_loss or b.truncation_loss or tail > TAIL_THRESHOLD,
                       max(a.tail_mass, b.tail_mass, tail))


def compose(outer: PowerSeries, inner: PowerSeries, m: Optional[int] = None) -> PowerSeries:
    """
    截断复合 outer∘inner

    在单位圆上采样 inner，代入 outer 后 FFT 拟合；inner(0) ≠ 0 时
    采样拟合自动完成重新展开。尾部质量随结果一起返回。
    """
    _require_interior(outer, "compose")
    _require_interior(inner, "compose")
    if inner.is_identity:
        return outer
    n = max(outer.N, inner.N)
    m = m or default_samples(n)
    _check_samples(m, n)
    inner_vals = sample_circle(inner.resize(n), 1.0, m).values
    sup = float(np.max(np.abs(inner_vals)))
    if sup >= 1.0:
        raise DomainError(f"复合半径越界: 采样圆上 sup|inner| = {sup:.6g} >= 1")
    full = np.fft.fft(outer.evaluate(inner_vals)) / m
    tail = _relative_tail(full, n, m // 2)
    return PowerSeries(full[:n], INTERIOR, outer.truncation_loss or inner.truncation_loss,
                       max(outer.tail_mass, inner.tail_mass, tail))


# ----------------------------------------------------------------------
# 指数 / 除法 / 对数导数
# ----------------------------------------------------------------------
def exp_series(s: PowerSeries) -> PowerSeries:
    """截断指数：由 e' = s' e 得递推 n e_n = Σ k s_k e_{n-k}"""
    _require_interior(s, "exp_series")
    n = s.N
    ks = np.arange(n) * s.coeffs
    e = np.zeros(n, dtype=complex)
    e[0] = np.exp(s.coeffs[0])
    for j in range(1, n):
        e[j] = np.dot(ks[1:j + 1], e[j - 1::-1]) / j
    return PowerSeries(e, INTERIOR, s.truncation_loss, s.tail_mass)


def divide(a: PowerSeries, b: PowerSeries) -> PowerSeries:
    """截断商 a/b（形式幂级数递推），要求 b(0) ≠ 0"""
    _require_interior(a, "divide")
    _require_interior(b, "divide")
    n = max(a.N, b.N)
    ac, bc = a.resize(n).coeffs, b.resize(n).coeffs
    scale = float(np.max(np.abs(bc)))
    b0 = bc[0]
    if scale == 0.0 or abs(b0) <= 1e-14 * scale:
        raise SingularInputError("除数级数的常数项为零")
    q = np.zeros(n, dtype=complex)
    q[0] = ac[0] / b0
    for j in range(1, n):
        q[j] = (ac[j] - np.dot(bc[1:j + 1], q[j - 1::-1])) / b0
    return PowerSeries(q, INTERIOR, a.truncation_loss or b.truncation_loss,
                       max(a.tail_mass, b.tail_mass))


def log_deriv(s: PowerSeries) -> PowerSeries:
    """对数导数 s'/s（避免选取对数分支）"""
    _require_interior(s, "log_deriv")
    if abs(s.coeffs[0]) <= 1e-14 * float(np.max(np.abs(s.coeffs))):
        raise SingularInputError("log_deriv 要求 s(0) ≠ 0")
    q = divide(differentiate(s), s)
    # s' 的最高次系数缺失，商的最后一项不可信
    c = q.coeffs.copy()
    c[-1] = 0.0
    return PowerSeries(c, INTERIOR, True, q.tail_mass)


# ----------------------------------------------------------------------
# 圆周采样 / 拟合
# ----------------------------------------------------------------------
def sample_circle(s: PowerSeries, r: float = 1.0, m: Optional[int] = None) -> CircleSamples:
    """在 r·e^{2πik/M} 处求值（FFT）"""
    m = m or default_samples(s.N)
    _check_samples(m, s.N)
    k = np.arange(s.N)
    if s.kind == INTERIOR:
        if not 0.0 < r <= 1.0:
            raise ConfigurationError(f"内部级数采样半径必须在 (0,1] 内，当前 r={r}")
        padded = np.zeros(m, dtype=complex)
        padded[:s.N] = s.coeffs * r ** k
        return CircleSamples(m * np.fft.ifft(padded), r=r)
    if r < 1.0:
        raise ConfigurationError(f"外部级数采样半径必须 >= 1，当前 r={r}")
    padded = np.zeros(m, dtype=complex)
    padded[:s.N] = s.coeffs * r ** (-k.astype(float))
    w = r * np.exp(2j * np.pi * np.arange(m) / m)
    return CircleSamples(w * np.fft.fft(padded), r=r, kind=EXTERIOR)


def fit_interior(samples: CircleSamples, n: Optional[int] = None) -> PowerSeries:
    """sample_circle 的左逆（对带限数据）"""
    m = samples.M
    n = n or m // 2
    _check_samples(m, n)
    full = np.fft.fft(samples.values) / m
    tail = _relative_tail(full, n, m // 2)
    c = full[:n] / samples.r ** np.arange(n)
    return PowerSeries(c, INTERIOR, False, tail)


def fit_exterior(samples: CircleSamples, n: Optional[int] = None) -> PowerSeries:
    """由 |w|=r 上的采样拟合外部级数 c_0 w + c_1 + c_2/w + ..."""
    m = samples.M
    n = n or m // 2
    _check_samples(m, n)
    w = samples.points()
    full = np.fft.ifft(samples.values / w)
    tail = _relative_tail(full, n, m // 2)
    c = full[:n] * samples.r ** np.arange(n)
    return PowerSeries(c, EXTERIOR, False, tail)
