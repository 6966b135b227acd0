#!/usr/bin/env python3
"""
异常定义模块
所有数值模块共用的错误类型
"""

from typing import Optional


class WeldKitError(Exception):
    """本项目所有错误的基类"""


class UnsupportedKindError(WeldKitError, ValueError):
    """级数类型不支持该操作（例如对外部级数求导）"""


class SingularInputError(WeldKitError, ArithmeticError):
    """奇异输入：常数项为零的除法、f'(0)=0 等"""


class DomainError(WeldKitError, ArithmeticError):
    """复合半径越界：内层函数在采样圆上 sup|inner| >= 1"""


class ConfigurationError(WeldKitError, ValueError):
    """采样/截断配置非法（混叠保护、非 2 的幂等）"""


class PreconditionError(WeldKitError, ValueError):
    """违反操作前置条件"""


class OrientationError(WeldKitError, ValueError):
    """圆周映射不再保持定向"""


class ConvergenceError(WeldKitError, ArithmeticError):
    """迭代未收敛，携带最后一次残差"""

    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message)
        self.residual = residual


class SolverBreakdownError(WeldKitError, ArithmeticError):
    """求解器迭代结果失去单叶性"""


class ExtensionInvalidError(WeldKitError, ArithmeticError):
    """构造的延拓不是拟共形的（‖μ‖∞ >= 1）"""


class CapDegenerateError(WeldKitError, ValueError):
    """帽子映射退化（|ε| >= 1）"""


class DegenerationError(WeldKitError, ArithmeticError):
    """推送后刺点碰撞或圆盘重叠"""


class ChartIncompatibleError(WeldKitError, ValueError):
    """映射闭包不在坐标卡定义域内"""


class ConditioningError(WeldKitError, ArithmeticError):
    """Möbius 求解病态（点重合或近乎重合）"""
