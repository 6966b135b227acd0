"""
测试公共夹具
"""

import numpy as np
import pytest

from series_core import PowerSeries
from welding import CircleHomeo


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def koebe():
    """z/(1-z)² 截断到 512 项"""
    n = 512
    c = np.arange(n, dtype=complex)
    return PowerSeries(c)


@pytest.fixture
def small_polynomial():
    """z + 0.1z² + 0.05z³（系数判据下单叶）"""
    return PowerSeries.polynomial([0.0, 1.0, 0.1, 0.05], 64)


@pytest.fixture
def sine_homeo():
    return CircleHomeo.sine(0.05, 1, 0.3)


@pytest.fixture
def isolated_logs(tmp_path, monkeypatch):
    """让相对路径 ./logs、./reports 落在临时目录中"""
    monkeypatch.chdir(tmp_path)
    return tmp_path
