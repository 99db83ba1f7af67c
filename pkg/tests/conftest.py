"""
pytest 配置與共用 fixtures
"""

import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.trajectory import Trajectory
from src.utils.exceptions import CutCoincidenceError, DegenerateTangencyError
from src.words import Family, Presentation

GOLDEN_DIR = Path(__file__).parent / 'goldens'


@pytest.fixture
def goldens_dir():
    return GOLDEN_DIR


@pytest.fixture
def rng():
    """固定種子的亂數產生器（可重現的模糊測試）"""
    return np.random.default_rng(20240601)


@pytest.fixture
def s3():
    return Presentation(Family.S, 3)


@pytest.fixture
def t3():
    return Presentation(Family.T, 3)


@pytest.fixture
def s4_ring():
    return Presentation(Family.S, 4, 'ring')


def make_trajectory(paths, geometry='interval', circumference=None, policy='Q'):
    """
    由 [[(t, x), ...], ...] 建立軌跡

    數值可為 int、Fraction 或 "p/q" 字串。
    """
    return Trajectory(
        geometry=geometry,
        particles=tuple(tuple((time, x) for time, x in path) for path in paths),
        circumference=circumference,
        policy=policy,
    )


def random_loop(rng, starts, base, n_segments=3, circumference=None, spread=40):
    """
    隨機分段線性迴圈

    每個粒子由 starts[p] 出發，終點為 base 的隨機排列（ring 上再加上隨機整數圈）。
    所有粒子共用時間網格 0..n_segments；中間折點取分母為 7 的隨機有理數。
    """
    n = len(starts)
    order = rng.permutation(n)
    paths = []
    for p in range(n):
        path = [(0, starts[p])]
        for k in range(1, n_segments):
            x = Fraction(int(rng.integers(-spread * 7, spread * 7)), 7)
            path.append((k, x))
        end = base[int(order[p])]
        if circumference is not None:
            end = end + int(rng.integers(-1, 2)) * circumference
        path.append((n_segments, end))
        paths.append(path)
    geometry = 'ring' if circumference is not None else 'interval'
    return make_trajectory(paths, geometry, circumference)


def generic_loop(rng, starts, base, check, retry_on=(), **kwargs):
    """
    重抽直到 check(traj) 成功

    退化相切與切口重合一律重抽；retry_on 可再加入其他異常（例如策略違規）。
    """
    skip = (DegenerateTangencyError, CutCoincidenceError) + tuple(retry_on)
    for _ in range(200):
        traj = random_loop(rng, starts, base, **kwargs)
        try:
            return traj, check(traj)
        except skip:
            continue
    raise RuntimeError("could not draw a generic loop")


@pytest.fixture
def loop_factory(rng):
    """回傳 (starts, base, check, **kwargs) -> (traj, result) 的產生器"""
    def factory(starts, base, check, **kwargs):
        return generic_loop(rng, starts, base, check, **kwargs)
    return factory
