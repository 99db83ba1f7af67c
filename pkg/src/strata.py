"""
組態空間分層模組

計算 N 粒子組態空間依整數分割的分層組合量：
- 整數分割列舉（反字典序）
- 各分層的連通分量數 h、餘維度、穩定子階數、軌道大小
- 組態分類（重合分組與 Δ₂、Δ₃、Δ₂,₂ 旗標）
- 排序扇區：interval 上 N! 個 alcove，ring 上 (N−1)! 個循環扇區
- 硬核空間的連通分量數與對應的交換群

所有座標皆為精確有理數，不存在容差參數。
"""

import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

from src.models import ConfigurationFile, parse_model
from src.utils import parse_rational
from src.utils.exceptions import ValidationError
from src.words import Family, Geometry

logger = logging.getLogger(__name__)


class CoincidencePolicy(str, Enum):
    """重合排除策略：Q 不排除、Q2 排除 Δ₂、Q3 排除 Δ₃、Q22 排除 Δ₂,₂、Q3_22 兩者皆排除"""

    Q = "Q"
    Q2 = "Q2"
    Q3 = "Q3"
    Q22 = "Q22"
    Q3_22 = "Q3_22"

    @property
    def excludes_pairs(self) -> bool:
        return self is CoincidencePolicy.Q2

    @property
    def excludes_triples(self) -> bool:
        return self in (CoincidencePolicy.Q2, CoincidencePolicy.Q3, CoincidencePolicy.Q3_22)

    @property
    def excludes_double_pairs(self) -> bool:
        return self in (CoincidencePolicy.Q2, CoincidencePolicy.Q22, CoincidencePolicy.Q3_22)


# 每個策略對應的群族
POLICY_FAMILY: Dict[CoincidencePolicy, Family] = {
    CoincidencePolicy.Q: Family.S,
    CoincidencePolicy.Q2: Family.S,
    CoincidencePolicy.Q3: Family.T,
    CoincidencePolicy.Q22: Family.F,
    CoincidencePolicy.Q3_22: Family.W,
}


@dataclass(frozen=True)
class IntegerPartition:
    """N 的整數分割，parts 非遞增"""

    parts: Tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if not parts or any(p <= 0 for p in parts):
            raise ValueError(f"Partition parts must be positive, got {parts}")
        object.__setattr__(self, 'parts', tuple(sorted(parts, reverse=True)))

    @property
    def n(self) -> int:
        return sum(self.parts)

    def __str__(self) -> str:
        if all(p < 10 for p in self.parts):
            return "[" + "".join(str(p) for p in self.parts) + "]"
        return "[" + ",".join(str(p) for p in self.parts) + "]"


@dataclass(frozen=True)
class StratumInfo:
    """
    分層 X_[ν] 的組合資料

    Attributes:
        partition: 分割 [ν]
        d: 底流形維度
        h: 連通分量數 N!/(n₁!…n_k!)
        codim: 餘維度 Σ(nⱼ−1)d
        stabilizer_order: 穩定子階數 n₁!…n_k!
        orbit_size: S_N 軌道大小 N!/stabilizer_order
    """

    partition: IntegerPartition
    d: int
    h: int
    codim: int
    stabilizer_order: int
    orbit_size: int

    @property
    def dimension(self) -> int:
        return self.partition.n * self.d - self.codim

    def to_dict(self) -> dict:
        return {
            'partition': str(self.partition),
            'h': self.h,
            'codim': self.codim,
            'dimension': self.dimension,
            'stabilizer_order': self.stabilizer_order,
            'orbit_size': self.orbit_size,
        }


def partitions(n: int) -> List[IntegerPartition]:
    """
    N 的所有整數分割，依反字典序排列

    Examples:
        >>> [str(p) for p in partitions(4)]
        ['[4]', '[31]', '[22]', '[211]', '[1111]']
    """
    if n < 1:
        raise ValueError(f"N must be >= 1, got {n}")

    def build(remaining: int, largest: int):
        if remaining == 0:
            yield ()
            return
        for first in range(min(remaining, largest), 0, -1):
            for rest in build(remaining - first, first):
                yield (first,) + rest

    return [IntegerPartition(parts) for parts in build(n, n)]


def stratum_info(partition: Union[IntegerPartition, Sequence[int]], d: int = 1) -> StratumInfo:
    """依分割計算分層資料"""
    if not isinstance(partition, IntegerPartition):
        partition = IntegerPartition(tuple(partition))
    if d < 1:
        raise ValueError(f"Base dimension d must be >= 1, got {d}")

    total = math.factorial(partition.n)
    stabilizer = math.prod(math.factorial(p) for p in partition.parts)
    return StratumInfo(
        partition=partition,
        d=d,
        h=total // stabilizer,
        codim=sum(p - 1 for p in partition.parts) * d,
        stabilizer_order=stabilizer,
        orbit_size=total // stabilizer,
    )


def strata_table(n: int, d: int = 1) -> pd.DataFrame:
    """所有分割的分層資料表，一列一個分割"""
    rows = [stratum_info(p, d).to_dict() for p in partitions(n)]
    df = pd.DataFrame(rows, columns=[
        'partition', 'h', 'codim', 'dimension', 'stabilizer_order', 'orbit_size'
    ])
    logger.info(f"N={n}, d={d} 共 {len(df)} 個分層")
    return df


# ==================== 組態 ====================

@dataclass(frozen=True)
class Configuration:
    """
    N 個粒子的位置

    Attributes:
        geometry: interval 或 ring
        positions: 精確有理數座標（ring 上已取模至 [0, circumference)）
        circumference: ring 的周長；interval 為 None
    """

    geometry: Geometry
    positions: Tuple[Fraction, ...]
    circumference: Optional[Fraction] = None

    def __post_init__(self):
        object.__setattr__(self, 'geometry', Geometry(self.geometry))
        positions = tuple(parse_rational(p) for p in self.positions)
        if self.geometry is Geometry.RING:
            if self.circumference is None:
                raise ValidationError("Ring configuration requires a circumference")
            length = parse_rational(self.circumference)
            if length <= 0:
                raise ValidationError(f"Circumference must be positive, got {length}")
            object.__setattr__(self, 'circumference', length)
            positions = tuple(p % length for p in positions)
        elif self.circumference is not None:
            raise ValidationError("Interval configuration takes no circumference")
        object.__setattr__(self, 'positions', positions)

    @classmethod
    def interval(cls, positions: Sequence) -> "Configuration":
        return cls(Geometry.INTERVAL, tuple(positions))

    @classmethod
    def ring(cls, positions: Sequence, circumference=1) -> "Configuration":
        return cls(Geometry.RING, tuple(positions), circumference)

    @property
    def n_particles(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class Classification:
    """
    組態分類結果

    Attributes:
        partition: 重合分組大小構成的分割
        groups: 依位置遞增排列的粒子編號分組（1 起算）
        in_delta2: 存在兩粒子重合
        in_delta3: 存在三粒子重合
        in_delta22: 存在兩組互斥的重合對
    """

    partition: IntegerPartition
    groups: Tuple[Tuple[int, ...], ...]
    in_delta2: bool
    in_delta3: bool
    in_delta22: bool

    def to_dict(self) -> dict:
        return {
            'partition': str(self.partition),
            'groups': [list(g) for g in self.groups],
            'delta2': self.in_delta2,
            'delta3': self.in_delta3,
            'delta22': self.in_delta22,
        }


def coincidence_flags(sizes: Sequence[int]) -> Tuple[bool, bool, bool]:
    """
    由重合分組大小判斷 (Δ₂, Δ₃, Δ₂,₂) 旗標

    四粒子重合同時滿足 x_i = x_j 與 x_k = x_l，故以 Σ⌊|g|/2⌋ >= 2 判定 Δ₂,₂。
    """
    return (
        any(s >= 2 for s in sizes),
        any(s >= 3 for s in sizes),
        sum(s // 2 for s in sizes) >= 2,
    )


def classify_configuration(c: Configuration) -> Classification:
    """依精確座標相等分組"""
    buckets: Dict[Fraction, List[int]] = defaultdict(list)
    for label, x in enumerate(c.positions, start=1):
        buckets[x].append(label)
    groups = tuple(tuple(buckets[x]) for x in sorted(buckets))
    sizes = [len(g) for g in groups]
    delta2, delta3, delta22 = coincidence_flags(sizes)
    return Classification(IntegerPartition(tuple(sizes)), groups, delta2, delta3, delta22)


def ordering_sector(c: Configuration) -> Tuple[int, ...]:
    """
    排序扇區標籤

    interval：x_{ω₁} < … < x_{ω_N} 的排列 ω；
    ring：循環順序，旋轉使粒子 1 居首。

    Raises:
        ValidationError: 組態位於 Δ₂（不屬於任何扇區）
    """
    if classify_configuration(c).in_delta2:
        raise ValidationError("Configuration lies on the coincidence locus; it has no sector")
    order = tuple(sorted(range(1, c.n_particles + 1), key=lambda label: c.positions[label - 1]))
    if c.geometry is Geometry.INTERVAL:
        return order
    start = order.index(1)
    return order[start:] + order[:start]


def sector_count(geometry, n: int) -> int:
    """扇區數：interval 為 N!，ring 為 (N−1)!"""
    if Geometry(geometry) is Geometry.INTERVAL:
        return math.factorial(n)
    return math.factorial(n - 1)


def component_count(geometry, n: int, policy, labeled: bool = True) -> int:
    """
    一維硬核空間的連通分量數

    僅排除 Δ₂ 會切斷空間（餘維度 1）：X₂ 有 sector_count 個分量，Q₂ 只有一個；
    排除 Δ₃ 或 Δ₂,₂（餘維度 2）不影響連通性。
    """
    policy = CoincidencePolicy(policy)
    if policy is CoincidencePolicy.Q2 and labeled:
        return sector_count(geometry, n)
    return 1


def exchange_group(geometry, policy, n: int) -> str:
    """各策略下的交換群名稱，例如 T_4 或 W_3(S1)"""
    policy = CoincidencePolicy(policy)
    ring = Geometry(geometry) is Geometry.RING
    if policy is CoincidencePolicy.Q2:
        return "Z_zeta" if ring else "1"
    name = f"{POLICY_FAMILY[policy].value}_{n}"
    return f"{name}(S1)" if ring else name


def load_configuration(source: Union[str, Path, dict]) -> Configuration:
    """由 JSON 檔或 dict 載入組態"""
    if isinstance(source, dict):
        data = source
    else:
        try:
            with open(source, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ValidationError(f"Configuration file {source} is not valid JSON: {e}") from e
    model = parse_model(ConfigurationFile, data)
    geometry, circumference = model.geometry_spec()
    return Configuration(Geometry(geometry), tuple(model.positions), circumference)
