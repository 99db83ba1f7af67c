"""
Coxeter 型群運算引擎模組

提供 interval 幾何群族 S_N、T_N、F_N、W_N 的判定程序，實現：
- Coxeter 矩陣建構（依被放寬的 Yang-Baxter 或局域交換關係）
- Tits 幾何表示（精確有理數矩陣，作為元素相等的證書）
- 化簡字判定（Tits 移動閉包）與 shortlex 正規形
- Cayley 球列舉

四個群族的 m(i,j) 皆屬 {1, 2, 3, ∞}，故 −cos(π/m) ∈ {1, 0, −1/2, −1}
全為有理數，整個模組不使用浮點數。
"""

import logging
import math
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple

from src.utils import format_rational, load_parameters
from src.utils.exceptions import (
    ElementCapExceeded,
    GeometryMismatchError,
    OrbitCapExceeded,
    PresentationMismatchError,
)
from src.words import Family, Presentation, Word, sigma_word

logger = logging.getLogger(__name__)

INF = math.inf

_BILINEAR = {
    1: Fraction(1),
    2: Fraction(0),
    3: Fraction(-1, 2),
    INF: Fraction(-1),
}


@dataclass(frozen=True)
class CoxeterMatrix:
    """
    Coxeter 矩陣

    Attributes:
        family: 群族
        n_gens: 生成元個數 N−1
        entries: m(i,j)，以 0 起算的索引儲存；∞ 以 math.inf 表示
    """

    family: Family
    n_gens: int
    entries: Tuple[Tuple[float, ...], ...]

    def m(self, i: int, j: int) -> float:
        """m(i,j)，i、j 為 1 起算的生成元索引"""
        return self.entries[i - 1][j - 1]


def build_coxeter_matrix(family, n: int) -> CoxeterMatrix:
    """
    依群族建立 Coxeter 矩陣

    - S: m(i,i±1)=3, 遠距 m=2
    - T: m(i,i±1)=∞, 遠距 m=2（放寬 Yang-Baxter）
    - F: m(i,i±1)=3, 遠距 m=∞（放寬局域交換）
    - W: 所有 i≠j 皆 ∞

    Raises:
        UnsupportedFamilyError: 族 B（非 Coxeter 型）
    """
    presentation = Presentation(family, n)
    fam = presentation.family
    adjacent = INF if fam in (Family.T, Family.W) else 3
    distant = INF if fam in (Family.F, Family.W) else 2

    k = n - 1
    rows = []
    for i in range(k):
        row = []
        for j in range(k):
            if i == j:
                row.append(1)
            elif abs(i - j) == 1:
                row.append(adjacent)
            else:
                row.append(distant)
        rows.append(tuple(row))
    return CoxeterMatrix(fam, k, tuple(rows))


# ==================== 有理數矩陣 ====================

@dataclass(frozen=True)
class RationalMatrix:
    """精確有理數方陣（Fraction 自動約分、分母為正，逐元素相等即為標準相等）"""

    rows: Tuple[Tuple[Fraction, ...], ...]

    @classmethod
    def identity(cls, size: int) -> "RationalMatrix":
        return cls(tuple(
            tuple(Fraction(1) if i == j else Fraction(0) for j in range(size))
            for i in range(size)
        ))

    @property
    def size(self) -> int:
        return len(self.rows)

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        cols = list(zip(*other.rows))
        return RationalMatrix(tuple(
            tuple(sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in cols)
            for row in self.rows
        ))

    def is_identity(self) -> bool:
        return self == RationalMatrix.identity(self.size)

    def to_json(self) -> List[List[str]]:
        """序列化為 "num/den" 字串的二維陣列"""
        return [[format_rational(x) for x in row] for row in self.rows]


def bilinear_form(coxeter: CoxeterMatrix) -> Tuple[Tuple[Fraction, ...], ...]:
    """B(αᵢ, αⱼ) = −cos(π/m(i,j))"""
    return tuple(tuple(_BILINEAR[m] for m in row) for row in coxeter.entries)


def generator_matrix(coxeter: CoxeterMatrix, i: int) -> RationalMatrix:
    """
    ρ(σᵢ)v = v − 2B(v, αᵢ)αᵢ，於根基底 α 下的矩陣

    第 j 行為 ρ(σᵢ)αⱼ = αⱼ − 2B(αⱼ, αᵢ)αᵢ，故僅第 i 列異於單位矩陣。
    """
    form = bilinear_form(coxeter)
    size = coxeter.n_gens
    rows = [list(r) for r in RationalMatrix.identity(size).rows]
    for j in range(size):
        rows[i - 1][j] = (Fraction(1) if j == i - 1 else Fraction(0)) - 2 * form[j][i - 1]
    return RationalMatrix(tuple(tuple(r) for r in rows))


@lru_cache(maxsize=1)
def _engine_parameters() -> Dict[str, int]:
    return dict(load_parameters()['engine'])


_GENERATOR_CACHE: Dict[Tuple[Family, int], Tuple[RationalMatrix, ...]] = {}


def _generators(presentation: Presentation) -> Tuple[RationalMatrix, ...]:
    key = (presentation.family, presentation.n_particles)
    if key not in _GENERATOR_CACHE:
        coxeter = build_coxeter_matrix(presentation.family, presentation.n_particles)
        _GENERATOR_CACHE[key] = tuple(
            generator_matrix(coxeter, i) for i in range(1, coxeter.n_gens + 1)
        )
    return _GENERATOR_CACHE[key]


def tits_matrix(word: Word) -> RationalMatrix:
    """
    Tits 幾何表示下的字詞矩陣：依字詞順序相乘 ρ(σ_{w₁})ρ(σ_{w₂})…

    此表示對所有 Coxeter 群皆忠實，矩陣相等即元素相等。

    Raises:
        GeometryMismatchError: 字詞含 t 或 z 字母
    """
    if not word.is_sigma_only():
        raise GeometryMismatchError("tits_matrix requires a sigma-only word")
    gens = _generators(word.presentation)
    result = RationalMatrix.identity(word.presentation.n_gens)
    for letter in word.letters:
        result = result @ gens[letter.index - 1]
    return result


def elements_equal(u: Word, v: Word) -> bool:
    """兩字詞是否代表同一群元素（Tits 矩陣逐元素相等）"""
    if u.presentation.interval() != v.presentation.interval():
        raise PresentationMismatchError(
            f"Cannot compare words of {u.presentation} and {v.presentation}"
        )
    return tits_matrix(u) == tits_matrix(v)


def relation_holds(presentation: Presentation, i: int, j: int) -> bool:
    """
    檢查對稱群的 (i,j) 關係在此群族是否成立

    i == j: σᵢ² = 1；|i−j| == 1: Yang-Baxter；|i−j| >= 2: 局域交換。
    """
    gens = _generators(presentation)
    a, b = gens[i - 1], gens[j - 1]
    ident = RationalMatrix.identity(presentation.n_gens)
    if i == j:
        return a @ a == ident
    if abs(i - j) == 1:
        return a @ b @ a == b @ a @ b
    return a @ b == b @ a


# ==================== Tits 移動閉包 ====================

def _moves(word: Tuple[int, ...], coxeter: CoxeterMatrix):
    """長度不變的基本移動：m=2 的交換與 m=3 的辮移動"""
    for p in range(len(word) - 1):
        a, b = word[p], word[p + 1]
        if a == b:
            continue
        m = coxeter.m(a, b)
        if m == 2:
            yield word[:p] + (b, a) + word[p + 2:]
        elif m == 3 and p + 2 < len(word) and word[p + 2] == a:
            yield word[:p] + (b, a, b) + word[p + 3:]


def _has_adjacent_pair(word: Tuple[int, ...]) -> Optional[int]:
    for p in range(len(word) - 1):
        if word[p] == word[p + 1]:
            return p
    return None


def move_orbit(
    indices: Sequence[int],
    coxeter: CoxeterMatrix,
    orbit_cap: Optional[int] = None,
    stop_on_pair: bool = False,
) -> Set[Tuple[int, ...]]:
    """
    字詞在基本移動下的軌道（有限、長度不變）

    stop_on_pair 為 True 時，一旦找到含相鄰重複字母的字詞即提前返回。
    """
    if orbit_cap is None:
        orbit_cap = _engine_parameters()['orbit_cap']
    start = tuple(indices)
    seen = {start}
    queue = deque([start])
    while queue:
        current = queue.popleft()
        if stop_on_pair and _has_adjacent_pair(current) is not None:
            return seen
        for nxt in _moves(current, coxeter):
            if nxt not in seen:
                seen.add(nxt)
                if len(seen) > orbit_cap:
                    raise OrbitCapExceeded(
                        f"Move orbit exceeds cap {orbit_cap}", orbit_cap=orbit_cap
                    )
                queue.append(nxt)
    return seen


def is_reduced(word: Word, orbit_cap: Optional[int] = None) -> bool:
    """Tits 判準：軌道中沒有任何字詞含相鄰相同字母"""
    coxeter = build_coxeter_matrix(word.presentation.family, word.presentation.n_particles)
    orbit = move_orbit(word.sigma_indices(), coxeter, orbit_cap, stop_on_pair=True)
    return all(_has_adjacent_pair(w) is None for w in orbit)


# ==================== 正規形 ====================

@dataclass(frozen=True)
class ElementHandle:
    """
    繃線群元素的標準形

    Attributes:
        presentation: interval 幾何表示
        normal_word: shortlex 最小的化簡字
        certificate: tits_matrix(normal_word)
    """

    presentation: Presentation
    normal_word: Word
    certificate: RationalMatrix

    @property
    def length(self) -> int:
        return len(self.normal_word)

    def is_identity(self) -> bool:
        return len(self.normal_word) == 0


def _shortlex_key(word: Tuple[int, ...]):
    return (len(word), word)


def normal_form_shortlex(word: Word, orbit_cap: Optional[int] = None) -> ElementHandle:
    """
    shortlex 正規形：反覆於移動軌道中尋找相鄰重複並刪除，
    直到軌道全為化簡字，再取字典序最小者（生成元索引遞增）。
    """
    presentation = word.presentation.interval()
    coxeter = build_coxeter_matrix(presentation.family, presentation.n_particles)
    current = _cancel_adjacent(word.sigma_indices())
    while True:
        orbit = move_orbit(current, coxeter, orbit_cap, stop_on_pair=True)
        reducible = next((w for w in orbit if _has_adjacent_pair(w) is not None), None)
        if reducible is None:
            break
        p = _has_adjacent_pair(reducible)
        current = _cancel_adjacent(reducible[:p] + reducible[p + 2:])

    best = min(orbit, key=_shortlex_key)
    logger.debug(f"{presentation} 正規形 {best}（軌道大小 {len(orbit)}）")
    normal = sigma_word(presentation, best)
    return ElementHandle(presentation, normal, tits_matrix(normal))


def _cancel_adjacent(indices: Sequence[int]) -> Tuple[int, ...]:
    stack: List[int] = []
    for i in indices:
        if stack and stack[-1] == i:
            stack.pop()
        else:
            stack.append(i)
    return tuple(stack)


def element_from_indices(presentation: Presentation, indices: Sequence[int]) -> ElementHandle:
    return normal_form_shortlex(sigma_word(presentation.interval(), indices))


def identity_element(presentation: Presentation) -> ElementHandle:
    return element_from_indices(presentation, ())


def element_multiply(a: ElementHandle, b: ElementHandle) -> ElementHandle:
    if a.presentation != b.presentation:
        raise PresentationMismatchError(
            f"Cannot multiply elements of {a.presentation} and {b.presentation}"
        )
    return normal_form_shortlex(a.normal_word * b.normal_word)


def element_inverse(a: ElementHandle) -> ElementHandle:
    return normal_form_shortlex(a.normal_word.inverse())


# ==================== Cayley 球 ====================

def cayley_ball(
    presentation: Presentation,
    radius: int,
    element_cap: Optional[int] = None,
) -> List[Tuple[ElementHandle, int]]:
    """
    列舉字長 <= radius 的所有相異元素（以矩陣證書去重，依 shortlex 排序）

    逐層 BFS：前一層依 shortlex 排序、生成元遞增附加，
    每個元素首次出現時的字詞即其 shortlex 最小字。

    Raises:
        ElementCapExceeded: 元素數超過上限
    """
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    if element_cap is None:
        element_cap = _engine_parameters()['element_cap']

    presentation = presentation.interval()
    gens = _generators(presentation)
    identity = RationalMatrix.identity(presentation.n_gens)
    seen: Dict[RationalMatrix, Tuple[int, ...]] = {identity: ()}
    layer: List[Tuple[Tuple[int, ...], RationalMatrix]] = [((), identity)]

    for length in range(1, radius + 1):
        next_layer = []
        for indices, matrix in layer:
            for g in range(1, presentation.n_gens + 1):
                if indices and indices[-1] == g:
                    continue
                product = matrix @ gens[g - 1]
                if product in seen:
                    continue
                word = indices + (g,)
                seen[product] = word
                if len(seen) > element_cap:
                    raise ElementCapExceeded(
                        f"Cayley ball of {presentation} exceeds {element_cap} elements",
                        element_cap=element_cap,
                    )
                next_layer.append((word, product))
        if not next_layer:
            break
        layer = sorted(next_layer, key=lambda item: _shortlex_key(item[0]))

    ball = sorted(
        ((word, matrix) for matrix, word in seen.items()),
        key=lambda item: _shortlex_key(item[0]),
    )
    logger.info(f"{presentation} 半徑 {radius} 的 Cayley 球共 {len(ball)} 個元素")
    return [
        (ElementHandle(presentation, sigma_word(presentation, word), matrix), len(word))
        for word, matrix in ball
    ]


def ball_growth(presentation: Presentation, radius: int) -> List[int]:
    """成長序列：各字長的球面元素數"""
    counts = [0] * (radius + 1)
    for _, length in cayley_ball(presentation, radius):
        counts[length] += 1
    return counts
