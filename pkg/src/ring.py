"""
環幾何群模組

環面上的交換群 G(S¹) = Zᴺ ⋊ G（G ∈ {S_N, T_N, F_N, W_N}），元素以
(繞圈向量 t, 繃線元素 g) 的配對正規形儲存。

乘法：(t, g)(t', g') = (t + π(g)·t', gg')，其中 (π(g)·t')[π(g)(j)] = t'[j]。
π(g) 將最終位置映到佔據該位置之粒子的初始位置，因此 g tⱼ g⁻¹ = t_{π(g)(j)}。
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

from src.coxeter import (
    ElementHandle,
    element_from_indices,
    element_inverse,
    element_multiply,
    identity_element,
    normal_form_shortlex,
)
from src.models import WreathElementModel, parse_model
from src.utils.exceptions import (
    GeneratorRangeError,
    GeometryMismatchError,
    PresentationMismatchError,
)
from src.words import (
    Family,
    Permutation,
    Presentation,
    Word,
    parse_word,
    permutation_image,
    sigma,
    t,
)

logger = logging.getLogger(__name__)

DISTINGUISHED = ('sigma_N', 'sigma_0', 'zeta')


@dataclass(frozen=True)
class WreathElement:
    """
    G(S¹) 的元素

    Attributes:
        presentation: ring 幾何表示
        winding: 各粒子（依初始位置編號）的繞圈數 t ∈ Zᴺ
        strand: 繃線部分，interval 群的元素
    """

    presentation: Presentation
    winding: Tuple[int, ...]
    strand: ElementHandle

    def __post_init__(self):
        if not self.presentation.is_ring:
            raise GeometryMismatchError(
                f"WreathElement requires ring geometry, got {self.presentation}"
            )
        object.__setattr__(self, 'winding', tuple(int(x) for x in self.winding))
        if len(self.winding) != self.presentation.n_particles:
            raise ValueError(
                f"Winding vector must have {self.presentation.n_particles} entries, "
                f"got {len(self.winding)}"
            )
        if self.strand.presentation != self.presentation.interval():
            raise PresentationMismatchError(
                f"Strand {self.strand.presentation} does not match {self.presentation}"
            )

    @property
    def permutation(self) -> Permutation:
        return permutation_image(self.strand.normal_word)

    def __mul__(self, other: "WreathElement") -> "WreathElement":
        return wreath_multiply(self, other)

    def to_json(self) -> dict:
        return {'winding': list(self.winding), 'strand': str(self.strand.normal_word)}

    def __str__(self) -> str:
        return str(to_word(self)) or "1"


def act(perm: Permutation, vector: Sequence[int]) -> Tuple[int, ...]:
    """π·t：將 t 的第 j 個座標放到位置 π(j)"""
    result = [0] * len(vector)
    for j, value in enumerate(vector, start=1):
        result[perm(j) - 1] = value
    return tuple(result)


def wreath_identity(presentation: Presentation) -> WreathElement:
    presentation = presentation.ring()
    return WreathElement(
        presentation, (0,) * presentation.n_particles, identity_element(presentation)
    )


def from_strand(presentation: Presentation, strand: Union[ElementHandle, Sequence[int]]) -> WreathElement:
    """(0, g)：純繃線元素"""
    presentation = presentation.ring()
    if not isinstance(strand, ElementHandle):
        strand = element_from_indices(presentation, strand)
    return WreathElement(presentation, (0,) * presentation.n_particles, strand)


def translation(presentation: Presentation, i: int, exponent: int = 1) -> WreathElement:
    """tᵢ^exponent = (exponent·eᵢ, id)"""
    presentation = presentation.ring()
    n = presentation.n_particles
    if not 1 <= i <= n:
        raise GeneratorRangeError(f"t index {i} out of range 1..{n}", index=i)
    winding = [0] * n
    winding[i - 1] = exponent
    return WreathElement(presentation, tuple(winding), identity_element(presentation))


def wreath_multiply(a: WreathElement, b: WreathElement) -> WreathElement:
    """(t, g)(t', g') = (t + π(g)·t', gg')"""
    if a.presentation != b.presentation:
        raise PresentationMismatchError(
            f"Cannot multiply elements of {a.presentation} and {b.presentation}"
        )
    moved = act(a.permutation, b.winding)
    winding = tuple(x + y for x, y in zip(a.winding, moved))
    return WreathElement(a.presentation, winding, element_multiply(a.strand, b.strand))


def wreath_inverse(a: WreathElement) -> WreathElement:
    """(t, g)⁻¹ = (−π(g)⁻¹·t, g⁻¹)"""
    moved = act(a.permutation.inverse(), a.winding)
    return WreathElement(a.presentation, tuple(-x for x in moved), element_inverse(a.strand))


def wreath_power(a: WreathElement, k: int) -> WreathElement:
    base = a if k >= 0 else wreath_inverse(a)
    result = wreath_identity(a.presentation)
    for _ in range(abs(k)):
        result = wreath_multiply(result, base)
    return result


def wreath_conjugate(g: WreathElement, x: WreathElement) -> WreathElement:
    """g x g⁻¹"""
    return wreath_multiply(wreath_multiply(g, x), wreath_inverse(g))


def wreath_equal(a: WreathElement, b: WreathElement) -> bool:
    """繞圈向量相等且繃線元素的矩陣證書相等"""
    if a.presentation != b.presentation:
        raise PresentationMismatchError(
            f"Cannot compare elements of {a.presentation} and {b.presentation}"
        )
    return a.winding == b.winding and a.strand.certificate == b.strand.certificate


# ==================== 特殊元素 ====================

def _ascending_chain(n: int) -> List[int]:
    return list(range(1, n))


def distinguished(presentation: Presentation, which: str) -> WreathElement:
    """
    三個特殊元素

    - sigma_N = (0, σ₁σ₂…σ_{N−1}…σ₂σ₁)：經環背面交換第一與最後一個粒子
    - sigma_0 = t₁ σ_N t₁⁻¹，繞圈向量為 e₁ − e_N
    - zeta = t₁ σ₁…σ_{N−1}：所有粒子循環移位一格

    Raises:
        GeometryMismatchError: 非 ring 幾何
        ValueError: 未知的元素名稱
    """
    if not presentation.is_ring:
        raise GeometryMismatchError(f"Distinguished elements need ring geometry, got {presentation}")
    n = presentation.n_particles
    if which == 'sigma_N':
        chain = _ascending_chain(n)
        return from_strand(presentation, chain + chain[-2::-1])
    if which == 'sigma_0':
        t1 = translation(presentation, 1)
        return wreath_conjugate(t1, distinguished(presentation, 'sigma_N'))
    if which == 'zeta':
        return wreath_multiply(
            translation(presentation, 1), from_strand(presentation, _ascending_chain(n))
        )
    raise ValueError(f"Unknown distinguished element {which!r}; expected one of {DISTINGUISHED}")


def affine_generator(presentation: Presentation, k: int) -> WreathElement:
    """σ_k，k = 0..N−1（σ₀ 為導出元素）"""
    if k == 0:
        return distinguished(presentation, 'sigma_0')
    return from_strand(presentation, [k])


# ==================== 字詞轉換 ====================

def from_word(word: Word) -> WreathElement:
    """
    將 ring 字詞由左至右相乘折疊為配對正規形

    ζ^{±1} 依 ζ = t₁σ₁…σ_{N−1} 展開。
    """
    presentation = word.presentation.ring()
    if word.presentation != presentation:
        raise GeometryMismatchError(f"from_word expects a ring word, got {word.presentation}")
    zeta = distinguished(presentation, 'zeta')

    # σ 連續段先交給繃線引擎一次正規化，再與 t/ζ 字母相乘
    result = wreath_identity(presentation)
    pending: List[int] = []
    for letter in list(word.letters) + [None]:
        if letter is not None and letter.kind == 'sigma':
            pending.append(letter.index)
            continue
        if pending:
            result = wreath_multiply(result, from_strand(presentation, pending))
            pending = []
        if letter is None:
            break
        if letter.kind == 't':
            factor = translation(presentation, letter.index, letter.exponent)
        else:
            factor = zeta if letter.exponent == 1 else wreath_inverse(zeta)
        result = wreath_multiply(result, factor)
    logger.debug(f"{presentation} 字詞 {word} 折疊為 winding={result.winding}")
    return result


def to_word(a: WreathElement) -> Word:
    """標準字詞：先 t 字母（依索引遞增、以指數展開），再繃線正規字"""
    letters = []
    for i, count in enumerate(a.winding, start=1):
        sign = 1 if count > 0 else -1
        letters.extend([t(i, sign)] * abs(count))
    letters.extend(sigma(i) for i in a.strand.normal_word.sigma_indices())
    return Word(a.presentation, tuple(letters))


# ==================== 子群判定 ====================

def is_pure(a: Union[WreathElement, ElementHandle, Word]) -> bool:
    """繃線的置換像是否為單位置換（純子群 = 到 S_N 的核）"""
    if isinstance(a, WreathElement):
        return a.permutation.is_identity()
    if isinstance(a, ElementHandle):
        return permutation_image(a.normal_word).is_identity()
    if a.presentation.is_ring:
        return from_word(a).permutation.is_identity()
    return permutation_image(a).is_identity()


def total_winding(a: WreathElement) -> int:
    """到 Z_ζ 的商映射：tᵢ ↦ 1，σᵢ ↦ 0"""
    return sum(a.winding)


def in_affine_subgroup(a: WreathElement) -> bool:
    """總繞圈數為零即屬於仿射（扭曲）子群"""
    return total_winding(a) == 0


def zeta_power(a: WreathElement) -> Optional[int]:
    """若 a = ζᵏ 則回傳 k，否則回傳 None"""
    k = total_winding(a)
    candidate = wreath_power(distinguished(a.presentation, 'zeta'), k)
    return k if wreath_equal(candidate, a) else None


def sector_quotient(k: int, n: int) -> int:
    """ζᵏ 在 Z_ζ / NZ_ζ ≅ Z/N 中的像"""
    return k % n


# ==================== 仿射表示驗證 ====================

@dataclass(frozen=True)
class RelationCheck:
    relation: str
    holds: bool
    lhs: str
    rhs: str


@dataclass
class AffineReport:
    """
    仿射對稱群定義關係的驗證報告

    Attributes:
        n_particles: 粒子數 N
        family: 群族
        checks: 每條關係的檢查結果與見證字詞
    """

    n_particles: int
    family: Family
    checks: List[RelationCheck] = field(default_factory=list)

    @property
    def all_hold(self) -> bool:
        return all(c.holds for c in self.checks)

    @property
    def failures(self) -> List[RelationCheck]:
        return [c for c in self.checks if not c.holds]

    def to_dict(self) -> dict:
        return {
            'n': self.n_particles,
            'family': self.family.value,
            'all_hold': self.all_hold,
            'relations': [
                {'relation': c.relation, 'holds': c.holds, 'lhs': c.lhs, 'rhs': c.rhs}
                for c in self.checks
            ],
        }


def _record(report: AffineReport, relation: str, lhs: WreathElement, rhs: WreathElement) -> None:
    holds = wreath_equal(lhs, rhs)
    report.checks.append(RelationCheck(relation, holds, str(lhs), str(rhs)))
    if not holds:
        logger.debug(f"{report.family.value}_{report.n_particles}(S1) 關係不成立: {relation}")


def verify_affine_presentation(n: int, family=Family.S) -> AffineReport:
    """
    以 wreath 運算檢查 {σ₀,…,σ_{N−1}} 與 ζ 的關係

    檢查項目：σₖ² = 1；循環相鄰對的 Yang-Baxter；循環遠距對的交換；
    ζσᵢζ⁻¹ = σ_{i+1 mod N}；ζᴺ = t₁…t_N；ζᴺ 與每個 σₖ 交換。
    族 S 全部成立；T/F/W 回報被打破的關係。

    Raises:
        GeneratorRangeError: N < 3
    """
    if n < 3:
        raise GeneratorRangeError(f"Affine presentation check needs N >= 3, got {n}", n=n)
    presentation = Presentation(family, n).ring()
    report = AffineReport(n, presentation.family)
    gens = [affine_generator(presentation, k) for k in range(n)]
    identity = wreath_identity(presentation)

    for k in range(n):
        _record(report, f"s{k}^2 = 1", wreath_multiply(gens[k], gens[k]), identity)

    for k in range(n):
        for l in range(k + 1, n):
            a, b = gens[k], gens[l]
            if (l - k) % n in (1, n - 1):
                _record(report, f"s{k} s{l} s{k} = s{l} s{k} s{l}", a * b * a, b * a * b)
            else:
                _record(report, f"s{k} s{l} = s{l} s{k}", a * b, b * a)

    zeta = distinguished(presentation, 'zeta')
    for i in range(n):
        _record(
            report,
            f"z s{i} z^-1 = s{(i + 1) % n}",
            wreath_conjugate(zeta, gens[i]),
            gens[(i + 1) % n],
        )

    zeta_n = wreath_power(zeta, n)
    full_loop = WreathElement(presentation, (1,) * n, identity_element(presentation))
    _record(report, f"z^{n} = t1...t{n}", zeta_n, full_loop)
    for k in range(n):
        _record(report, f"z^{n} s{k} = s{k} z^{n}", zeta_n * gens[k], gens[k] * zeta_n)

    logger.info(
        f"{presentation} 仿射關係檢查完成：{len(report.checks)} 條，"
        f"{len(report.failures)} 條不成立"
    )
    return report


def wreath_from_json(data: dict, presentation: Presentation) -> WreathElement:
    """由 {"winding": [...], "strand": "<DSL>"} 建立元素"""
    model = parse_model(WreathElementModel, data)
    strand = parse_word(model.strand, presentation.interval())
    return WreathElement(presentation.ring(), tuple(model.winding), normal_form_shortlex(strand))
