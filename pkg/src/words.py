"""
字詞與表示模組

提供交換統計群的表示 (Presentation) 與字詞 DSL，實現：
- 四種 Coxeter 型群族 S / T / F / W 與兩種幾何 interval / ring
- 字詞解析（附位元組位移的錯誤訊息）與序列化
- 自由約化（σᵢσᵢ 消去、t/ζ 逆元消去）
- 到對稱群 S_N 的置換像同態

置換合成慣例：π(uv) = π(u)∘π(v)，其中 (f∘g)(x) = f(g(x))。
"""

import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Tuple

from sympy.combinatorics import Permutation as SymPermutation

from src.utils.exceptions import (
    GeneratorRangeError,
    GeometryMismatchError,
    PresentationMismatchError,
    UnsupportedFamilyError,
    WordSyntaxError,
)

logger = logging.getLogger(__name__)


class Family(str, Enum):
    """群族：對稱群、traid、fraid、自由 Coxeter 群"""

    S = "S"
    T = "T"
    F = "F"
    W = "W"


class Geometry(str, Enum):
    """粒子所在的一維流形類型"""

    INTERVAL = "interval"
    RING = "ring"


@dataclass(frozen=True)
class Presentation:
    """
    群表示

    Attributes:
        family: 群族 S/T/F/W
        n_particles: 粒子數 N (>= 2)
        geometry: interval 或 ring
    """

    family: Family
    n_particles: int
    geometry: Geometry = Geometry.INTERVAL

    def __post_init__(self):
        if not isinstance(self.family, Family):
            object.__setattr__(self, 'family', _coerce_family(self.family))
        if not isinstance(self.geometry, Geometry):
            object.__setattr__(self, 'geometry', Geometry(self.geometry))
        if self.n_particles < 2:
            raise GeneratorRangeError(f"N must be >= 2, got {self.n_particles}")

    @property
    def n_gens(self) -> int:
        """σ 生成元個數 N−1"""
        return self.n_particles - 1

    @property
    def is_ring(self) -> bool:
        return self.geometry is Geometry.RING

    def interval(self) -> "Presentation":
        """同群族、同 N 的 interval 表示（ring 元素的繃線部分所在）"""
        return Presentation(self.family, self.n_particles, Geometry.INTERVAL)

    def ring(self) -> "Presentation":
        return Presentation(self.family, self.n_particles, Geometry.RING)

    def __str__(self) -> str:
        suffix = "(S1)" if self.is_ring else ""
        return f"{self.family.value}_{self.n_particles}{suffix}"


def _coerce_family(value) -> Family:
    text = str(value).upper()
    if text == "B":
        raise UnsupportedFamilyError(
            "Braid group B_N is not Coxeter-type (sigma^2 != 1); use S, T, F or W",
            family="B",
        )
    try:
        return Family(text)
    except ValueError:
        raise UnsupportedFamilyError(f"Unknown family {value!r}", family=str(value))


def parse_presentation(family: str, n: int, geometry: str = "interval") -> Presentation:
    """由字串參數建立表示；族 B 會被拒絕"""
    return Presentation(_coerce_family(family), int(n), Geometry(geometry))


@dataclass(frozen=True)
class GeneratorSymbol:
    """
    帶符號的生成元字母

    kind 為 'sigma'、't' 或 'zeta'；σ 字母為對合，指數恆正規化為 +1。
    """

    kind: str
    index: int = 0
    exponent: int = 1

    def __post_init__(self):
        if self.kind not in ('sigma', 't', 'zeta'):
            raise ValueError(f"Unknown generator kind {self.kind!r}")
        if self.exponent not in (1, -1):
            raise ValueError(f"Exponent must be +1 or -1, got {self.exponent}")
        if self.kind == 'sigma' and self.exponent != 1:
            object.__setattr__(self, 'exponent', 1)
        if self.kind == 'zeta' and self.index != 0:
            object.__setattr__(self, 'index', 0)

    def inverse(self) -> "GeneratorSymbol":
        if self.kind == 'sigma':
            return self
        return GeneratorSymbol(self.kind, self.index, -self.exponent)

    def to_text(self) -> str:
        prefix = {'sigma': 's', 't': 't', 'zeta': 'z'}[self.kind]
        body = prefix if self.kind == 'zeta' else f"{prefix}{self.index}"
        return body if self.exponent == 1 else f"{body}^-1"


def sigma(i: int) -> GeneratorSymbol:
    return GeneratorSymbol('sigma', i)


def t(i: int, exponent: int = 1) -> GeneratorSymbol:
    return GeneratorSymbol('t', i, exponent)


def zeta(exponent: int = 1) -> GeneratorSymbol:
    return GeneratorSymbol('zeta', 0, exponent)


@dataclass(frozen=True)
class Word:
    """
    表示中的字詞（空字詞為單位元）

    Attributes:
        presentation: 所屬表示
        letters: 由左至右的字母序列
    """

    presentation: Presentation
    letters: Tuple[GeneratorSymbol, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, 'letters', tuple(self.letters))
        for letter in self.letters:
            _check_letter(letter, self.presentation)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        if other.presentation != self.presentation:
            raise PresentationMismatchError(
                f"Cannot concatenate words of {self.presentation} and {other.presentation}"
            )
        return Word(self.presentation, self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word(self.presentation, tuple(l.inverse() for l in reversed(self.letters)))

    def sigma_indices(self) -> Tuple[int, ...]:
        """σ-only 字詞的索引序列"""
        if any(l.kind != 'sigma' for l in self.letters):
            raise GeometryMismatchError("Word contains ring letters (t or z)")
        return tuple(l.index for l in self.letters)

    def is_sigma_only(self) -> bool:
        return all(l.kind == 'sigma' for l in self.letters)

    def __str__(self) -> str:
        return word_to_text(self)


def _check_letter(letter: GeneratorSymbol, presentation: Presentation) -> None:
    n = presentation.n_particles
    if letter.kind == 'sigma':
        if not 1 <= letter.index <= n - 1:
            raise GeneratorRangeError(
                f"sigma index {letter.index} out of range 1..{n - 1}",
                index=letter.index,
            )
        return
    if not presentation.is_ring:
        raise GeometryMismatchError(
            f"Letter {letter.to_text()} is only valid under ring geometry"
        )
    if letter.kind == 't' and not 1 <= letter.index <= n:
        raise GeneratorRangeError(
            f"t index {letter.index} out of range 1..{n}", index=letter.index
        )


def sigma_word(presentation: Presentation, indices: Iterable[int]) -> Word:
    """由 σ 索引序列建立字詞"""
    return Word(presentation, tuple(sigma(i) for i in indices))


# ==================== DSL ====================

_TOKEN_RE = re.compile(rb'([stz])(\d+)?(?:\^(-?\d+))?')

# 單一指數的絕對值上限
MAX_EXPONENT = 10_000


def parse_word(text: str, presentation: Presentation) -> Word:
    """
    解析字詞 DSL

    文法：word := item* ; item := gen exp? ; gen := "s" INT | "t" INT | "z" ;
    exp := "^" ("-"? INT)。空白不敏感，指數展開為重複字母（|exp| <= MAX_EXPONENT）。

    Raises:
        WordSyntaxError: 文法錯誤（附位元組位移）
        GeneratorRangeError: 索引超出範圍
        GeometryMismatchError: interval 幾何使用 t/z 字母
    """
    data = text.encode("utf-8")
    pos = 0
    letters: List[GeneratorSymbol] = []
    while pos < len(data):
        if data[pos:pos + 1].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(data, pos)
        if m is None or m.end() == pos:
            raise WordSyntaxError(f"Unexpected character {data[pos:pos + 1]!r}", pos)
        kind_char, index_text, exp_text = m.group(1), m.group(2), m.group(3)
        if kind_char == b'z':
            if index_text is not None:
                raise WordSyntaxError("Generator z takes no index", m.start(2))
            index = 0
        else:
            if index_text is None:
                raise WordSyntaxError(f"Missing index after {kind_char.decode()!r}", m.end(1))
            index = int(index_text)
            if index == 0:
                raise WordSyntaxError("Generator index must be positive", m.start(2))
        exponent = int(exp_text) if exp_text is not None else 1
        if exponent == 0:
            raise WordSyntaxError("Exponent must be nonzero", m.start(3))
        if abs(exponent) > MAX_EXPONENT:
            raise WordSyntaxError(f"Exponent magnitude exceeds {MAX_EXPONENT}", m.start(3))
        if m.end() < len(data) and data[m.end():m.end() + 1] == b'^':
            raise WordSyntaxError("Malformed exponent", m.end())

        kind = {b's': 'sigma', b't': 't', b'z': 'zeta'}[kind_char]
        sign = 1 if exponent > 0 else -1
        letter = GeneratorSymbol(kind, index, sign)
        _check_letter(letter, presentation)
        letters.extend([letter] * abs(exponent))
        pos = m.end()

    return Word(presentation, tuple(letters))


def word_to_text(word: Word) -> str:
    """字詞序列化為 DSL（每個字母一個 token，逆元寫作 ^-1）"""
    return " ".join(letter.to_text() for letter in word.letters)


# ==================== 約化 ====================

def free_reduce(word: Word) -> Word:
    """
    自由約化：反覆刪除相鄰的 σᵢσᵢ、tᵢ⁺tᵢ⁻、ζ⁺ζ⁻（及反序）

    只用到 σ 的對合關係與逆元消去，對四個群族皆成立。
    """
    stack: List[GeneratorSymbol] = []
    for letter in word.letters:
        if stack and stack[-1] == letter.inverse():
            stack.pop()
        else:
            stack.append(letter)
    return Word(word.presentation, tuple(stack))


# ==================== 置換像 ====================

@dataclass(frozen=True)
class Permutation:
    """
    {1..N} 上的置換（以 sympy 置換運算）

    images[j-1] 為 j 的像；合成 (f∘g)(x) = f(g(x))。
    """

    images: Tuple[int, ...]

    @classmethod
    def from_sympy(cls, perm: SymPermutation) -> "Permutation":
        return cls(tuple(i + 1 for i in perm.array_form))

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def transposition(cls, n: int, i: int, j: int) -> "Permutation":
        return cls.from_sympy(SymPermutation([[i - 1, j - 1]], size=n))

    def to_sympy(self) -> SymPermutation:
        return SymPermutation([i - 1 for i in self.images])

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, x: int) -> int:
        return self.images[x - 1]

    def compose(self, other: "Permutation") -> "Permutation":
        """self∘other（sympy 的 p*q 為先 p 後 q）"""
        return Permutation.from_sympy(other.to_sympy() * self.to_sympy())

    def inverse(self) -> "Permutation":
        return Permutation.from_sympy(~self.to_sympy())

    def is_identity(self) -> bool:
        return all(image == k for k, image in enumerate(self.images, start=1))

    def cycle_notation(self) -> str:
        """例如 (1 3)；單位元為 ()"""
        cycles = self.to_sympy().cyclic_form
        return "".join(
            "(" + " ".join(str(x + 1) for x in cycle) + ")" for cycle in cycles
        ) or "()"


def permutation_image(word: Word) -> Permutation:
    """
    σ 部分的置換像 π：σᵢ ↦ (i i+1)，tᵢ 與 ζ 字母 ↦ 單位置換

    π(uv) = π(u)∘π(v)。ζ 在 S_N 中的真實像需經 ring.from_word 展開其繃線部分。
    """
    n = word.presentation.n_particles
    result = SymPermutation(list(range(n)))
    for letter in word.letters:
        if letter.kind == 'sigma':
            # 右乘 (i i+1) 等於先作用該對換
            result = SymPermutation([[letter.index - 1, letter.index]], size=n) * result
    return Permutation.from_sympy(result)
