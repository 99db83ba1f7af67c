"""
阿貝爾化模組

以整數 Smith 正規形計算各表示的阿貝爾化，並列舉阿貝爾特徵標
（每個生成元對應一個相位：精確單位根加上連續 U(1) 參數）。

ζ 不列入生成元；其特徵值由 ζ = t₁σ₁…σ_{N−1} 導出。
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple, Union

from sympy.polys.domains import ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import smith_normal_decomp

from src.models import CharacterModel, PhaseModel, parse_model
from src.ring import WreathElement
from src.utils.exceptions import PresentationMismatchError, ValidationError
from src.words import Family, Presentation, Word, sigma, t

logger = logging.getLogger(__name__)

IntMatrix = List[List[int]]


@dataclass(frozen=True)
class RelationMatrix:
    """
    阿貝爾化關係矩陣

    Attributes:
        generators: 欄位對應的生成元名稱（s1…, t1…）
        rows: 每條關係的指數和
        labels: 每列對應的關係描述
    """

    generators: Tuple[str, ...]
    rows: Tuple[Tuple[int, ...], ...]
    labels: Tuple[str, ...] = ()

    def as_lists(self) -> IntMatrix:
        return [list(r) for r in self.rows]


def generator_names(presentation: Presentation) -> Tuple[str, ...]:
    names = [f"s{i}" for i in range(1, presentation.n_particles)]
    if presentation.is_ring:
        names += [f"t{i}" for i in range(1, presentation.n_particles + 1)]
    return tuple(names)


def relation_matrix(presentation: Presentation) -> RelationMatrix:
    """
    關係矩陣的列：

    - 每個 σᵢ² 貢獻 2eᵢ（所有群族）
    - Yang-Baxter 關係（S、F）貢獻 eᵢ − e_{i+1}
    - 交換關係阿貝爾化後為零列，略去
    - ring 幾何的 tᵢσᵢ = σᵢt_{i+1} 貢獻 e_{tᵢ} − e_{t_{i+1}}
    """
    names = generator_names(presentation)
    index = {name: k for k, name in enumerate(names)}
    n = presentation.n_particles
    rows: List[Tuple[int, ...]] = []
    labels: List[str] = []

    def add_row(entries: Dict[str, int], label: str) -> None:
        row = [0] * len(names)
        for name, value in entries.items():
            row[index[name]] += value
        rows.append(tuple(row))
        labels.append(label)

    for i in range(1, n):
        add_row({f"s{i}": 2}, f"s{i}^2 = 1")
    if presentation.family in (Family.S, Family.F):
        for i in range(1, n - 1):
            add_row({f"s{i}": 1, f"s{i + 1}": -1}, f"s{i} s{i + 1} s{i} = s{i + 1} s{i} s{i + 1}")
    if presentation.is_ring:
        for i in range(1, n):
            add_row({f"t{i}": 1, f"t{i + 1}": -1}, f"t{i} s{i} = s{i} t{i + 1}")

    return RelationMatrix(names, tuple(rows), tuple(labels))


def defining_relators(presentation: Presentation) -> List[Word]:
    """表示的定義關係子（relator = 1）"""
    n = presentation.n_particles
    fam = presentation.family
    relators: List[Word] = []

    def word(*letters) -> Word:
        return Word(presentation, tuple(letters))

    for i in range(1, n):
        relators.append(word(sigma(i), sigma(i)))
    for i in range(1, n):
        for j in range(i + 1, n):
            if j == i + 1 and fam in (Family.S, Family.F):
                relators.append(word(*[sigma(i), sigma(j)] * 3))
            elif j > i + 1 and fam in (Family.S, Family.T):
                relators.append(word(*[sigma(i), sigma(j)] * 2))

    if presentation.is_ring:
        for i in range(1, n):
            relators.append(word(t(i), sigma(i), t(i + 1, -1), sigma(i)))
            for j in range(1, n + 1):
                if j not in (i, i + 1):
                    relators.append(word(t(j), sigma(i), t(j, -1), sigma(i)))
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                relators.append(word(t(i), t(j), t(i, -1), t(j, -1)))
    return relators


# ==================== Smith 正規形 ====================

@dataclass(frozen=True)
class SmithResult:
    """
    Smith 正規形結果，滿足 U·m·V = D

    Attributes:
        diagonal: D 的對角元素 d₁ | d₂ | …（長度為 min(列數, 欄數)）
        left: 么模矩陣 U
        right: 么模矩陣 V
        normal: 對角矩陣 D
    """

    diagonal: Tuple[int, ...]
    left: Tuple[Tuple[int, ...], ...]
    right: Tuple[Tuple[int, ...], ...]
    normal: Tuple[Tuple[int, ...], ...]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)


def _freeze(m: Sequence[Sequence]) -> Tuple[Tuple[int, ...], ...]:
    return tuple(tuple(int(x) for x in row) for row in m)


def integer_matmul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> IntMatrix:
    cols = list(zip(*b)) if b else []
    if not cols:
        return [[] for _ in a]
    return [[sum(x * y for x, y in zip(row, col)) for col in cols] for row in a]


def smith_normal_form(matrix: Sequence[Sequence[int]]) -> SmithResult:
    """
    精確整數 Smith 正規形（sympy 的 smith_normal_decomp，於 ZZ 上運算）

    回傳的 U、V 為么模矩陣，U·m·V = D，對角元素非負且構成整除鏈。
    """
    rows = [[int(x) for x in row] for row in matrix]
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    m = DomainMatrix([[ZZ(x) for x in row] for row in rows], (n_rows, n_cols), ZZ)
    normal, left, right = smith_normal_decomp(m)
    normal = _freeze(normal.to_list())
    diagonal = tuple(normal[k][k] for k in range(min(n_rows, n_cols)))
    return SmithResult(diagonal, _freeze(left.to_list()), _freeze(right.to_list()), normal)


# ==================== 阿貝爾化 ====================

@dataclass(frozen=True)
class AbelianInvariants:
    """G_ab ≅ Z^r ⊕ ⊕ Z/dᵢ"""

    free_rank: int
    torsion: Tuple[int, ...]

    def __str__(self) -> str:
        parts = []
        if self.free_rank:
            parts.append("Z" if self.free_rank == 1 else f"Z^{self.free_rank}")
        for d, group in itertools.groupby(self.torsion):
            count = len(list(group))
            parts.append(f"Z{d}" if count == 1 else f"Z{d}^{count}")
        return " + ".join(parts) or "0"

    def to_dict(self) -> dict:
        return {'group': str(self), 'free_rank': self.free_rank, 'torsion': list(self.torsion)}


def abelianization(presentation: Presentation) -> AbelianInvariants:
    """關係矩陣的餘核：自由秩 = 生成元數 − 秩，撓部 = 非平凡不變因子"""
    relations = relation_matrix(presentation)
    snf = smith_normal_form(relations.as_lists())
    free_rank = len(relations.generators) - snf.rank
    torsion = tuple(d for d in snf.diagonal if d >= 2)
    invariants = AbelianInvariants(free_rank, torsion)
    logger.info(f"{presentation} 阿貝爾化為 {invariants}")
    return invariants


# ==================== 特徵標 ====================

@dataclass(frozen=True)
class Phase:
    """
    精確相位 exp(2πi·(root + Σ coeff·θ_k))

    Attributes:
        root: [0, 1) 中的有理數，單位根部分
        free: (參數索引, 整數係數) 的序列
    """

    root: Fraction = Fraction(0)
    free: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'root', Fraction(self.root) % 1)
        object.__setattr__(self, 'free', tuple(sorted((k, c) for k, c in self.free if c)))

    def __add__(self, other: "Phase") -> "Phase":
        coeffs: Dict[int, int] = dict(self.free)
        for k, c in other.free:
            coeffs[k] = coeffs.get(k, 0) + c
        return Phase(self.root + other.root, tuple(coeffs.items()))

    def scale(self, factor: int) -> "Phase":
        return Phase(self.root * factor, tuple((k, c * factor) for k, c in self.free))

    def is_trivial(self) -> bool:
        return self.root == 0 and not self.free

    def to_json(self) -> dict:
        root = [self.root.numerator, self.root.denominator]
        if not self.free:
            return {'root_of_unity': root}
        if self.root == 0 and len(self.free) == 1 and self.free[0][1] == 1:
            return {'free_param': self.free[0][0]}
        return {'root_of_unity': root, 'free_params': {str(k): c for k, c in self.free}}


@dataclass(frozen=True)
class Character:
    """
    阿貝爾特徵標：生成元 ↦ 相位

    Attributes:
        presentation: 所屬表示
        phases: (生成元名稱, 相位) 序列，依生成元順序
        free_rank: 連續 U(1) 參數個數
    """

    presentation: Presentation
    phases: Tuple[Tuple[str, Phase], ...]
    free_rank: int = 0

    def phase_of(self, name: str) -> Phase:
        return dict(self.phases)[name]

    def to_json(self) -> List[dict]:
        return [{'generator': name, 'phase': phase.to_json()} for name, phase in self.phases]


@dataclass
class CharacterTable:
    """enumerate_characters 的結果"""

    presentation: Presentation
    invariants: AbelianInvariants
    characters: List[Character] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            'group': str(self.invariants),
            'free_rank': self.invariants.free_rank,
            'characters': [c.to_json() for c in self.characters],
        }


def enumerate_characters(presentation: Presentation) -> CharacterTable:
    """
    列舉撓部的所有特徵標，並以自由參數表示連續相位

    設 U·R·V = D，令生成元相位 c = V·c'，則條件 R·c ≡ 0 (mod 1) 化為
    dⱼ·c'ⱼ ≡ 0：dⱼ >= 1 時 c'ⱼ = k/dⱼ，dⱼ = 0 或超出列數的欄為自由參數。
    """
    relations = relation_matrix(presentation)
    snf = smith_normal_form(relations.as_lists())
    n_gens = len(relations.generators)
    v = [list(row) for row in snf.right]
    diag = list(snf.diagonal) + [0] * (n_gens - len(snf.diagonal))

    free_cols = [j for j in range(n_gens) if diag[j] == 0]
    for j in free_cols:
        first = next((v[g][j] for g in range(n_gens) if v[g][j] != 0), 0)
        if first < 0:
            for g in range(n_gens):
                v[g][j] = -v[g][j]
    torsion_cols = [j for j in range(n_gens) if diag[j] >= 2]

    # 扣除自由欄的倍數，使每個自由參數在其第一個係數為 1 的生成元上沒有單位根部分
    for j in free_cols:
        pivot = next((g for g in range(n_gens) if v[g][j] == 1), None)
        if pivot is None:
            continue
        for tc in torsion_cols:
            c = v[pivot][tc]
            if c:
                for g in range(n_gens):
                    v[g][tc] -= c * v[g][j]

    free_phase = [
        Phase(0, tuple((param, v[g][j]) for param, j in enumerate(free_cols)))
        for g in range(n_gens)
    ]

    characters = []
    for ks in itertools.product(*(range(diag[j]) for j in torsion_cols)):
        phases = []
        for g, name in enumerate(relations.generators):
            root = sum(
                (Fraction(k, diag[j]) * v[g][j] for k, j in zip(ks, torsion_cols)),
                Fraction(0),
            )
            phases.append((name, Phase(root) + free_phase[g]))
        characters.append(Character(presentation, tuple(phases), len(free_cols)))

    invariants = AbelianInvariants(len(free_cols), tuple(diag[j] for j in torsion_cols))
    logger.info(f"{presentation} 共 {len(characters)} 個撓特徵標，{len(free_cols)} 個連續參數")
    return CharacterTable(presentation, invariants, characters)


def character_value(character: Character, element: Union[Word, WreathElement]) -> Phase:
    """
    特徵標在字詞或 wreath 元素上的值

    ζ^{±1} 的值取 t₁ 與所有 σᵢ 相位之和的 ±1 倍。
    """
    if isinstance(element, WreathElement):
        if element.presentation != character.presentation:
            raise PresentationMismatchError(
                f"Character of {character.presentation} applied to {element.presentation}"
            )
        total = Phase()
        for i, count in enumerate(element.winding, start=1):
            total = total + character.phase_of(f"t{i}").scale(count)
        for i in element.strand.normal_word.sigma_indices():
            total = total + character.phase_of(f"s{i}")
        return total

    if element.presentation != character.presentation:
        raise PresentationMismatchError(
            f"Character of {character.presentation} applied to {element.presentation}"
        )
    n = character.presentation.n_particles
    total = Phase()
    for letter in element.letters:
        if letter.kind == 'sigma':
            total = total + character.phase_of(f"s{letter.index}")
        elif letter.kind == 't':
            total = total + character.phase_of(f"t{letter.index}").scale(letter.exponent)
        else:
            zeta_phase = character.phase_of("t1")
            for i in range(1, n):
                zeta_phase = zeta_phase + character.phase_of(f"s{i}")
            total = total + zeta_phase.scale(letter.exponent)
    return total


def phase_from_json(data: dict) -> Phase:
    """由 {"root_of_unity": [p, q]} / {"free_param": k} / 混合形式建立相位"""
    model = parse_model(PhaseModel, data)
    root = Fraction(0)
    if model.root_of_unity is not None:
        numerator, denominator = model.root_of_unity
        if denominator <= 0:
            raise ValidationError(f"Root of unity needs a positive order, got {denominator}")
        root = Fraction(numerator, denominator)
    free: Dict[int, int] = {}
    if model.free_param is not None:
        free[model.free_param] = 1
    for key, coeff in (model.free_params or {}).items():
        if not key.isdigit():
            raise ValidationError(f"Free parameter index must be a non-negative integer, got {key!r}")
        free[int(key)] = free.get(int(key), 0) + coeff
    return Phase(root, tuple(free.items()))


def character_from_json(entries: Sequence[dict], presentation: Presentation) -> Character:
    """
    由 Character.to_json() 的輸出讀回特徵標

    Raises:
        ValidationError: 條目格式錯誤、生成元未知或缺漏
    """
    names = generator_names(presentation)
    phases: Dict[str, Phase] = {}
    for entry in entries:
        model = parse_model(CharacterModel, entry)
        if model.generator not in names:
            raise ValidationError(f"Unknown generator {model.generator!r} for {presentation}")
        phases[model.generator] = phase_from_json(model.phase.model_dump(exclude_none=True))
    missing = [name for name in names if name not in phases]
    if missing:
        raise ValidationError(f"Character is missing generators {missing}", missing=missing)
    params = {k for phase in phases.values() for k, _ in phase.free}
    return Character(presentation, tuple((name, phases[name]) for name in names), len(params))
