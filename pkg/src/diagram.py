"""
繃線圖繪製模組

以 ASCII 或 SVG 繪製字詞或元素的繃線圖（由下往上閱讀，每個字母一個時間切片）。
交叉為單純的橫越（不分上下），ring 幾何在兩側繪製虛線切口；
tᵢ 切片的繃線由左切口離開、由右切口重新進入（t⁻¹ 反之）。

輸出完全決定性：相同輸入產生位元組相同的文件。
"""

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

from src.coxeter import ElementHandle
from src.ring import WreathElement, to_word
from src.utils import load_parameters
from src.utils.exceptions import DiagramTooLargeError, ValidationError
from src.words import Presentation, Word, sigma, t

STYLES = ('ascii', 'svg')

_SLICE_RE = re.compile(
    r'<g class="slice" data-kind="(sigma|t|id)" data-slot="(\d+)" data-exp="(-?\d+)">(.*?)</g>',
    re.S,
)
_LINE_RE = re.compile(r'<line x1="(-?\d+)" y1="(-?\d+)" x2="(-?\d+)" y2="(-?\d+)"/>')


@dataclass(frozen=True)
class DiagramSpec:
    """
    繪圖規格

    Attributes:
        element: 字詞、interval 元素或 wreath 元素
        style: 'ascii' 或 'svg'
        ring_cut: 是否繪製切口虛線（僅 ring 幾何）
    """

    element: Union[Word, ElementHandle, WreathElement]
    style: str = 'ascii'
    ring_cut: bool = True

    def word(self) -> Word:
        if isinstance(self.element, WreathElement):
            return to_word(self.element)
        if isinstance(self.element, ElementHandle):
            return self.element.normal_word
        return self.element


@dataclass(frozen=True)
class Slice:
    kind: str
    slot: int
    exponent: int


def expand_slices(word: Word) -> List[Slice]:
    """字詞展開為時間切片；ζ^{±1} 依 t₁σ₁…σ_{N−1} 展開"""
    n = word.presentation.n_particles
    slices: List[Slice] = []
    for letter in word.letters:
        if letter.kind == 'sigma':
            slices.append(Slice('sigma', letter.index, 1))
        elif letter.kind == 't':
            slices.append(Slice('t', letter.index, letter.exponent))
        elif letter.exponent == 1:
            slices.append(Slice('t', 1, 1))
            slices.extend(Slice('sigma', i, 1) for i in range(1, n))
        else:
            slices.extend(Slice('sigma', i, 1) for i in range(n - 1, 0, -1))
            slices.append(Slice('t', 1, -1))
    return slices


def _line(x1: int, y1: int, x2: int, y2: int) -> str:
    return f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>'


class DiagramRenderer:
    """
    繃線圖繪製器

    職責：
    - 讀取 render 區段參數（間距、切片高度、邊界、最大字母數）
    - 產生 ASCII 或 SVG 文件

    Examples:
        >>> renderer = DiagramRenderer()
        >>> doc = renderer.render(DiagramSpec(word, style='svg'))
    """

    def __init__(self, config_path: Optional[Union[str, Path]] = None):
        self.logger = logging.getLogger(__name__)
        params = load_parameters(config_path)['render']
        self.max_letters = int(params['max_letters'])
        self.spacing = int(params['strand_spacing'])
        self.slice_height = int(params['slice_height'])
        self.margin = int(params['margin'])
        self.cut_gap = int(params['cut_gap'])

    def render(self, spec: DiagramSpec) -> str:
        """
        繪製繃線圖

        Raises:
            DiagramTooLargeError: 切片數超過 max_letters
            ValueError: 未知的繪圖風格
        """
        if spec.style not in STYLES:
            raise ValueError(f"Unknown style {spec.style!r}; expected one of {STYLES}")
        word = spec.word()
        slices = expand_slices(word)
        if len(slices) > self.max_letters:
            raise DiagramTooLargeError(
                f"Diagram needs {len(slices)} slices, limit is {self.max_letters}",
                slices=len(slices),
                max_letters=self.max_letters,
            )
        presentation = word.presentation
        if spec.style == 'ascii':
            document = self._ascii(presentation, slices, spec.ring_cut)
        else:
            document = self._svg(presentation, slices, spec.ring_cut)
        self.logger.debug(f"{presentation} 繃線圖 ({spec.style}) 共 {len(slices)} 個切片")
        return document

    def _ascii(self, presentation: Presentation, slices: List[Slice], cut: bool) -> str:
        n = presentation.n_particles
        straight = [' '] * (2 * n - 1)
        for k in range(n):
            straight[2 * k] = '|'

        def frame(chars: List[str], arrow: Optional[str] = None) -> str:
            body = "".join(chars)
            if not presentation.is_ring:
                return body
            edge = arrow or (':' if cut else ' ')
            return f"{edge} {body} {edge}"

        rows = [frame(straight)]
        for s in reversed(slices):
            chars = list(straight)
            if s.kind == 'sigma':
                chars[2 * (s.slot - 1)] = ' '
                chars[2 * s.slot] = ' '
                chars[2 * s.slot - 1] = 'X'
                rows.append(frame(chars))
            else:
                chars[2 * (s.slot - 1)] = '='
                rows.append(frame(chars, '<' if s.exponent == 1 else '>'))
        rows.append(frame(straight))
        return "\n".join(rows) + "\n"

    def _svg(self, presentation: Presentation, slices: List[Slice], cut: bool) -> str:
        n = presentation.n_particles
        ring = presentation.is_ring
        inset = self.cut_gap if ring else 0
        height_rows = max(len(slices), 1)
        width = 2 * self.margin + 2 * inset + (n - 1) * self.spacing
        height = 2 * self.margin + height_rows * self.slice_height
        left_cut, right_cut = self.margin, width - self.margin

        def x(k: int) -> int:
            return self.margin + inset + (k - 1) * self.spacing

        out = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        ]
        if ring and cut:
            out.append('<g class="cut" stroke="gray" stroke-width="1" stroke-dasharray="4 4">')
            for cx in (left_cut, right_cut):
                out.append(_line(cx, self.margin, cx, height - self.margin))
            out.append('</g>')

        out.append('<g class="strands" stroke="black" stroke-width="2" fill="none">')
        for j, s in enumerate(slices or [Slice('id', 0, 0)]):
            y0 = height - self.margin - j * self.slice_height
            y1 = y0 - self.slice_height
            y_mid = y0 - self.slice_height // 2
            out.append(
                f'<g class="slice" data-kind="{s.kind}" data-slot="{s.slot}" data-exp="{s.exponent}">'
            )
            for k in range(1, n + 1):
                if s.kind == 'sigma' and k == s.slot:
                    out.append(_line(x(k), y0, x(k + 1), y1))
                    out.append(_line(x(k + 1), y0, x(k), y1))
                elif s.kind == 'sigma' and k == s.slot + 1:
                    continue
                elif s.kind == 't' and k == s.slot:
                    exit_x, entry_x = (left_cut, right_cut) if s.exponent == 1 else (right_cut, left_cut)
                    out.append(_line(x(k), y0, exit_x, y_mid))
                    out.append(_line(entry_x, y_mid, x(k), y1))
                else:
                    out.append(_line(x(k), y0, x(k), y1))
            out.append('</g>')
        out.append('</g>')
        out.append('</svg>')
        return "\n".join(out) + "\n"


def render(spec: DiagramSpec, config_path: Optional[Union[str, Path]] = None) -> str:
    """以 config/parameters.yaml 的參數繪製"""
    return DiagramRenderer(config_path).render(spec)


def _slice_from_lines(body: str) -> Slice:
    """由切片內線段的端點判定字母：斜線相連兩條繃線為 σ，連到切口為 t"""
    lines = [tuple(int(v) for v in m) for m in _LINE_RE.findall(body)]
    if not lines:
        raise ValidationError("SVG slice has no strand segments")
    bottom = max(y1 for _, y1, _, _ in lines)
    # 每條繃線恰有一段自切片底部出發
    slot_of = {
        x: k for k, x in enumerate(sorted(x1 for x1, y1, _, _ in lines if y1 == bottom), start=1)
    }
    for x1, y1, x2, _ in lines:
        if y1 != bottom or x2 == x1:
            continue
        if x2 in slot_of:
            return Slice('sigma', min(slot_of[x1], slot_of[x2]), 1)
        return Slice('t', slot_of[x1], 1 if x2 < x1 else -1)
    return Slice('id', 0, 0)


def read_diagram(text: str, presentation: Presentation) -> Word:
    """
    由繃線圖讀回字詞（由下往上）

    SVG 依每個切片的線段端點讀取，並與 slice 群組的 data 屬性互相核對；
    ASCII 依每列的 'X' 與 '=' 讀取。

    Raises:
        ValidationError: 線段幾何與 data 屬性不符
    """
    if text.lstrip().startswith('<'):
        letters = []
        for j, (kind, slot, exp, body) in enumerate(_SLICE_RE.findall(text)):
            drawn = _slice_from_lines(body)
            if drawn != Slice(kind, int(slot), int(exp)):
                raise ValidationError(
                    f"SVG slice {j} draws {drawn.kind} at slot {drawn.slot} "
                    f"but is labeled {kind} at slot {slot}",
                    slice=j,
                )
            if drawn.kind == 'sigma':
                letters.append(sigma(drawn.slot))
            elif drawn.kind == 't':
                letters.append(t(drawn.slot, drawn.exponent))
        return Word(presentation, tuple(letters))

    rows = text.splitlines()
    if len(rows) < 2:
        raise ValidationError("ASCII diagram needs at least the two frame rows")
    offset = 2 if presentation.is_ring else 0
    width = 2 * presentation.n_particles - 1
    letters = []
    for row in reversed(rows[1:-1]):
        body = row[offset:offset + width]
        if 'X' in body:
            letters.append(sigma((body.index('X') + 1) // 2))
        elif '=' in body:
            letters.append(t(body.index('=') // 2 + 1, 1 if row[:1] == '<' else -1))
    return Word(presentation, tuple(letters))
