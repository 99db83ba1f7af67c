"""
StrandGear - 一維拓撲交換統計群運算核心模組

本模組提供 StrandGear 系統的所有核心功能，包括：
- 字詞與表示（S / T / F / W 四個群族，interval 與 ring 幾何）
- Coxeter 引擎（Tits 表示、化簡字、shortlex 正規形、Cayley 球）
- 環幾何 wreath 群（σ_N、σ₀、ζ 與仿射子群）
- 組態空間分層與扇區
- 阿貝爾化與阿貝爾特徵標
- 軌跡編譯器（事件偵測、重合策略）
- 繃線圖繪製（ASCII、SVG）
"""

__version__ = "0.1.0"
__author__ = "StrandGear Team"

from .words import Family, Geometry, Presentation, Word, parse_word, permutation_image
from .coxeter import ElementHandle, cayley_ball, elements_equal, normal_form_shortlex
from .ring import WreathElement, distinguished, from_word, verify_affine_presentation
from .strata import CoincidencePolicy, partitions, stratum_info
from .abelian import abelianization, enumerate_characters
from .trajectory import Trajectory, compile_loop, detect_events, validate
from .diagram import DiagramRenderer, DiagramSpec

__all__ = [
    "Family",
    "Geometry",
    "Presentation",
    "Word",
    "parse_word",
    "permutation_image",
    "ElementHandle",
    "cayley_ball",
    "elements_equal",
    "normal_form_shortlex",
    "WreathElement",
    "distinguished",
    "from_word",
    "verify_affine_presentation",
    "CoincidencePolicy",
    "partitions",
    "stratum_info",
    "abelianization",
    "enumerate_characters",
    "Trajectory",
    "compile_loop",
    "detect_events",
    "validate",
    "DiagramRenderer",
    "DiagramSpec",
]
