"""
自定義異常模組

定義系統中使用的自定義異常類別，用於精確的錯誤處理與日誌記錄。
每個異常帶有機器可讀的 code，CLI 以 JSON 形式輸出至 stderr。
"""

from typing import Any, Dict


class StrandGearError(Exception):
    """StrandGear 基礎異常"""

    code = "strandgear_error"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> Dict[str, Any]:
        """轉為可序列化的錯誤描述"""
        payload = {"error": self.code, "message": self.message}
        payload.update(self.details)
        return payload


class WordSyntaxError(StrandGearError):
    """當字詞 DSL 文法錯誤時拋出（附帶位元組位移）"""

    code = "word_syntax"

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}", offset=offset)
        self.offset = offset


class GeneratorRangeError(StrandGearError):
    """當生成元索引超出範圍時拋出"""

    code = "generator_range"


class GeometryMismatchError(StrandGearError):
    """當 ring 專用字母用於 interval 幾何（或反之）時拋出"""

    code = "geometry_mismatch"


class UnsupportedFamilyError(StrandGearError):
    """當群族不屬於 Coxeter 型（例如辮群 B）時拋出"""

    code = "unsupported_family"


class PresentationMismatchError(StrandGearError):
    """當兩個元素屬於不同表示時拋出"""

    code = "presentation_mismatch"


class ElementCapExceeded(StrandGearError):
    """當 Cayley 球元素數超過上限時拋出"""

    code = "element_cap_exceeded"


class OrbitCapExceeded(StrandGearError):
    """當 Tits 移動軌道大小超過上限時拋出"""

    code = "orbit_cap_exceeded"


class ValidationError(StrandGearError):
    """當輸入 JSON 的模式 (Schema) 或內容驗證失敗時拋出"""

    code = "validation"


class TrajectoryError(StrandGearError):
    """軌跡處理錯誤"""

    code = "trajectory"


class DegenerateTangencyError(TrajectoryError):
    """當兩粒子在正長度時間區段上重合時拋出"""

    code = "degenerate_tangency"


class EndpointMismatchError(TrajectoryError):
    """當軌跡終點組態不等於起點組態（作為多重集）時拋出"""

    code = "endpoint_mismatch"


class CutCoincidenceError(TrajectoryError):
    """當重合發生在環切口上，或與切口穿越同時發生時拋出"""

    code = "cut_coincidence"


class PolicyViolationError(TrajectoryError):
    """當軌跡穿過重合策略所排除的軌跡集時拋出"""

    code = "policy_violation"


class PolicyMismatchError(StrandGearError):
    """當重合策略與群族不相容時拋出"""

    code = "policy_mismatch"


class DiagramTooLargeError(StrandGearError):
    """當元素長度超過畫布上限時拋出"""

    code = "diagram_too_large"
