"""
JSON 輸入輸出模式 (Schema)

以 pydantic 定義軌跡檔、組態檔、wreath 元素與特徵標的結構。
所有數值皆為精確有理數字串或整數；JSON 浮點數一律拒絕。
"""

import logging
from typing import Dict, List, Literal, Optional, Tuple, Type, TypeVar, Union

from pydantic import BaseModel, ConfigDict, StrictInt, StrictStr, field_validator
from pydantic import ValidationError as PydanticValidationError

from src.utils import parse_rational
from src.utils.exceptions import StrandGearError, ValidationError

logger = logging.getLogger(__name__)

ModelT = TypeVar('ModelT', bound=BaseModel)


def _check_rational(value: str) -> str:
    try:
        parse_rational(value)
    except StrandGearError as e:
        raise ValueError(e.message) from e
    return value


class RingSpec(BaseModel):
    model_config = ConfigDict(extra='forbid')

    circumference: StrictStr

    @field_validator('circumference')
    @classmethod
    def _positive(cls, v: str) -> str:
        _check_rational(v)
        if parse_rational(v) <= 0:
            raise ValueError(f"circumference must be positive, got {v}")
        return v


class RingGeometry(BaseModel):
    model_config = ConfigDict(extra='forbid')

    ring: RingSpec


GeometryField = Union[Literal['interval'], RingGeometry]


class _GeometryMixin(BaseModel):
    geometry: GeometryField

    def geometry_spec(self) -> Tuple[str, Optional[str]]:
        """(幾何名稱, 周長字串或 None)"""
        if isinstance(self.geometry, RingGeometry):
            return 'ring', self.geometry.ring.circumference
        return 'interval', None


class TrajectoryFile(_GeometryMixin):
    """
    軌跡檔

    particles 為每個粒子的折點列表，每個折點為 ["時間", "位置"]。
    """

    model_config = ConfigDict(extra='forbid')

    particles: List[List[List[StrictStr]]]
    policy: Literal['Q', 'Q2', 'Q3', 'Q22', 'Q3_22'] = 'Q'
    bounds: Optional[List[StrictStr]] = None

    @field_validator('particles')
    @classmethod
    def _breakpoints(cls, v: List[List[List[str]]]) -> List[List[List[str]]]:
        for path in v:
            for point in path:
                if len(point) != 2:
                    raise ValueError(f"breakpoint must be [time, position], got {point}")
                for value in point:
                    _check_rational(value)
        return v

    @field_validator('bounds')
    @classmethod
    def _bounds(cls, v: Optional[List[str]]) -> Optional[List[str]]:
        if v is not None:
            if len(v) != 2:
                raise ValueError("bounds must be [low, high]")
            for value in v:
                _check_rational(value)
        return v


class ConfigurationFile(_GeometryMixin):
    """組態檔：{"geometry": ..., "positions": ["p/q", ...]}"""

    model_config = ConfigDict(extra='forbid')

    positions: List[StrictStr]

    @field_validator('positions')
    @classmethod
    def _positions(cls, v: List[str]) -> List[str]:
        for value in v:
            _check_rational(value)
        return v


class WreathElementModel(BaseModel):
    """{"winding": [int...], "strand": "<DSL word>"}"""

    model_config = ConfigDict(extra='forbid')

    winding: List[StrictInt]
    strand: StrictStr


class PhaseModel(BaseModel):
    model_config = ConfigDict(extra='forbid')

    root_of_unity: Optional[Tuple[StrictInt, StrictInt]] = None
    free_param: Optional[StrictInt] = None
    free_params: Optional[Dict[str, StrictInt]] = None


class CharacterModel(BaseModel):
    """特徵標中的一個條目：{"generator": "s1", "phase": {...}}"""

    model_config = ConfigDict(extra='forbid')

    generator: StrictStr
    phase: PhaseModel


def parse_model(model: Type[ModelT], data) -> ModelT:
    """
    驗證 JSON 資料

    Raises:
        ValidationError: 結構或數值不合法
    """
    try:
        return model.model_validate(data)
    except PydanticValidationError as e:
        problems = [
            {'loc': ".".join(str(part) for part in err['loc']), 'msg': err['msg']}
            for err in e.errors()
        ]
        logger.warning(f"{model.__name__} 驗證失敗: {len(problems)} 個錯誤")
        raise ValidationError(f"Invalid {model.__name__}", problems=problems) from e
