"""
通用工具函數模組

提供共用的輔助函數，包括：
- 日誌配置工具
- 參數設定載入（config/parameters.yaml）
- 精確有理數解析
"""

import copy
import logging
import re
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from src.utils.exceptions import ValidationError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).parent.parent.parent / 'config' / 'parameters.yaml'

DEFAULT_PARAMETERS: Dict[str, Dict[str, Any]] = {
    'engine': {
        'element_cap': 1_000_000,   # Cayley 球元素上限
        'orbit_cap': 200_000,       # Tits 移動軌道上限
    },
    'render': {
        'max_letters': 256,         # 單張圖最多字母數
        'strand_spacing': 40,
        'slice_height': 40,
        'margin': 20,
        'cut_gap': 20,
    },
    'logging': {
        'level': 'WARNING',
        'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        'datefmt': None,
    },
}

_RATIONAL_RE = re.compile(r'^\s*([+-]?\d+)(?:\s*/\s*(\d+)|\.(\d+))?\s*$')


def setup_logging(log_level: Optional[str] = None,
                  config_path: Optional[Union[str, Path]] = None):
    """
    依 parameters.yaml 的 logging 區段配置日誌

    Args:
        log_level: 覆寫設定檔中的等級（例如命令列 --log-level）
        config_path: 設定檔路徑，預設為 config/parameters.yaml

    Raises:
        ValidationError: 未知的日誌等級
    """
    settings = load_parameters(config_path)['logging']
    level = str(log_level or settings['level']).upper()
    if not isinstance(logging.getLevelName(level), int):
        raise ValidationError(f"Unknown log level {level!r}")
    logging.basicConfig(
        level=getattr(logging, level),
        format=settings['format'],
        datefmt=settings.get('datefmt'),
    )


def load_parameters(config_path: Optional[Union[str, Path]] = None) -> Dict[str, Dict[str, Any]]:
    """
    從 parameters.yaml 載入參數設定

    缺少的區段或鍵值以預設值補齊；檔案不存在或無法解析時使用預設值。

    Args:
        config_path: 設定檔路徑，預設為 config/parameters.yaml

    Returns:
        dict: {'engine': {...}, 'render': {...}, 'logging': {...}}
    """
    params = copy.deepcopy(DEFAULT_PARAMETERS)
    path = Path(config_path) if config_path is not None else DEFAULT_CONFIG_PATH
    if not path.exists():
        logger.warning(f"找不到設定檔 {path}，使用預設參數")
        return params

    try:
        with open(path, 'r', encoding='utf-8') as f:
            loaded = yaml.safe_load(f) or {}
    except Exception as e:
        logger.error(f"讀取參數設定失敗: {e}，使用預設值", exc_info=True)
        return params

    for section, values in loaded.items():
        if isinstance(values, dict):
            params.setdefault(section, {}).update(values)
    return params


def parse_rational(value: Union[str, int, Fraction]) -> Fraction:
    """
    解析精確有理數

    接受整數、"p/q" 與有限小數字串；拒絕浮點數（無法保證精確）。
    """
    if isinstance(value, bool):
        raise ValidationError(f"Not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        m = _RATIONAL_RE.match(value)
        if m is None:
            raise ValidationError(f"Not an exact rational string: {value!r}")
        if m.group(2) is not None and int(m.group(2)) == 0:
            raise ValidationError(f"Zero denominator: {value!r}")
        return Fraction(value.replace(' ', ''))
    raise ValidationError(f"Floats are not accepted, got {type(value).__name__}: {value!r}")


def format_rational(value: Fraction) -> str:
    """有理數格式化為 "num/den" 字串（分母恆為正）"""
    return f"{value.numerator}/{value.denominator}"
