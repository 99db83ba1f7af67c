"""
StrandGear 命令列與自我檢查腳本模組
"""

__version__ = "0.1.0"
