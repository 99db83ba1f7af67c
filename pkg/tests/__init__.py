"""
StrandGear 測試模組
"""

__version__ = "0.1.0"
