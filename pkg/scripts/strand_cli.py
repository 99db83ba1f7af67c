"""
StrandGear 命令列進入點

用法：
    python scripts/strand_cli.py normalize --family T --n 3 "s1 s2 s1"
    python scripts/strand_cli.py abelianize --family F --n 4
    python scripts/strand_cli.py render --geometry ring --n 4 --style svg "z" --out zeta.svg
"""

import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.cli import run


if __name__ == '__main__':
    sys.exit(run())
