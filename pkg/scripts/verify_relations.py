"""
生成元關係自我檢查腳本

執行時機：修改 Coxeter 引擎或 wreath 運算之後
功能：
    1. 對 N = 2..max_n 與每個群族，檢查 Tits 表示滿足且僅滿足該族的關係
    2. 檢查有限群族的 Cayley 球飽和（S_N 為 N!，F_3 為 6）
    3. 檢查 S_N(S¹) 的仿射表示關係全部成立
任何不符即以結束碼 1 離開。
"""

import argparse
import logging
import math
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.coxeter import cayley_ball, relation_holds
from src.ring import verify_affine_presentation
from src.words import Family, Presentation

logger = logging.getLogger(__name__)


def expected_relation(family: Family, i: int, j: int) -> bool:
    """對稱群的 (i,j) 關係在該族是否應成立"""
    if i == j:
        return True
    if abs(i - j) == 1:
        return family in (Family.S, Family.F)
    return family in (Family.S, Family.T)


def check_relations(max_n: int) -> int:
    """回傳不符的關係數"""
    mismatches = 0
    for n in range(2, max_n + 1):
        for family in Family:
            presentation = Presentation(family, n)
            for i in range(1, n):
                for j in range(i, n):
                    actual = relation_holds(presentation, i, j)
                    if actual != expected_relation(family, i, j):
                        logger.error(f"{presentation} 關係 ({i},{j}) 預期 {not actual}，實際 {actual}")
                        mismatches += 1
        logger.info(f"N={n} 關係檢查完成")
    return mismatches


def check_finite_groups(max_n: int) -> int:
    mismatches = 0
    for n in range(2, max_n + 1):
        size = len(cayley_ball(Presentation(Family.S, n), n * (n - 1) // 2))
        if size != math.factorial(n):
            logger.error(f"S_{n} 的 Cayley 球有 {size} 個元素，預期 {math.factorial(n)}")
            mismatches += 1
    size = len(cayley_ball(Presentation(Family.F, 3), 4))
    if size != 6:
        logger.error(f"F_3 的 Cayley 球有 {size} 個元素，預期 6")
        mismatches += 1
    return mismatches


def check_affine(max_n: int) -> int:
    mismatches = 0
    for n in range(3, max_n + 1):
        report = verify_affine_presentation(n, Family.S)
        for failure in report.failures:
            logger.error(f"S_{n}(S1) 關係不成立: {failure.relation}")
            mismatches += 1
    return mismatches


def main():
    """主函數"""
    parser = argparse.ArgumentParser(
        description='Verify generator relations of the exchange-statistics groups'
    )
    parser.add_argument(
        '--max-n',
        type=int,
        default=5,
        help='最大粒子數（預設 5）'
    )
    args = parser.parse_args()

    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s - %(levelname)s - %(message)s',
    )

    mismatches = check_relations(args.max_n)
    mismatches += check_finite_groups(args.max_n)
    mismatches += check_affine(args.max_n)

    if mismatches:
        logger.error(f"共 {mismatches} 項檢查失敗")
        sys.exit(1)
    logger.info("所有關係檢查通過")


if __name__ == '__main__':
    main()
