"""
命令列介面

每個子命令對應一個模組運算：
    normalize, equal, image, abelianize, characters, strata, sector,
    compile, validate, render, ball, affine-check

結束碼：0 成功；1 領域錯誤（stderr 輸出 JSON 錯誤描述）；2 用法錯誤。
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

from src.abelian import abelianization, enumerate_characters
from src.coxeter import cayley_ball, elements_equal, normal_form_shortlex
from src.diagram import DiagramSpec, DiagramRenderer
from src.ring import WreathElement, from_word, to_word, verify_affine_presentation, wreath_equal
from src.strata import (
    POLICY_FAMILY,
    CoincidencePolicy,
    Configuration,
    classify_configuration,
    load_configuration,
    ordering_sector,
    strata_table,
)
from src.trajectory import compile_loop, load_trajectory, validate
from src.utils import format_rational, setup_logging
from src.utils.exceptions import StrandGearError
from src.words import Presentation, parse_presentation, parse_word, permutation_image

logger = logging.getLogger(__name__)


class _Output:
    """收集輸出；--json 時輸出 JSON，否則輸出文字"""

    def __init__(self, args: argparse.Namespace):
        self.as_json = args.json
        self.out = args.out

    def emit(self, text: str, payload) -> None:
        if self.as_json:
            document = json.dumps(payload, ensure_ascii=False, indent=2, default=str)
        else:
            document = text
        if not document.endswith("\n"):
            document += "\n"
        if self.out:
            Path(self.out).write_text(document, encoding='utf-8')
            logger.info(f"輸出已寫入 {self.out}")
        else:
            sys.stdout.write(document)


def _presentation(args: argparse.Namespace) -> Presentation:
    return parse_presentation(args.family or 'S', args.n, args.geometry)


def _element_text(word) -> str:
    return str(word) or "1"


# ==================== 子命令 ====================

def cmd_normalize(args, out: _Output) -> None:
    presentation = _presentation(args)
    word = parse_word(args.word, presentation)
    if presentation.is_ring:
        element = from_word(word)
        out.emit(_element_text(to_word(element)), element.to_json())
        return
    handle = normal_form_shortlex(word)
    out.emit(_element_text(handle.normal_word), {
        'normal_word': str(handle.normal_word),
        'length': handle.length,
        'certificate': handle.certificate.to_json(),
    })


def cmd_equal(args, out: _Output) -> None:
    presentation = _presentation(args)
    u = parse_word(args.u, presentation)
    v = parse_word(args.v, presentation)
    if presentation.is_ring:
        same = wreath_equal(from_word(u), from_word(v))
    else:
        same = elements_equal(u, v)
    out.emit("true" if same else "false", {'equal': same})


def cmd_image(args, out: _Output) -> None:
    presentation = _presentation(args)
    word = parse_word(args.word, presentation)
    perm = from_word(word).permutation if presentation.is_ring else permutation_image(word)
    out.emit(perm.cycle_notation(), {
        'images': list(perm.images),
        'cycles': perm.cycle_notation(),
        'is_pure': perm.is_identity(),
    })


def cmd_abelianize(args, out: _Output) -> None:
    invariants = abelianization(_presentation(args))
    out.emit(str(invariants), invariants.to_dict())


def cmd_characters(args, out: _Output) -> None:
    table = enumerate_characters(_presentation(args))
    lines = [f"# {table.invariants}, {len(table.characters)} torsion character(s), "
             f"{table.invariants.free_rank} continuous phase(s)"]
    for character in table.characters:
        parts = []
        for name, phase in character.phases:
            value = format_rational(phase.root)
            for param, coeff in phase.free:
                value += f" + {coeff}*theta{param}"
            parts.append(f"{name}={value}")
        lines.append(" ".join(parts))
    out.emit("\n".join(lines), table.to_json())


def cmd_strata(args, out: _Output) -> None:
    df = strata_table(args.n, args.d)
    out.emit(df.to_string(index=False), df.to_dict(orient='records'))


def cmd_sector(args, out: _Output) -> None:
    if args.file:
        config = load_configuration(args.file)
    elif args.geometry == 'ring':
        config = Configuration.ring(args.positions, args.circumference)
    else:
        config = Configuration.interval(args.positions)
    classification = classify_configuration(config)
    payload = classification.to_dict()
    text = f"partition {classification.partition}"
    if not classification.in_delta2:
        sector = ordering_sector(config)
        payload['sector'] = list(sector)
        text += " sector [" + " ".join(str(s) for s in sector) + "]"
    else:
        payload['sector'] = None
        text += " on coincidence locus"
    out.emit(text, payload)


def cmd_compile(args, out: _Output) -> None:
    traj = load_trajectory(args.file)
    policy = CoincidencePolicy(args.policy or traj.policy)
    family = args.family or POLICY_FAMILY[policy].value
    presentation = parse_presentation(family, traj.n_particles, traj.geometry.value)
    result = compile_loop(traj, presentation, policy)
    if isinstance(result.element, WreathElement):
        element_text = _element_text(to_word(result.element))
    else:
        element_text = _element_text(result.element.normal_word)
    out.emit(f"{element_text}\nis_pure={str(result.is_pure).lower()}", result.to_dict())


def cmd_validate(args, out: _Output) -> None:
    traj = load_trajectory(args.file)
    report = validate(traj, args.policy)
    lines = [f"policy {report.policy.value}: {'ok' if report.ok else 'violations'}"]
    for v in report.violations:
        lines.append(f"t={v.time} {v.kind} {list(v.particles)}")
    out.emit("\n".join(lines), report.to_dict())


def cmd_render(args, out: _Output) -> None:
    word = parse_word(args.word, _presentation(args))
    document = DiagramRenderer().render(DiagramSpec(word, args.style, args.cut))
    out.emit(document, {'style': args.style, 'document': document})


def cmd_ball(args, out: _Output) -> None:
    presentation = _presentation(args).interval()
    ball = cayley_ball(presentation, args.radius)
    growth = [0] * (args.radius + 1)
    for _, length in ball:
        growth[length] += 1
    out.emit(f"{len(ball)} elements; growth {growth}", {
        'count': len(ball),
        'growth': growth,
        'elements': [str(handle.normal_word) for handle, _ in ball],
    })


def cmd_affine_check(args, out: _Output) -> None:
    report = verify_affine_presentation(args.n, args.family or 'S')
    lines = [f"{'ok  ' if c.holds else 'FAIL'} {c.relation}" for c in report.checks]
    out.emit("\n".join(lines), report.to_dict())


COMMANDS: Dict[str, Callable[[argparse.Namespace, _Output], None]] = {
    'normalize': cmd_normalize,
    'equal': cmd_equal,
    'image': cmd_image,
    'abelianize': cmd_abelianize,
    'characters': cmd_characters,
    'strata': cmd_strata,
    'sector': cmd_sector,
    'compile': cmd_compile,
    'validate': cmd_validate,
    'render': cmd_render,
    'ball': cmd_ball,
    'affine-check': cmd_affine_check,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--family', default=None, help='群族 S/T/F/W（預設 S；compile 依策略推定）')
    common.add_argument('--n', type=int, default=3, help='粒子數 N')
    common.add_argument('--geometry', choices=['interval', 'ring'], default='interval')
    common.add_argument('--policy', choices=['Q', 'Q2', 'Q3', 'Q22', 'Q3_22'], default=None)
    common.add_argument('--json', action='store_true', help='輸出 JSON')
    common.add_argument('--out', default=None, help='輸出檔案')
    common.add_argument('--log-level', default=None,
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                        help='日誌等級（預設讀取 parameters.yaml）')

    parser = argparse.ArgumentParser(
        prog='strandgear',
        description='Exact computations for one-dimensional exchange-statistics groups',
    )
    sub = parser.add_subparsers(dest='command', required=True)

    for name in ('normalize', 'image'):
        p = sub.add_parser(name, parents=[common])
        p.add_argument('word')
    p = sub.add_parser('equal', parents=[common])
    p.add_argument('u')
    p.add_argument('v')
    sub.add_parser('abelianize', parents=[common])
    sub.add_parser('characters', parents=[common])
    p = sub.add_parser('strata', parents=[common])
    p.add_argument('--d', type=int, default=1, help='底流形維度')
    p = sub.add_parser('sector', parents=[common])
    p.add_argument('positions', nargs='*')
    p.add_argument('--circumference', default='1')
    p.add_argument('--file', default=None, help='組態 JSON 檔')
    for name in ('compile', 'validate'):
        p = sub.add_parser(name, parents=[common])
        p.add_argument('file', help='軌跡 JSON 檔')
    p = sub.add_parser('render', parents=[common])
    p.add_argument('word')
    p.add_argument('--style', choices=['ascii', 'svg'], default='ascii')
    p.add_argument('--cut', action=argparse.BooleanOptionalAction, default=True,
                   help='ring 幾何是否繪製切口虛線')
    p = sub.add_parser('ball', parents=[common])
    p.add_argument('--radius', type=int, default=3)
    sub.add_parser('affine-check', parents=[common])
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """
    執行命令列

    Returns:
        int: 結束碼（0 成功，1 領域錯誤，2 用法錯誤）
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0

    try:
        setup_logging(args.log_level)
        COMMANDS[args.command](args, _Output(args))
    except StrandGearError as e:
        logger.debug(f"{args.command} 失敗: {e}", exc_info=True)
        sys.stderr.write(json.dumps(e.to_dict(), ensure_ascii=False, default=str) + "\n")
        return 1
    except ValueError as e:
        logger.debug(f"{args.command} 參數錯誤: {e}", exc_info=True)
        sys.stderr.write(json.dumps({'error': 'invalid_argument', 'message': str(e)}) + "\n")
        return 1
    except OSError as e:
        logger.debug(f"{args.command} 讀寫失敗: {e}", exc_info=True)
        sys.stderr.write(json.dumps({'error': 'io', 'message': str(e)}, ensure_ascii=False) + "\n")
        return 1
    return 0


def main() -> None:
    sys.exit(run())
