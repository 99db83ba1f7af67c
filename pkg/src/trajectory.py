"""
軌跡編譯模組

讀入帶標籤的分段線性 N 粒子軌跡（interval 或 ring），以精確有理數
偵測重合與切口穿越事件，套用重合排除策略，並將迴圈編譯為交換群元素。

位置慣例：
- 位置 (slot) 為 x mod L 的排名，1 為最小；interval 上直接以 x 排名
- 位置 i 與 i+1 的粒子交叉輸出 σᵢ；相切不輸出任何字母
- 三粒子以上同時重合依「遞增優先」氣泡排序輸出，例如完全反轉為 σᵢσᵢ₊₁σᵢ
- ring 上位置 N 的粒子正向穿越切口輸出 t_N σ_{N−1}…σ₁，
  位置 1 的粒子反向穿越輸出 t₁⁻¹ σ₁…σ_{N−1}（σ 尾段為循環重新編號）
"""

import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from src.coxeter import ElementHandle, normal_form_shortlex
from src.models import TrajectoryFile, parse_model
from src.ring import WreathElement, from_word
from src.strata import POLICY_FAMILY, CoincidencePolicy, coincidence_flags
from src.utils import parse_rational
from src.utils.exceptions import (
    CutCoincidenceError,
    DegenerateTangencyError,
    EndpointMismatchError,
    GeometryMismatchError,
    PolicyMismatchError,
    PolicyViolationError,
    PresentationMismatchError,
    TrajectoryError,
    ValidationError,
)
from src.words import (
    GeneratorSymbol,
    Geometry,
    Permutation,
    Presentation,
    Word,
    sigma,
    t,
)

logger = logging.getLogger(__name__)

Breakpoint = Tuple[Fraction, Fraction]


@dataclass(frozen=True)
class Trajectory:
    """
    N 條帶標籤的分段線性路徑

    Attributes:
        geometry: interval 或 ring
        particles: 每個粒子的 (時間, 位置) 折點序列；ring 上位置為展開後的提升值
        circumference: ring 周長
        bounds: interval 的位置上下界（可省略）
        policy: 迴圈所宣告的重合排除策略
    """

    geometry: Geometry
    particles: Tuple[Tuple[Breakpoint, ...], ...]
    circumference: Optional[Fraction] = None
    bounds: Optional[Tuple[Fraction, Fraction]] = None
    policy: CoincidencePolicy = CoincidencePolicy.Q

    def __post_init__(self):
        object.__setattr__(self, 'geometry', Geometry(self.geometry))
        object.__setattr__(self, 'policy', CoincidencePolicy(self.policy))
        particles = tuple(
            tuple((parse_rational(time), parse_rational(x)) for time, x in path)
            for path in self.particles
        )
        object.__setattr__(self, 'particles', particles)

        if len(particles) < 2:
            raise ValidationError(f"Trajectory needs at least 2 particles, got {len(particles)}")
        for label, path in enumerate(particles, start=1):
            if len(path) < 2:
                raise ValidationError(f"Particle {label} needs at least 2 breakpoints")
            times = [time for time, _ in path]
            if any(b <= a for a, b in zip(times, times[1:])):
                raise ValidationError(f"Breakpoint times of particle {label} must strictly increase")
        starts = {path[0][0] for path in particles}
        ends = {path[-1][0] for path in particles}
        if len(starts) != 1 or len(ends) != 1:
            raise ValidationError("All particles must share t_start and t_end")

        if self.geometry is Geometry.RING:
            if self.circumference is None:
                raise ValidationError("Ring trajectory requires a circumference")
            length = parse_rational(self.circumference)
            if length <= 0:
                raise ValidationError(f"Circumference must be positive, got {length}")
            object.__setattr__(self, 'circumference', length)
        elif self.circumference is not None:
            raise ValidationError("Interval trajectory takes no circumference")

        if self.bounds is not None:
            low, high = (parse_rational(b) for b in self.bounds)
            object.__setattr__(self, 'bounds', (low, high))
            for label, path in enumerate(particles, start=1):
                if any(not low <= x <= high for _, x in path):
                    raise ValidationError(f"Particle {label} leaves the bounds [{low}, {high}]")

    @property
    def n_particles(self) -> int:
        return len(self.particles)

    @property
    def t_start(self) -> Fraction:
        return self.particles[0][0][0]

    @property
    def t_end(self) -> Fraction:
        return self.particles[0][-1][0]

    @property
    def time_grid(self) -> List[Fraction]:
        return sorted({time for path in self.particles for time, _ in path})

    def position(self, label: int, time) -> Fraction:
        """粒子 label（1 起算）在時間 time 的展開位置"""
        time = parse_rational(time)
        path = self.particles[label - 1]
        if not path[0][0] <= time <= path[-1][0]:
            raise ValueError(f"Time {time} outside [{path[0][0]}, {path[-1][0]}]")
        for (t0, x0), (t1, x1) in zip(path, path[1:]):
            if t0 <= time <= t1:
                return x0 + (x1 - x0) * (time - t0) / (t1 - t0)
        return path[-1][1]

    def reduced(self, x: Fraction) -> Fraction:
        """ring 上取模至 [0, L)；interval 原樣返回"""
        return x % self.circumference if self.circumference is not None else x

    def lap(self, x: Fraction) -> int:
        return math.floor(x / self.circumference) if self.circumference is not None else 0

    def reverse(self) -> "Trajectory":
        """時間反演：t ↦ t_start + t_end − t"""
        total = self.t_start + self.t_end
        particles = tuple(
            tuple((total - time, x) for time, x in reversed(path)) for path in self.particles
        )
        return Trajectory(self.geometry, particles, self.circumference, self.bounds, self.policy)

    def concat(self, other: "Trajectory") -> "Trajectory":
        """
        先走 self 再走 other

        other 平移時間使其起點接在 self 終點；ring 上 other 的提升值
        平移整數圈使每個粒子位置連續。
        """
        if (self.geometry, self.circumference, self.n_particles) != (
            other.geometry, other.circumference, other.n_particles
        ):
            raise ValidationError("Cannot concatenate trajectories of different geometry")
        shift = self.t_end - other.t_start
        particles = []
        for label, (mine, theirs) in enumerate(zip(self.particles, other.particles), start=1):
            end_x, start_x = mine[-1][1], theirs[0][1]
            offset = Fraction(0)
            if self.circumference is not None:
                if (end_x - start_x) % self.circumference != 0:
                    raise EndpointMismatchError(
                        f"Particle {label} ends at {end_x} but the next loop starts at {start_x}"
                    )
                offset = end_x - start_x
            elif end_x != start_x:
                raise EndpointMismatchError(
                    f"Particle {label} ends at {end_x} but the next loop starts at {start_x}"
                )
            tail = tuple((time + shift, x + offset) for time, x in theirs[1:])
            particles.append(mine + tail)
        return Trajectory(
            self.geometry, tuple(particles), self.circumference, self.bounds, self.policy
        )

    def order_at(self, time: Fraction) -> Tuple[int, ...]:
        """時間 time 的位置排名：第 k 項為位於 slot k+1 的粒子標籤"""
        keys = {label: self.reduced(self.position(label, time))
                for label in range(1, self.n_particles + 1)}
        return tuple(sorted(keys, key=keys.get))


def load_trajectory(source: Union[str, Path, dict]) -> Trajectory:
    """由 JSON 檔或 dict 載入軌跡（數值必須為精確有理數字串）"""
    if isinstance(source, dict):
        data = source
    else:
        try:
            with open(source, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ValidationError(f"Trajectory file {source} is not valid JSON: {e}") from e
    model = parse_model(TrajectoryFile, data)
    geometry, circumference = model.geometry_spec()
    return Trajectory(
        geometry=geometry,
        particles=tuple(tuple((time, x) for time, x in path) for path in model.particles),
        circumference=circumference,
        bounds=tuple(model.bounds) if model.bounds is not None else None,
        policy=model.policy,
    )


# ==================== 事件 ====================

class EventKind(str, Enum):
    CROSSING = "crossing"
    TANGENCY = "tangency"
    COINCIDENCE = "coincidence"     # 三粒子以上
    CUT_CROSSING = "cut_crossing"


@dataclass(frozen=True)
class Event:
    """
    單一事件

    Attributes:
        time: 事件時間
        kind: 事件類型
        slot: 事件前的最低參與位置
        particles: 參與粒子標籤（依事件前位置排列）
        sign: 切口穿越方向（+1 正向，−1 反向）；其他事件為 0
        letters: 此事件輸出的字母
    """

    time: Fraction
    kind: EventKind
    slot: int
    particles: Tuple[int, ...]
    sign: int = 0
    letters: Tuple[GeneratorSymbol, ...] = ()

    def to_dict(self) -> dict:
        return {
            'time': str(self.time),
            'kind': self.kind.value,
            'slot': self.slot,
            'particles': list(self.particles),
            'sign': self.sign,
            'letters': " ".join(l.to_text() for l in self.letters),
        }


@dataclass(frozen=True)
class CoincidenceGroup:
    """同一時間的所有重合（旗標依 Δ₃ 與 Δ₂,₂ 的定義）"""

    time: Fraction
    blocks: Tuple[Tuple[int, ...], ...]
    triple: bool
    double_double: bool
    simultaneous: bool


@dataclass
class EventLog:
    """
    依時間排序的事件紀錄

    Attributes:
        events: 事件列表；同一時間的事件依位置遞增
        groups: 每個有重合發生之時間的重合分組
        initial_order: 起點的位置排名
        final_order: 終點的位置排名
        laps: 每個粒子的淨繞圈數（ring）
    """

    events: List[Event] = field(default_factory=list)
    groups: List[CoincidenceGroup] = field(default_factory=list)
    initial_order: Tuple[int, ...] = ()
    final_order: Tuple[int, ...] = ()
    laps: Tuple[int, ...] = ()

    def letters(self) -> Tuple[GeneratorSymbol, ...]:
        return tuple(letter for event in self.events for letter in event.letters)


def _critical_times(traj: Trajectory) -> List[Fraction]:
    """折點、兩兩重合時間與切口接觸時間（精確解線性方程式）"""
    length = traj.circumference
    grid = traj.time_grid
    times = set(grid)
    n = traj.n_particles

    for a, b in zip(grid, grid[1:]):
        xa = [traj.position(p, a) for p in range(1, n + 1)]
        xb = [traj.position(p, b) for p in range(1, n + 1)]
        span = b - a

        def solve(d0: Fraction, d1: Fraction, targets) -> None:
            for target in targets:
                root = a + (target - d0) * span / (d1 - d0)
                if a < root < b:
                    times.add(root)

        def lifts(lo: Fraction, hi: Fraction):
            lo, hi = min(lo, hi), max(lo, hi)
            return [k * length for k in range(math.ceil(lo / length), math.floor(hi / length) + 1)]

        for p in range(n):
            for q in range(p + 1, n):
                d0, d1 = xa[p] - xa[q], xb[p] - xb[q]
                if d0 == d1:
                    on_locus = d0 == 0 if length is None else d0 % length == 0
                    if on_locus:
                        raise DegenerateTangencyError(
                            f"Particles {p + 1} and {q + 1} coincide on the whole segment [{a}, {b}]",
                            particles=[p + 1, q + 1],
                            start=str(a),
                            end=str(b),
                        )
                    continue
                solve(d0, d1, [Fraction(0)] if length is None else lifts(d0, d1))

        if length is not None:
            for p in range(n):
                if xa[p] != xb[p]:
                    solve(xa[p], xb[p], lifts(xa[p], xb[p]))

    return sorted(times)


def _bubble_letters(before: Sequence[int], after: Sequence[int], first_slot: int) -> List[int]:
    """以遞增優先的氣泡排序將 before 排成 after，回傳交換的 σ 索引"""
    target = {label: k for k, label in enumerate(after)}
    keys = [target[label] for label in before]
    out = []
    changed = True
    while changed:
        changed = False
        for m in range(len(keys) - 1):
            if keys[m] > keys[m + 1]:
                keys[m], keys[m + 1] = keys[m + 1], keys[m]
                out.append(first_slot + m)
                changed = True
    return out


def detect_events(traj: Trajectory) -> EventLog:
    """
    偵測所有事件

    Raises:
        DegenerateTangencyError: 兩粒子在一整段時間內重合
        EndpointMismatchError: 起點或終點組態有重合
        CutCoincidenceError: 重合發生在切口上，或與切口穿越同時發生
    """
    n = traj.n_particles
    labels = range(1, n + 1)
    critical = _critical_times(traj)

    for endpoint in (traj.t_start, traj.t_end):
        reduced = [traj.reduced(traj.position(p, endpoint)) for p in labels]
        if len(set(reduced)) < n:
            raise EndpointMismatchError(
                f"Configuration at t={endpoint} lies on the coincidence locus",
                time=str(endpoint),
                particles=[p for p in labels if reduced.count(reduced[p - 1]) > 1],
            )

    log = EventLog(initial_order=traj.order_at(traj.t_start), final_order=traj.order_at(traj.t_end))
    log.laps = tuple(
        traj.lap(traj.position(p, traj.t_end)) - traj.lap(traj.position(p, traj.t_start))
        for p in labels
    )

    for k, tau in enumerate(critical):
        before_time = tau if k == 0 else (critical[k - 1] + tau) / 2
        after_time = tau if k == len(critical) - 1 else (tau + critical[k + 1]) / 2
        before_x = {p: traj.position(p, before_time) for p in labels}
        after_x = {p: traj.position(p, after_time) for p in labels}
        before_order = traj.order_at(before_time)
        slot_of = {p: s for s, p in enumerate(before_order, start=1)}

        buckets: Dict[Fraction, List[int]] = {}
        for p in labels:
            buckets.setdefault(traj.reduced(traj.position(p, tau)), []).append(p)
        blocks = sorted(
            (sorted(members, key=slot_of.get) for members in buckets.values() if len(members) >= 2),
            key=lambda members: slot_of[members[0]],
        )
        crossers = [p for p in labels if traj.lap(after_x[p]) != traj.lap(before_x[p])]

        if traj.circumference is not None and blocks:
            if len(buckets.get(Fraction(0), [])) >= 2 or crossers:
                raise CutCoincidenceError(
                    f"Coincidence at t={tau} touches the cut; perturb the loop",
                    time=str(tau),
                    particles=sorted({p for members in blocks for p in members} | set(crossers)),
                )

        events: List[Event] = []
        for members in blocks:
            first = slot_of[members[0]]
            after = sorted(members, key=lambda p: traj.reduced(after_x[p]))
            indices = _bubble_letters(members, after, first)
            if len(members) >= 3:
                kind = EventKind.COINCIDENCE
            else:
                kind = EventKind.CROSSING if indices else EventKind.TANGENCY
            events.append(Event(tau, kind, first, tuple(members), 0, tuple(sigma(i) for i in indices)))

        for p in crossers:
            slot = slot_of[p]
            if traj.lap(after_x[p]) > traj.lap(before_x[p]):
                letters = (t(slot),) + tuple(sigma(i) for i in range(slot - 1, 0, -1))
                events.append(Event(tau, EventKind.CUT_CROSSING, slot, (p,), 1, letters))
            else:
                letters = (t(slot, -1),) + tuple(sigma(i) for i in range(slot, n))
                events.append(Event(tau, EventKind.CUT_CROSSING, slot, (p,), -1, letters))

        if blocks:
            sizes = [len(b) for b in blocks]
            _, triple, double_double = coincidence_flags(sizes)
            log.groups.append(CoincidenceGroup(
                tau, tuple(tuple(b) for b in blocks), triple, double_double, len(events) > 1
            ))
        log.events.extend(events)

    logger.debug(f"偵測到 {len(log.events)} 個事件，{len(log.groups)} 個重合時間")
    return log


# ==================== 策略 ====================

@dataclass(frozen=True)
class Violation:
    time: Optional[Fraction]
    kind: str
    particles: Tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            'time': str(self.time) if self.time is not None else None,
            'kind': self.kind,
            'particles': list(self.particles),
        }


@dataclass
class ValidationReport:
    policy: CoincidencePolicy
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            'policy': self.policy.value,
            'ok': self.ok,
            'violations': [v.to_dict() for v in self.violations],
        }


def policy_violations(log: EventLog, policy: CoincidencePolicy) -> List[Violation]:
    """依策略列出被排除的重合"""
    violations = []
    for group in log.groups:
        everyone = tuple(p for block in group.blocks for p in block)
        if policy.excludes_pairs:
            violations.append(Violation(group.time, 'pair', everyone))
            continue
        if policy.excludes_triples and group.triple:
            for block in group.blocks:
                if len(block) >= 3:
                    violations.append(Violation(group.time, 'triple', block))
        if policy.excludes_double_pairs and group.double_double:
            violations.append(Violation(group.time, 'double_pair', everyone))
    return violations


def validate(traj: Trajectory, policy=None) -> ValidationReport:
    """
    列出所有策略違規，不拋出異常

    事件偵測失敗（退化相切、切口重合、端點重合）時回報單一違規，
    kind 為該異常的 code。
    """
    policy = CoincidencePolicy(policy if policy is not None else traj.policy)
    report = ValidationReport(policy)
    try:
        log = detect_events(traj)
    except TrajectoryError as e:
        when = e.details.get('start', e.details.get('time'))
        report.violations.append(Violation(
            Fraction(when) if when is not None else None,
            e.code,
            tuple(e.details.get('particles', ())),
        ))
        logger.debug(f"事件偵測失敗: {e.message}")
        return report
    report.violations.extend(policy_violations(log, policy))
    return report


# ==================== 編譯 ====================

@dataclass
class CompiledLoop:
    """
    編譯結果

    Attributes:
        word: 事件依序輸出的原始字詞
        element: interval 為 ElementHandle，ring 為 WreathElement
        is_pure: 每個標籤是否回到原位
        events: 事件紀錄
    """

    word: Word
    element: Union[ElementHandle, WreathElement]
    is_pure: bool
    events: EventLog

    def to_dict(self) -> dict:
        if isinstance(self.element, WreathElement):
            element = self.element.to_json()
        else:
            element = str(self.element.normal_word)
        return {
            'word': str(self.word),
            'element': element,
            'is_pure': self.is_pure,
            'events': [e.to_dict() for e in self.events.events],
        }


def endpoint_permutation(traj: Trajectory) -> Permutation:
    """直接由端點讀出的置換：終點 slot j ↦ 該粒子的起點 slot"""
    log_initial = traj.order_at(traj.t_start)
    log_final = traj.order_at(traj.t_end)
    initial_slot = {p: s for s, p in enumerate(log_initial, start=1)}
    return Permutation(tuple(initial_slot[p] for p in log_final))


def displacement_windings(traj: Trajectory) -> Tuple[int, ...]:
    """依起點 slot 編號的淨繞圈數"""
    order = traj.order_at(traj.t_start)
    return tuple(
        traj.lap(traj.position(p, traj.t_end)) - traj.lap(traj.position(p, traj.t_start))
        for p in order
    )


def _check_closed(traj: Trajectory) -> None:
    start = sorted(traj.reduced(traj.position(p, traj.t_start)) for p in range(1, traj.n_particles + 1))
    end = sorted(traj.reduced(traj.position(p, traj.t_end)) for p in range(1, traj.n_particles + 1))
    if start != end:
        raise EndpointMismatchError(
            "Final configuration differs from the initial one; not a loop",
            start=[str(x) for x in start],
            end=[str(x) for x in end],
        )


def compile_loop(traj: Trajectory, presentation: Presentation, policy=None) -> CompiledLoop:
    """
    將迴圈編譯為群元素

    Raises:
        PolicyMismatchError: 策略與群族不相容
        PolicyViolationError: 軌跡通過被排除的重合
        EndpointMismatchError: 終點組態與起點不同
        TrajectoryError 及其子類：其他幾何問題
    """
    policy = CoincidencePolicy(policy if policy is not None else traj.policy)
    if POLICY_FAMILY[policy] is not presentation.family:
        raise PolicyMismatchError(
            f"Policy {policy.value} pairs with family {POLICY_FAMILY[policy].value}, "
            f"not {presentation.family.value}",
            policy=policy.value,
        )
    if presentation.is_ring != (traj.geometry is Geometry.RING):
        raise GeometryMismatchError(
            f"Trajectory geometry {traj.geometry.value} does not match {presentation}"
        )
    if presentation.n_particles != traj.n_particles:
        raise PresentationMismatchError(
            f"Trajectory has {traj.n_particles} particles but {presentation} expects "
            f"{presentation.n_particles}"
        )

    _check_closed(traj)
    log = detect_events(traj)
    violations = policy_violations(log, policy)
    if violations:
        raise PolicyViolationError(
            f"{len(violations)} coincidence(s) excluded by policy {policy.value}",
            violations=[v.to_dict() for v in violations],
        )

    word = Word(presentation, log.letters())
    element: Union[ElementHandle, WreathElement]
    element = from_word(word) if presentation.is_ring else normal_form_shortlex(word)
    pure = log.initial_order == log.final_order
    logger.info(f"迴圈編譯為 {presentation} 元素，{len(log.events)} 個事件，is_pure={pure}")
    return CompiledLoop(word, element, pure, log)
