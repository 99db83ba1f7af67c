"""
軌跡編譯單元測試

完整測試套件涵蓋：
- 軌跡建構、插值、反演與串接
- 事件偵測（交叉、相切、三重點、雙重對、切口穿越）
- 策略驗證與編譯時的違規
- 迴圈編譯（interval 與 ring）
- 模糊測試：串接律、反演律、置換一致性、繞圈一致性
"""

import json
from fractions import Fraction

import pytest

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.coxeter import element_inverse, element_multiply, normal_form_shortlex
from src.ring import translation, wreath_equal, wreath_inverse, wreath_multiply, wreath_power
from src.strata import CoincidencePolicy
from src.trajectory import (
    EventKind,
    Trajectory,
    compile_loop,
    detect_events,
    displacement_windings,
    endpoint_permutation,
    load_trajectory,
    validate,
)
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
from src.words import Family, Permutation, Presentation, permutation_image, sigma_word
from tests.conftest import make_trajectory, random_loop


def swap_loop(n, slots):
    """依序交換指定 slot 與下一個 slot 的粒子；粒子位置為 slot − 1"""
    order = list(range(1, n + 1))
    paths = {label: [(0, label - 1)] for label in order}
    for step, s in enumerate(slots, start=1):
        order[s - 1], order[s] = order[s], order[s - 1]
        for slot, label in enumerate(order):
            paths[label].append((step, slot))
    return make_trajectory([paths[label] for label in range(1, n + 1)])


@pytest.fixture
def crossing():
    """兩粒子交叉一次"""
    return make_trajectory([[(0, 0), (1, 1)], [(0, 1), (1, 0)]])


@pytest.fixture
def tangency():
    """兩粒子在 t=1 相切後分開"""
    return make_trajectory([[(0, 0), (1, 1), (2, 0)], [(0, 2), (1, 1), (2, 2)]])


@pytest.fixture
def triple():
    """三粒子在 t=1/2 於 x=1 相遇並完全反轉"""
    return make_trajectory([[(0, 0), (1, 2)], [(0, 1), (1, 1)], [(0, 2), (1, 0)]])


@pytest.fixture
def double_pair():
    """兩組互斥的粒子對同時交叉"""
    return make_trajectory([
        [(0, 0), (1, 1)], [(0, 1), (1, 0)], [(0, 2), (1, 3)], [(0, 3), (1, 2)],
    ])


@pytest.fixture
def ring_loop():
    """ring 上粒子 1 正向繞過靜止的粒子 2 一圈"""
    return make_trajectory(
        [[(0, "1/10"), (1, "11/10")], [(0, "1/2"), (1, "1/2")]], 'ring', 1
    )


class TestTrajectory:
    """Trajectory 建構測試"""

    def test_插值(self, crossing):
        assert crossing.position(1, "1/4") == Fraction(1, 4)
        assert crossing.position(2, 1) == 0
        assert crossing.n_particles == 2
        assert crossing.time_grid == [0, 1]

    def test_時間超出範圍(self, crossing):
        with pytest.raises(ValueError):
            crossing.position(1, 2)

    def test_至少兩個粒子(self):
        with pytest.raises(ValidationError):
            make_trajectory([[(0, 0), (1, 1)]])

    def test_時間必須遞增(self):
        with pytest.raises(ValidationError, match="strictly increase"):
            make_trajectory([[(0, 0), (0, 1)], [(0, 2), (1, 2)]])

    def test_共用起終點時間(self):
        with pytest.raises(ValidationError, match="share"):
            make_trajectory([[(0, 0), (1, 1)], [(0, 2), (2, 2)]])

    def test_ring需要周長(self):
        with pytest.raises(ValidationError):
            make_trajectory([[(0, 0), (1, 1)], [(0, 2), (1, 2)]], 'ring')

    def test_interval不接受周長(self):
        with pytest.raises(ValidationError):
            make_trajectory([[(0, 0), (1, 1)], [(0, 2), (1, 2)]], 'interval', 1)

    def test_邊界(self):
        with pytest.raises(ValidationError, match="bounds"):
            Trajectory('interval', (((0, 0), (1, 5)), ((0, 1), (1, 1))), bounds=(0, 3))

    def test_拒絕浮點數(self):
        with pytest.raises(ValidationError):
            make_trajectory([[(0, 0.5), (1, 1)], [(0, 2), (1, 2)]])

    def test_時間反演(self, crossing):
        reverse = crossing.reverse()
        assert reverse.particles[0] == ((0, 1), (1, 0))
        assert reverse.reverse() == crossing

    def test_串接(self, crossing):
        loop = crossing.concat(crossing.reverse())
        assert loop.t_end == 2
        assert loop.position(1, 2) == 0

    def test_串接端點不符(self, crossing):
        with pytest.raises(EndpointMismatchError):
            crossing.concat(crossing)

    def test_ring串接平移提升值(self, ring_loop):
        loop = ring_loop.concat(ring_loop)
        assert loop.position(1, 2) == Fraction(21, 10)

    def test_排名(self, crossing):
        assert crossing.order_at(0) == (1, 2)
        assert crossing.order_at(1) == (2, 1)


class TestLoadTrajectory:
    """軌跡檔載入測試"""

    def test_由dict載入(self):
        traj = load_trajectory({
            'geometry': {'ring': {'circumference': '1'}},
            'particles': [[['0', '1/10'], ['1', '11/10']], [['0', '1/2'], ['1', '1/2']]],
            'policy': 'Q2',
        })
        assert traj.circumference == 1
        assert traj.policy is CoincidencePolicy.Q2

    def test_預設策略(self, tmp_path):
        path = tmp_path / 'loop.json'
        path.write_text(json.dumps({
            'geometry': 'interval',
            'particles': [[['0', '0'], ['1', '1']], [['0', '1'], ['1', '0']]],
        }))
        assert load_trajectory(path).policy is CoincidencePolicy.Q

    def test_拒絕JSON浮點數(self):
        with pytest.raises(ValidationError) as exc_info:
            load_trajectory({
                'geometry': 'interval',
                'particles': [[[0, 0.5], ['1', '1']], [['0', '1'], ['1', '0']]],
            })
        assert exc_info.value.details['problems']

    def test_折點格式(self):
        with pytest.raises(ValidationError):
            load_trajectory({
                'geometry': 'interval',
                'particles': [[['0', '0', '1']], [['0', '1']]],
            })

    def test_未知策略(self):
        with pytest.raises(ValidationError):
            load_trajectory({
                'geometry': 'interval',
                'particles': [[['0', '0'], ['1', '1']], [['0', '1'], ['1', '0']]],
                'policy': 'Q4',
            })

    def test_非JSON檔案(self, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('[')
        with pytest.raises(ValidationError, match="not valid JSON"):
            load_trajectory(path)


class TestDetectEvents:
    """事件偵測測試"""

    def test_單次交叉(self, crossing):
        log = detect_events(crossing)
        assert len(log.events) == 1
        event = log.events[0]
        assert event.kind is EventKind.CROSSING
        assert event.time == Fraction(1, 2)
        assert event.slot == 1
        assert event.particles == (1, 2)
        assert [l.to_text() for l in event.letters] == ['s1']

    def test_相切不輸出字母(self, tangency):
        log = detect_events(tangency)
        assert [e.kind for e in log.events] == [EventKind.TANGENCY]
        assert log.letters() == ()

    def test_三重點遞增優先(self, triple):
        log = detect_events(triple)
        assert len(log.events) == 1
        assert log.events[0].kind is EventKind.COINCIDENCE
        assert " ".join(l.to_text() for l in log.letters()) == "s1 s2 s1"
        assert log.groups[0].triple

    def test_雙重對同時發生(self, double_pair):
        log = detect_events(double_pair)
        assert [e.slot for e in log.events] == [1, 3]
        group = log.groups[0]
        assert group.double_double and group.simultaneous and not group.triple

    def test_ring正向穿越切口(self, ring_loop):
        log = detect_events(ring_loop)
        cuts = [e for e in log.events if e.kind is EventKind.CUT_CROSSING]
        assert len(cuts) == 1
        assert cuts[0].sign == 1
        assert cuts[0].time == Fraction(9, 10)
        assert cuts[0].particles == (1,)
        assert " ".join(l.to_text() for l in log.letters()) == "s1 t2 s1"
        assert log.laps == (1, 0)

    def test_ring反向穿越切口(self):
        traj = make_trajectory([[(0, "1/10"), (1, "-9/10")], [(0, "1/2"), (1, "1/2")]], 'ring', 1)
        log = detect_events(traj)
        assert log.events[0].kind is EventKind.CUT_CROSSING
        assert log.events[0].sign == -1
        assert " ".join(l.to_text() for l in log.letters()) == "t1^-1 s1 s1"

    def test_停在切口不算穿越(self):
        traj = make_trajectory(
            [[(0, "1/4"), (1, 0), (2, "1/4")], [(0, "1/2"), (1, "1/2"), (2, "1/2")]], 'ring', 1
        )
        assert detect_events(traj).events == []

    def test_退化相切區間(self):
        traj = make_trajectory([
            [(0, 0), (1, 1), (2, 1), (3, 0)],
            [(0, 2), (1, 1), (2, 1), (3, 2)],
        ])
        with pytest.raises(DegenerateTangencyError) as exc_info:
            detect_events(traj)
        assert exc_info.value.details['particles'] == [1, 2]
        assert exc_info.value.details['start'] == '1'

    def test_起點重合(self):
        traj = make_trajectory([[(0, 0), (1, 1)], [(0, 0), (1, 2)]])
        with pytest.raises(EndpointMismatchError):
            detect_events(traj)

    def test_切口上重合(self):
        traj = make_trajectory(
            [[(0, "1/4"), (1, "-1/4")], [(0, "3/4"), (1, "5/4")]], 'ring', 1
        )
        with pytest.raises(CutCoincidenceError):
            detect_events(traj)

    def test_重合與切口穿越同時(self):
        traj = make_trajectory([
            [(0, "9/10"), (1, "11/10")],
            [(0, "1/5"), (1, "2/5")],
            [(0, "2/5"), (1, "1/5")],
        ], 'ring', 1)
        with pytest.raises(CutCoincidenceError):
            detect_events(traj)

    def test_事件序列化(self, crossing):
        data = detect_events(crossing).events[0].to_dict()
        assert data == {
            'time': '1/2', 'kind': 'crossing', 'slot': 1,
            'particles': [1, 2], 'sign': 0, 'letters': 's1',
        }


class TestValidate:
    """策略驗證測試"""

    def test_交叉在Q下無違規(self, crossing):
        assert validate(crossing, 'Q').ok

    def test_三重點在Q3下違規(self, triple):
        report = validate(triple, 'Q3')
        assert [(v.kind, v.particles) for v in report.violations] == [('triple', (1, 2, 3))]
        assert validate(triple, 'Q22').ok

    def test_雙重對在Q22下違規(self, double_pair):
        report = validate(double_pair, CoincidencePolicy.Q22)
        assert [v.kind for v in report.violations] == ['double_pair']
        assert report.violations[0].time == Fraction(1, 2)
        assert validate(double_pair, 'Q3').ok

    def test_Q3_22兩者皆排除(self, triple, double_pair):
        assert not validate(triple, 'Q3_22').ok
        assert not validate(double_pair, 'Q3_22').ok

    def test_相切在Q2下違規(self, tangency):
        report = validate(tangency, 'Q2')
        assert [v.kind for v in report.violations] == ['pair']
        assert validate(tangency, 'Q3').ok

    def test_退化相切列入報告(self):
        traj = make_trajectory([
            [(0, 0), (1, 1), (2, 1), (3, 0)],
            [(0, 2), (1, 1), (2, 1), (3, 2)],
        ])
        report = validate(traj, 'Q')
        assert report.violations[0].kind == 'degenerate_tangency'
        assert report.violations[0].time == 1

    def test_切口上反彈列入報告(self):
        # 兩粒子在 t=1 於切口 x=0 相遇後反彈
        traj = make_trajectory([
            [(0, "1/4"), (1, 0), (2, "1/4")],
            [(0, "3/4"), (1, 1), (2, "3/4")],
        ], 'ring', 1)
        report = validate(traj, 'Q')
        assert [(v.time, v.kind, v.particles) for v in report.violations] == [
            (Fraction(1), 'cut_coincidence', (1, 2)),
        ]
        with pytest.raises(CutCoincidenceError):
            compile_loop(traj, Presentation(Family.S, 2, 'ring'), 'Q')

    def test_端點重合列入報告(self):
        traj = make_trajectory([[(0, 0), (1, 1)], [(0, 0), (1, 2)], [(0, 3), (1, 3)]])
        report = validate(traj, 'Q3')
        assert report.to_dict()['violations'] == [
            {'time': '0', 'kind': 'endpoint_mismatch', 'particles': [1, 2]},
        ]

    def test_預設使用軌跡策略(self):
        traj = make_trajectory([[(0, 0), (1, 1)], [(0, 1), (1, 0)]], policy='Q2')
        assert validate(traj).policy is CoincidencePolicy.Q2
        assert not validate(traj).ok

    def test_報告序列化(self, triple):
        data = validate(triple, 'Q3').to_dict()
        assert data['ok'] is False
        assert data['violations'][0] == {'time': '1/2', 'kind': 'triple', 'particles': [1, 2, 3]}

    @pytest.mark.parametrize("policy,family", [
        ('Q', Family.S), ('Q3', Family.T), ('Q22', Family.F), ('Q3_22', Family.W),
    ])
    def test_驗證與編譯一致(self, triple, double_pair, crossing, policy, family):
        for traj in (triple, double_pair, crossing):
            presentation = Presentation(family, traj.n_particles)
            if validate(traj, policy).ok:
                compile_loop(traj, presentation, policy)
            else:
                with pytest.raises(PolicyViolationError):
                    compile_loop(traj, presentation, policy)


class TestCompileLoop:
    """迴圈編譯測試"""

    def test_單次交叉(self, crossing):
        result = compile_loop(crossing, Presentation(Family.S, 2))
        assert str(result.element.normal_word) == "s1"
        assert result.is_pure is False

    def test_T3純迴圈非平凡(self):
        traj = swap_loop(3, [1, 2] * 3)
        result = compile_loop(traj, Presentation(Family.T, 3), 'Q3')
        assert str(result.word) == "s1 s2 s1 s2 s1 s2"
        assert result.is_pure
        assert not result.element.certificate.is_identity()

    def test_S3中同一迴圈為單位元(self):
        traj = swap_loop(3, [1, 2] * 3)
        result = compile_loop(traj, Presentation(Family.S, 3), 'Q')
        assert result.element.is_identity()
        assert result.is_pure

    def test_三重點在S中解析(self, triple):
        result = compile_loop(triple, Presentation(Family.S, 3), 'Q')
        assert str(result.word) == "s1 s2 s1"
        assert str(result.element.normal_word) == "s1 s2 s1"

    def test_三重點在T中為錯誤(self, triple):
        with pytest.raises(PolicyViolationError) as exc_info:
            compile_loop(triple, Presentation(Family.T, 3), 'Q3')
        assert exc_info.value.details['violations'][0]['kind'] == 'triple'

    def test_ring繞行為平移(self, ring_loop):
        p = Presentation(Family.S, 2, 'ring')
        result = compile_loop(ring_loop, p)
        assert wreath_equal(result.element, translation(p, 1))
        assert result.is_pure

    def test_ring反向繞行(self):
        traj = make_trajectory([[(0, "1/10"), (1, "-9/10")], [(0, "1/2"), (1, "1/2")]], 'ring', 1)
        p = Presentation(Family.S, 2, 'ring')
        assert wreath_equal(compile_loop(traj, p).element, translation(p, 1, -1))

    def test_Q2剛性旋轉(self):
        half = make_trajectory(
            [[(0, "1/5"), (1, "7/10")], [(0, "7/10"), (1, "6/5")]], 'ring', 1, policy='Q2'
        )
        p = Presentation(Family.S, 2, 'ring')
        step = compile_loop(half, p)
        assert step.element.winding == (0, 1)
        assert not step.is_pure
        # 第二段由交換後的標籤接續
        second = make_trajectory(
            [[(0, "7/10"), (1, "6/5")], [(0, "6/5"), (1, "17/10")]], 'ring', 1, policy='Q2'
        )
        assert wreath_equal(compile_loop(second, p).element, step.element)
        full = compile_loop(half.concat(second), p)
        assert full.element.winding == (1, 1)
        assert full.element.strand.is_identity()
        assert wreath_equal(full.element, wreath_power(step.element, 2))

    def test_Q2下的交叉(self, crossing):
        with pytest.raises(PolicyViolationError):
            compile_loop(crossing, Presentation(Family.S, 2), 'Q2')

    def test_策略與群族不相容(self, crossing):
        with pytest.raises(PolicyMismatchError):
            compile_loop(crossing, Presentation(Family.S, 2), 'Q3')

    def test_幾何不符(self, crossing):
        with pytest.raises(GeometryMismatchError):
            compile_loop(crossing, Presentation(Family.S, 2, 'ring'))

    def test_粒子數不符(self, crossing):
        with pytest.raises(PresentationMismatchError):
            compile_loop(crossing, Presentation(Family.S, 3))

    def test_非迴圈(self):
        traj = make_trajectory([[(0, 0), (1, 5)], [(0, 1), (1, 1)]])
        with pytest.raises(EndpointMismatchError, match="not a loop"):
            compile_loop(traj, Presentation(Family.S, 2))

    def test_結果序列化(self, ring_loop):
        data = compile_loop(ring_loop, Presentation(Family.S, 2, 'ring')).to_dict()
        assert data['word'] == "s1 t2 s1"
        assert data['element'] == {'winding': [1, 0], 'strand': ''}
        assert data['is_pure'] is True
        assert [e['kind'] for e in data['events']] == ['crossing', 'cut_crossing']

    def test_端點置換與繞圈(self, ring_loop, crossing):
        assert endpoint_permutation(crossing) == Permutation((2, 1))
        assert displacement_windings(ring_loop) == (1, 0)


class TestLoopLaws:
    """模糊測試：編譯器的代數性質"""

    INTERVAL_BASE = [Fraction(10 * k + 1) for k in range(4)]
    RING_BASE = [Fraction(10 * k + 3) for k in range(3)]
    RING_LENGTH = Fraction(30)

    @staticmethod
    def compiler(presentation, policy=None):
        return lambda traj: compile_loop(traj, presentation, policy)

    @staticmethod
    def ends(traj):
        return [traj.position(p, traj.t_end) for p in range(1, traj.n_particles + 1)]

    @pytest.mark.parametrize("n,trials", [(3, 40), (4, 15)])
    def test_interval串接律(self, loop_factory, n, trials):
        p = Presentation(Family.S, n)
        base = self.INTERVAL_BASE[:n]
        for _ in range(trials):
            a, loop_a = loop_factory(base, base, self.compiler(p))
            b, loop_b = loop_factory(self.ends(a), base, self.compiler(p))
            joined = compile_loop(a.concat(b), p)
            assert joined.element == element_multiply(loop_a.element, loop_b.element)

    def test_T3串接律(self, loop_factory):
        p = Presentation(Family.T, 3)
        base = self.INTERVAL_BASE[:3]
        compiler = self.compiler(p, 'Q3')
        for _ in range(30):
            a, loop_a = loop_factory(base, base, compiler, retry_on=(PolicyViolationError,))
            b, loop_b = loop_factory(self.ends(a), base, compiler, retry_on=(PolicyViolationError,))
            joined = compile_loop(a.concat(b), p, 'Q3')
            assert joined.element == element_multiply(loop_a.element, loop_b.element)

    @pytest.mark.parametrize("n", [3, 4])
    def test_interval反演律與置換一致性(self, loop_factory, n):
        p = Presentation(Family.S, n)
        base = self.INTERVAL_BASE[:n]
        for _ in range(30):
            traj, loop = loop_factory(base, base, self.compiler(p))
            assert compile_loop(traj.reverse(), p).element == element_inverse(loop.element)
            assert permutation_image(loop.element.normal_word) == endpoint_permutation(traj)
            assert loop.is_pure == endpoint_permutation(traj).is_identity()

    def test_ring串接律(self, loop_factory):
        p = Presentation(Family.S, 3, 'ring')
        base = self.RING_BASE
        kwargs = {'circumference': self.RING_LENGTH}
        for _ in range(20):
            a, loop_a = loop_factory(base, base, self.compiler(p), **kwargs)
            b, loop_b = loop_factory(self.ends(a), base, self.compiler(p), **kwargs)
            joined = compile_loop(a.concat(b), p)
            assert wreath_equal(joined.element, wreath_multiply(loop_a.element, loop_b.element))

    def test_ring反演律與一致性(self, loop_factory):
        p = Presentation(Family.S, 3, 'ring')
        for _ in range(30):
            traj, loop = loop_factory(
                self.RING_BASE, self.RING_BASE, self.compiler(p), circumference=self.RING_LENGTH
            )
            reverse = compile_loop(traj.reverse(), p)
            assert wreath_equal(reverse.element, wreath_inverse(loop.element))
            assert loop.element.permutation == endpoint_permutation(traj)
            assert loop.element.winding == displacement_windings(traj)

    def test_T3_ring繞圈一致性(self, loop_factory):
        p = Presentation(Family.T, 3, 'ring')
        compiler = self.compiler(p, 'Q3')
        for _ in range(20):
            traj, loop = loop_factory(
                self.RING_BASE, self.RING_BASE, compiler,
                retry_on=(PolicyViolationError,), circumference=self.RING_LENGTH,
            )
            assert loop.element.winding == displacement_windings(traj)
            assert loop.element.permutation == endpoint_permutation(traj)
            reverse = compile_loop(traj.reverse(), p, 'Q3')
            assert wreath_equal(reverse.element, wreath_inverse(loop.element))

    def test_正規形與原始字詞一致(self, loop_factory):
        p = Presentation(Family.S, 4)
        base = self.INTERVAL_BASE
        for _ in range(10):
            _, loop = loop_factory(base, base, self.compiler(p))
            indices = loop.word.sigma_indices()
            assert normal_form_shortlex(sigma_word(p, indices)) == loop.element


class TestPolicySoundness:
    """模糊測試：validate 為空當且僅當 compile_loop 成功"""

    LOOPS_PER_CASE = 120
    RING_LENGTH = Fraction(30)
    DETECTION_KINDS = {'degenerate_tangency', 'cut_coincidence', 'endpoint_mismatch'}

    @pytest.mark.parametrize("family,policy,n,geometry", [
        (Family.S, 'Q', 3, 'interval'),
        (Family.S, 'Q', 4, 'ring'),
        (Family.S, 'Q2', 3, 'interval'),
        (Family.T, 'Q3', 4, 'interval'),
        (Family.T, 'Q3', 3, 'ring'),
        (Family.F, 'Q22', 4, 'interval'),
        (Family.F, 'Q22', 4, 'ring'),
        (Family.W, 'Q3_22', 4, 'interval'),
        (Family.W, 'Q3_22', 4, 'ring'),
    ])
    def test_驗證與編譯一致(self, rng, family, policy, n, geometry):
        presentation = Presentation(family, n, geometry)
        length = self.RING_LENGTH if geometry == 'ring' else None
        base = [Fraction(7 * k + 3) for k in range(n)]
        for _ in range(self.LOOPS_PER_CASE):
            traj = random_loop(rng, base, base, circumference=length, spread=15)
            report = validate(traj, policy)
            if report.ok:
                loop = compile_loop(traj, presentation, policy)
                expected = endpoint_permutation(traj)
                if geometry == 'ring':
                    assert loop.element.permutation == expected
                    assert loop.element.winding == displacement_windings(traj)
                else:
                    assert permutation_image(loop.element.normal_word) == expected
                assert loop.is_pure == expected.is_identity()
                continue

            with pytest.raises(TrajectoryError) as exc_info:
                compile_loop(traj, presentation, policy)
            kind = report.violations[0].kind
            if kind in self.DETECTION_KINDS:
                assert exc_info.value.code == kind
            else:
                assert exc_info.value.code == 'policy_violation'
                assert len(exc_info.value.details['violations']) == len(report.violations)
