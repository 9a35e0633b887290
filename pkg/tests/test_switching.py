import pytest

from dosquant import switching
from dosquant.attack import AttackTrace
from dosquant.errors import ScenarioError
from dosquant.switching import SwitchingSignal

TS = 0.1


def test_mode_at_right_continuous():
    s = SwitchingSignal([(0.0, 0), (1.0, 1), (3.0, 0)], tau_d=1.0)
    assert [s.mode_at(t) for t in (0.0, 0.99, 1.0, 2.5, 3.0)] == [0, 0, 1, 1, 0]
    assert s.switches_in(0.5, 3.0) == [(1.0, 1)]


def test_dwell_and_shape_validation():
    with pytest.raises(ScenarioError):
        SwitchingSignal([(0.0, 0), (1.0, 1), (1.5, 0)], tau_d=1.0)
    with pytest.raises(ScenarioError):
        SwitchingSignal([(0.5, 0)])
    with pytest.raises(ScenarioError):
        SwitchingSignal([(0.0, 0), (1.0, 0)])
    with pytest.raises(ScenarioError):
        SwitchingSignal([(0.0, 0), (1.05, 1)], align=True).check(TS, 2)
    with pytest.raises(ScenarioError):
        SwitchingSignal([(0.0, 0), (1.0, 2)]).check(TS, 2)


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("align", [False, True])
def test_generated_signal_respects_dwell(seed, align):
    s = switching.generate_switching(3, 2.0, 100.0, align, seed, TS)
    times = [t for t, _ in s.switches]
    assert all(b - a >= 2.0 - 1e-9 for a, b in zip(times[1:], times[2:]))
    s.check(TS, 3)


def test_controller_view_and_async_lengths():
    s = SwitchingSignal([(0.0, 0), (0.35, 1)])
    tr = AttackTrace([(0.3, 0.25)], 2.0)          # samples 3, 4, 5 attacked
    assert switching.controller_mode_at(s, tr, 0.45, TS) == 0
    assert switching.controller_mode_at(s, tr, 0.6, TS) == 1
    assert switching.asynchronous_lengths(s, tr, TS, 2.0) == [3]
    assert switching.asynchronous_lengths(s, None, TS, 2.0) == [1]


def test_virtual_switch_steps():
    assert switching.virtual_switch_steps(2.0, TS, 65) == {20, 40, 60}
    assert switching.virtual_switch_steps(0.25, TS, 9) == {3, 5, 8}


def test_csv_round_trip(tmp_path):
    s = switching.generate_switching(2, 1.0, 30.0, False, 3)
    path = tmp_path / "s.csv"
    switching.write_csv(s, path)
    assert switching.read_csv(path, 1.0).switches == s.switches
