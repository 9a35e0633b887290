"""Switching signals with a dwell time, the controller's delayed view of them, CSV."""

import csv
import math
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .errors import ScenarioError

_EPS = 1e-9


@dataclass
class SwitchingSignal:
    """Piecewise-constant plant mode; ``switches[0]`` is ``(0.0, initial_mode)``.

    Modes are 0-based in memory and 1-based in files.
    """

    switches: list = field(default_factory=lambda: [(0.0, 0)])
    tau_d: float = math.inf
    align: bool = False
    N_max: int = None

    def __post_init__(self):
        self.switches = [(float(t), int(q)) for t, q in self.switches]
        if not self.switches or self.switches[0][0] != 0.0:
            raise ScenarioError("switching signal must start at t = 0", "switching")
        for (t0, q0), (t1, q1) in zip(self.switches, self.switches[1:]):
            if q0 == q1:
                raise ScenarioError("consecutive modes must differ", "switching")
            if t0 > 0 and t1 - t0 < self.tau_d - _EPS:
                raise ScenarioError(f"switches at {t0} and {t1} violate the dwell time",
                                    "switching")
            if t1 <= t0:
                raise ScenarioError("switching instants must increase", "switching")
        self._times = [t for t, _ in self.switches]

    def mode_at(self, t):
        """sigma(t), right-continuous."""
        return self.switches[bisect_right(self._times, t) - 1][1]

    def switches_in(self, t0, t1):
        """Switching instants in the open interval (t0, t1)."""
        return [(t, q) for t, q in self.switches[1:] if t0 < t < t1]

    def check(self, tau_s, m):
        """Raise unless modes are in range and, when aligned, instants sit on the grid."""
        for t, q in self.switches:
            if not 0 <= q < m:
                raise ScenarioError(f"mode {q + 1} out of range 1..{m}", "switching")
            if self.align and abs(t / tau_s - round(t / tau_s)) > 1e-6:
                raise ScenarioError(f"switch at {t} is not a sampling instant", "switching")


def generate_switching(m, tau_d, horizon, align, seed, tau_s=None, initial=None):
    """Random switching signal with inter-switch gaps drawn from [tau_d, 2 tau_d].

    With ``align`` each instant is moved up to the next multiple of ``tau_s``.
    """
    if not tau_d > 0:
        raise ValueError("tau_d must be positive")
    if align and tau_s is None:
        raise ValueError("aligned switching needs tau_s")
    rng = np.random.default_rng(seed)
    mode = int(rng.integers(m)) if initial is None else int(initial)
    out = [(0.0, mode)]
    t = 0.0
    while m > 1:
        t += rng.uniform(tau_d, 2.0 * tau_d)
        if align:
            t = math.ceil(t / tau_s - 1e-9) * tau_s
        if t >= horizon:
            break
        mode = (mode + 1 + int(rng.integers(m - 1))) % m
        out.append((t, mode))
    return SwitchingSignal(out, tau_d, align)


def transmission_ok(trace, t):
    return trace is None or not trace.attacked(t)


def controller_mode_at(signal, trace, t, tau_s):
    """Mode held by the controller at time t.

    It is the plant mode at the latest sampling instant <= t whose
    transmission got through; before any success it is the initial mode.
    """
    k = math.floor(t / tau_s + 1e-9)
    while k >= 0:
        tk = k * tau_s
        if transmission_ok(trace, tk):
            return signal.mode_at(tk)
        k -= 1
    return signal.switches[0][1]


def asynchronous_lengths(signal, trace, tau_s, horizon):
    """Sampling periods each switch stays unknown to the controller."""
    out = []
    for ts, _ in signal.switches[1:]:
        k = math.ceil(ts / tau_s - 1e-9)
        while k * tau_s <= horizon and not transmission_ok(trace, k * tau_s):
            k += 1
        out.append(math.ceil((k * tau_s - ts) / tau_s - 1e-9) if k * tau_s > ts + _EPS else 0)
    return out


def virtual_switch_steps(tau_d, tau_s, count):
    """Sampling indices k >= 1 that first reach j*tau_d, j = 1, 2, ..."""
    steps, j = set(), 1
    while True:
        k = math.ceil(j * tau_d / tau_s - 1e-9)
        if k >= count:
            return steps
        steps.add(k)
        j += 1


def write_csv(signal, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time_s", "mode"])
        for t, q in signal.switches:
            w.writerow([repr(t), q + 1])


def read_csv(path, tau_d=0.0, align=False):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    try:
        switches = [(float(r["time_s"]), int(r["mode"]) - 1) for r in rows]
    except (KeyError, ValueError) as exc:
        raise ScenarioError(f"bad switching CSV: {exc}", str(path)) from exc
    return SwitchingSignal(switches, tau_d, align)
