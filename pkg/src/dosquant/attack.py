"""DoS attack intervals: parameters, seeded generation, verification, CSV.

Two attack models are supported.

* ``average``: over any window [t0, t] the number of attack onsets is at most
  ``n0 + (t - t0)/tau_D`` and the attacked time at most ``kappa + (t - t0)/T``.
  An optional ``max_duration`` caps every single attack.
* ``intermittent``: consecutive attacks are separated by at least
  ``n_min`` sampling periods and last at most ``n_max`` sampling periods.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleError, ScenarioError

MAX_ATTEMPTS = 100_000
_TOL = 1e-12


@dataclass(frozen=True)
class AttackParams:
    kind: str = "average"
    n0: int = 0
    tau_D: float = math.inf
    kappa: float = 0.0
    T: float = math.inf
    n_min: int = 0
    n_max: int = 0
    align: str = "free"
    max_duration: float = math.inf

    def __post_init__(self):
        if self.kind == "average":
            if not self.T > 1:
                raise ScenarioError("attack T must exceed 1", "attack.T")
            if not self.tau_D > 0:
                raise ScenarioError("attack tau_D must be positive", "attack.tau_D")
            if self.n0 < 0 or self.kappa < 0:
                raise ScenarioError("n0 and kappa must be non-negative", "attack")
            if not self.max_duration > 0:
                raise ScenarioError("max_duration must be positive", "attack.max_duration")
        elif self.kind == "intermittent":
            if self.n_min < 1 or self.n_max < 1:
                raise ScenarioError("n_min and n_max must be at least 1", "attack")
            if self.align not in ("free", "virtual"):
                raise ScenarioError("align must be 'free' or 'virtual'", "attack.align")
        else:
            raise ScenarioError(f"unknown attack model '{self.kind}'", "attack.kind")

    def kappa_bar(self, tau_s):
        """Attacked-time offset once every attack is stretched to the next sample."""
        return self.kappa + tau_s * (self.n0 + 1)

    def inv_T_bar(self, tau_s):
        """1/T + tau_s/tau_D."""
        return 1.0 / self.T + tau_s / self.tau_D


@dataclass
class AttackTrace:
    intervals: list = field(default_factory=list)
    horizon: float = 0.0

    def __post_init__(self):
        self.intervals = [(float(h), float(d)) for h, d in self.intervals]
        last_end = -math.inf
        for h, d in self.intervals:
            if not d > 0:
                raise ScenarioError("attack durations must be positive", "attack.trace")
            if h < last_end or h < 0:
                raise ScenarioError("attack intervals must be disjoint and increasing",
                                    "attack.trace")
            last_end = h + d

    def attacked(self, t):
        """True when time t lies in some [h, h + tau)."""
        return any(h <= t < h + d for h, d in self.intervals)

    def attacked_samples(self, tau_s, count):
        """Boolean mask over sampling instants k*tau_s, k < count."""
        mask = np.zeros(count, dtype=bool)
        for h, d in self.intervals:
            lo = max(0, math.ceil(h / tau_s - 1e-9))
            hi = min(count, math.ceil((h + d) / tau_s - 1e-9))
            mask[lo:hi] = True
        return mask


def _average_ok(starts, ends, params):
    """Check every window that ends with the newest attack."""
    j = len(starts) - 1
    covered = 0.0
    for i in range(j, -1, -1):
        covered += ends[i] - starts[i]
        if j - i + 1 > params.n0 + (starts[j] - starts[i]) / params.tau_D + _TOL:
            return False
        if covered > params.kappa + (ends[j] - starts[i]) / params.T + _TOL:
            return False
    return True


def _generate_average(params, horizon, rng):
    if math.isinf(params.tau_D) and params.n0 == 0:
        return []
    mean_gap = params.tau_D if math.isfinite(params.tau_D) else horizon
    len_cap = 2.0 * (mean_gap / params.T if math.isfinite(params.T) else mean_gap / 2)
    if math.isfinite(params.T):
        # no single attack can exceed kappa*T/(T-1) under the duration budget
        len_cap = min(len_cap, params.kappa * params.T / (params.T - 1.0))
    len_cap = min(len_cap, params.max_duration)
    starts, ends, attempts = [], [], 0
    cursor = 0.0
    while True:
        attempts += 1
        if attempts > MAX_ATTEMPTS:
            raise InfeasibleError("attack generation exhausted its attempt budget",
                                  binding="frequency/duration")
        h = cursor + rng.uniform(0.0, 2.0 * mean_gap)
        if h >= horizon:
            return list(zip(starts, [e - s for s, e in zip(starts, ends)]))
        d = rng.uniform(0.0, len_cap)
        if d <= 0:
            continue
        d = min(d, horizon - h)
        starts.append(h)
        ends.append(h + d)
        if _average_ok(starts, ends, params):
            cursor = h + d
        else:
            starts.pop()
            ends.pop()


def _generate_intermittent(params, horizon, tau_s, rng):
    if tau_s is None:
        raise ScenarioError("intermittent attacks need tau_s", "attack")
    gap_min, len_max = params.n_min * tau_s, params.n_max * tau_s
    out = []
    if params.align == "virtual":
        # one attack inside each periodic attack window of the virtual schedule
        period = (params.n_min + params.n_max) * tau_s
        w = 0
        while True:
            lo = w * period + gap_min
            if lo >= horizon:
                return out
            if rng.uniform() < 0.8:
                d = rng.uniform(0.0, len_max)
                h = lo + rng.uniform(0.0, len_max - d)
                if d > 0 and h < horizon:
                    out.append((h, min(d, horizon - h)))
            w += 1
    cursor = rng.uniform(0.0, 2.0 * gap_min)
    while cursor < horizon:
        d = rng.uniform(0.0, len_max)
        if d > 0:
            out.append((cursor, min(d, horizon - cursor)))
        cursor += d + gap_min + rng.uniform(0.0, gap_min)
    return out


def generate(params, horizon, seed, tau_s=None):
    """Seeded attack trace that satisfies ``params`` on [0, horizon]."""
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    rng = np.random.default_rng(seed)
    if params.kind == "average":
        intervals = _generate_average(params, horizon, rng)
    else:
        intervals = _generate_intermittent(params, horizon, tau_s, rng)
    return AttackTrace(intervals, horizon)


@dataclass
class AttackVerdict:
    ok: bool
    violation: str = ""
    window: tuple = ()


def verify(trace, params, tau_s):
    """Check every window of the trace against ``params``; report the earliest failure."""
    iv = trace.intervals
    if params.kind == "intermittent":
        for i, (h, d) in enumerate(iv):
            if d > params.n_max * tau_s + _TOL:
                return AttackVerdict(False, "duration", (h, h + d))
            if i and h - sum(iv[i - 1]) < params.n_min * tau_s - _TOL:
                return AttackVerdict(False, "gap", (sum(iv[i - 1]), h))
        return AttackVerdict(True)
    for h, d in iv:
        if d > params.max_duration + _TOL:
            return AttackVerdict(False, "duration cap", (h, h + d))
    inv_tb, kb = params.inv_T_bar(tau_s), params.kappa_bar(tau_s)
    # windows ordered by their end point so the first failure is the earliest
    for j in range(len(iv)):
        covered = sampled = 0.0
        for i in range(j, -1, -1):
            h, d = iv[i]
            covered += d
            stretched = math.ceil((h + d) / tau_s - 1e-9) * tau_s
            sampled += max(stretched, h + d) - h
            t0, t1 = iv[i][0], iv[j][0] + iv[j][1]
            if j - i + 1 > params.n0 + (iv[j][0] - t0) / params.tau_D + _TOL:
                return AttackVerdict(False, "frequency", (t0, iv[j][0]))
            if covered > params.kappa + (t1 - t0) / params.T + _TOL:
                return AttackVerdict(False, "duration", (t0, t1))
            if sampled > kb + (t1 - t0) * inv_tb + _TOL:
                return AttackVerdict(False, "sampled duration", (t0, t1))
    return AttackVerdict(True)


def write_csv(trace, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["start_s", "duration_s"])
        for h, d in trace.intervals:
            w.writerow([repr(h), repr(d)])


def read_csv(path, horizon=None):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    try:
        intervals = [(float(r["start_s"]), float(r["duration_s"])) for r in rows]
    except (KeyError, ValueError) as exc:
        raise ScenarioError(f"bad attack CSV: {exc}", str(path)) from exc
    if horizon is None:
        horizon = max((h + d for h, d in intervals), default=0.0)
    return AttackTrace(intervals, horizon)
