"""Closed-loop simulation of the quantized, attacked, switched loop.

Event order at each sampling instant t_k: sample, encode, channel, decode,
controller update, trace row.  The range for t_{k+1} is computed once
t_{k+1} is reached, because the case of the step depends on whether a switch
happened inside it.

Active strategies integrate the loop in ``[xhat; e]`` coordinates with
``e = x - xhat``.  The predictor follows the canonical one-period map, so the
encoder mirror and the controller hold bit-identical copies, and the
quantizer offset ``x - center`` is available as ``e`` without cancellation
while the range shrinks much faster than the state.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import attack as attack_mod
from . import switching as switching_mod
from .attack import AttackParams, AttackTrace
from .benchmarks import PLANTS
from .constants import (derive_strategy1, derive_strategy2, derive_strategy3,
                        derive_strategy4)
from .controller import predict
from .errors import (InfeasibleError, ProtocolError, SaturationError, ScenarioError)
from .linalg import mat_exp
from .plant import DEFAULT_GRID, PER_MODE, PER_PAIR, SwitchedPlant, discretize
from .quantizer import (ACTIVE, STRATEGIES, QuantizerPair, StepInfo,
                        ack_aware_factor, async_start_index, box_offset,
                        case_label, classify_case, encode_offset, rebuild_blackout)
from .switching import SwitchingSignal

_EPS = 1e-9


# ---------------------------------------------------------------- scenario

@dataclass
class Scenario:
    """A complete run description.

    ``attack`` is AttackParams (generated from the seed), an AttackTrace or
    None (no attacks).  ``switching`` is a SwitchingSignal, a dict with
    ``tau_d``, ``align`` and optionally ``initial`` (generated from the
    seed), or None (mode 0 forever).
    """

    plant: SwitchedPlant
    strategy: str
    N: int
    x0: np.ndarray
    horizon: float
    seed: int = 0
    attack: object = None
    switching: object = None
    N_max: int = 1
    n_max: int = 1
    n_min: int = 1
    tau_d: float = math.inf
    overrides: dict = field(default_factory=dict)
    grid: int = DEFAULT_GRID
    name: str = ""

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ScenarioError(f"unknown strategy '{self.strategy}'", "strategy.kind")
        self.x0 = np.asarray(self.x0, dtype=float)
        if self.x0.shape != (self.plant.nx,):
            raise ScenarioError(f"x0 needs {self.plant.nx} entries", "sim.x0")
        if not self.horizon >= 0:
            raise ScenarioError("horizon must be non-negative", "sim.horizon")
        if np.max(np.abs(self.x0), initial=0.0) > self.plant.E0:
            raise ScenarioError("initial state must lie inside the initial range E0",
                                "sim.x0")


def build_model(sc):
    return discretize(sc.plant, grid=sc.grid, overrides=sc.overrides or None)


def derive_constants(sc, model):
    s = sc.strategy
    if s in ("S1", "S1-Corollary"):
        return derive_strategy1(model, sc.N, sc.N_max)
    if s == "S2":
        return derive_strategy2(model, sc.N, sc.N_max, sc.n_max)
    if s == "S3":
        return derive_strategy3(model, sc.N)
    return derive_strategy4(model, sc.N, sc.n_min, sc.n_max, sc.tau_d)


def child_seeds(seed):
    """Independent 64-bit seeds for the attack and switching generators."""
    kids = np.random.SeedSequence(int(seed)).spawn(2)
    return [int(k.generate_state(1, dtype=np.uint64)[0]) for k in kids]


def _async_periods(t, acked, tau_s):
    """Periods from a switch at t until the first received sampling instant."""
    j = math.ceil(t / tau_s - _EPS)
    while j < len(acked) and not acked[j]:
        j += 1
    return max(0, math.ceil(j - t / tau_s - _EPS))


def push_switches(signal, acked, tau_s, N_max, horizon):
    """Delay switches until every asynchronous stage lasts at most N_max periods."""
    out = [signal.switches[0]]
    for t, mode in signal.switches[1:]:
        if len(out) > 1:
            t = max(t, out[-1][0] + signal.tau_d)
        while _async_periods(t, acked, tau_s) > N_max:
            t += tau_s
        if signal.align:
            t = round(t / tau_s) * tau_s
        if t >= horizon:
            break
        if mode == out[-1][1]:
            continue
        out.append((t, mode))
    return SwitchingSignal(out, signal.tau_d, signal.align, N_max)


def realize(sc, steps):
    """Attack trace and switching signal for the scenario (joint generation)."""
    ts = sc.plant.tau_s
    a_seed, s_seed = child_seeds(sc.seed)
    span = max(sc.horizon, ts)
    if isinstance(sc.attack, AttackTrace):
        trace = sc.attack
    elif isinstance(sc.attack, AttackParams):
        trace = attack_mod.generate(sc.attack, span + ts, a_seed, ts)
        verdict = attack_mod.verify(trace, sc.attack, ts)
        if not verdict.ok:
            raise InfeasibleError(f"generated attack violates {verdict.violation}",
                                  binding=verdict.violation)
    else:
        trace = AttackTrace([], span)
    acked = ~trace.attacked_samples(ts, steps + 1)
    sw = sc.switching
    if isinstance(sw, SwitchingSignal):
        signal = sw
    elif isinstance(sw, dict):
        signal = switching_mod.generate_switching(
            sc.plant.m, sw["tau_d"], span, bool(sw.get("align", False)), s_seed, ts,
            sw.get("initial"))
        if sc.strategy != "S4-TT" and sc.strategy != "S4-ET":
            signal = push_switches(signal, acked, ts, sc.N_max, span)
    else:
        signal = SwitchingSignal([(0.0, 0)])
    signal.check(ts, sc.plant.m)
    return trace, signal, acked


# ---------------------------------------------------------------- kernels

class Propagator:
    """Cached one-period and partial-period maps of the loop."""

    def __init__(self, model):
        self.model = model
        p = model.plant
        self.nx = p.nx
        self._cache = {}
        self._M = {}
        self._P = {}
        for a in range(p.m):
            for b in range(p.m):
                abar_bb = p.Abar(b, b)
                M = np.zeros((2 * p.nx, 2 * p.nx))
                M[:p.nx, :p.nx] = abar_bb
                M[p.nx:, :p.nx] = p.Abar(a, b) - abar_bb
                M[p.nx:, p.nx:] = p.A[a]
                self._M[(a, b)] = M
        for a in range(p.m):
            Pm = np.zeros((p.nx + p.nu, p.nx + p.nu))
            Pm[:p.nx, :p.nx] = p.A[a]
            Pm[:p.nx, p.nx:] = p.B[a]
            self._P[a] = Pm

    def active(self, p, q, dt):
        """Map of [xhat; e] over dt with plant mode p and controller mode q."""
        key = ("a", p, q, dt)
        m = self._cache.get(key)
        if m is None:
            m = self._cache[key] = mat_exp(self._M[(p, q)], dt)
        return m

    def passive(self, p, dt):
        """Map of [x; u] over dt with plant mode p and a held input."""
        key = ("p", p, dt)
        m = self._cache.get(key)
        if m is None:
            m = self._cache[key] = mat_exp(self._P[p], dt)
        return m


def segments(signal, t0, t1, tau_s):
    """[(mode, duration)] covering [t0, t1) plus the first switch time inside it."""
    tol = _EPS * tau_s
    mode = signal.mode_at(t0 + tol)
    inside = [(t, m) for t, m in signal.switches[1:] if t0 + tol < t < t1 - tol]
    if not inside:
        return [(mode, tau_s)], None
    out, t = [], t0
    for ts_, m in inside:
        out.append((mode, ts_ - t))
        t, mode = ts_, m
    out.append((mode, t1 - t))
    return out, inside[0][0]


def stage_offset(model, e_hist, stage, k):
    """x - center during an asynchronous rollout: exp(A_p n tau_s) e(start).

    The plant and the rolled-out center share the predictor input, so their
    difference is driven by the open-loop plant alone and needs no
    subtraction of nearly equal vectors.
    """
    start, p = stage
    v = e_hist[start]
    for _ in range(k - start):
        v = model.Ahd[p] @ v
    return v


def step_active(prop, segs, q, xhat, e):
    """One period of the active loop: (xhat_next, e_next)."""
    xhat_next = predict(prop.model.Ad[q], xhat)
    z = np.concatenate([xhat, e])
    for p, dt in segs:
        z = prop.active(p, q, dt) @ z
    return xhat_next, z[prop.nx:]


def step_passive(prop, segs, x, u):
    """One period of the passive loop with held input u."""
    nx = prop.nx
    for p, dt in segs:
        P = prop.passive(p, dt)
        x = P[:nx, :nx] @ x + P[:nx, nx:] @ u
    return x


# ---------------------------------------------------------------- results

@dataclass
class SimResult:
    scenario: Scenario
    columns: list
    rows: list
    events: list
    summary: dict
    E_enc: np.ndarray
    E_dec: np.ndarray
    E_hat: np.ndarray
    x_norm: np.ndarray
    offset_norm: np.ndarray
    acked: np.ndarray
    trace: AttackTrace
    signal: SwitchingSignal

    def trace_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(v) for v in r])
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return v


def _columns(nx, nu):
    return (["k", "t", "mode", "mode_hat", "ack", "sync", "case", "E_enc", "E_dec",
             "offset", "symbol"]
            + [f"x{i + 1}" for i in range(nx)] + [f"xhat{i + 1}" for i in range(nx)]
            + [f"u{i + 1}" for i in range(nu)])


# ---------------------------------------------------------------- engine

def run(sc, model=None, constants=None):
    """Simulate ``sc`` and check the range, uniformity and saturation invariants."""
    model = model if model is not None else build_model(sc)
    consts = constants if constants is not None else derive_constants(sc, model)
    plant, ts = model.plant, model.tau_s
    nx, nu = plant.nx, plant.nu
    steps = int(math.floor(sc.horizon / ts + _EPS))
    trace, signal, acked = realize(sc, steps)
    s = sc.strategy
    active = s in ACTIVE
    if s in ("S4-TT", "S4-ET", "S1-Corollary") and len(signal.switches) > 1:
        for t, _ in signal.switches[1:]:
            if abs(t / ts - round(t / ts)) > 1e-6:
                raise ScenarioError(f"{s} needs switches on sampling instants", "switching")
    if s not in ("S4-TT", "S4-ET") and len(signal.switches) > 1:
        lengths = switching_mod.asynchronous_lengths(signal, trace, ts, sc.horizon)
        if lengths and max(lengths) > sc.N_max:
            raise InfeasibleError(
                f"asynchronous stage of {max(lengths)} periods exceeds N_max = {sc.N_max}",
                binding="N_max")

    depth = max(sc.n_max, sc.N_max, sc.n_min + sc.n_max) + 2
    sw_steps = {int(round(t / ts)) for t, _ in signal.switches[1:]
                if abs(t / ts - round(t / ts)) <= 1e-6}
    virtual = switching_mod.virtual_switch_steps(sc.tau_d, ts, steps + 2) \
        if s == "S4-TT" and math.isfinite(sc.tau_d) else set()
    pair = QuantizerPair(s, consts, model, plant.E0, nx, depth,
                         virtual_switches=virtual, switch_steps=sw_steps)
    prop = Propagator(model)

    cols = _columns(nx, nu)
    rows, events = [], []
    n_rows = steps + 1 if sc.horizon > 0 else 0
    E_enc = np.full(n_rows, np.nan)
    E_dec = np.full(n_rows, np.nan)
    E_hat = np.full(n_rows, np.nan)
    x_norm = np.full(n_rows, np.nan)
    off_norm = np.full(n_rows, np.nan)
    counts = {"saturations": 0, "range_violations": 0, "uniformity_violations": 0,
              "replay_mismatches": 0, "zoom_outs": 0, "replays": 0}

    xhat = np.zeros(nx)            # predictor (active) / held estimate (passive)
    e = sc.x0.copy()               # x - xhat (active)
    x = sc.x0.copy()               # plant state (passive)
    q = signal.mode_at(0.0)        # controller mode
    sy, ack_prev = True, True
    async_start = None
    last_rx = -1
    enc_steps = {}                 # true StepInfo since the last reception
    xhat_hist = {0: xhat}
    e_hist = {0: e}
    stage = None                   # (start index, plant mode) of an async-centred range
    Ehat = plant.E0
    status = "ok"
    zoom_known = 0
    prev_case = None

    def xhat_at(j):
        return xhat_hist[j]

    for k in range(n_rows):
        t = k * ts
        mode = signal.mode_at(t + _EPS * ts)
        ack = bool(acked[k])
        enc = pair.enc
        if active:
            if enc.kind == "predictor":
                d = e.copy()
            elif enc.kind == "async":
                d = stage_offset(model, e_hist, stage, k)
            else:
                d = (xhat + e) - enc.center
            x_now = xhat + e
        else:
            d = x - enc.center
            x_now = x
        dn = float(np.max(np.abs(d)))
        E_enc[k], E_dec[k], E_hat[k] = enc.E, pair.dec.E, Ehat
        x_norm[k], off_norm[k] = float(np.max(np.abs(x_now))), dn
        if dn > enc.E:
            counts["range_violations"] += 1
        try:
            sym = encode_offset(d, enc.E, consts.N)
        except SaturationError as exc:
            counts["saturations"] += 1
            events.append({"k": k, "t": t, "event": "saturation", "excess": exc.excess})
            status = "saturated"
            rows.append(_row(k, t, mode, q, ack, sy, prev_case, enc.E, pair.dec.E, dn, None,
                             x_now, xhat, np.zeros(nu)))
            break

        if ack:
            if not pair.agree():
                counts["uniformity_violations"] += 1
                events.append({"k": k, "t": t, "event": "uniformity_violation"})
            off = box_offset(sym, pair.dec.E, consts.N, nx)
            if active:
                if pair.dec.kind != "origin":
                    xhat, e = pair.dec.center + off, d - off
                else:
                    c = pair.dec.center + off
                    xhat, e = c, (xhat + e) - c
            else:
                xhat = pair.dec.center + off
            if mode != q:
                events.append({"k": k, "t": t, "event": "mode_update", "mode": mode + 1})
            q = mode
            last_rx = k
            enc_steps = {}
        elif not active:
            xhat = np.zeros(nx)
        K_q = plant.K[q]
        u = K_q @ xhat
        rows.append(_row(k, t, mode, q, ack, sy, prev_case, enc.E, pair.dec.E, dn, sym,
                         x_now, xhat, u))
        if k == n_rows - 1:
            break

        segs, first_switch = segments(signal, t, (k + 1) * ts, ts)
        if k in sw_steps:
            first_switch = t            # switch exactly at t_k
        if first_switch is not None:
            events.append({"k": k, "t": first_switch, "event": "switch"})
        if active:
            xhat_next, e_next = step_active(prop, segs, q, xhat, e)
            x_next = None
        else:
            x_next = step_passive(prop, segs, x, u)
        p_end = segs[-1][0]
        sy_next = all(p == q for p, _ in segs)
        if sy and not sy_next:
            async_start = async_start_index(first_switch, ts)
        ack_next = bool(acked[k + 1])
        case = classify_case(sy, sy_next, ack, ack_next)
        label = case_label(case, ack_prev, sy)
        info = StepInfo(k, case, label, p_end, q, ack, ack_next, first_switch,
                        None if sy_next else async_start)
        xhat_hist[k + 1] = xhat_next if active else np.zeros(nx)
        xhat_hist.pop(k + 1 - depth - 1, None)
        if active:
            e_hist[k + 1] = e_next
            e_hist.pop(k + 1 - depth - 1, None)

        xn = float(np.max(np.abs(x_next))) if x_next is not None else 0.0
        if pair.encoder_step(info, xhat_at, xn):
            counts["zoom_outs"] += 1
            events.append({"k": k + 1, "t": t + ts, "event": "zoom_out"})
        enc_steps[k] = info
        if pair.enc.kind == "async":
            stage = (info.async_start, info.p)

        # decoder
        if s == "S4-ET":
            zooms = [z for z in pair.zooms if z > last_rx]
            if ack_next and zooms and zooms[-1] > zoom_known:
                pair.decoder_step(info)
                pair.decoder_zoom_replay(k + 1, k + 1 - zooms[-1])
                zoom_known = zooms[-1]
                counts["replays"] += 1
            else:
                pair.decoder_step(info)
        elif s == "S4-TT":
            pair.decoder_step(info)
        else:
            unknown = [(tt, m) for tt, m in signal.switches[1:]
                       if last_rx * ts + _EPS < tt < t + ts - _EPS]
            if len(unknown) > 1:
                raise ProtocolError("more than one switch inside one blackout")
            if ack_next and unknown:
                tsw, p_new = unknown[0]
                first = int(math.floor(tsw / ts + _EPS))
                rebuilt = rebuild_blackout(first, k, tsw, p_new, q,
                                           {j: acked[j] for j in range(max(first - 1, 0), k + 1)},
                                           ts)
                truth = [enc_steps.get(j) for j in range(first, k + 1)]
                if rebuilt != truth:
                    counts["replay_mismatches"] += 1
                    events.append({"k": k + 1, "t": t + ts, "event": "replay_mismatch"})
                pair.decoder_replay(rebuilt, xhat_at)
                counts["replays"] += 1
                events.append({"k": k + 1, "t": t + ts, "event": "replay",
                               "from": first})
            elif unknown:
                bcase = 1 if ack else 2
                pair.decoder_step(StepInfo(k, bcase, case_label(bcase, ack_prev, True),
                                           q, q, ack, ack_next), xhat_at)
            else:
                pair.decoder_step(info, xhat_at)

        if s == "S4-TT":
            blabel = case_label(1 if ack else 2, ack_prev, True)
            Ehat *= ack_aware_factor(consts, blabel, (k + 1) in sw_steps)

        if active:
            xhat, e = xhat_next, e_next
        else:
            x = x_next
        sy, ack_prev = sy_next, ack
        if sy_next:
            async_start = None
        prev_case = label

    final = x_norm[len(rows) - 1] if rows else float(np.max(np.abs(sc.x0)))
    x0n = float(np.max(np.abs(sc.x0)))
    for h, dur in trace.intervals:
        if h < sc.horizon:
            events.append({"k": int(math.ceil(h / ts - _EPS)), "t": h,
                           "event": "attack", "duration": dur})
    events.sort(key=lambda ev: (ev["t"], ev["event"]))
    summary = {
        "name": sc.name, "strategy": s, "seed": int(sc.seed), "N": int(consts.N),
        "steps": len(rows), "horizon": sc.horizon, "status": status,
        **counts,
        "x0_norm": x0n, "final_norm": float(final),
        "converged": bool(final <= 1e-2 * x0n),
        "attacks": len(trace.intervals), "switches": len(signal.switches) - 1,
        "attacked_samples": int((~acked[:len(rows)]).sum()),
    }
    return SimResult(sc, cols, rows, events, summary, E_enc[:len(rows)], E_dec[:len(rows)],
                     E_hat[:len(rows)], x_norm[:len(rows)], off_norm[:len(rows)],
                     acked[:len(rows)], trace, signal)


def _row(k, t, mode, q, ack, sy, case, E_enc, E_dec, offset, sym, x, xhat, u):
    return [k, t, mode + 1, q + 1, bool(ack), bool(sy), case, E_enc, E_dec, offset, sym,
            *x.tolist(), *xhat.tolist(), *np.asarray(u).tolist()]


# ---------------------------------------------------------------- checks

def replay_invariants(columns, rows):
    """Scan trace rows and report violations per invariant class.

    Works on ``SimResult.columns/rows`` or on a parsed trace.csv (strings are
    converted).  Each class maps to the list of offending row indices.
    """
    col = {name: i for i, name in enumerate(columns)}
    report = {"order": [], "range": [], "uniformity": [], "nonpositive_range": []}
    prev_t = -math.inf
    for i, r in enumerate(rows):
        t = float(r[col["t"]])
        E_enc, E_dec = float(r[col["E_enc"]]), float(r[col["E_dec"]])
        if not t > prev_t:
            report["order"].append(i)
        prev_t = t
        if not (E_enc > 0 and E_dec > 0):
            report["nonpositive_range"].append(i)
        if float(r[col["offset"]]) > E_enc:
            report["range"].append(i)
        if int(r[col["ack"]]) and E_enc != E_dec:
            report["uniformity"].append(i)
    return report


def read_trace(path):
    """(columns, rows) of a trace.csv, values kept as strings."""
    with open(path, newline="") as fh:
        data = list(csv.reader(fh))
    if not data:
        raise ScenarioError("empty trace file", str(path))
    return data[0], data[1:]


def zoom_episodes(result):
    """Zoom-outs per attack episode (an attack plus the sleep that follows it)."""
    ts = result.scenario.plant.tau_s
    starts = [int(math.ceil(h / ts - _EPS)) for h, _ in result.trace.intervals]
    zooms = [ev["k"] for ev in result.events if ev["event"] == "zoom_out"]
    bounds = [0] + starts + [10 ** 12]
    return [sum(1 for z in zooms if lo < z <= hi) for lo, hi in zip(bounds, bounds[1:])]


# ---------------------------------------------------------------- files

def _matrix_list(value, path):
    try:
        return [np.array(v, dtype=float).tolist() for v in value]
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"not a list of matrices: {exc}", path) from exc


def scenario_from_dict(doc, base_dir=None):
    """Validate a scenario document and build a Scenario."""
    import os

    def need(d, key, path):
        if not isinstance(d, dict) or key not in d:
            raise ScenarioError("missing required field", f"{path}.{key}" if path else key)
        return d[key]

    def rel(p):
        return p if base_dir is None or os.path.isabs(p) else os.path.join(base_dir, p)

    pl = need(doc, "plant", "")
    if "example" in pl:
        name = pl["example"]
        if name not in PLANTS:
            raise ScenarioError(f"unknown example plant '{name}'", "plant.example")
        kw = {k: pl[k] for k in ("tau_s", "E0") if k in pl}
        plant = PLANTS[name](**kw)
    else:
        try:
            plant = SwitchedPlant(A=_matrix_list(need(pl, "A", "plant"), "plant.A"),
                                  B=_matrix_list(need(pl, "B", "plant"), "plant.B"),
                                  K=_matrix_list(need(pl, "K", "plant"), "plant.K"),
                                  tau_s=float(need(pl, "tau_s", "plant")),
                                  E0=float(pl.get("E0", 1.0)))
        except ScenarioError:
            raise
        except ValueError as exc:
            raise ScenarioError(str(exc), "plant") from exc
    st = need(doc, "strategy", "")
    kind = need(st, "kind", "strategy")
    N = need(st, "N", "strategy")
    if not isinstance(N, int) or N < 3 or N % 2 == 0:
        raise ScenarioError("N must be an odd integer >= 3", "strategy.N")

    at = doc.get("attack")
    attack = None
    if at:
        if "trace" in at:
            attack = attack_mod.read_csv(rel(at["trace"]))
        elif "intervals" in at:
            attack = AttackTrace([tuple(v) for v in at["intervals"]])
        else:
            known = {"kind", "n0", "tau_D", "kappa", "T", "n_min", "n_max", "align",
                     "max_duration"}
            bad = set(at) - known
            if bad:
                raise ScenarioError(f"unknown field(s) {sorted(bad)}", "attack")
            attack = AttackParams(**{k: (math.inf if v is None else v)
                                     for k, v in at.items()})
    sw = doc.get("switching")
    switching = None
    if sw:
        if "signal" in sw:
            switching = switching_mod.read_csv(rel(sw["signal"]), sw.get("tau_d", 0.0),
                                               bool(sw.get("align", False)))
        elif "switches" in sw:
            switching = SwitchingSignal([(t, m - 1) for t, m in sw["switches"]],
                                        sw.get("tau_d", 0.0), bool(sw.get("align", False)))
        else:
            tau_d = need(sw, "tau_d", "switching")
            init = sw.get("initial")
            switching = {"tau_d": float(tau_d), "align": bool(sw.get("align", False)),
                         "initial": None if init is None else int(init) - 1}
    overrides = doc.get("overrides") or {}
    unknown = set(overrides) - set(PER_MODE + PER_PAIR)
    if unknown:
        raise ScenarioError(f"unknown decay fit(s) {sorted(unknown)}", "overrides")
    sim = need(doc, "sim", "")
    return Scenario(
        plant=plant, strategy=kind, N=N, x0=need(sim, "x0", "sim"),
        horizon=float(need(sim, "horizon", "sim")), seed=int(sim.get("seed", 0)),
        attack=attack, switching=switching, N_max=int(st.get("N_max", 1)),
        n_max=int(st.get("n_max", 1)), n_min=int(st.get("n_min", 1)),
        tau_d=float(st.get("tau_d", math.inf)), overrides=overrides,
        grid=int(doc.get("grid", DEFAULT_GRID)), name=str(doc.get("name", "")))


def load_scenario(path):
    import os
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"invalid JSON: {exc}", str(path)) from exc
    return scenario_from_dict(doc, os.path.dirname(os.path.abspath(path))), doc


def certificate_params(doc):
    """Attack/switching parameters of a scenario document, as cert.check expects."""
    at = doc.get("attack") or {}
    sw = doc.get("switching") or {}
    st = doc.get("strategy") or {}
    out = {}
    for key in ("tau_D", "T", "n0", "kappa"):
        if key in at and at[key] is not None:
            out[key] = at[key]
    tau_d = st.get("tau_d", sw.get("tau_d"))
    if tau_d is not None:
        out["tau_d"] = tau_d
    if st.get("N_max") is not None:
        out["N_max"] = st["N_max"]
    return out
