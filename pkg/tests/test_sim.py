import dataclasses
import json

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from dosquant.attack import AttackParams, AttackTrace
from dosquant.benchmarks import INITIAL_STATES, plant_b, plant_c
from dosquant.errors import InfeasibleError, ScenarioError
from dosquant.linalg import mat_exp
from dosquant.sim import (Propagator, Scenario, load_scenario, read_trace, replay_invariants,
                          run, scenario_from_dict, segments, step_active, step_passive)
from dosquant.switching import SwitchingSignal

from conftest import model_for

STRATS = ["S1", "S1-Corollary", "S2", "S3", "S4-TT", "S4-ET"]


def ode_step(plant, p_of_t, q, x, xhat, t1, held_u=None):
    """Independent oracle: integrate the loop ODE with a high-order adaptive solver."""
    n = plant.nx

    def f(t, z):
        x, xh = z[:n], z[n:]
        p = p_of_t(t)
        u = plant.K[q] @ xh if held_u is None else held_u
        return np.concatenate([plant.A[p] @ x + plant.B[p] @ u, plant.Abar(q, q) @ xh])

    sol = solve_ivp(f, (0.0, t1), np.concatenate([x, xhat]), method="DOP853",
                    rtol=1e-13, atol=1e-14, max_step=t1 / 50)
    return sol.y[:n, -1], sol.y[n:, -1]


def test_one_period_active_step_matches_discrete_map():
    m = model_for("C")
    prop = Propagator(m)
    rng = np.random.default_rng(0)
    for q in range(2):
        x, xhat = rng.normal(size=4), rng.normal(size=4)
        e = x - xhat
        xh1, e1 = step_active(prop, [(q, m.tau_s)], q, xhat, e)
        assert np.allclose(xh1 + e1, m.Ad[q] @ x - m.Bd[q] @ e, atol=1e-12)
        assert np.allclose(xh1, m.Ad[q] @ xhat, atol=1e-12)


def test_one_period_passive_step_matches_discrete_map():
    m = model_for("B")
    prop = Propagator(m)
    x, c = np.array([0.7, -0.2]), np.array([0.6, -0.25])
    for p in range(2):
        u = m.plant.K[p] @ c
        got = step_passive(prop, [(p, m.tau_s)], x, u)
        assert np.allclose(got, m.Acl[p] @ x - m.Bhd[p] @ m.plant.K[p] @ (x - c), atol=1e-12)


@pytest.mark.parametrize("tsw", [0.013, 0.05, 0.0999])
def test_active_step_with_inner_switch_matches_ode(tsw):
    m = model_for("C")
    sig = SwitchingSignal([(0.0, 0), (tsw, 1)])
    segs, first = segments(sig, 0.0, m.tau_s, m.tau_s)
    assert first == tsw and len(segs) == 2
    x, xhat = np.array([1.0, -0.5, 0.3, 0.2]), np.array([0.9, -0.4, 0.2, 0.1])
    xh1, e1 = step_active(Propagator(m), segs, 0, xhat, x - xhat)
    xo, xho = ode_step(m.plant, sig.mode_at, 0, x, xhat, m.tau_s)
    assert np.allclose(xh1 + e1, xo, atol=1e-10)
    assert np.allclose(xh1, xho, atol=1e-10)


def test_passive_step_with_inner_switch_matches_ode():
    m = model_for("B")
    sig = SwitchingSignal([(0.0, 1), (0.037, 0)])
    segs, _ = segments(sig, 0.0, m.tau_s, m.tau_s)
    x, u = np.array([0.4, 0.9]), np.array([0.3, -1.1])
    got = step_passive(Propagator(m), segs, x, u)
    xo, _ = ode_step(m.plant, sig.mode_at, 1, x, np.zeros(2), m.tau_s, held_u=u)
    assert np.allclose(got, xo, atol=1e-10)


def test_splitting_a_segment_changes_nothing():
    m = model_for("C")
    prop = Propagator(m)
    z = np.arange(8.0)
    whole = prop.active(1, 0, m.tau_s) @ z
    halves = prop.active(1, 0, m.tau_s / 2) @ (prop.active(1, 0, m.tau_s / 2) @ z)
    assert np.max(np.abs(whole - halves)) <= 1e-10


def scenario(strategy, **kw):
    base = {"S4-TT": ("B", 3), "S4-ET": ("B", 3)}.get(strategy, ("C", 155))
    name, N = base
    plant = plant_b() if name == "B" else plant_c()
    defaults = dict(plant=plant, strategy=strategy, N=N, x0=INITIAL_STATES[name],
                    horizon=5.0, N_max=2, n_max=4, n_min=10, tau_d=2.0)
    if strategy in ("S1", "S1-Corollary"):
        defaults["N"] = 9
    defaults.update(kw)
    return Scenario(**defaults)


@pytest.mark.parametrize("strategy", STRATS)
def test_zero_initial_state_gives_zero_trace(strategy):
    sc = scenario(strategy, x0=np.zeros(plant_b().nx if strategy.startswith("S4")
                                        else plant_c().nx),
                  attack=AttackTrace([(0.42, 0.2), (2.0, 0.35)], 5.0))
    res = run(sc)
    cols = res.columns
    idx = [i for i, c in enumerate(cols) if c[0] in "xu" and c[1:].isdigit()
           or c.startswith("xhat")]
    assert all(r[i] == 0.0 for r in res.rows for i in idx)
    assert res.summary["saturations"] == 0


@pytest.mark.parametrize("strategy", STRATS)
def test_run_is_deterministic(strategy):
    sw = {"tau_d": 2.0, "align": True}
    at = (AttackParams(kind="intermittent", n_min=10, n_max=4) if strategy.startswith("S4")
          else AttackParams(n0=1, kappa=0.3, tau_D=2.0, T=5.0))
    sc = scenario(strategy, attack=at, switching=sw, seed=11)
    assert run(sc).trace_csv() == run(sc).trace_csv()


def test_replay_invariants_clean_corrupt_and_empty():
    sc = scenario("S3", attack=AttackParams(n0=1, kappa=0.3, tau_D=2.0, T=5.0), seed=3)
    res = run(sc)
    rep = replay_invariants(res.columns, res.rows)
    assert not any(rep.values())
    rows = [list(r) for r in res.rows]
    col = res.columns.index("E_dec")
    bad = next(i for i, r in enumerate(rows) if r[res.columns.index("ack")] and i > 3)
    rows[bad][col] *= 1.5
    assert replay_invariants(res.columns, rows)["uniformity"] == [bad]
    assert replay_invariants(res.columns, []) == {"order": [], "range": [], "uniformity": [],
                                                  "nonpositive_range": []}


def test_replay_from_csv_file(tmp_path):
    res = run(scenario("S4-ET", attack=AttackParams(kind="intermittent", n_min=10, n_max=4)))
    path = tmp_path / "trace.csv"
    path.write_text(res.trace_csv())
    cols, rows = read_trace(path)
    assert cols == res.columns and len(rows) == len(res.rows)
    assert not any(replay_invariants(cols, rows).values())


def test_saturation_stops_the_run():
    # decay fits far too optimistic: the range collapses faster than the state
    sc = scenario("S3", overrides={"rho_hat": [1.0, 1.0], "lam_hat": [0.05, 0.05]})
    res = run(sc)
    assert res.summary["status"] == "saturated"
    assert res.summary["saturations"] == 1
    assert res.events[-1]["event"] == "saturation" or any(
        ev["event"] == "saturation" for ev in res.events)
    assert len(res.rows) < 51


def test_strategy4_rejects_unaligned_switching():
    sig = SwitchingSignal([(0.0, 0), (1.234, 1)])
    with pytest.raises(ScenarioError):
        run(scenario("S4-ET", switching=sig))


def test_async_stage_longer_than_N_max_is_infeasible():
    sig = SwitchingSignal([(0.0, 0), (1.05, 1)])
    trace = AttackTrace([(1.0, 0.6)], 5.0)
    with pytest.raises(InfeasibleError):
        run(scenario("S3", switching=sig, attack=trace, N_max=2))


def test_generated_switches_are_pushed_within_N_max():
    sc = scenario("S2", N=105, n_max=10, switching={"tau_d": 1.0},
                  attack=AttackParams(n0=2, kappa=0.5, tau_D=1.0, T=3.0), horizon=20.0)
    for seed in range(5):
        res = run(dataclasses.replace(sc, seed=seed))
        assert res.summary["replay_mismatches"] == 0


def test_initial_state_must_fit_range():
    with pytest.raises(ScenarioError):
        scenario("S3", x0=[5.0, 0.0, 0.0, 0.0])


def test_horizon_zero_gives_header_only():
    res = run(scenario("S3", horizon=0.0))
    assert res.rows == [] and res.trace_csv().count("\n") == 1


BASE_DOC = {"plant": {"example": "B"}, "strategy": {"kind": "S3", "N": 31},
            "sim": {"x0": [1.0, -1.0], "horizon": 2.0}}


@pytest.mark.parametrize("mutate, path", [
    (lambda d: d.pop("sim"), "sim"),
    (lambda d: d["strategy"].update(N=4), "strategy.N"),
    (lambda d: d["plant"].update(example="Z"), "plant.example"),
    (lambda d: d.update(attack={"kind": "average", "tau_D": 1, "T": 2, "bogus": 1}),
     "attack"),
    (lambda d: d.update(overrides={"gain": [1, 2]}), "overrides"),
    (lambda d: d["sim"].update(x0=[9.0, 0.0]), "sim.x0"),
    (lambda d: d["sim"].pop("x0"), "sim.x0"),
])
def test_scenario_errors_name_the_field(mutate, path):
    doc = json.loads(json.dumps(BASE_DOC))
    mutate(doc)
    with pytest.raises(ScenarioError) as info:
        scenario_from_dict(doc)
    assert info.value.path == path


def test_scenario_with_explicit_matrices():
    p = plant_b()
    doc = json.loads(json.dumps(BASE_DOC))
    doc["plant"] = {"A": [a.tolist() for a in p.A], "B": [b.tolist() for b in p.B],
                    "K": [k.tolist() for k in p.K], "tau_s": 0.1, "E0": 2.0}
    doc["attack"] = {"intervals": [[0.5, 0.2]]}
    doc["switching"] = {"switches": [[0.0, 2], [1.0, 1]], "tau_d": 1.0}
    sc = scenario_from_dict(doc)
    assert sc.plant.m == 2 and sc.switching.mode_at(0.5) == 1
    assert run(sc).summary["status"] == "ok"
