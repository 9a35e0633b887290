import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from dosquant import cert
from dosquant.benchmarks import REFERENCE_FITS, REFERENCE_PARAMS, REFERENCE_RESULTS, plant_a
from dosquant.constants import (derive_strategy1, derive_strategy2, derive_strategy3,
                                derive_strategy4)
from dosquant.errors import InfeasibleError
from dosquant.plant import SwitchedPlant, discretize

from conftest import model_for


def random_plant(seed):
    """Two-mode plant with a stabilising LQR-free gain: A_p + B_p K_p = -I + small noise."""
    rng = np.random.default_rng(seed)
    A, B, K = [], [], []
    for _ in range(2):
        a = rng.normal(0, 0.6, (2, 2))
        b = np.eye(2) + rng.normal(0, 0.1, (2, 2))
        k = np.linalg.solve(b, -np.eye(2) * rng.uniform(1.0, 2.0) - a)
        A.append(a), B.append(b), K.append(k)
    return SwitchedPlant(A=A, B=B, K=K, tau_s=0.1, E0=1.0)


def test_mismatched_constants_rejected(models):
    with pytest.raises(TypeError):
        cert.check("S2", derive_strategy3(models["B"], 31), {})
    with pytest.raises(ValueError):
        cert.check("S9", derive_strategy3(models["B"], 31), {})


def test_verdict_is_all_residuals_nonpositive():
    c = cert.Certificate("S3", {}, {"a": -1.0, "b": 0.0})
    assert c.verdict
    c.residuals["b"] = 1e-9
    assert not c.verdict and c.binding == "b"


def test_single_stable_mode_no_attacks():
    p = random_plant(0)
    one = SwitchedPlant(A=p.A[:1], B=p.B[:1], K=p.K[:1], tau_s=0.1)
    m = discretize(one, grid=21)
    c = derive_strategy1(m, 3, 1)
    N = 3 if c.Gamma < 3 else 2 * int(c.Gamma) + 1
    c = derive_strategy1(m, N, 1)
    for tau_d in (0.01, 1.0, 100.0):
        res = cert.check("S1-Corollary", c, {"tau_d": tau_d}).residuals
        assert res["level"] < 0


RELAX = {"tau_d": 1.5, "tau_D": 1.5, "T": 1.5}


@settings(max_examples=12, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(0, 10 ** 6), st.floats(0.5, 20), st.floats(0.5, 20), st.floats(1.1, 20),
       st.sampled_from([3, 9, 31, 101]))
def test_verdict_monotone_in_relax_directions(seed, tau_d, tau_D, T, N):
    m = discretize(random_plant(seed), grid=21)
    P = {"tau_d": tau_d, "tau_D": tau_D, "T": T, "n0": 1, "kappa": 0.1}
    families = {
        "S1-Corollary": lambda n: derive_strategy1(m, n, 2),
        "S2": lambda n: derive_strategy2(m, n, 2, 3),
        "S3": lambda n: derive_strategy3(m, n),
    }
    for strategy, make in families.items():
        base = cert.check(strategy, make(N), P)
        for name, f in RELAX.items():
            other = cert.check(strategy, make(N), dict(P, **{name: P[name] * f}))
            for key, r in base.residuals.items():
                assert not other.residuals[key] > r + 1e-9 * max(1.0, abs(r)), (strategy, key)
        if base.verdict:
            assert cert.check(strategy, make(2 * N + 1), P).verdict, strategy


def test_envelope_boundary_rechecked_by_sweep():
    m = model_for("C")
    c = derive_strategy3(m, 155)
    P = {"tau_D": 40.0, "T": 40.0, "n0": 1, "kappa": 0.5}
    lo = cert.solve_envelope("S3", c, P, ["tau_d"], {"tau_d": (0.1, 1000.0)})["tau_d"]
    for v in np.linspace(lo, 10 * lo, 100):
        assert cert.check("S3", c, dict(P, tau_d=v)).verdict
    assert not cert.check("S3", c, dict(P, tau_d=lo * (1 - 2e-3))).verdict


def test_envelope_over_N_returns_odd_minimum():
    m = model_for("C")
    c = derive_strategy3(m, 155)
    P = {"tau_d": 13.0, "tau_D": 40.0, "T": 40.0, "n0": 1, "kappa": 0.5}
    n = cert.solve_envelope("S3", c, P, ["N"], {"N": (3, 2001)})["N"]
    assert n % 2 == 1
    assert cert.check("S3", derive_strategy3(m, n), P).verdict
    assert not cert.check("S3", derive_strategy3(m, n - 2), P).verdict


def test_envelope_infeasible_names_binding_condition():
    c = derive_strategy3(model_for("C"), 3)
    with pytest.raises(InfeasibleError) as info:
        cert.solve_envelope("S3", c, {"tau_D": 40.0, "T": 40.0}, ["tau_d"],
                            {"tau_d": (0.1, 10.0)})
    assert info.value.binding == "floor"


def test_strategy4_certificates_with_self_fits():
    c = derive_strategy4(model_for("B"), 3, 10, 4, 2.0)
    assert cert.check("S4-TT", c).verdict
    assert cert.check("S4-ET", c).verdict


def test_example_a_s1_minimal_dwell_time():
    ref = REFERENCE_PARAMS["A"]["S1"]
    m = discretize(plant_a(), overrides=REFERENCE_FITS["A"])
    c = derive_strategy1(m, ref["N"], ref["N_max"])
    P = {"tau_D": ref["tau_D"], "T": ref["T"]}
    try:
        got = cert.solve_envelope("S1", c, P, ["tau_d"], {"tau_d": (1e-3, 1e4)})["tau_d"]
    except InfeasibleError:
        got = math.inf
    assert got == pytest.approx(REFERENCE_RESULTS["A"]["s1_dwell"], rel=0.02)
