import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dosquant.constants import (derive_strategy1, derive_strategy2, derive_strategy3,
                                derive_strategy4, passive_floor, psi_direct, psi_values,
                                strategy2_floor)
from dosquant.errors import InvalidLevelError
from dosquant.linalg import inf_norm, mat_exp


@settings(max_examples=60, deadline=None)
@given(st.floats(0.5, 5), st.floats(0.1, 0.99), st.floats(0.0, 3), st.floats(0.5, 3),
       st.integers(3, 301), st.integers(0, 12))
def test_psi_recursion_matches_direct_sum(rho, lam, bd, gamma, N, ell):
    rec = psi_values(rho, lam, bd, gamma, N, ell)[ell]
    assert rec == pytest.approx(psi_direct(rho, lam, bd, gamma, N, ell), rel=1e-12)


def test_level_validation(models):
    for bad in (1, 2, 4, 3.5):
        with pytest.raises(InvalidLevelError):
            derive_strategy3(models["B"], bad)


def test_gamma_p_is_open_loop_norm(models):
    m = models["C"]
    c = derive_strategy1(m, 9, 2)
    for p in range(2):
        assert c.Gamma_p[p] == pytest.approx(inf_norm(mat_exp(m.plant.A[p], m.tau_s)))
    assert c.Gamma == max(c.Gamma_p)


def test_gamma_bar_enumeration(models):
    c = derive_strategy1(models["C"], 9, 3)
    pairs = [(0, 1), (1, 0)]
    brute = max(c.Gamma3[pq] ** (n - 1) * c.Gamma1[pq] for pq in pairs for n in range(3))
    assert c.Gamma_bar == pytest.approx(brute)


def test_strategy2_floor_formula(models):
    m = models["A"]
    f = m.fits
    want = max(f.rho[p] * inf_norm(m.Bd[p]) / (1 - f.lam[p]) for p in range(2))
    assert strategy2_floor(m) == pytest.approx(want)
    c = derive_strategy2(m, 301, 2, 5)
    assert c.floor == pytest.approx(want)
    assert len(c.Psi[0]) == 6


def test_passive_floor_formula(models):
    m = models["B"]
    f = m.fits
    want = max(f.rho_hat[p] * inf_norm(m.Bhd[p] @ m.plant.K[p]) / (1 - f.lam_hat[p])
               for p in range(2))
    assert passive_floor(m) == pytest.approx(want)


def test_strategy2_floor_infinite_for_unstable_fit(models):
    m = models["C"].with_overrides({"lam": [1.0, 0.5]})
    assert math.isinf(strategy2_floor(m))


def test_strategy4_factors_ordered(models):
    c = derive_strategy4(models["B"], 3, 10, 4, 2.0)
    assert c.phi1 >= c.phi2 > 0
    assert c.phi5 >= 1.0
    assert c.period == 14
    d = c.to_dict()
    assert "model" not in d and d["N"] == 3


def test_constants_json_ready(models):
    import json
    for c in (derive_strategy1(models["C"], 9, 2), derive_strategy3(models["C"], 155)):
        json.dumps(c.to_dict())
