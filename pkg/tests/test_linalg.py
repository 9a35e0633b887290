import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dosquant.errors import DimensionError
from dosquant.linalg import (conv_integral, decay_fit, fit_violation, inf_norm,
                             input_integral, mat_exp, power_norms, spectral_radius)


def taylor_exp(M, terms=60):
    out, term = np.eye(len(M)), np.eye(len(M))
    for k in range(1, terms):
        term = term @ M / k
        out = out + term
    return out


def simpson(f, a, b, panels):
    xs = np.linspace(a, b, panels + 1)
    h = (b - a) / panels
    vals = [f(x) for x in xs]
    w = np.ones(panels + 1)
    w[1:-1:2], w[2:-1:2] = 4, 2
    return h / 3 * sum(wi * v for wi, v in zip(w, vals))


def test_inf_norm_examples():
    assert inf_norm(np.eye(3)) == 1.0
    assert inf_norm(np.array([[1.0, -2.0], [3.0, 4.0]])) == 7.0
    assert inf_norm(np.array([1.0, -5.0, 2.0])) == 5.0


def test_inf_norm_matches_row_sums(models):
    M = models["B"].Ahd[0]
    assert inf_norm(M) == pytest.approx(max(sum(abs(v) for v in row) for row in M.tolist()))


matrices = arrays(np.float64, (3, 3), elements=st.floats(-2, 2))


@settings(max_examples=50, deadline=None)
@given(matrices, matrices)
def test_inf_norm_submultiplicative(A, B):
    assert inf_norm(A @ B) <= inf_norm(A) * inf_norm(B) * (1 + 1e-12) + 1e-300


@settings(max_examples=30, deadline=None)
@given(matrices, st.floats(0.0, 0.5))
def test_mat_exp_matches_taylor(M, t):
    assert np.allclose(mat_exp(M, t), taylor_exp(M * t), atol=1e-12, rtol=1e-10)


def test_mat_exp_zero_and_diagonal():
    assert np.array_equal(mat_exp(np.zeros((2, 2)), 3.0), np.eye(2))
    D = np.diag([1.0, -2.0])
    assert np.allclose(mat_exp(D, 0.5), np.diag(np.exp([0.5, -1.0])), rtol=1e-14)


def test_mat_exp_rejects_non_square():
    with pytest.raises(DimensionError):
        mat_exp(np.zeros((2, 3)))


def test_conv_integral_matches_simpson(models):
    p = models["C"].plant
    Al, Bm, Ar, tau = p.Abar(0, 0), p.B[0] @ p.K[0], p.A[0], p.tau_s
    ref = simpson(lambda s: mat_exp(Al, tau - s) @ Bm @ mat_exp(Ar, s), 0.0, tau, 200)
    assert np.allclose(conv_integral(Al, Bm, Ar, tau), ref, atol=1e-10)


def test_conv_integral_edge_cases():
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    B = np.array([[1.0], [0.0]])
    assert np.array_equal(conv_integral(A, B, np.zeros((1, 1)), 0.0), np.zeros((2, 1)))
    with pytest.raises(DimensionError):
        conv_integral(A, np.zeros((3, 1)), np.zeros((1, 1)), 1.0)
    with pytest.raises(ValueError):
        conv_integral(A, B, np.zeros((1, 1)), -1.0)


def test_input_integral_scalar():
    a, b, t = -2.0, 3.0, 0.7
    got = input_integral(np.array([[a]]), np.array([[b]]), t)[0, 0]
    assert got == pytest.approx((np.exp(a * t) - 1) / a * b, rel=1e-13)


def test_decay_fit_exact_geometric():
    fit = decay_fit(0.5 * np.eye(2), horizon=100, margin=1e-3)
    assert fit.gain == pytest.approx(1.0)
    assert fit.rate == pytest.approx(0.5 * 1.001)


@settings(max_examples=30, deadline=None)
@given(matrices)
def test_decay_fit_bound_holds_by_powering(M):
    fit = decay_fit(M, horizon=200)
    excess, _ = fit_violation(M, fit.gain, fit.rate, 200, rtol=1e-9)
    assert excess <= 0


def test_power_norms_and_radius():
    M = np.array([[0.0, 2.0], [0.0, 0.0]])
    assert power_norms(M, 3).tolist() == [1.0, 2.0, 0.0, 0.0]
    assert spectral_radius(np.diag([0.3, -0.9])) == pytest.approx(0.9)
