"""Dense real-matrix kernel: exponentials, convolution integrals, norms, decay fits.

Every norm in the package is the infinity norm (max absolute row sum for
matrices, max absolute entry for vectors).
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import DimensionError

DEFAULT_MARGIN = 1e-3
DEFAULT_HORIZON = 1000


def as_matrix(a, name="matrix"):
    """Return a finite 2-D float array or raise."""
    m = np.array(a, dtype=float)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DimensionError(f"{name} has non-finite entries")
    return m


def _square(m, name):
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got {m.shape}")


def mat_exp(M, t=1.0):
    """e^{M t} by Pade scaling-and-squaring."""
    m = as_matrix(M, "M")
    _square(m, "M")
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return np.eye(m.shape[0])
    return expm(m * t)


def inf_norm(M):
    """Induced infinity norm for matrices, max |entry| for vectors."""
    a = np.asarray(M, dtype=float)
    if a.size == 0:
        return 0.0
    if a.ndim == 1:
        return float(np.max(np.abs(a)))
    return float(np.max(np.sum(np.abs(a), axis=1)))


def block_upper(A_left, B_mid, A_right):
    """Assemble [[A_left, B_mid], [0, A_right]]."""
    a, b = A_left.shape[0], A_right.shape[0]
    out = np.zeros((a + b, a + b))
    out[:a, :a] = A_left
    out[:a, a:] = B_mid
    out[a:, a:] = A_right
    return out


def conv_integral(A_left, B_mid, A_right, tau):
    """Integral over s in [0, tau] of e^{A_left (tau - s)} B_mid e^{A_right s}.

    Read off the upper-right block of the exponential of the block
    upper-triangular matrix [[A_left, B_mid], [0, A_right]] * tau.
    """
    al = as_matrix(A_left, "A_left")
    ar = as_matrix(A_right, "A_right")
    bm = as_matrix(B_mid, "B_mid")
    _square(al, "A_left")
    _square(ar, "A_right")
    if bm.shape != (al.shape[0], ar.shape[0]):
        raise DimensionError(
            f"B_mid shape {bm.shape} does not fit {al.shape[0]}x{ar.shape[0]}")
    if tau < 0:
        raise ValueError("tau must be non-negative")
    if tau == 0:
        return np.zeros_like(bm)
    n = al.shape[0]
    return expm(block_upper(al, bm, ar) * tau)[:n, n:]


def input_integral(A, B, tau):
    """Integral over s in [0, tau] of e^{A s} ds B (zero-order-hold input map)."""
    b = as_matrix(B, "B")
    return conv_integral(A, b, np.zeros((b.shape[1], b.shape[1])), tau)


def spectral_radius(M):
    m = as_matrix(M, "M")
    _square(m, "M")
    if m.shape[0] == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(m))))


@dataclass(frozen=True)
class DecayFit:
    """Geometric envelope ||M^k|| <= gain * rate^k."""

    gain: float
    rate: float

    def bound(self, k):
        return self.gain * self.rate ** k

    def as_tuple(self):
        return (self.gain, self.rate)


def decay_fit(M, horizon=DEFAULT_HORIZON, margin=DEFAULT_MARGIN):
    """Fit (gain, rate) so that ||M^k|| <= gain * rate^k for k = 0..horizon.

    The rate is the spectral radius inflated by ``margin`` (kept below 1 for
    contractive matrices); the gain is the largest normalised power norm seen
    on the horizon.
    """
    m = as_matrix(M, "M")
    _square(m, "M")
    if horizon < 2:
        raise ValueError("horizon must be at least 2")
    r = spectral_radius(m)
    rate = r * (1.0 + margin)
    if r < 1.0:
        rate = min(rate, 0.5 * (1.0 + r))
    rate = max(rate, margin)
    scaled = m / rate
    power = np.eye(m.shape[0])
    gain = 1.0
    for _ in range(horizon):
        power = scaled @ power
        gain = max(gain, inf_norm(power))
    return DecayFit(gain, rate)


def power_norms(M, horizon):
    """||M^k|| for k = 0..horizon by repeated multiplication."""
    m = as_matrix(M, "M")
    _square(m, "M")
    out = np.empty(horizon + 1)
    power = np.eye(m.shape[0])
    out[0] = 1.0 if m.shape[0] else 0.0
    for k in range(1, horizon + 1):
        power = m @ power
        out[k] = inf_norm(power)
    return out


def fit_violation(M, gain, rate, horizon, start=0, rtol=1e-12):
    """Largest excess ||M^k|| - gain*rate^k over start <= k <= horizon.

    Returns (worst_excess, worst_k); a non-positive excess means the bound holds.
    """
    norms = power_norms(M, horizon)
    ks = np.arange(horizon + 1)
    excess = norms - gain * np.power(float(rate), ks) * (1.0 + rtol)
    excess[:start] = -np.inf
    k = int(np.argmax(excess))
    return float(excess[k]), k
