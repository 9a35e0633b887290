"""Box quantizer, the transmission-case classifier and the range update laws.

The encoder holds the range ``E`` and center used to quantize the sampled
state; the decoder holds its own copy.  The two copies must agree at every
sampling instant whose transmission gets through.  Laws that the decoder
cannot evaluate during a blackout (it does not see switches or zoom-outs) are
reconciled on the first successful reception by replaying the encoder law
from the last common index, driven by side information carried in the packet.
"""

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (InvalidLevelError, ProtocolError, SaturationError,
                     UnreachableStateError)

STRATEGIES = ("S1", "S1-Corollary", "S2", "S3", "S4-TT", "S4-ET")
ACTIVE = ("S1", "S1-Corollary", "S2")
CENTERED = ("S1", "S1-Corollary")


# ---------------------------------------------------------------- boxes

def _check_level(N):
    if int(N) != N or N < 3 or int(N) % 2 == 0:
        raise InvalidLevelError(f"quantization level must be odd and >= 3, got {N}")
    return int(N)


def encode_offset(d, E, N):
    """Box number (1-based) of the offset ``d = x - center`` in a range ``E``."""
    N = _check_level(N)
    d = np.asarray(d, dtype=float)
    excess = float(np.max(np.abs(d))) - E if d.size else -E
    if excess > 0 or not E > 0:
        raise SaturationError(f"offset norm exceeds range {E!r} by {excess!r}",
                              k=None, excess=excess)
    idx = np.floor((d + E) * N / (2.0 * E)).astype(np.int64)
    np.clip(idx, 0, N - 1, out=idx)
    q = 0
    for i in idx:
        q = q * N + int(i)
    return q + 1


def box_offset(q, E, N, n):
    """Center of box ``q`` relative to the quantizer center."""
    N = _check_level(N)
    if not 1 <= q <= N ** n:
        raise ProtocolError(f"box index {q} outside 1..{N ** n}")
    r = q - 1
    idx = []
    for _ in range(n):
        r, i = divmod(r, N)
        idx.append(i)
    idx = np.array(idx[::-1], dtype=float)
    # (2i + 1 - N) is exact, so the middle box maps to an exact zero offset
    return (2.0 * idx + 1.0 - N) * E / N


def encode(x, center, E, N):
    """Box number of ``x``: per-dimension cell index, mixed-radix packed, 1-based."""
    return encode_offset(np.asarray(x, float) - np.asarray(center, float), E, N)


def decode(q, center, E, N):
    """Center point of box ``q``."""
    center = np.asarray(center, dtype=float)
    return center + box_offset(q, E, N, center.size)


# ---------------------------------------------------------------- cases

_TABLE = {
    (1, 0, 1, 1): 3, (1, 0, 1, 0): 4, (1, 0, 0, 0): 5, (1, 0, 0, 1): 6,
    (0, 0, 0, 0): 7, (0, 0, 0, 1): 8,
}


def classify_case(sy_k, sy_next, ack_k, ack_next):
    """Transmission/synchrony case 1..8 for the step t_k -> t_{k+1}."""
    sy_k, sy_next, ack_k, ack_next = (int(bool(v)) for v in (sy_k, sy_next, ack_k, ack_next))
    if sy_next == 1:
        return 1 if ack_k else 2
    try:
        return _TABLE[(sy_k, sy_next, ack_k, ack_next)]
    except KeyError:
        raise UnreachableStateError(
            f"no case for SY=({sy_k},{sy_next}) ACK=({ack_k},{ack_next})") from None


def case_label(case, ack_prev, sy_k):
    """Refine cases 1 and 2 by the previous step.

    1-a follows an attacked or asynchronous instant, 1-b a clean one;
    2-a is the first attacked instant, 2-b a later one.
    """
    if case == 1:
        return "1-a" if (not ack_prev or not sy_k) else "1-b"
    if case == 2:
        return "2-a" if ack_prev else "2-b"
    return str(case)




@dataclass
class StepInfo:
    """What is known about the step t_k -> t_{k+1} once t_{k+1} is reached.

    ``p`` is the plant mode at the end of the step and ``q`` the controller
    mode during it.  ``switch_time`` is set when a switch lies in
    [t_k, t_{k+1}); ``async_start`` is the first sampling index of the
    current asynchronous stage (cases 7 and 8).
    """

    k: int
    case: int
    label: str
    p: int
    q: int
    ack: bool
    ack_next: bool
    switch_time: float = None
    async_start: int = None

    def aligned_switch(self, tau_s):
        return (self.switch_time is not None
                and abs(self.switch_time - self.k * tau_s) <= 1e-9 * max(1.0, self.k * tau_s))


def async_start_index(switch_time, tau_s):
    """Index of the first sampling instant at or after the switch."""
    return math.ceil(switch_time / tau_s - 1e-9)


def rebuild_blackout(first, last, switch_time, p, q, acks, tau_s):
    """Steps first..last as the encoder saw them, from decoder-side knowledge.

    The decoder knows its own reception record ``acks`` (index -> bool), its
    mode ``q`` and, from the packet received at t_{last+1}, the switch time
    and the new mode ``p``.  Step ``first`` contains the switch; the steps
    after it are attacked and asynchronous, and t_{last+1} is received.
    """
    start = async_start_index(switch_time, tau_s)
    out = []
    for k in range(first, last + 1):
        sy_k = 1 if k == first else 0
        ack_k, ack_next = bool(acks[k]), k == last
        case = classify_case(sy_k, 0, ack_k, ack_next)
        ack_prev = bool(acks.get(k - 1, True))
        out.append(StepInfo(k, case, case_label(case, ack_prev, sy_k), p, q, ack_k,
                            ack_next, switch_time if k == first else None, start))
    return out


# ---------------------------------------------------------------- laws

def s1_range(c, case, p, q, E, center_norm):
    """Range law of the moving-center strategy for an integer case."""
    if case == 1:
        return c.Gamma_p[q] / c.N * E
    if case == 2:
        return c.Gamma_p[q] * E
    if case in (3, 4, 5, 6):
        return c.Gamma1[(p, q)] * E + c.Gamma2[(p, q)] * center_norm
    return c.Gamma3[(p, q)] * E


def s2_range(c, label, p, q, E):
    if label == "1-a":
        return c.Lambda1[q] * E
    if label == "1-b":
        return c.Lambda2[q] * E
    if label[0] == "2":
        return c.Lambda3[q] * E
    case = int(label)
    if case == 3:
        return c.Lambda4[(p, q)] * E
    if case in (4, 5, 6):
        return c.Lambda5[(p, q)] * E
    return c.Lambda6[(p, q)] * E


def s3_range(c, fits, label, p, q, E):
    if label == "1-a":
        return c.Upsilon1[q] * E
    if label == "1-b":
        return c.Upsilon2[q] * E
    if label == "2-a":
        return fits.xi_hat[p] * fits.eta_hat[p] * E
    if label in ("2-b", "7", "8"):
        return fits.eta_hat[p] * E
    if label == "3":
        return c.Upsilon3[(p, q)] * E
    if label in ("4", "5"):
        return c.Upsilon_hat[(p, q)] * c.xi_tilde[p] * E
    return c.Upsilon4[(p, q)] * E


def tt_scenario(k, n_min, n_max):
    """Virtual-schedule scenario (1..4) of the step leaving sampling index k."""
    r = k % (n_min + n_max)
    if r == 0:
        return 1
    if r < n_min:
        return 2
    return 3 if r == n_min else 4


def tt_factor(c, k, virtual_switch_next):
    """Multiplier taking E_k to E_{k+1} under the acknowledgement-free schedule."""
    f = (c.phi1, c.phi2, c.phi3, c.phi4)[tt_scenario(k, c.n_min, c.n_max) - 1]
    return f * c.phi5 if virtual_switch_next else f


def ack_aware_factor(c, label, switch_next):
    """Companion law that sees acknowledgements; the TT range must dominate it."""
    f = {"1-a": c.phi1, "1-b": c.phi2, "2-a": c.phi3, "2-b": c.phi4}[label]
    return f * c.phi5 if switch_next else f


# ---------------------------------------------------------------- machine

class Side:
    """One endpoint's range, center and a bounded history of both."""

    def __init__(self, E, center, depth):
        self.E, self.center, self.depth = E, center, depth
        self.kind = "origin"     # center is the origin, the predictor, or an async rollout
        self.hist = {}

    def remember(self, k):
        self.hist[k] = (self.E, self.center)
        self.hist.pop(k - self.depth, None)

    def at(self, k, E0):
        if k < 0:
            return E0, None
        try:
            return self.hist[k]
        except KeyError:
            raise ProtocolError(f"history for index {k} is no longer held") from None


class QuantizerPair:
    """Encoder and decoder range machines for one strategy.

    ``xhat_at(j)`` must return the predictor value at sampling index j (used
    by the moving-center strategies).  ``virtual_switches``/``switch_steps``
    are sets of sampling indices used by the two Strategy-4 laws.
    """

    def __init__(self, strategy, consts, model, E0, nx, depth,
                 virtual_switches=frozenset(), switch_steps=frozenset()):
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy '{strategy}'")
        self.strategy, self.c, self.model = strategy, consts, model
        self.N, self.E0, self.tau_s = consts.N, float(E0), model.tau_s
        zero = np.zeros(nx)
        self.enc = Side(self.E0, zero, depth)
        self.dec = Side(self.E0, zero, depth)
        self.enc.remember(0)
        self.dec.remember(0)
        self.virtual_switches = frozenset(virtual_switches)
        self.switch_steps = frozenset(switch_steps)
        self._calA_step = {}
        self.zooms = []            # ET: index whose range was zoomed out
        self.replays = []          # (received index, first replayed step)

    # moving center ------------------------------------------------

    def async_center(self, p, q, n, xhat_start):
        """[I 0] exp(calA_pq n tau_s) [I; I] xhat(start)."""
        M = self._calA_step.get((p, q))
        if M is None:
            from .linalg import mat_exp
            M = self._calA_step[(p, q)] = mat_exp(self.model.calA[(p, q)], self.tau_s)
        v = np.concatenate([xhat_start, xhat_start])
        for _ in range(n):
            v = M @ v
        return v[:xhat_start.size]

    # laws ---------------------------------------------------------

    def law(self, info, E, center, xhat_at, x_next_norm=0.0, E_lag=None):
        """(E_{k+1}, center_{k+1}, center kind, zoomed) from the encoder law."""
        s, c = self.strategy, self.c
        p, q = info.p, info.q
        if s in CENTERED:
            case = info.case
            if s == "S1-Corollary":
                if case in (5, 6) and info.aligned_switch(self.tau_s):
                    case += 2        # the attacked switching instant opens the stage
                elif case in (3, 4, 5, 6):
                    raise UnreachableStateError(
                        f"case {case} needs a switch between sampling instants")
            E_next = s1_range(c, case, p, q, E, float(np.max(np.abs(center))))
            if case in (7, 8):
                start = info.async_start
                n = info.k + 1 - start
                return E_next, self.async_center(p, q, n, xhat_at(start)), "async", False
            return E_next, xhat_at(info.k + 1), "predictor", False
        if s == "S2":
            return s2_range(c, info.label, p, q, E), center, "origin", False
        if s == "S3":
            return s3_range(c, self.model.fits, info.label, p, q, E), center, "origin", False
        if s == "S4-TT":
            return E * tt_factor(c, info.k, info.k + 1 in self.virtual_switches), \
                center, "origin", False
        if info.k == 0 or info.k in self.switch_steps:
            return c.phi1 * E, center, "origin", False
        if x_next_norm > c.phi2 * E:
            return c.phi1 * E + c.phi * E_lag, center, "origin", True
        return c.phi2 * E, center, "origin", False

    def _lag(self, side, k):
        return side.at(k - self.c.n_max, self.E0)[0] if self.strategy == "S4-ET" else None

    # encoder ------------------------------------------------------

    def encoder_step(self, info, xhat_at=None, x_next_norm=0.0):
        enc = self.enc
        E, center, kind, zoomed = self.law(info, enc.E, enc.center, xhat_at,
                                           x_next_norm, self._lag(enc, info.k))
        enc.E, enc.center, enc.kind = E, center, kind
        if zoomed:
            self.zooms.append(info.k + 1)
        enc.remember(info.k + 1)
        return zoomed

    # decoder ------------------------------------------------------

    def decoder_step(self, info, xhat_at=None):
        """Apply the law to the step as the decoder believes it happened."""
        dec = self.dec
        if self.strategy == "S4-ET":
            c = self.c
            f = c.phi1 if (info.k == 0 or info.k in self.switch_steps) else c.phi2
            dec.E = f * dec.E
        else:
            dec.E, dec.center, dec.kind, _ = self.law(info, dec.E, dec.center, xhat_at)
        dec.remember(info.k + 1)

    def decoder_replay(self, steps, xhat_at=None):
        """Overwrite the blackout with the encoder law, starting from step[0].k."""
        dec = self.dec
        E, center = dec.at(steps[0].k, self.E0)
        for st in steps:
            E, center, kind, _ = self.law(st, E, center, xhat_at)
            dec.E, dec.center, dec.kind = E, center, kind
            dec.remember(st.k + 1)
        self.replays.append((steps[-1].k + 1, steps[0].k))

    def decoder_zoom_replay(self, k_next, n_z):
        """Event-triggered reconciliation: a zoom-out produced index k_next - n_z."""
        c, dec = self.c, self.dec
        z = k_next - n_z
        E = dec.at(z - 1, self.E0)[0]
        for j in range(z - 1, k_next):
            if j + 1 == z:
                E = c.phi1 * E + c.phi * dec.at(j - c.n_max, self.E0)[0]
            elif j == 0 or j in self.switch_steps:
                E = c.phi1 * E
            else:
                E = c.phi2 * E
            dec.E = E
            dec.remember(j + 1)
        self.replays.append((k_next, z - 1))

    def agree(self):
        """True when both endpoints hold bit-identical range and center."""
        return self.enc.E == self.dec.E and np.array_equal(self.enc.center, self.dec.center)
