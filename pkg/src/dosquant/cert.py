"""Stability certificates: residuals of the admissibility inequalities and envelope search.

Every condition is reported as a residual ``lhs - rhs``; a certificate is
satisfied when all residuals are <= 0.  Logs are natural.  Dwell-time floors
are reported next to the residuals.
"""

import math
from dataclasses import dataclass, field

from .constants import (Strategy1Constants, Strategy2Constants, Strategy3Constants,
                        Strategy4Constants, derive_strategy1, derive_strategy2,
                        derive_strategy3, derive_strategy4, lyapunov_scalars)
from .errors import InfeasibleError
from .linalg import inf_norm

SNAP = 1e-12

_EXPECTED = {
    "S1": Strategy1Constants, "S1-Corollary": Strategy1Constants,
    "S2": Strategy2Constants, "S3": Strategy3Constants,
    "S4-TT": Strategy4Constants, "S4-ET": Strategy4Constants,
}

PARAM_DEFAULTS = {"tau_d": math.inf, "tau_D": math.inf, "T": math.inf,
                  "n0": 0, "kappa": 0.0, "N_max": 1, "n_min": 0, "n_max": 0}


@dataclass
class Certificate:
    strategy: str
    inputs: dict
    residuals: dict
    dwell_floors: dict = field(default_factory=dict)
    scalars: dict = field(default_factory=dict)

    @property
    def verdict(self):
        return all(r <= 0 for r in self.residuals.values())

    @property
    def binding(self):
        """Name of the largest residual."""
        return max(self.residuals, key=self.residuals.get) if self.residuals else None

    def to_dict(self):
        return {"strategy": self.strategy, "inputs": self.inputs,
                "residuals": self.residuals, "dwell_floors": self.dwell_floors,
                "scalars": self.scalars,
                "verdict": "satisfied" if self.verdict else "violated"}


def _log(x):
    return math.log(x) if x > 0 else -math.inf


def _snap(r):
    return 0.0 if abs(r) < SNAP else r


def _ratio_floor(num, rate, tau_s):
    """tau_s * num / (-log rate), or inf when rate >= 1."""
    if rate >= 1:
        return math.inf
    return tau_s * num / (-math.log(rate))


def _params(params):
    out = dict(PARAM_DEFAULTS)
    out.update({k: v for k, v in (params or {}).items() if v is not None})
    return out


# ------------------------------------------------------------ per strategy

def s1_dwell_floor(c, nu, nu_hat, mu1, mu2, mu3):
    """Dwell floor from the Lyapunov scalars; inf when some nu_p >= 1."""
    ts, best = c.model.tau_s, -math.inf
    for p, q in c.model.plant.pairs():
        if nu[p] >= 1:
            return math.inf
        num = ((c.N_max - 1) * _log(nu[p] / mu3[(p, q)])
               - _log(nu_hat[p] * mu2[(p, q)] * mu1[(p, q)] / mu3[(p, q)]))
        best = max(best, ts * num / _log(nu[p]))
    return best


def _check_s1(c, P):
    ts, m = c.model.tau_s, c.model.m
    f = c.model.fits
    sc = lyapunov_scalars(c, P["tau_d"], P["T"], P["tau_D"], P["kappa"], P["n0"])
    b = P.get("b") or sc["b"]
    if b != sc["b"]:
        # caller-chosen b: rebuild the b-dependent scalars
        sc = _with_b(c, sc, b)
    lhs = (ts / P["tau_d"] * _log(c.Gamma_bar / c.Gamma ** c.N_max)
           + (1.0 / P["T"] + ts / P["tau_D"] - 1.0) * _log(c.N) + _log(c.Gamma))
    floor = s1_dwell_floor(c, sc["nu"], sc["nu_hat"], sc["mu1"], sc["mu2"], sc["mu3"])
    res = {
        "level": c.Gamma - c.N,
        "convergence": _snap(lhs - _log(b)),
        "auxiliary": max(f.rho[p] * c.Bd_norm[p] for p in range(m)) + b - 1.0,
        "dwell": floor - P["tau_d"],
    }
    scal = {k: v for k, v in sc.items() if not isinstance(v, dict)}
    scal["b_used"] = b
    return res, {"dwell": floor}, scal


def _with_b(c, sc, b):
    f = c.model.fits
    out = dict(sc)
    out["b"] = b
    drive = [f.rho[p] * c.Bd_norm[p] + b for p in range(c.model.m)]
    out["nu"] = [max(f.lam[p], drive[p]) for p in range(c.model.m)]
    out["nu_hat"] = [max(f.rho[p] * f.lam[p], drive[p]) for p in range(c.model.m)]
    shift = sc["a"] * c.Gamma_bar2
    out["mu1"], out["mu2"], out["mu3"] = {}, {}, {}
    for pq in c.model.plant.pairs():
        xi, eta, full = f.xi[pq], f.eta[pq], c.Ad_async_full[pq]
        out["mu1"][pq] = c.Ad_async_max[pq] + b + shift
        out["mu2"][pq] = max(xi * eta, xi * full + b)
        out["mu3"][pq] = max(eta, xi * full + b)
    return out


def corollary_dwell_floor(c):
    f, ts = c.model.fits, c.model.tau_s
    best = -math.inf
    for p, q in c.model.plant.pairs():
        num = _log(f.rho[p] * f.xi[(p, q)]) + c.N_max * _log(f.eta[(p, q)] / f.lam[p])
        best = max(best, _ratio_floor(num, f.lam[p], ts))
    return best


def _check_corollary(c, P):
    ts = c.model.tau_s
    floor = corollary_dwell_floor(c)
    lhs = (c.N_max * ts / P["tau_d"] * _log(c.Gamma_hat / c.Gamma)
           + (1.0 / P["T"] + ts / P["tau_D"] - 1.0) * _log(c.N) + _log(c.Gamma))
    res = {"level": c.Gamma - c.N, "convergence": lhs, "dwell": floor - P["tau_d"]}
    return res, {"dwell": floor}, {}


def s2_dwell_floor(c):
    model, f, ts = c.model, c.model.fits, c.model.tau_s
    best = -math.inf
    for p, q in model.plant.pairs():
        num = (_log(f.rho[p] * f.xi[(p, q)] * c.Ad_async_max[(p, q)])
               + c.N_max * (_log(f.eta[(p, q)]) - _log(f.lam[p])))
        best = max(best, _ratio_floor(num, f.lam[p], ts))
    return best


def _check_s2(c, P):
    ts = c.model.tau_s
    lhs = (1.0 / P["tau_d"] * (_log(c.L5 / c.L6) + c.N_max * _log(c.L6 / c.L3))
           + 1.0 / P["tau_D"] * _log(c.L1 / c.L2)
           + (1.0 / (P["T"] * ts) + 1.0 / P["tau_D"]) * _log(c.L3 / c.L2)
           + _log(c.L2) / ts)
    floor = s2_dwell_floor(c)
    res = {"floor": c.floor - c.N, "convergence": lhs, "dwell": floor - P["tau_d"]}
    return res, {"dwell": floor}, {}


def _check_s3(c, P):
    ts = c.model.tau_s
    lhs = (1.0 / P["tau_d"] * _log(c.U / c.U2)
           + 1.0 / P["tau_D"] * _log(c.U1 * c.xi_bar / c.U2)
           + (1.0 / (P["T"] * ts) + 1.0 / P["tau_D"]) * _log(c.eta_bar / c.U2)
           + _log(c.U2) / ts)
    return {"floor": c.floor - c.N, "convergence": lhs}, {}, {}


def _check_tt(c, P):
    lhs = (_log(c.phi1 * c.phi3) + (c.n_min - 1) * _log(c.phi2)
           + (c.n_max - 1) * _log(c.phi4) + _log(c.phi5) / c.tau_d)
    return {"convergence": lhs}, {}, {}


def et_lhs(c):
    """Left side of the event-triggered admissibility condition (to be <= 1)."""
    ts = c.model.tau_s
    per = c.period * ts
    r = per / c.tau_d
    return c.phi1 ** r * (c.phi2 ** (per * (1.0 / ts - 1.0 / c.tau_d) - 1.0) * c.phi1
                          + c.phi2 ** (c.n_min - 1 - r) * c.phi)


def _check_et(c, P):
    res = {"floor": c.floor - c.N,
           "attack_shape": float(c.n_max - c.n_min + 1),
           "convergence": _log(et_lhs(c))}
    return res, {}, {"lhs": et_lhs(c)}


_CHECKS = {"S1": _check_s1, "S1-Corollary": _check_corollary, "S2": _check_s2,
           "S3": _check_s3, "S4-TT": _check_tt, "S4-ET": _check_et}


def check(strategy, constants, params=None):
    """Evaluate every condition of ``strategy`` for ``constants`` and ``params``.

    ``params`` holds any of tau_d, tau_D, T, n0, kappa (missing ones default
    to the no-attack/no-switching limits).  Strategy 4 reads n_min, n_max
    and tau_d from the constants table.
    """
    if strategy not in _CHECKS:
        raise ValueError(f"unknown strategy '{strategy}'")
    if not isinstance(constants, _EXPECTED[strategy]):
        raise TypeError(f"{strategy} needs {_EXPECTED[strategy].__name__}, "
                        f"got {type(constants).__name__}")
    P = _params(params)
    if isinstance(constants, Strategy4Constants):
        P.update(tau_d=constants.tau_d, n_min=constants.n_min, n_max=constants.n_max)
    P["N"] = constants.N
    if hasattr(constants, "N_max"):
        P["N_max"] = constants.N_max
    res, floors, scal = _CHECKS[strategy](constants, P)
    res = {k: float(v) for k, v in res.items()}
    return Certificate(strategy, {k: v for k, v in P.items()}, res, floors, scal)


# ------------------------------------------------------------ envelopes

def rederive(strategy, constants, N):
    """Constants of the same family at a different level N."""
    c, model = constants, constants.model
    if strategy in ("S1", "S1-Corollary"):
        return derive_strategy1(model, N, c.N_max)
    if strategy == "S2":
        return derive_strategy2(model, N, c.N_max, c.n_max)
    if strategy == "S3":
        return derive_strategy3(model, N)
    return derive_strategy4(model, N, c.n_min, c.n_max, c.tau_d)


def _with_param(strategy, constants, params, name, value):
    P = dict(params or {})
    if name == "N":
        return rederive(strategy, constants, int(value)), P
    if name == "tau_d" and isinstance(constants, Strategy4Constants):
        c = rederive(strategy, constants, constants.N)
        c.tau_d = value
        return c, P
    P[name] = value
    return constants, P


def _ok(strategy, constants, params, name, value):
    c, P = _with_param(strategy, constants, params, name, value)
    cert = check(strategy, c, P)
    return cert.verdict, cert


def solve_envelope(strategy, constants, params, free, bounds, rtol=1e-3):
    """Smallest admissible value of each free parameter, others held at ``params``.

    Larger N, tau_d, tau_D and T relax every condition, so each free
    parameter is bisected independently inside ``bounds[name] = (lo, hi)``.
    N is searched over odd integers.
    """
    free = list(free)
    if not 1 <= len(free) <= 2:
        raise ValueError("one or two free parameters")
    out = {}
    for name in free:
        lo, hi = bounds[name]
        ok_hi, cert_hi = _ok(strategy, constants, params, name, hi)
        if not ok_hi:
            raise InfeasibleError(
                f"{strategy} infeasible for {name} <= {hi}; binding condition "
                f"'{cert_hi.binding}' residual {cert_hi.residuals[cert_hi.binding]:.4g}",
                binding=cert_hi.binding)
        if name == "N":
            lo_n = int(lo) | 1
            hi_n = int(hi) | 1 if int(hi) % 2 else int(hi) - 1
            if _ok(strategy, constants, params, name, lo_n)[0]:
                out[name] = lo_n
                continue
            a, b = lo_n, hi_n        # a infeasible, b feasible, both odd
            while b - a > 2:
                mid = a + 2 * ((b - a) // 4) or a + 2
                mid = mid if mid % 2 else mid + 1
                if _ok(strategy, constants, params, name, mid)[0]:
                    b = mid
                else:
                    a = mid
            out[name] = b
            continue
        if _ok(strategy, constants, params, name, lo)[0]:
            out[name] = lo
            continue
        a, b = lo, hi
        while b - a > rtol * b:
            mid = 0.5 * (a + b)
            if _ok(strategy, constants, params, name, mid)[0]:
                b = mid
            else:
                a = mid
        out[name] = b
    return out


def bd_norms(model):
    return [inf_norm(model.Bd[p]) for p in range(model.m)]
