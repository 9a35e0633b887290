"""Scalar constants consumed by the quantizer update laws and the certificate checker.

One derivation function per strategy; each returns a small dataclass whose
fields are plain floats or dicts keyed by mode ``p`` or ordered pair ``(p, q)``.
Maxima over the switching offset tbar are grid maxima multiplied by
``GRID_SAFETY``.
"""

import math
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import InvalidLevelError
from .linalg import inf_norm, mat_exp
from .plant import GRID_SAFETY


def check_level(N):
    if int(N) != N or N < 3 or int(N) % 2 == 0:
        raise InvalidLevelError(f"quantization level must be odd and >= 3, got {N}")
    return int(N)


def _grid_products(model, left, right):
    """e^{left t_i} e^{right (tau_s - t_i)} on the model's tbar grid."""
    G = len(model.grid)
    dt = model.tau_s / (G - 1)
    sl, sr = mat_exp(left, dt), mat_exp(right, dt)
    lp = [np.eye(left.shape[0])]
    rp = [np.eye(right.shape[0])]
    for _ in range(G - 1):
        lp.append(sl @ lp[-1])
        rp.append(sr @ rp[-1])
    return [lp[i] @ rp[G - 1 - i] for i in range(G)]


def _pairkey(pq):
    return f"{pq[0] + 1},{pq[1] + 1}"


def _to_dict(obj):
    """Plain JSON-ready dict of a constants table, without the model reference."""
    return {f.name: jsonable(getattr(obj, f.name)) for f in fields(obj)
            if f.name != "model"}


def jsonable(value):
    if isinstance(value, dict):
        return {(_pairkey(k) if isinstance(k, tuple) else str(k)): jsonable(v)
                for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    return value


@dataclass
class Strategy1Constants:
    N: int
    N_max: int
    Gamma_p: list
    Gamma1_hat: dict
    Gamma2: dict
    Gamma1: dict
    Gamma3: dict
    Gamma: float
    Gamma_bar: float
    Gamma_bar2: float
    Gamma_hat: float
    Ad_async_max: dict
    Ad_async_full: dict
    Bd_norm: list
    a: float = math.nan
    b: float = math.nan
    nu: list = field(default_factory=list)
    nu_hat: list = field(default_factory=list)
    mu1: dict = field(default_factory=dict)
    mu2: dict = field(default_factory=dict)
    mu3: dict = field(default_factory=dict)
    model: object = field(default=None, repr=False, compare=False)

    def gamma4(self, pq, n):
        return self.Gamma3[pq] ** n * self.Gamma1[pq]

    def gamma5(self, pq, n):
        return self.Gamma3[pq] ** n * self.Gamma2[pq]

    def to_dict(self):
        return _to_dict(self)


def convergence_scalars(Gamma, Gamma_bar, N, N_max, tau_s, tau_d, T, tau_D,
                        kappa=0.0, n0=0):
    """(a, b): a = N^{kappa_bar/tau_s} and
    b = (Gamma_bar/Gamma^N_max)^{tau_s/tau_d} * N^{1/T_bar} * Gamma/N."""
    kappa_bar = kappa + tau_s * (n0 + 1)
    inv_T_bar = 1.0 / T + tau_s / tau_D
    a = N ** (kappa_bar / tau_s)
    b = ((Gamma_bar / Gamma ** N_max) ** (tau_s / tau_d)
         * N ** inv_T_bar * Gamma / N)
    return a, b


def derive_strategy1(model, N, N_max, attack=None, tau_d=None):
    """Gamma family; with average-model attack params and tau_d also a, b, nu, mu."""
    N = check_level(N)
    if N_max < 1:
        raise ValueError("N_max must be at least 1")
    plant, ts = model.plant, model.tau_s
    m = plant.m
    Gamma_p = [inf_norm(model.Ahd[p]) for p in range(m)]
    G1h, G2, G1, G3, Amax, Afull = {}, {}, {}, {}, {}, {}
    for p, q in plant.pairs(distinct=False):
        hat_q = mat_exp(model.calA_hat[q], ts)
        prods = _grid_products(model, model.calA[(p, q)], model.calA[(q, q)])
        G1h[(p, q)] = GRID_SAFETY * max(inf_norm(P) for P in prods)
        G2[(p, q)] = GRID_SAFETY * max(inf_norm(P - hat_q) for P in prods)
        G1[(p, q)] = G1h[(p, q)] + G2[(p, q)] * N / (N - 1)
        G3[(p, q)] = inf_norm(mat_exp(model.calA[(p, q)], ts))
        Amax[(p, q)] = GRID_SAFETY * max(inf_norm(M) for M in model.async_active[(p, q)])
        Afull[(p, q)] = inf_norm(model.async_active_full(p, q))
    distinct = plant.pairs()
    Gamma = max(Gamma_p)
    if distinct:
        Gamma_bar = max(G3[pq] ** (mm - 1) * G1[pq]
                        for pq in distinct for mm in range(N_max))
        Gamma_hat = max(G3[pq] for pq in distinct)
    else:
        Gamma_bar, Gamma_hat = Gamma ** N_max, Gamma
    c = Strategy1Constants(
        N=N, N_max=N_max, Gamma_p=Gamma_p, Gamma1_hat=G1h, Gamma2=G2, Gamma1=G1,
        Gamma3=G3, Gamma=Gamma, Gamma_bar=Gamma_bar,
        Gamma_bar2=max(G2.values()), Gamma_hat=Gamma_hat,
        Ad_async_max=Amax, Ad_async_full=Afull,
        Bd_norm=[inf_norm(model.Bd[p]) for p in range(m)], model=model)
    if attack is not None and tau_d is not None:
        for key, value in lyapunov_scalars(c, tau_d, attack.T, attack.tau_D,
                                           attack.kappa, attack.n0).items():
            setattr(c, key, value)
    return c


def lyapunov_scalars(c, tau_d, T, tau_D, kappa=0.0, n0=0):
    """a, b, nu, nu_hat, mu1..mu3 of the Strategy-1 dwell-time argument."""
    f, m = c.model.fits, c.model.m
    a, b = convergence_scalars(c.Gamma, c.Gamma_bar, c.N, c.N_max,
                               c.model.tau_s, tau_d, T, tau_D, kappa, n0)
    drive = [f.rho[p] * c.Bd_norm[p] + b for p in range(m)]
    out = {"a": a, "b": b,
           "nu": [max(f.lam[p], drive[p]) for p in range(m)],
           "nu_hat": [max(f.rho[p] * f.lam[p], drive[p]) for p in range(m)],
           "mu1": {}, "mu2": {}, "mu3": {}}
    shift = a * c.Gamma_bar2
    for pq in c.model.plant.pairs():
        xi, eta, full = f.xi[pq], f.eta[pq], c.Ad_async_full[pq]
        # the transition and input maps of the first asynchronous period coincide
        out["mu1"][pq] = max(c.Ad_async_max[pq] + shift, c.Ad_async_max[pq] + b + shift)
        out["mu2"][pq] = max(xi * eta, xi * full + b)
        out["mu3"][pq] = max(eta, xi * full + b)
    return out


@dataclass
class Strategy2Constants:
    N: int
    N_max: int
    n_max: int
    Lambda1: list
    Lambda2: list
    Lambda3: list
    Psi: list
    Psi_bar: list
    Psi_low: list
    Lambda4: dict
    Lambda5: dict
    Lambda6: dict
    Ad_async_max: dict
    L1: float
    L2: float
    L3: float
    L5: float
    L6: float
    floor: float
    model: object = field(default=None, repr=False, compare=False)

    def to_dict(self):
        return _to_dict(self)


def psi_values(rho, lam, bd_norm, gamma, N, n_max):
    """Psi(l) for l = 0..n_max via Psi(l+1) = lam*Psi(l) + rho*||B^d||*Gamma^l/N."""
    out = [rho]
    for ell in range(n_max):
        out.append(lam * out[-1] + rho * bd_norm * gamma ** ell / N)
    return out


def psi_direct(rho, lam, bd_norm, gamma, N, ell):
    """Psi(l) from its defining sum."""
    return rho * lam ** ell + sum(rho * lam ** (ell - j - 1) * bd_norm * gamma ** j / N
                                  for j in range(ell))


def strategy2_floor(model):
    f = model.fits
    return max(f.rho[p] * inf_norm(model.Bd[p]) / (1.0 - f.lam[p])
               if f.lam[p] < 1 else math.inf for p in range(model.m))


def derive_strategy2(model, N, N_max, n_max):
    N = check_level(N)
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    plant, f, ts, m = model.plant, model.fits, model.tau_s, model.m
    bd = [inf_norm(model.Bd[p]) for p in range(m)]
    gam = [inf_norm(model.Ahd[p]) for p in range(m)]
    L1 = [f.rho[p] * f.lam[p] + f.rho[p] * bd[p] / N for p in range(m)]
    L2 = [f.lam[p] + f.rho[p] * bd[p] / N for p in range(m)]
    psi = [psi_values(f.rho[p], f.lam[p], bd[p], gam[p], N, n_max) for p in range(m)]
    psi_bar = [max(1.0, max(v)) for v in psi]
    psi_low = [min(v) for v in psi]
    L3 = [psi_bar[p] ** (1.0 / n_max) for p in range(m)]
    L4, L5, L6, Amax = {}, {}, {}, {}
    for p, q in plant.pairs(distinct=False):
        prods = _grid_products(model, model.calA[(p, q)], model.calA[(q, q)])
        L4[(p, q)] = GRID_SAFETY * max(inf_norm(P) for P in prods)
        scale = (1.0 - f.lam[p] * psi_low[p] / psi_bar[p]) / (f.rho[p] * bd[p]) \
            if bd[p] > 0 else 1.0
        L5[(p, q)] = max(scale, 1.0) * L4[(p, q)]
        L6[(p, q)] = inf_norm(mat_exp(model.calA_tilde[(p, q)], ts))
        Amax[(p, q)] = GRID_SAFETY * max(inf_norm(M) for M in model.async_active[(p, q)])
    distinct = plant.pairs() or [(0, 0)]
    return Strategy2Constants(
        N=N, N_max=N_max, n_max=n_max, Lambda1=L1, Lambda2=L2, Lambda3=L3,
        Psi=psi, Psi_bar=psi_bar, Psi_low=psi_low, Lambda4=L4, Lambda5=L5,
        Lambda6=L6, Ad_async_max=Amax, L1=max(L1), L2=max(L2), L3=max(L3),
        L5=max(L5[pq] for pq in distinct), L6=max(L6[pq] for pq in distinct),
        floor=strategy2_floor(model), model=model)


@dataclass
class Strategy3Constants:
    N: int
    xi_tilde: list
    Upsilon1: list
    Upsilon2: list
    Upsilon3: dict
    Upsilon4: dict
    Upsilon_hat: dict
    U: float
    U1: float
    U2: float
    xi_bar: float
    eta_bar: float
    floor: float
    model: object = field(default=None, repr=False, compare=False)

    def to_dict(self):
        return _to_dict(self)


def passive_floor(model):
    f = model.fits
    return max(f.rho_hat[p] * inf_norm(model.Bhd[p] @ model.plant.K[p]) / (1.0 - f.lam_hat[p])
               if f.lam_hat[p] < 1 else math.inf for p in range(model.m))


def derive_strategy3(model, N):
    N = check_level(N)
    plant, f, m = model.plant, model.fits, model.m
    bk = [inf_norm(model.Bhd[p] @ plant.K[p]) for p in range(m)]
    xt = [max(f.xi_hat[p], 1.0) for p in range(m)]
    U1 = [f.rho_hat[p] * f.lam_hat[p] + f.rho_hat[p] * bk[p] / N for p in range(m)]
    U2 = [f.lam_hat[p] + f.rho_hat[p] * bk[p] / N for p in range(m)]
    U3, U4, Uh = {}, {}, {}
    for p, q in plant.pairs(distinct=False):
        Ag, Bg = model.async_passive_A[(p, q)], model.async_passive_B[(p, q)]
        U3[(p, q)] = GRID_SAFETY * max(
            inf_norm(Ag[i]) + inf_norm(Bg[i] @ plant.K[q]) * (N - 1) / N
            for i in range(len(Ag)))
        U4[(p, q)] = GRID_SAFETY * max(inf_norm(a) for a in Ag)
        Uh[(p, q)] = max(U3[(p, q)], U4[(p, q)])
    pairs = plant.pairs() or [(0, 0)]
    U = max(max(Uh[(p, q)] * xt[p], U3[(p, q)] * U1[p] / U2[p]) for p, q in pairs)
    return Strategy3Constants(
        N=N, xi_tilde=xt, Upsilon1=U1, Upsilon2=U2, Upsilon3=U3, Upsilon4=U4,
        Upsilon_hat=Uh, U=U, U1=max(U1), U2=max(U2), xi_bar=max(xt),
        eta_bar=max(f.eta_hat), floor=passive_floor(model), model=model)


@dataclass
class Strategy4Constants:
    N: int
    n_min: int
    n_max: int
    tau_d: float
    phi1: float
    phi2: float
    phi3: float
    phi4: float
    phi5: float
    phi: float
    rho_tilde: list
    eta_tilde: list
    floor: float
    model: object = field(default=None, repr=False, compare=False)

    @property
    def period(self):
        """Number of sampling periods in one virtual attack cycle."""
        return self.n_min + self.n_max

    def to_dict(self):
        d = _to_dict(self)
        d["phi_up1"], d["phi_up2"] = self.phi1, self.phi2
        return d


def mismatch_bound(model, N, n_max):
    """Largest gap between attack-free and attacked passive trajectories.

    Maximises ||w_x(l, kb)|| + w_e(l, kb)/N over ordered mode pairs, run
    lengths l <= n_max and switch offsets kb < l, where
    w_x = Acl_p^(l-kb) Acl_q^kb - Ad_p^(l-kb) Ad_q^kb and w_e sums the input
    channel norms along the same run.
    """
    plant, m = model.plant, model.m
    Acl, Ahd = model.Acl, model.Ahd
    BK = [model.Bhd[p] @ plant.K[p] for p in range(m)]

    def mpow(M, k):
        return np.linalg.matrix_power(M, k)

    best = 0.0
    for p in range(m):
        for q in range(m):
            for ell in range(1, n_max + 1):
                for kb in range(ell):
                    lead = mpow(Acl[p], ell - kb)
                    wx = lead @ mpow(Acl[q], kb) - mpow(Ahd[p], ell - kb) @ mpow(Ahd[q], kb)
                    we = inf_norm(BK[p])
                    we += sum(inf_norm(lead @ mpow(Acl[q], kb - i) @ BK[q])
                              for i in range(kb + 1))
                    we += sum(inf_norm(mpow(Acl[p], ell - i) @ BK[p])
                              for i in range(kb + 1, ell))
                    best = max(best, inf_norm(wx) + we / N)
    return best


def derive_strategy4(model, N, n_min, n_max, tau_d):
    N = check_level(N)
    if n_min < 1 or n_max < 1:
        raise ValueError("n_min and n_max must be at least 1")
    plant, f, m = model.plant, model.fits, model.m
    bk = [inf_norm(model.Bhd[p] @ plant.K[p]) for p in range(m)]
    rt = [max(f.rho_hat[p], 1.0) for p in range(m)]
    et = [max(f.eta_hat[p], 1.0) for p in range(m)]
    first = [rt[p] * f.lam_hat[p] + f.rho_hat[p] * bk[p] / N for p in range(m)]
    rest = [f.lam_hat[p] + f.rho_hat[p] * bk[p] / N for p in range(m)]
    xt = [max(f.xi_hat[p], 1.0) for p in range(m)]
    return Strategy4Constants(
        N=N, n_min=n_min, n_max=n_max, tau_d=tau_d,
        phi1=max(first), phi2=max(rest),
        phi3=max(xt[p] * f.eta_hat[p] for p in range(m)), phi4=max(f.eta_hat),
        phi5=max(max(f.xi_hat[p], first[p] / rest[p], 1.0) for p in range(m)),
        phi=mismatch_bound(model, N, n_max), rho_tilde=rt, eta_tilde=et,
        floor=passive_floor(model), model=model)


# How each reported scalar is obtained; emitted next to the values by the CLI.
DESCRIPTIONS = {
    "Gamma_p": "||exp(A_p tau_s)||, open-loop growth over one period",
    "Gamma1_hat": "grid max over tbar of the active map across a switch inside one period",
    "Gamma2": "grid max of the same map minus the synchronous active map",
    "Gamma1": "Gamma1_hat + Gamma2 N/(N-1)",
    "Gamma3": "||exp(calA_pq tau_s)||, one fully asynchronous active period",
    "Gamma": "max_p Gamma_p",
    "Gamma_bar": "largest growth over an asynchronous stage of at most N_max periods",
    "Gamma_bar2": "max of Gamma2",
    "Gamma_hat": "max of Gamma3 over distinct pairs",
    "Ad_async_max": "grid max of ||A_pq^d(tbar)||",
    "Ad_async_full": "||A_pq^d(tau_s)||",
    "Bd_norm": "||B_p^d||, active input-coupling matrix",
    "Lambda1": "rho_p lam_p + rho_p ||B_p^d||/N",
    "Lambda2": "lam_p + rho_p ||B_p^d||/N",
    "Lambda3": "Psi_bar_p^(1/n_max)",
    "Psi": "Psi_p(l) for l = 0..n_max, range growth during an l-period outage",
    "Psi_bar": "max(1, max_l Psi_p(l))",
    "Psi_low": "min_l Psi_p(l)",
    "Lambda4": "grid max of the active map across a switch",
    "Lambda5": "Lambda4 scaled by the outage recovery factor",
    "Lambda6": "||exp(calA_tilde_pq tau_s)||",
    "L1": "max Lambda1", "L2": "max Lambda2", "L3": "max Lambda3",
    "L5": "max Lambda5 over distinct pairs", "L6": "max Lambda6 over distinct pairs",
    "floor": "smallest admissible quantization level",
    "xi_tilde": "max(xi_hat_p, 1)",
    "Upsilon1": "rho_hat_p lam_hat_p + rho_hat_p ||Bhat_p^d K_p||/N",
    "Upsilon2": "lam_hat_p + rho_hat_p ||Bhat_p^d K_p||/N",
    "Upsilon3": "grid max of the passive map across a switch, with quantized input",
    "Upsilon4": "grid max of the open-loop passive map across a switch",
    "Upsilon_hat": "max(Upsilon3, Upsilon4)",
    "U": "largest per-switch growth of the passive range",
    "U1": "max Upsilon1", "U2": "max Upsilon2",
    "xi_bar": "max xi_tilde", "eta_bar": "max eta_hat",
    "phi1": "first attack-free zoom-in factor", "phi2": "subsequent zoom-in factor",
    "phi3": "first attacked zoom-out factor", "phi4": "subsequent zoom-out factor",
    "phi5": "largest factor on a switching step",
    "phi": "largest attack-free versus attacked trajectory gap",
    "rho_tilde": "max(rho_hat_p, 1)", "eta_tilde": "max(eta_hat_p, 1)",
    "a": "N^(kappa_bar/tau_s)", "b": "per-period contraction of the range envelope",
    "nu": "max(lam_p, rho_p ||B_p^d|| + b)",
    "nu_hat": "max(rho_p lam_p, rho_p ||B_p^d|| + b)",
    "mu1": "growth over the period that contains a switch",
    "mu2": "max(xi eta, xi ||A_pq^d(tau_s)|| + b)",
    "mu3": "max(eta, xi ||A_pq^d(tau_s)|| + b)",
}
