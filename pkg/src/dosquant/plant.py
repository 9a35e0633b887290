"""Switched plant description and every discretised transition matrix derived from it.

State coordinates used by the augmented matrices:

* ``[x; xh]`` (plant state, predictor state) for the ``calA`` family,
* ``[x; e]`` with ``e = x - xh`` for the ``calA_bar`` / ``calA_tilde`` family.

Index ``p`` is the plant mode, ``q`` the controller mode.  Modes are 0-based
in code and 1-based in files.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionError
from .linalg import (DEFAULT_HORIZON, DEFAULT_MARGIN, DecayFit, as_matrix,
                     block_upper, conv_integral, decay_fit, input_integral,
                     mat_exp)

DEFAULT_GRID = 201
GRID_SAFETY = 1.01


@dataclass(frozen=True)
class SwitchedPlant:
    A: tuple
    B: tuple
    K: tuple
    tau_s: float
    E0: float = 1.0

    def __post_init__(self):
        A = tuple(as_matrix(a, f"A[{i}]") for i, a in enumerate(self.A))
        B = tuple(as_matrix(b, f"B[{i}]") for i, b in enumerate(self.B))
        K = tuple(as_matrix(k, f"K[{i}]") for i, k in enumerate(self.K))
        if not A or not (len(A) == len(B) == len(K)):
            raise DimensionError("A, B, K need the same non-zero number of modes")
        nx, nu = A[0].shape[0], B[0].shape[1]
        for i in range(len(A)):
            if A[i].shape != (nx, nx):
                raise DimensionError(f"A[{i}] must be {nx}x{nx}")
            if B[i].shape != (nx, nu):
                raise DimensionError(f"B[{i}] must be {nx}x{nu}")
            if K[i].shape != (nu, nx):
                raise DimensionError(f"K[{i}] must be {nu}x{nx}")
        if not self.tau_s > 0:
            raise ValueError("tau_s must be positive")
        if not self.E0 > 0:
            raise ValueError("E0 must be positive")
        for a in (*A, *B, *K):
            a.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "K", K)

    @property
    def m(self):
        return len(self.A)

    @property
    def nx(self):
        return self.A[0].shape[0]

    @property
    def nu(self):
        return self.B[0].shape[1]

    def Abar(self, p, q):
        """A_p + B_p K_q."""
        return self.A[p] + self.B[p] @ self.K[q]

    def pairs(self, distinct=True):
        return [(p, q) for p in range(self.m) for q in range(self.m)
                if p != q or not distinct]


@dataclass
class Fits:
    """Geometric decay constants.

    rho/lam: active synchronous map, xi/eta: active asynchronous map (per
    ordered pair), rho_hat/lam_hat: passive closed loop, xi_hat/eta_hat:
    passive open loop.
    """

    rho: list
    lam: list
    xi: dict
    eta: dict
    rho_hat: list
    lam_hat: list
    xi_hat: list
    eta_hat: list
    source: dict = field(default_factory=dict)

    def copy(self):
        return Fits(list(self.rho), list(self.lam), dict(self.xi), dict(self.eta),
                    list(self.rho_hat), list(self.lam_hat), list(self.xi_hat),
                    list(self.eta_hat), dict(self.source))


PER_MODE = ("rho", "lam", "rho_hat", "lam_hat", "xi_hat", "eta_hat")
PER_PAIR = ("xi", "eta")


def _pair_values(value, m, name):
    """Accept an m x m nested list, a {"p,q": v} dict, or (two modes) a list
    indexed by the first mode of the pair."""
    out = {}
    if isinstance(value, dict):
        for key, v in value.items():
            p, q = (int(s) - 1 for s in str(key).replace(" ", "").split(","))
            out[(p, q)] = float(v)
    elif len(value) and isinstance(value[0], (list, tuple)):
        for p in range(m):
            for q in range(m):
                if p != q:
                    out[(p, q)] = float(value[p][q])
    else:
        if len(value) != m:
            raise DimensionError(f"{name} needs {m} entries")
        for p in range(m):
            for q in range(m):
                if p != q:
                    out[(p, q)] = float(value[p])
    return out


def apply_overrides(fits, overrides, m):
    """Return a copy of ``fits`` with the given entries replaced."""
    new = fits.copy()
    for key, value in (overrides or {}).items():
        if key in PER_MODE:
            if len(value) != m:
                raise DimensionError(f"override {key} needs {m} entries")
            setattr(new, key, [float(v) for v in value])
        elif key in PER_PAIR:
            getattr(new, key).update(_pair_values(value, m, key))
        else:
            raise KeyError(f"unknown decay override '{key}'")
        new.source[key] = "override"
    return new


@dataclass
class DiscretizedModel:
    plant: SwitchedPlant
    grid: np.ndarray
    Ad: list
    Bd: list
    Ahd: list
    Bhd: list
    Acl: list
    calA: dict
    calA_hat: list
    calA_bar: list
    calA_tilde: dict
    async_active: dict
    async_passive_A: dict
    async_passive_B: dict
    fits: Fits
    fit_horizon: int = DEFAULT_HORIZON

    @property
    def tau_s(self):
        return self.plant.tau_s

    @property
    def m(self):
        return self.plant.m

    def async_active_full(self, p, q):
        """A_pq^d(tau_s): one whole asynchronous period, acting on [x; e]."""
        return self.async_active[(p, q)][-1]

    def async_fit_matrix(self, p, q):
        """[A_pq^d(tau_s); 0], the square matrix whose powers xi/eta bound."""
        top = self.async_active_full(p, q)
        n = top.shape[1]
        out = np.zeros((n, n))
        out[:top.shape[0]] = top
        return out

    def with_overrides(self, overrides):
        if not overrides:
            return self
        return replace(self, fits=apply_overrides(self.fits, overrides, self.m))


def _powers(step, count):
    out = [np.eye(step.shape[0])]
    for _ in range(count - 1):
        out.append(step @ out[-1])
    return out


def discretize(plant, grid=DEFAULT_GRID, fit_horizon=DEFAULT_HORIZON,
               margin=DEFAULT_MARGIN, overrides=None):
    """Build every transition matrix and decay fit for ``plant``.

    Families that depend on the switching offset tbar (time from the switch
    to the next sampling instant) are tabulated on tbar_i = i*tau_s/(grid-1).
    """
    if grid < 2:
        raise ValueError("grid needs at least two points")
    ts, m, nx = plant.tau_s, plant.m, plant.nx
    A, B, K = plant.A, plant.B, plant.K
    tgrid = np.linspace(0.0, ts, grid)
    dt = ts / (grid - 1)
    Ad, Bd, Ahd, Bhd, Acl, calA_hat, calA_bar = [], [], [], [], [], [], []
    for p in range(m):
        abar = plant.Abar(p, p)
        Ad.append(mat_exp(abar, ts))
        Bd.append(conv_integral(abar, B[p] @ K[p], A[p], ts))
        Ahd.append(mat_exp(A[p], ts))
        Bhd.append(input_integral(A[p], B[p], ts))
        Acl.append(Ahd[p] + Bhd[p] @ K[p])
        zero = np.zeros((nx, nx))
        calA_hat.append(block_upper(abar, zero, abar))
        calA_bar.append(block_upper(abar, -B[p] @ K[p], A[p]))
    calA, calA_tilde = {}, {}
    async_active, async_pA, async_pB = {}, {}, {}
    sync_steps = [_powers(mat_exp(calA_bar[q], dt), grid) for q in range(m)]
    open_steps = [_powers(mat_exp(A[q], dt), grid) for q in range(m)]
    held = [[input_integral(A[q], B[q], t) for t in tgrid] for q in range(m)]
    for p, q in plant.pairs(distinct=False):
        calA[(p, q)] = block_upper(A[p], B[p] @ K[q], plant.Abar(q, q))
        pi1 = plant.Abar(p, q) - plant.Abar(q, q)
        pi2 = B[p] @ K[q] - plant.Abar(q, q)
        tilde = np.block([[plant.Abar(p, q), -B[p] @ K[q]], [pi1, -pi2]])
        calA_tilde[(p, q)] = tilde
        after = _powers(mat_exp(tilde, dt), grid)
        maps, pa, pb = [], [], []
        for i in range(grid):
            full = after[i] @ sync_steps[q][grid - 1 - i]
            maps.append(full[:nx])
            pa.append(open_steps[p][i] @ open_steps[q][grid - 1 - i])
            pb.append(open_steps[p][i] @ held[q][grid - 1 - i] + held[p][i])
        async_active[(p, q)] = np.array(maps)
        async_pA[(p, q)] = np.array(pa)
        async_pB[(p, q)] = np.array(pb)
    model = DiscretizedModel(
        plant=plant, grid=tgrid, Ad=Ad, Bd=Bd, Ahd=Ahd, Bhd=Bhd, Acl=Acl,
        calA=calA, calA_hat=calA_hat, calA_bar=calA_bar, calA_tilde=calA_tilde,
        async_active=async_active, async_passive_A=async_pA,
        async_passive_B=async_pB, fits=None, fit_horizon=fit_horizon)
    model.fits = derive_fits(model, fit_horizon, margin)
    return model.with_overrides(overrides)


def derive_fits(model, horizon=DEFAULT_HORIZON, margin=DEFAULT_MARGIN):
    """Self-derived decay constants for every family the strategies use."""
    m = model.m
    act = [decay_fit(model.Ad[p], horizon, margin) for p in range(m)]
    pcl = [decay_fit(model.Acl[p], horizon, margin) for p in range(m)]
    pol = [decay_fit(model.Ahd[p], horizon, margin) for p in range(m)]
    asy = {pq: decay_fit(model.async_fit_matrix(*pq), horizon, margin)
           for pq in model.plant.pairs()}
    return Fits(
        rho=[f.gain for f in act], lam=[f.rate for f in act],
        xi={pq: f.gain for pq, f in asy.items()},
        eta={pq: f.rate for pq, f in asy.items()},
        rho_hat=[f.gain for f in pcl], lam_hat=[f.rate for f in pcl],
        xi_hat=[f.gain for f in pol], eta_hat=[f.rate for f in pol],
        source={k: "derived" for k in PER_MODE + PER_PAIR})


def fit_pairs(model):
    """Every (name, matrix, DecayFit) triple currently held by the model."""
    f = model.fits
    out = []
    for p in range(model.m):
        out.append((f"Ad[{p + 1}]", model.Ad[p], DecayFit(f.rho[p], f.lam[p])))
        out.append((f"Acl_hat[{p + 1}]", model.Acl[p],
                    DecayFit(f.rho_hat[p], f.lam_hat[p])))
        out.append((f"Ad_hat[{p + 1}]", model.Ahd[p],
                    DecayFit(f.xi_hat[p], f.eta_hat[p])))
    for (p, q) in model.plant.pairs():
        out.append((f"Ad_async[{p + 1}{q + 1}]", model.async_fit_matrix(p, q),
                    DecayFit(f.xi[(p, q)], f.eta[(p, q)])))
    return out
