"""Benchmark plants A, B, C with their reference decay constants.

Plant A is a two-speed VTOL helicopter model (4 states, 2 inputs), plant B a
2-state two-mode system, plant C a 4-state two-mode system.  Reference decay
constants are the externally reported (rho, lambda, xi, eta) values; they are
used as overrides when reproducing reported certificates.
"""

import numpy as np

from .plant import SwitchedPlant

_HELI_A = [[-0.0366, 0.0271, 0.0188, -0.4555],
           [0.0482, -1.0100, 0.0024, -4.0208],
           [0.1002, None, -0.7070, None],
           [0.0, 0.0, 1.0, 0.0]]
_HELI_SPEEDS = [(0.3681, 1.4200, 3.5446), (0.5047, 2.5460, 5.1120)]


def _heli_mode(a32, a34, b21):
    A = np.array([[v if v is not None else 0.0 for v in row] for row in _HELI_A])
    A[2, 1], A[2, 3] = a32, a34
    B = np.array([[0.4422, 0.1761], [b21, -7.5922], [-5.5200, 4.4900], [0.0, 0.0]])
    return A, B


def plant_a(tau_s=0.05, E0=2.0):
    modes = [_heli_mode(*s) for s in _HELI_SPEEDS]
    K = [[[0.0077, 0.0742, 0.2070, 0.2516], [-0.0123, 0.0620, 0.1266, 0.1317]],
         [[-0.0030, -0.0055, 0.2631, 0.4130], [-0.0471, 0.1000, 0.2202, -0.3283]]]
    return SwitchedPlant(A=[a for a, _ in modes], B=[b for _, b in modes],
                         K=K, tau_s=tau_s, E0=E0)


def plant_b(tau_s=0.1, E0=2.0):
    A = [[[3.3968, 1.4663], [3.0711, -3.2308]],
         [[-0.2915, -3.4221], [-0.2891, -3.6517]]]
    B = [[[0.9207, -1.2808], [1.7131, 0.9749]]] * 2
    K = [[[-3.6011, -2.5837], [4.1549, -1.1392]],
         [[-2.0251, -0.9775], [3.7468, -2.4542]]]
    return SwitchedPlant(A=A, B=B, K=K, tau_s=tau_s, E0=E0)


def plant_c(tau_s=0.1, E0=4.0):
    A = [[[0.56, 0.35, -0.30, -0.60], [-0.10, -0.64, -0.64, -0.73],
          [0.04, -0.25, -0.42, 0.57], [0.30, 0.57, -0.58, -0.50]],
         [[-0.50, -0.64, -0.74, 0.30], [0.560, 0.35, -0.30, -1.26],
          [-0.60, 0.57, -0.80, -0.60], [0.40, -0.25, 0.42, -1.57]]]
    B = [[[1.91, 1.58], [0.69, -0.62], [-1.05, -1.82], [-0.20, 0.39]],
         [[1.27, -1.28], [1.32, 0.50], [-1.13, 1.21], [-1.85, 1.17]]]
    K = [[[-1.4037, -0.2758, -0.1832, 0.0781], [-0.8063, 0.1959, 0.3296, -0.3401]],
         [[-0.2191, -0.3600, 0.2030, 0.4401], [0.2208, -0.8859, 0.1664, 0.8850]]]
    return SwitchedPlant(A=A, B=B, K=K, tau_s=tau_s, E0=E0)


PLANTS = {"A": plant_a, "B": plant_b, "C": plant_c}

INITIAL_STATES = {
    "A": [-0.5, -1.0, 1.0, -0.5],
    "B": [1.0, -1.0],
    "C": [-2.0, 2.0, 1.0, -1.0],
}

# Reported decay constants.  xi/eta lists are indexed by the first mode of
# the ordered pair (two modes only).
REFERENCE_FITS = {
    "A": {
        "rho": [3.8927, 3.8620], "lam": [0.9602, 0.9609],
        "xi": [1.1687, 0.5751], "eta": [1.0216, 1.0922],
        "rho_hat": [3.1096, 3.8799], "lam_hat": [0.9822, 0.9607],
        "xi_hat": [1.0930, 1.0599], "eta_hat": [1.1004, 1.1029],
    },
    "B": {
        "rho_hat": [1.0986, 1.1158], "lam_hat": [0.375, 0.35],
        "xi_hat": [1.4421, 0.1], "eta_hat": [1.0314, 1.4979],
    },
    "C": {
        "rho": [1.0233, 1.0781], "lam": [0.9482, 0.9684],
        "xi": [1.8257, 1.4856], "eta": [1.1879, 1.2069],
        "rho_hat": [1.9587, 1.9391], "lam_hat": [0.9533, 0.9543],
        "xi_hat": [1.1490, 1.2481], "eta_hat": [1.0991, 1.1041],
    },
}

# Reported scalar results, used as reproduction targets.
REFERENCE_RESULTS = {
    "A": {"gamma": 1.1541, "s1_b": 0.2951, "s1_dwell": 2.5948,
          "corollary_dwell": 2.0429, "s2_floor": 119.4795, "s3_floor": 29.2091},
    "B": {"s3_floor": 2.1153},
    "C": {"gamma": 1.2393, "s1_b": 0.3309, "corollary_dwell": 2.8382,
          "s2_floor": 39.5517, "s3_floor": 20.6266},
}

# Reported parameter sets.
REFERENCE_PARAMS = {
    "A": {
        "S1": {"N": 3, "tau_d": 5.9, "tau_D": 1.2, "T": 1.5, "N_max": 2},
        "S1-Corollary": {"N": 3, "T": 1.1, "tau_D": 0.0420, "N_max": 2},
        "S2": {"N": 125, "tau_d": 9.0, "tau_D": 6.0, "T": 12.0, "n_max": 18, "N_max": 2},
        "S3": {"N": 175, "tau_d": 12.0, "tau_D": 20.0, "T": 20.0, "N_max": 2},
    },
    "B": {
        "S4": {"N": 3, "tau_d": 2.0, "n_min": 10, "n_max": 4},
    },
    "C": {
        "S1": {"N": 3, "tau_d": 5.9, "tau_D": 1.2, "T": 1.5, "N_max": 2},
        "S1-Corollary": {"N": 3, "T": 1.1, "tau_D": 0.1242, "N_max": 2},
        "S2": {"N": 105, "tau_d": 9.0, "tau_D": 5.0, "T": 10.0, "N_max": 2},
        "S3": {"N": 155, "tau_d": 20.0, "tau_D": 20.0, "T": 20.0, "N_max": 2},
    },
}
