"""Controller-side predictor and control laws.

Active control runs a model-based predictor between receptions and feeds
back its state continuously.  Passive control holds the last decoded sample
(zero-order hold) and applies zero input while the link is down.
"""

import numpy as np


def active_control(K, xhat):
    """u(t) = K_q xhat(t)."""
    return K @ xhat


def passive_control(K, decoded, received):
    """Held input over [t_k, t_{k+1}): K_q c_k when received, else zero."""
    if not received:
        return np.zeros(K.shape[0])
    return K @ decoded


def predict(Ad_q, xhat):
    """One-period predictor step xhat(t_{k+1}^-) = exp(Abar_qq tau_s) xhat(t_k^+).

    Encoder mirror and controller both call this, so their copies stay
    bit-identical.
    """
    return Ad_q @ xhat
