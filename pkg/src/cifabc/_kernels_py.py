"""Pure-NumPy implementation of the bootstrap replicate kernel."""

import numpy as np


def _process_on_grid(P, Q, idx, f):
    B = P.shape[0]
    zero = np.zeros((B, 1))
    cp = np.concatenate((zero, np.cumsum(P, axis=1)), axis=1)
    cq = np.concatenate((zero, np.cumsum(Q, axis=1)), axis=1)
    return cp[:, idx] - f * cq[:, idx]


def replicate_functionals(P1, Q1, idx1, f1, P2, Q2, idx2, f2, widths):
    """ABC, KS, CvM and integrated-difference functionals of V1 - V2.

    Row ``b`` of ``P_j``/``Q_j`` holds the per-event increments of replicate
    ``b`` of group ``j``; the process on grid point ``g`` is
    ``sum(P_j[b, :idx_j[g]]) - f_j[g] * sum(Q_j[b, :idx_j[g]])``.
    Returns a ``(B, 4)`` array.
    """
    d = _process_on_grid(P1, Q1, idx1, f1) - _process_on_grid(P2, Q2, idx2, f2)
    out = np.empty((d.shape[0], 4))
    ad = np.abs(d)
    out[:, 0] = ad @ widths
    out[:, 1] = ad.max(axis=1)
    out[:, 2] = (d * d) @ widths
    out[:, 3] = d @ widths
    return out
