from __future__ import annotations

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import LinAlgError, cho_factor, cho_solve


def spd_solve(M: NDArray[np.float64], rhs: NDArray[np.float64]) -> NDArray[np.float64]:
    """Solve a symmetric positive (semi)definite system.

    Falls back to least squares when Cholesky fails, which happens when
    the normal matrix loses rank near the end of an interior-point run.
    """
    if M.shape[0] == 0:
        return np.zeros(0)
    try:
        return cho_solve(cho_factor(M, check_finite=False), rhs, check_finite=False)
    except (LinAlgError, ValueError):
        return np.linalg.lstsq(M, rhs, rcond=None)[0]


def max_step(v: NDArray[np.float64], dv: NDArray[np.float64]) -> float:
    """Largest ``a`` with ``v + a * dv >= 0`` (``inf`` when ``dv >= 0``)."""
    neg = dv < 0
    if not neg.any():
        return np.inf
    return float((-v[neg] / dv[neg]).min())
