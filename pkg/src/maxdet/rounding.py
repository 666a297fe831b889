"""Ellipsoidal rounding of the symmetric hull of the columns.

A design p over the columns induces the moment matrix
M(p) = sum_i p_i a_i a_i^T and the ellipsoid {x : x^T M(p)^{-1} x <= 1}.
That ellipsoid always sits inside conv{+-a_i}; pushing the largest
leverage score a_j^T M^{-1} a_j down to (1+eps)*d makes the blow-up by
sqrt((1+eps)*d) cover every column, which is the sandwich the greedy
analysis needs.  Frank-Wolfe coordinate ascent on log det M(p) is the
standard constructive route: the step toward the worst column has the
closed-form optimal size lam = (l/d - 1)/(l - 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, IterationLimitError, RankError
from .numerics import InstanceMatrix

_REFRESH_EVERY = 64


@dataclass(frozen=True, eq=False)
class RoundingDesign:
    weights: np.ndarray
    moment: np.ndarray
    epsilon: float
    max_leverage: float


@dataclass(frozen=True, eq=False)
class RoundedInstance:
    transform: np.ndarray
    matrix: InstanceMatrix
    log_det_transform: float
    design: RoundingDesign


def _leverages(a, minv):
    return np.einsum("ij,ij->j", a, minv @ a)


def default_iteration_cap(d, epsilon):
    return math.ceil(10.0 * d * (math.log(d) + 1.0 / epsilon + 1.0))


def d_optimal_design(
    instance: InstanceMatrix, epsilon: float, max_iterations=None
) -> RoundingDesign:
    """Design with max leverage at most (1+epsilon)*d via Frank-Wolfe.

    Starts uniform; each iteration mixes toward the column of largest
    leverage with the closed-form step and applies a Sherman-Morrison
    update of M^{-1} (refreshed from M periodically against drift).
    """
    if epsilon <= 0.0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    a = instance.data
    d, n = a.shape
    bound = (1.0 + epsilon) * d
    cap = default_iteration_cap(d, epsilon) if max_iterations is None else max_iterations

    p = np.full(n, 1.0 / n)
    m = (a * p) @ a.T
    try:
        minv = np.linalg.inv(m)
    except np.linalg.LinAlgError:
        raise RankError("moment matrix singular; instance not full rank")

    best_seen = math.inf
    for it in range(cap + 1):
        if it % _REFRESH_EVERY == 0:
            minv = np.linalg.inv(m)
        lev = _leverages(a, minv)
        j = int(np.argmax(lev))
        lmax = float(lev[j])
        if lmax <= bound:
            minv = np.linalg.inv(m)  # exact recheck before declaring done
            lev = _leverages(a, minv)
            j = int(np.argmax(lev))
            lmax = float(lev[j])
            if lmax <= bound:
                p = p / p.sum()
                return RoundingDesign(
                    weights=p,
                    moment=(a * p) @ a.T,
                    epsilon=float(epsilon),
                    max_leverage=lmax,
                )
        best_seen = min(best_seen, lmax)
        if it == cap:
            break
        lam = (lmax / d - 1.0) / (lmax - 1.0)
        col = a[:, j]
        p *= 1.0 - lam
        p[j] += lam
        m = (1.0 - lam) * m + lam * np.outer(col, col)
        # Sherman-Morrison for ((1-lam) M + lam c c^T)^{-1}
        c = lam / (1.0 - lam)
        mv = minv @ col
        minv = (minv - (c / (1.0 + c * (col @ mv))) * np.outer(mv, mv)) / (1.0 - lam)
    raise IterationLimitError(
        f"design did not reach leverage bound {bound:.6g} in {cap} iterations "
        f"(best {best_seen:.6g})",
        best_leverage=best_seen,
        iterations=cap,
    )


def inverse_sqrt_psd(m):
    """Symmetric inverse square root via eigendecomposition.

    Eigenvalues are floored at 1e-14 * trace so the transform is always
    finite and deterministic.
    """
    w, v = np.linalg.eigh(m)
    floor = 1e-14 * float(np.trace(m))
    w = np.maximum(w, floor)
    t = (v / np.sqrt(w)) @ v.T
    log_det_t = -0.5 * float(np.log(w).sum())
    return 0.5 * (t + t.T), log_det_t


def round_instance(
    instance: InstanceMatrix, epsilon: float, max_iterations=None
) -> RoundedInstance:
    """Map the design ellipsoid to the unit ball: columns become T a_i.

    After this, the unit ball is inside conv{+-columns} and every
    column norm is at most sqrt((1+eps)*d); determinants of all bases
    shift by the same ln|det T|.
    """
    design = d_optimal_design(instance, epsilon, max_iterations)
    t, log_det_t = inverse_sqrt_psd(design.moment)
    return RoundedInstance(
        transform=t,
        matrix=InstanceMatrix(t @ instance.data),
        log_det_transform=log_det_t,
        design=design,
    )
