"""Greedy basis selection with approximation certificates.

The solver repeatedly takes the column of largest norm and projects the
rest onto its orthogonal complement; after d rounds the product of pick
norms equals the |det| of the selected basis in the working space.  Run
on a rounded instance this is a provable approximation: the classical
factor ((1+eps)d)^((d-1)/2) and the sharper (e ln((1+eps)d))^(d/2),
whose per-run witness is the grouped-axis ellipsoid certificate below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CertificateUnavailableError,
    InternalConsistencyError,
    RankError,
)
from .numerics import InstanceMatrix, log_abs_det, project_out, rank_tolerance
from .rounding import round_instance

_SQRT_E = math.sqrt(math.e)


@dataclass(frozen=True, eq=False)
class GreedyTrace:
    """Result of a greedy run.

    picked_indices are original column indices in pick order; rho are
    the norms of the picks in the working (rounded, if applicable)
    space; log_abs_det_output is the |det| of the selected basis in the
    ORIGINAL matrix.  rounded_columns / picked_frame / log_det_transform
    carry what the certificates need and are None for unrounded runs
    except picked_frame, which is always available.
    """

    picked_indices: tuple
    rho: np.ndarray
    epsilon: float
    rounded: bool
    log_abs_det_output: float
    rounded_columns: np.ndarray | None
    picked_frame: np.ndarray
    log_det_transform: float | None

    @property
    def d(self):
        return len(self.picked_indices)

    def sorted_basis_indices(self):
        return tuple(sorted(self.picked_indices))


def _greedy_scan(w, tol):
    """d rounds of max-norm pick + projection on a working copy of w."""
    d, n = w.shape
    picked = []
    rho = []
    frame = np.empty((d, d))
    for i in range(d):
        norms = np.sqrt((w * w).sum(axis=0))
        j = int(np.argmax(norms))  # exact ties: lowest index wins
        if norms[j] <= tol:
            raise RankError(f"rank collapse after {i} picks")
        picked.append(j)
        rho.append(float(norms[j]))
        frame[i] = w[:, j] / norms[j]
        w = project_out(w, w[:, j])
    return picked, np.array(rho), frame


def khachiyan_greedy(
    instance: InstanceMatrix, epsilon: float = 0.25, apply_rounding: bool = True
) -> GreedyTrace:
    """Greedy max-norm basis selection, optionally on a rounded instance."""
    if apply_rounding:
        rounded = round_instance(instance, epsilon)
        work = np.array(rounded.matrix.data, order="C")
        rounded_columns = work.copy()
        log_det_t = rounded.log_det_transform
    else:
        work = np.array(instance.data, order="C")
        rounded_columns = None
        log_det_t = None
    picked, rho, frame = _greedy_scan(work, rank_tolerance(work))
    basis = sorted(picked)
    lg, sg = log_abs_det(instance.data[:, basis])
    if sg == 0:
        raise RankError("greedy produced a singular basis")
    return GreedyTrace(
        picked_indices=tuple(picked),
        rho=rho,
        epsilon=float(epsilon),
        rounded=apply_rounding,
        log_abs_det_output=float(lg),
        rounded_columns=rounded_columns,
        picked_frame=frame,
        log_det_transform=log_det_t,
    )


def certificate_factors(d, epsilon):
    """Log-domain guaranteed factors for dimension d and tolerance eps.

    Returns (classic_log, improved_log) for the ((1+eps)d)^((d-1)/2) and
    (e ln((1+eps)d))^(d/2) closed forms.  Both are clamped at 1 (log 0),
    which only matters at d = 1 where greedy is exact anyway.
    """
    y = (1.0 + epsilon) * d
    khachiyan_log = max(0.0, 0.5 * (d - 1) * math.log(y))
    improved_log = max(0.0, 0.5 * d * math.log(math.e * math.log(y)))
    return khachiyan_log, improved_log


def certify_bounds(trace: GreedyTrace):
    """Both guaranteed approximation factors for a rounded trace, in logs.

    Returns (khachiyan_log, improved_log): Delta_max <= exp(factor) *
    prod(rho) holds for each.
    """
    if not trace.rounded:
        raise CertificateUnavailableError("certificates require a rounded trace")
    return certificate_factors(trace.d, trace.epsilon)


@dataclass(frozen=True, eq=False)
class GroupingCertificate:
    """Grouped-axis ellipsoid witness for the sharper factor.

    groups partition the pick positions 0..d-1 into maximal runs whose
    norms lie within a sqrt(e) band of the group leader; r holds each
    leader norm, the ellipsoid semi-axis for position i is
    r[group(i)] / sqrt(e) and every working column lies inside
    sqrt(e * t) times that ellipsoid.
    """

    groups: tuple
    r: tuple
    alpha: float
    axis_lengths: tuple

    @property
    def t(self):
        return len(self.groups)


def group_norms(rho):
    """Partition pick positions into sqrt(e)-bands of the norm profile.

    Band j (j = 1, 2, ...) holds positions i with
    rho[0]/exp((j-1)/2) >= rho[i] > rho[0]/exp(j/2); empty bands are
    discarded.  Returns (groups, leaders).
    """
    rho = np.asarray(rho, dtype=np.float64)
    top = float(rho[0])
    bands = []
    for value in rho:
        j = 1
        while not value > top * math.exp(-j / 2.0):
            j += 1
        bands.append(j)
    groups = []
    leaders = []
    for pos, band in enumerate(bands):
        if groups and band == bands[groups[-1][0]]:
            groups[-1].append(pos)
        else:
            groups.append([pos])
            leaders.append(float(rho[pos]))
    return tuple(tuple(g) for g in groups), tuple(leaders)


def lemma1_certificate(trace: GreedyTrace) -> GroupingCertificate:
    """Build and verify the grouping certificate of a rounded trace.

    Checks, in the orthonormal frame of the picked vectors (the frame
    realizes the rotation that puts the picks on coordinate axes):
    (a) the frame is orthonormal, so the ellipsoid axes are coordinate
    directions; (b) every pick reaches its group's semi-axis; (c) every
    working column fits in alpha times the ellipsoid.  Any violation is
    a bug, not an input problem.
    """
    if not trace.rounded or trace.rounded_columns is None:
        raise CertificateUnavailableError("certificate requires a rounded trace")
    rho = trace.rho
    d = trace.d
    ratio_cap = math.sqrt((1.0 + trace.epsilon) * d) * (1.0 + 1e-8)
    if rho[0] / rho[-1] > ratio_cap:
        raise CertificateUnavailableError(
            "norm profile spread exceeds the rounded bound"
        )
    groups, leaders = group_norms(rho)
    t = len(groups)
    t_cap = math.ceil(math.log((1.0 + trace.epsilon) * d))
    if t > max(1, t_cap):
        raise InternalConsistencyError(f"{t} groups exceed the cap {t_cap}")
    alpha = math.sqrt(math.e * t)
    axis_lengths = []
    position_axis = np.empty(d)
    for g, r in zip(groups, leaders):
        semi = r / _SQRT_E
        for pos in g:
            position_axis[pos] = semi
            axis_lengths.append(semi)

    q = trace.picked_frame
    if np.abs(q @ q.T - np.eye(d)).max() > 1e-8:
        raise InternalConsistencyError("picked frame lost orthonormality")
    for pos in range(d):
        if rho[pos] < position_axis[pos] * (1.0 - 1e-12):
            raise InternalConsistencyError("a pick fell inside the ellipsoid")
    coords = q @ trace.rounded_columns
    lhs = (coords / position_axis[:, None]) ** 2
    worst = float(lhs.sum(axis=0).max())
    if worst > math.e * t * (1.0 + 1e-8) + 1e-8:
        raise InternalConsistencyError(
            f"a column escapes alpha * ellipsoid: {worst:.12g} > e*t={math.e * t:.12g}"
        )
    return GroupingCertificate(
        groups=groups,
        r=leaders,
        alpha=alpha,
        axis_lengths=tuple(axis_lengths),
    )
