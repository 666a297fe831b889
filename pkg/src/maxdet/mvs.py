"""Maximum volume simplex via anchored subdeterminant instances.

Fixing a vertex (anchor) a_i turns the simplex problem into maximizing
|det| over the d x (n-1) matrix of differences a_j - a_i; looping over
all anchors and keeping the best simplex is exact when the inner solver
is exact, and inherits the greedy factor otherwise.  The reverse
direction solves a simplex instance over {0, a_1, ..., a_n} and
triangulates the cone over the winning simplex with apex 0, losing at
most a factor d+1.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, RankError
from .greedy import khachiyan_greedy
from .numerics import Basis, InstanceMatrix, log_abs_det
from .oracle import SimplexSolution, max_subdet_bruteforce

_METHODS = ("exact", "greedy")


def _solve_mvd(instance, method, epsilon):
    """Returns (column indices, log |det|) for the requested sub-solver."""
    if method == "exact":
        basis = max_subdet_bruteforce(instance)
        return basis.indices, basis.log_abs_det
    trace = khachiyan_greedy(instance, epsilon=epsilon, apply_rounding=True)
    return trace.sorted_basis_indices(), trace.log_abs_det_output


def mvs_via_anchors(points, method="exact", epsilon=0.25) -> SimplexSolution:
    """Best simplex over all anchor reductions, ties to the lowest anchor.

    points: (n, d) array of n points spanning dimension d.
    """
    if method not in _METHODS:
        raise DomainError(f"method must be one of {_METHODS}, got {method!r}")
    pts = np.array(points, dtype=np.float64)
    if pts.ndim != 2:
        raise RankError("points must form an (n, d) array")
    n, d = pts.shape
    if n < d + 1:
        raise RankError(f"need at least d+1={d + 1} points, got {n}")
    log_dfact = math.lgamma(d + 1)
    best_log = -math.inf
    best_vertices = None
    for anchor in range(n):
        others = [j for j in range(n) if j != anchor]
        diffs = (pts[others] - pts[anchor]).T
        try:
            inst = InstanceMatrix(diffs)
        except RankError:
            continue  # this anchor sees a degenerate cloud; others may not
        indices, lg = _solve_mvd(inst, method, epsilon)
        if lg > best_log:
            best_log = lg
            best_vertices = tuple(sorted([anchor] + [others[j] for j in indices]))
    if best_vertices is None:
        raise RankError("points do not span the full dimension")
    return SimplexSolution(best_vertices, best_log - log_dfact)


def mvd_via_mvs(instance: InstanceMatrix, method="exact", epsilon=0.25) -> Basis:
    """Solve max |det| through a simplex instance over {0, columns}.

    Triangulating the cone over the returned simplex S with apex 0
    yields d+1 candidate bases (drop one vertex of S, add the origin);
    the best nondegenerate one is within a factor d+1 of the simplex
    solver's guarantee.
    """
    pts = np.vstack([np.zeros((1, instance.d)), instance.columns])
    simplex = mvs_via_anchors(pts, method=method, epsilon=epsilon)
    best = None
    for drop in simplex.vertex_indices:
        kept = [v for v in simplex.vertex_indices if v != drop]
        cols = tuple(v - 1 for v in kept if v != 0)
        if len(cols) != instance.d:
            continue  # origin among the kept vertices: not a column basis
        lg, sg = log_abs_det(instance.data[:, list(cols)])
        if sg == 0:
            continue  # degenerate sub-simplex; fall back to the next one
        if best is None or lg > best[0] or (lg == best[0] and cols < best[1]):
            best = (lg, cols, sg)
    if best is None:
        raise RankError("every cone sub-simplex is degenerate")
    return Basis(best[1], best[0], best[2])
