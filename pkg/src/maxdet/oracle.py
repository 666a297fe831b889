"""Exhaustive exact solvers for small instances.

Ground truth for every approximation claim in the package.  Guards keep
the enumeration at desk scale; comparisons happen in the log domain
with an absolute tie tolerance of 1e-9, ties resolved toward the
lexicographically smallest index set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InstanceTooLargeError, RankError
from .numerics import Basis, InstanceMatrix, rank_tolerance

MAX_COLUMNS = 40
MAX_SUBSETS = 10**7
MAX_POINTS = 20
TIE_TOL = 1e-9


def _check_guard(n, k, max_items, what):
    if n > max_items:
        raise InstanceTooLargeError(f"{what}: n={n} exceeds the guard {max_items}")
    if math.comb(n, k) > MAX_SUBSETS:
        raise InstanceTooLargeError(
            f"{what}: C({n},{k})={math.comb(n, k)} exceeds the guard {MAX_SUBSETS}"
        )


def enumerate_bases(instance: InstanceMatrix):
    """Yield every nonsingular d-subset of columns as a Basis.

    Depth-first in lexicographic order; a prefix whose newest column
    projects to (numerically) nothing prunes all its completions, which
    is what makes duplicated-column families cheap.
    """
    _check_guard(instance.n, instance.d, MAX_COLUMNS, "enumerate_bases")
    a = instance.data
    d, n = a.shape
    tol = instance.rank_tol()
    inv_sqrt2 = 1.0 / math.sqrt(2.0)

    def rec(start, chosen, q):
        depth = len(chosen)
        if depth == d:
            sub = np.array(a[:, chosen], order="C")
            lg, sg = kernels.lu_logabsdet(sub, tol)
            if sg != 0:
                yield Basis(tuple(chosen), float(lg), int(sg))
            return
        for j in range(start, n - (d - depth) + 1):
            v = a[:, j].copy()
            pre = np.linalg.norm(v)
            v -= q.T @ (q @ v)
            if np.linalg.norm(v) < pre * inv_sqrt2:
                v -= q.T @ (q @ v)
            nv = np.linalg.norm(v)
            if nv < tol:
                continue  # every completion of this prefix is singular
            yield from rec(j + 1, chosen + [j], np.vstack([q, v / nv]))

    yield from rec(0, [], np.empty((0, d)))


def max_subdet_bruteforce(instance: InstanceMatrix) -> Basis:
    """The basis maximizing |det|, ties to the lex-smallest index set."""
    _check_guard(instance.n, instance.d, MAX_COLUMNS, "max_subdet_bruteforce")
    comb, lg, sg, nonsingular = kernels.max_subdet_scan(
        np.array(instance.data, order="C"), instance.rank_tol(), TIE_TOL
    )
    if nonsingular == 0 or sg == 0:
        raise RankError("all column subsets are singular")
    return Basis(tuple(int(c) for c in comb), float(lg), int(sg))


@dataclass(frozen=True)
class SimplexSolution:
    """d+1 point indices spanning the best simplex, volume in log domain."""

    vertex_indices: tuple
    log_volume: float

    @property
    def volume(self):
        return math.exp(self.log_volume)


def _affine_rank(points, tol):
    diffs = points[1:] - points[0]
    if diffs.size == 0:
        return 0
    q = np.linalg.qr(diffs.T, mode="r")
    return int(np.count_nonzero(np.abs(np.diag(q)) >= tol))


def max_simplex_bruteforce(points) -> SimplexSolution:
    """Exact maximum volume simplex over all (d+1)-subsets of points.

    The optimum's vertices can always be taken among the given points,
    so subset enumeration is exact.
    """
    pts = np.array(points, dtype=np.float64)
    if pts.ndim != 2:
        raise RankError("points must form an (n, d) array")
    n, d = pts.shape
    _check_guard(n, d + 1, MAX_POINTS, "max_simplex_bruteforce")
    tol = rank_tolerance(pts.T)
    if n < d + 1 or _affine_rank(pts, tol) < d:
        raise RankError("points do not span the full dimension")
    log_dfact = math.lgamma(d + 1)
    best = -np.inf
    best_comb = None
    for combs in kernels.combination_chunks(n, d + 1, 8192):
        edges = pts[combs[:, 1:]] - pts[combs[:, :1]]
        lg, sg = kernels.lu_logabsdet_batch(np.ascontiguousarray(edges), tol)
        lg = np.where(sg != 0, lg, -np.inf)
        pos = 0
        while pos < lg.shape[0]:
            exceed = lg[pos:] > best + TIE_TOL
            if not exceed.any():
                break
            i = pos + int(np.argmax(exceed))
            best = float(lg[i])
            best_comb = combs[i].copy()
            pos = i + 1
    if best_comb is None:
        raise RankError("every point subset is degenerate")
    return SimplexSolution(tuple(int(c) for c in best_comb), best - log_dfact)
