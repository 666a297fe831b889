"""Dense matrix primitives shared by all solvers.

Conventions used package-wide:

* instances are d x n float64 matrices of full row rank, columns are
  the input vectors;
* a pivot or projected norm counts as zero when it falls below
  1e-10 times the largest column norm of the original input, which
  keeps degeneracy detection scale-invariant;
* determinant magnitudes are carried in the log domain, since they
  grow like d**(d/2) and overflow doubles well inside desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateDirectionError, DimensionError, RankError

RANK_RTOL = 1e-10


def rank_tolerance(data):
    """Absolute zero threshold for pivots/norms derived from ``data``."""
    data = np.asarray(data, dtype=np.float64)
    if data.size == 0:
        return 0.0
    scale = float(np.sqrt((data * data).sum(axis=0).max()))
    return RANK_RTOL * scale


def _orthonormalize_check_rank(data, tol):
    """Numeric rank via modified Gram-Schmidt with re-orthogonalization."""
    d, n = data.shape
    q = np.empty((0, d))
    for j in range(n):
        v = data[:, j].copy()
        pre = np.linalg.norm(v)
        v -= q.T @ (q @ v)
        if np.linalg.norm(v) < pre * (1.0 / math.sqrt(2.0)):
            v -= q.T @ (q @ v)
        nv = np.linalg.norm(v)
        if nv >= tol:
            q = np.vstack([q, v / nv])
            if q.shape[0] == d:
                return d
    return q.shape[0]


@dataclass(frozen=True, eq=False)
class InstanceMatrix:
    """A d x n real matrix of full row rank; columns are the input vectors."""

    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64, order="C")
        if data.ndim != 2:
            raise DimensionError("instance matrix must be 2-dimensional")
        d, n = data.shape
        if d < 1 or n < d:
            raise DimensionError(f"need n >= d >= 1, got d={d}, n={n}")
        if not np.isfinite(data).all():
            raise DimensionError("instance matrix entries must be finite")
        tol = rank_tolerance(data)
        if _orthonormalize_check_rank(data, tol) < d:
            raise RankError(f"matrix does not have full row rank {d}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def d(self):
        return self.data.shape[0]

    @property
    def n(self):
        return self.data.shape[1]

    @property
    def columns(self):
        """Columns as an (n, d) array of vectors."""
        return self.data.T

    def column(self, j):
        return self.data[:, j]

    @classmethod
    def from_columns(cls, columns):
        """Build from a sequence of n length-d vectors."""
        return cls(np.array(columns, dtype=np.float64).T)

    def rank_tol(self):
        return rank_tolerance(self.data)


@dataclass(frozen=True)
class Basis:
    """d column indices together with the signed log-determinant."""

    indices: tuple
    log_abs_det: float
    sign: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise DimensionError("basis indices must be strictly increasing")
        object.__setattr__(self, "indices", idx)
        if self.sign != 0 and not math.isfinite(self.log_abs_det):
            raise DimensionError("nonsingular basis needs a finite log det")

    @property
    def abs_det(self):
        return math.exp(self.log_abs_det) if self.sign != 0 else 0.0


def log_abs_det(square):
    """ln|det| and sign of a square matrix via partial-pivot LU.

    Accumulates in the log domain; returns (-inf, 0) when a pivot falls
    below the rank tolerance of the input.
    """
    a = np.array(square, dtype=np.float64, order="C")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise DimensionError("matrix entries must be finite")
    tol = rank_tolerance(a)
    lg, sg = kernels.lu_logabsdet(a, tol)
    return float(lg), int(sg)


def project_out(columns, direction):
    """Project every column onto the orthogonal complement of direction.

    columns: (d, n) array (or sequence convertible to one) with vectors
    as columns.  Uses one re-orthogonalization pass for columns that
    shrink below 1/sqrt(2) of their previous norm.
    """
    w = np.array(columns, dtype=np.float64, order="C")
    if w.ndim == 1:
        w = w[:, None]
    u = np.asarray(direction, dtype=np.float64).ravel()
    if u.shape[0] != w.shape[0]:
        raise DimensionError("direction length must match column length")
    dnorm = np.linalg.norm(u)
    scale = 0.0 if w.size == 0 else float(np.sqrt((w * w).sum(axis=0).max()))
    if dnorm == 0.0 or dnorm < RANK_RTOL * scale:
        raise DegenerateDirectionError("direction norm below rank tolerance")
    u = u / dnorm
    pre = (w * w).sum(axis=0)
    w = w - np.outer(u, u @ w)
    post = (w * w).sum(axis=0)
    redo = post < pre * 0.5
    if redo.any():
        w[:, redo] -= np.outer(u, u @ w[:, redo])
    return w


def gram_matrix(instance: InstanceMatrix):
    """A @ A.T, symmetric positive semidefinite (definite at full rank)."""
    a = instance.data
    g = a @ a.T
    return 0.5 * (g + g.T)
