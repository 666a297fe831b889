"""Instance generators: random matrices, Hadamard blocks, and the
adversarial family on which greedy provably lands a (0.748 ln d)^(d/2)
factor away from the optimum.

The adversarial matrix is [D | s*D*H | E] with D = diag(c^(d-1),...,1),
c = d^(1/(2(d-1))), s = sqrt(c^2-1)/c and H a Sylvester Hadamard
matrix.  D and s*D*H columns have norms <= sqrt(d) while greedy eats D
left to right; the D basis loses a (d * (c^2-1)/c^2)^(d/2) / c factor
against the s*D*H basis.  E ideally makes the hull cover the unit ball;
exact such E needs exponentially many columns, so we use random unit
directions scaled to norm c and certify only the two properties the
argument uses (the pick pattern and the final pick's norm bound).
Instances carry that relaxation in their metadata and are meant to be
solved without rounding: they are already round by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GenerationError, RankError, TightnessViolationError
from .greedy import khachiyan_greedy
from .numerics import InstanceMatrix, log_abs_det

DEFAULT_E_FACTOR = 16
DISTRIBUTIONS = ("gauss", "pm1", "int")
_INT_RANGE = 9


def sylvester_hadamard(d: int) -> np.ndarray:
    """The +-1 matrix of order d (a power of two) with |det| = d^(d/2)."""
    if d < 1 or d & (d - 1) != 0:
        raise DomainError(f"order must be a power of two, got {d}")
    h = np.array([[1]], dtype=np.int64)
    block = np.array([[1, 1], [1, -1]], dtype=np.int64)
    while h.shape[0] < d:
        h = np.kron(block, h)
    return h


@dataclass(frozen=True, eq=False)
class AdversarialInstance:
    d: int
    c: float
    matrix: InstanceMatrix
    e_column_count: int
    predicted_ratio_log: float
    seed: int

    @property
    def n(self):
        return self.matrix.n

    def diag_block(self):
        return self.matrix.data[:, : self.d]

    def hadamard_block(self):
        return self.matrix.data[:, self.d : 2 * self.d]

    def e_block(self):
        return self.matrix.data[:, 2 * self.d :]


def adversarial_instance(d: int, e_columns=None, seed: int = 0) -> AdversarialInstance:
    if d < 4 or d & (d - 1) != 0:
        raise DomainError(f"dimension must be a power of two >= 4, got {d}")
    if e_columns is None:
        e_columns = DEFAULT_E_FACTOR * d
    if e_columns < d:
        raise DomainError(f"need at least d={d} extra columns, got {e_columns}")
    c = d ** (1.0 / (2.0 * (d - 1)))
    diag = c ** np.arange(d - 1, -1, -1, dtype=np.float64)
    dmat = np.diag(diag)
    scale = math.sqrt(c * c - 1.0) / c
    dh = scale * (dmat @ sylvester_hadamard(d).astype(np.float64))
    rng = np.random.default_rng(seed)
    e = rng.standard_normal((d, e_columns))
    norms = np.linalg.norm(e, axis=0)
    while (norms == 0.0).any():
        bad = norms == 0.0
        e[:, bad] = rng.standard_normal((d, int(bad.sum())))
        norms = np.linalg.norm(e, axis=0)
    e = e * (c / norms)
    matrix = InstanceMatrix(np.hstack([dmat, dh, e]))
    predicted = 0.5 * d * math.log(0.748 * math.log(d))
    return AdversarialInstance(
        d=d,
        c=c,
        matrix=matrix,
        e_column_count=int(e_columns),
        predicted_ratio_log=predicted,
        seed=int(seed),
    )


@dataclass(frozen=True)
class AdversarialReport:
    picked_diag_prefix: bool
    final_pick_norm: float
    final_pick_bound: float
    achieved_ratio_log: float
    predicted_ratio_log: float
    projection_chain_max_rel_err: float


def verify_adversarial_behavior(inst: AdversarialInstance) -> AdversarialReport:
    """Run greedy (no rounding) and assert the adversarial pick pattern.

    Checks, raising TightnessViolationError on any failure:
    * the first d-1 picks are the leading diagonal columns, in order,
      forced by the strict projected-norm dominance of D over s*D*H;
    * the final pick has norm at most c (up to 1e-9 relative);
    * the projected squared norm of an s*D*H column after i diagonal
      picks equals (c^(2(d-i)) - 1)/c^2, strictly below the squared
      norm c^(2(d-i-1)) of the next diagonal column;
    * the achieved log-ratio between the Hadamard-block basis and
      c * |det D| reaches the predicted (d/2) ln(0.748 ln d).
    """
    d = inst.d
    c = inst.c
    trace = khachiyan_greedy(inst.matrix, apply_rounding=False)
    prefix_ok = trace.picked_indices[: d - 1] == tuple(range(d - 1))
    if not prefix_ok:
        raise TightnessViolationError(
            f"greedy picked {trace.picked_indices[: d - 1]}, expected the "
            f"first {d - 1} diagonal columns"
        )
    final_bound = c * (1.0 + 1e-9)
    final_norm = float(trace.rho[-1])
    if final_norm > final_bound:
        raise TightnessViolationError(
            f"final pick norm {final_norm} exceeds c = {c}"
        )

    dh = inst.hadamard_block()
    max_rel = 0.0
    for i in range(d):
        tail = dh[i:, :]
        actual = float((tail * tail).sum(axis=0).max())
        expected = (c ** (2 * (d - i)) - 1.0) / (c * c)
        next_diag_sq = c ** (2 * (d - i - 1))
        rel = abs(actual - expected) / expected
        max_rel = max(max_rel, rel)
        if rel > 1e-12:
            raise TightnessViolationError(
                f"projected norm chain off at step {i}: {actual} vs {expected}"
            )
        if not actual < next_diag_sq:
            raise TightnessViolationError(
                f"diagonal column {i} does not dominate at step {i}"
            )

    lg_dh, sg_dh = log_abs_det(dh)
    lg_d, sg_d = log_abs_det(inst.diag_block())
    if sg_dh == 0 or sg_d == 0:
        raise RankError("adversarial blocks must be nonsingular")
    achieved = lg_dh - (math.log(c) + lg_d)
    if achieved < inst.predicted_ratio_log:
        raise TightnessViolationError(
            f"achieved log-ratio {achieved} below predicted "
            f"{inst.predicted_ratio_log}"
        )
    return AdversarialReport(
        picked_diag_prefix=True,
        final_pick_norm=final_norm,
        final_pick_bound=final_bound,
        achieved_ratio_log=achieved,
        predicted_ratio_log=inst.predicted_ratio_log,
        projection_chain_max_rel_err=max_rel,
    )


def random_instance(d: int, n: int, distribution: str, seed: int) -> InstanceMatrix:
    """Deterministic random d x n full-row-rank instance.

    Redraws (up to 100 attempts) when the sample is rank deficient,
    e.g. +-1 or small-integer matrices with vanishing determinant.
    """
    if distribution not in DISTRIBUTIONS:
        raise DomainError(
            f"unknown distribution {distribution!r}, pick one of {DISTRIBUTIONS}"
        )
    if d < 1 or n < d:
        raise DomainError(f"need n >= d >= 1, got d={d}, n={n}")
    rng = np.random.default_rng(seed)
    for _ in range(100):
        if distribution == "gauss":
            data = rng.standard_normal((d, n))
        elif distribution == "pm1":
            data = rng.integers(0, 2, size=(d, n)).astype(np.float64) * 2.0 - 1.0
        else:
            data = rng.integers(-_INT_RANGE, _INT_RANGE + 1, size=(d, n)).astype(
                np.float64
            )
        try:
            return InstanceMatrix(data)
        except RankError:
            continue
    raise GenerationError(
        f"could not draw a full-rank {d}x{n} {distribution} matrix in 100 tries"
    )
