"""Loop-style hot kernels, jitted by numba when the backend allows it.

Kept free of Python-object features so the same source compiles under
``numba.njit`` and still runs uncompiled.  The vectorized numpy twins
live in ``_vectorized``; semantics (pivot choice, tolerances, tie rules,
random draws) are deliberately identical.
"""

import numpy as np

from ._config import jit

GOLDEN_U = np.uint64(0x9E3779B97F4A7C15)
MIX1_U = np.uint64(0xBF58476D1CE4E5B9)
MIX2_U = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@jit
def mix64(z):
    z = z + GOLDEN_U
    z = (z ^ (z >> _S30)) * MIX1_U
    z = (z ^ (z >> _S27)) * MIX2_U
    return z ^ (z >> _S31)


@jit
def uniform01(key, counter):
    h = mix64(mix64(key) ^ counter)
    return float(h >> _S11) * _INV53


@jit
def lu_logabsdet(a, tol):
    """In-place partial-pivot LU; returns (ln|det|, sign).

    sign is 0 (with ln|det| = -inf) as soon as a pivot magnitude drops
    below tol.
    """
    d = a.shape[0]
    sign = 1
    acc = 0.0
    for k in range(d):
        p = k
        big = abs(a[k, k])
        for i in range(k + 1, d):
            v = abs(a[i, k])
            if v > big:
                big = v
                p = i
        if big < tol:
            return -np.inf, 0
        if p != k:
            for j in range(d):
                tmp = a[k, j]
                a[k, j] = a[p, j]
                a[p, j] = tmp
            sign = -sign
        piv = a[k, k]
        if piv < 0.0:
            sign = -sign
        acc += np.log(abs(piv))
        inv = 1.0 / piv
        for i in range(k + 1, d):
            f = a[i, k] * inv
            a[i, k] = f
            for j in range(k + 1, d):
                a[i, j] -= f * a[k, j]
    return acc, sign


@jit
def max_subdet_scan(a, tol, tie_tol):
    """Scan all d-column subsets of a (d, n) matrix in lexicographic order.

    Returns (best_indices, best_logabsdet, best_sign, nonsingular_count).
    A challenger replaces the incumbent only when it exceeds it by more
    than tie_tol, so the first (lexicographically smallest) subset of a
    tied group wins.
    """
    d, n = a.shape
    comb = np.empty(d, np.int64)
    for j in range(d):
        comb[j] = j
    sub = np.empty((d, d))
    best = -np.inf
    best_comb = np.zeros(d, np.int64)
    best_sign = 0
    nonsingular = 0
    while True:
        for j in range(d):
            cj = comb[j]
            for i in range(d):
                sub[i, j] = a[i, cj]
        lg, sg = lu_logabsdet(sub, tol)
        if sg != 0:
            nonsingular += 1
            if lg > best + tie_tol:
                best = lg
                best_sign = sg
                for j in range(d):
                    best_comb[j] = comb[j]
        i = d - 1
        while i >= 0 and comb[i] == n - d + i:
            i -= 1
        if i < 0:
            break
        comb[i] += 1
        for j in range(i + 1, d):
            comb[j] = comb[j - 1] + 1
    return best_comb, best, best_sign, nonsingular


@jit
def _project_out_inplace(w, u):
    # Remove the u-component of every column of w (u must be unit norm).
    # One re-orthogonalization pass when a column shrinks below 1/sqrt(2)
    # of its previous norm (squared: half), which is where single-pass
    # updates start losing orthogonality.
    d, n = w.shape
    for j in range(n):
        pre = 0.0
        for i in range(d):
            pre += w[i, j] * w[i, j]
        dot = 0.0
        for i in range(d):
            dot += w[i, j] * u[i]
        for i in range(d):
            w[i, j] -= dot * u[i]
        post = 0.0
        for i in range(d):
            post += w[i, j] * w[i, j]
        if post < pre * 0.5:
            dot = 0.0
            for i in range(d):
                dot += w[i, j] * u[i]
            for i in range(d):
                w[i, j] -= dot * u[i]


@jit
def sample_bases_batch(cols, sample_keys, tol):
    """Draw len(sample_keys) volume-sampled bases from a (d, n) matrix.

    Round t of sample s: leverage scores of the projected columns are
    computed against the pseudo-inverse of their Gram matrix, column j
    is drawn with probability lev_j / remaining_rank, then every column
    is projected onto the orthogonal complement of the pick.

    Returns (picks, max_leverage_deviation) where picks[s, t] is the
    column chosen in round t and max_leverage_deviation tracks the worst
    |sum(lev) - remaining_rank| seen (should be ~0; the caller treats a
    large value as an internal error).  picks[s, t] = -1 flags a failed
    round (rank collapse).
    """
    d, n = cols.shape
    nsamples = sample_keys.shape[0]
    out = np.empty((nsamples, d), np.int64)
    maxdev = 0.0
    tol2 = tol * tol
    for s in range(nsamples):
        w = cols.copy()
        key = sample_keys[s]
        for t in range(d):
            remaining = d - t
            m = np.empty((d, d))
            for i in range(d):
                for k in range(i, d):
                    acc = 0.0
                    for j in range(n):
                        acc += w[i, j] * w[k, j]
                    m[i, k] = acc
                    m[k, i] = acc
            p = np.linalg.pinv(m)
            lev = np.empty(n)
            total = 0.0
            for j in range(n):
                nj = 0.0
                for i in range(d):
                    nj += w[i, j] * w[i, j]
                if nj < tol2:
                    lev[j] = 0.0
                else:
                    v = 0.0
                    for i in range(d):
                        acc = 0.0
                        for k in range(d):
                            acc += p[i, k] * w[k, j]
                        v += w[i, j] * acc
                    lev[j] = v if v > 0.0 else 0.0
                total += lev[j]
            dev = abs(total - remaining)
            if dev > maxdev:
                maxdev = dev
            if total <= 0.0:
                out[s, t] = -1
                break
            r = uniform01(key, np.uint64(t)) * total
            pick = -1
            c = 0.0
            for j in range(n):
                if lev[j] > 0.0:
                    c += lev[j]
                    if r <= c:
                        pick = j
                        break
            if pick < 0:
                for j in range(n - 1, -1, -1):
                    if lev[j] > 0.0:
                        pick = j
                        break
            out[s, t] = pick
            unorm = 0.0
            for i in range(d):
                unorm += w[i, pick] * w[i, pick]
            unorm = np.sqrt(unorm)
            u = np.empty(d)
            for i in range(d):
                u[i] = w[i, pick] / unorm
            _project_out_inplace(w, u)
    return out, maxdev
