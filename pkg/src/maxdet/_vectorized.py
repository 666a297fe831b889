"""Pure-numpy twins of the loop kernels in ``_loops``.

Batched across subsets / samples instead of jitted loops.  Pivot rules,
tolerances, tie handling and random draws match the loop kernels; only
floating-point summation order inside reductions may differ by ulps.
"""

import itertools

import numpy as np

from ._rng import uniform01_array


def lu_logabsdet_batch(a, tol):
    """Partial-pivot LU over a stack of square matrices, in place.

    a: (N, d, d) float64, overwritten.  Returns (logabsdet (N,), sign (N,)),
    with sign 0 / logabsdet -inf where a pivot fell below tol.
    """
    nbatch, d, _ = a.shape
    sign = np.ones(nbatch, dtype=np.int64)
    acc = np.zeros(nbatch)
    alive = np.ones(nbatch, dtype=bool)
    rows = np.arange(nbatch)
    for k in range(d):
        p = np.argmax(np.abs(a[:, k:, k]), axis=1) + k
        big = np.abs(a[rows, p, k])
        died = alive & (big < tol)
        alive &= ~died
        sign[died] = 0
        acc[died] = -np.inf
        swap = (p != k) & alive
        if swap.any():
            idx = rows[swap]
            psel = p[swap]
            tmp = a[idx, k, :].copy()
            a[idx, k, :] = a[idx, psel, :]
            a[idx, psel, :] = tmp
            sign[idx] = -sign[idx]
        piv = a[:, k, k].copy()
        piv[~alive] = 1.0
        sign[alive & (piv < 0.0)] *= -1
        acc[alive] += np.log(np.abs(piv[alive]))
        inv = 1.0 / piv
        f = a[:, k + 1 :, k] * inv[:, None]
        a[:, k + 1 :, k] = f
        a[:, k + 1 :, k + 1 :] -= f[:, :, None] * a[:, k, None, k + 1 :]
    return acc, sign


def combination_chunks(n, k, chunk_size):
    """Yield (m, k) int64 arrays covering all C(n, k) combinations in
    lexicographic order."""
    it = itertools.combinations(range(n), k)
    while True:
        flat = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(it, chunk_size)),
            dtype=np.int64,
        )
        if flat.size == 0:
            return
        yield flat.reshape(-1, k)


def max_subdet_scan(a, tol, tie_tol, chunk_size=8192):
    """Vectorized twin of _loops.max_subdet_scan (same tie semantics)."""
    d, n = a.shape
    best = -np.inf
    best_comb = np.zeros(d, np.int64)
    best_sign = 0
    nonsingular = 0
    for combs in combination_chunks(n, d, chunk_size):
        subs = np.ascontiguousarray(np.moveaxis(a[:, combs], 1, 0))
        lg, sg = lu_logabsdet_batch(subs, tol)
        nonsingular += int(np.count_nonzero(sg))
        lg = np.where(sg != 0, lg, -np.inf)
        pos = 0
        while pos < lg.shape[0]:
            exceed = lg[pos:] > best + tie_tol
            if not exceed.any():
                break
            i = pos + int(np.argmax(exceed))
            best = float(lg[i])
            best_sign = int(sg[i])
            best_comb = combs[i].copy()
            pos = i + 1
    return best_comb, best, best_sign, nonsingular


def sample_bases_batch(cols, sample_keys, tol):
    """Vectorized twin of _loops.sample_bases_batch, batched over samples."""
    d, n = cols.shape
    keys = np.asarray(sample_keys, dtype=np.uint64)
    nsamples = keys.shape[0]
    w = np.broadcast_to(cols, (nsamples, d, n)).copy()
    out = np.full((nsamples, d), -1, np.int64)
    rows = np.arange(nsamples)
    maxdev = 0.0
    tol2 = tol * tol
    alive = np.ones(nsamples, dtype=bool)
    for t in range(d):
        remaining = d - t
        m = np.einsum("sij,skj->sik", w, w)
        p = np.linalg.pinv(m)
        pw = np.einsum("sik,skj->sij", p, w)
        lev = np.einsum("sij,sij->sj", w, pw)
        norms2 = np.einsum("sij,sij->sj", w, w)
        lev[norms2 < tol2] = 0.0
        np.maximum(lev, 0.0, out=lev)
        total = lev.sum(axis=1)
        if alive.any():
            dev = float(np.abs(total[alive] - remaining).max())
            if dev > maxdev:
                maxdev = dev
        alive &= total > 0.0
        if not alive.any():
            break
        safe_total = np.where(alive, total, 1.0)
        r = uniform01_array(keys, t) * safe_total
        cum = np.cumsum(lev, axis=1)
        eligible = lev > 0.0
        cand = eligible & (cum >= r[:, None])
        has_cand = cand.any(axis=1)
        first_cand = np.argmax(cand, axis=1)
        # cumsum can fall fractionally short of total at the last column;
        # fall back to the last eligible column like the loop kernel does.
        last_eligible = n - 1 - np.argmax(eligible[:, ::-1], axis=1)
        pick = np.where(has_cand, first_cand, last_eligible)
        out[alive, t] = pick[alive]
        u = w[rows, :, pick]
        unorm = np.sqrt(np.einsum("si,si->s", u, u))
        unorm[~alive] = 1.0
        u = u / unorm[:, None]
        pre = norms2
        dot = np.einsum("sij,si->sj", w, u)
        w -= u[:, :, None] * dot[:, None, :]
        post = np.einsum("sij,sij->sj", w, w)
        redo = post < pre * 0.5
        if redo.any():
            dot = np.einsum("sij,si->sj", w, u) * redo
            w -= u[:, :, None] * dot[:, None, :]
    return out, maxdev
