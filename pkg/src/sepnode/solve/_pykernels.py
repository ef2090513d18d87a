"""Pure Python/numpy versions of the compiled kernels.

``anneal_run`` mirrors the compiled loop operation by operation, so results
match the extension bit for bit. ``exhaustive_run`` evaluates states in
vectorised blocks instead of walking a Gray code.
"""

from math import exp

import numpy as np

_BLOCK = 1 << 16


def anneal_run(h, indptr, indices, data, x0, order, uniforms, temps, e0):
    n = len(h)
    x = [int(b) for b in x0]
    fld = [float(c) for c in h]
    ptr = indptr.tolist()
    idx = indices.tolist()
    dat = data.tolist()
    for i in range(n):
        if x[i]:
            for p in range(ptr[i], ptr[i + 1]):
                fld[idx[p]] += dat[p]
    e = float(e0)
    best_e = e
    best = list(x)
    evals = 0
    for s in range(len(order)):
        temp = float(temps[s])
        row = order[s].tolist()
        us = uniforms[s].tolist()
        for t in range(n):
            i = row[t]
            evals += 1
            delta = -fld[i] if x[i] else fld[i]
            if delta <= 0.0 or us[t] < exp(-delta / temp):
                x[i] = 1 - x[i]
                sign = 1.0 if x[i] else -1.0
                for p in range(ptr[i], ptr[i + 1]):
                    fld[idx[p]] += sign * dat[p]
                e += delta
                if e < best_e:
                    best_e = e
                    best = list(x)
    return np.array(best, dtype=np.int8), best_e, e, evals


def state_bits(start, stop, n):
    """Bit matrix of states ``start..stop-1``; column 0 is the most significant bit."""
    keys = np.arange(start, stop, dtype=np.uint64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint64)
    return ((keys[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.int8)


def exhaustive_run(h, indptr, indices, data, tol):
    n = len(h)
    rows = np.repeat(np.arange(n), np.diff(indptr))
    upper = indices > rows
    qi, qj, qc = rows[upper], indices[upper], data[upper]
    total = 1 << n
    best_e = np.inf
    best_key = 0
    for start in range(0, total, _BLOCK):
        stop = min(start + _BLOCK, total)
        bits = state_bits(start, stop, n)
        e = bits @ h
        if len(qc):
            e = e + (bits[:, qi] * bits[:, qj]) @ qc
        lo = float(e.min())
        cand = int(np.flatnonzero(e <= lo + tol)[0])
        if lo < best_e - tol:
            best_e, best_key = float(e[cand]), start + cand
    best = state_bits(best_key, best_key + 1, n)[0]
    return best, total
