# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled annealing and enumeration kernels.

Must stay step-for-step identical to ``_pykernels`` so that both backends
return bit-identical results for the same random streams.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs

cnp.import_array()


def anneal_run(double[::1] h, cnp.int64_t[::1] indptr, cnp.int64_t[::1] indices,
               double[::1] data, cnp.int8_t[::1] x0, cnp.int64_t[:, ::1] order,
               double[:, ::1] uniforms, double[::1] temps, double e0):
    cdef Py_ssize_t n = h.shape[0]
    cdef Py_ssize_t sweeps = order.shape[0]
    cdef Py_ssize_t s, t, i, p
    cdef double e = e0, best_e, delta, temp, sign
    cdef cnp.int64_t evals = 0
    x_arr = np.array(x0, dtype=np.int8, copy=True)
    best_arr = x_arr.copy()
    field_arr = np.array(h, dtype=np.float64, copy=True)
    cdef cnp.int8_t[::1] x = x_arr
    cdef cnp.int8_t[::1] best = best_arr
    cdef double[::1] fld = field_arr

    with nogil:
        for i in range(n):
            if x[i]:
                for p in range(indptr[i], indptr[i + 1]):
                    fld[indices[p]] += data[p]
        best_e = e
        for s in range(sweeps):
            temp = temps[s]
            for t in range(n):
                i = order[s, t]
                evals += 1
                if x[i]:
                    delta = -fld[i]
                else:
                    delta = fld[i]
                if delta <= 0.0 or uniforms[s, t] < exp(-delta / temp):
                    x[i] = 1 - x[i]
                    sign = 1.0 if x[i] else -1.0
                    for p in range(indptr[i], indptr[i + 1]):
                        fld[indices[p]] += sign * data[p]
                    e += delta
                    if e < best_e:
                        best_e = e
                        for p in range(n):
                            best[p] = x[p]
    return best_arr, best_e, e, evals


def exhaustive_run(double[::1] h, cnp.int64_t[::1] indptr, cnp.int64_t[::1] indices,
                   double[::1] data, double tol):
    """Gray-code enumeration of all states, energies relative to the offset.

    Ties within ``tol`` go to the lowest key, where the key reads
    ``x_0 x_1 ... x_{n-1}`` as a binary number.
    """
    cdef Py_ssize_t n = h.shape[0]
    cdef unsigned long long total = (<unsigned long long>1) << n
    cdef unsigned long long step, key = 0, best_key = 0, g
    cdef Py_ssize_t i, p
    cdef double e = 0.0, best_e = 0.0, delta
    x_arr = np.zeros(n, dtype=np.int8)
    field_arr = np.array(h, dtype=np.float64, copy=True)
    cdef cnp.int8_t[::1] x = x_arr
    cdef double[::1] fld = field_arr

    with nogil:
        for step in range(1, total):
            g = step
            i = 0
            while (g & 1) == 0:
                g >>= 1
                i += 1
            if x[i]:
                delta = -fld[i]
                x[i] = 0
                for p in range(indptr[i], indptr[i + 1]):
                    fld[indices[p]] -= data[p]
            else:
                delta = fld[i]
                x[i] = 1
                for p in range(indptr[i], indptr[i + 1]):
                    fld[indices[p]] += data[p]
            e += delta
            key ^= (<unsigned long long>1) << (n - 1 - i)
            if e < best_e - tol or (fabs(e - best_e) <= tol and key < best_key):
                best_e = e
                best_key = key
    best_arr = np.array([(best_key >> (n - 1 - i)) & 1 for i in range(n)], dtype=np.int8)
    return best_arr, int(total)
