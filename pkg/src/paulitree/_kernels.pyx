# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled sampling kernels.

Same contract as ``_kernels_py`` (the NumPy fallback): every sign decision is
a pure function of (key, shot index, qubit index) through the splitmix64
counter scheme in ``_prng``, and the floating-point update sequence matches
the fallback op for op, so both backends produce bit-identical outcomes.
"""

import numpy as np
cimport numpy as cnp  # noqa: F401  (include path only)

ctypedef unsigned long long u64

cdef u64 GOLDEN = 0x9E3779B97F4A7C15ULL
cdef u64 MIX_1 = 0xBF58476D1CE4E5B9ULL
cdef u64 MIX_2 = 0x94D049BB133111EBULL
cdef double U53 = 2.0 ** -53


cdef inline u64 mix64(u64 z) nogil:
    z = (z ^ (z >> 30)) * MIX_1
    z = (z ^ (z >> 27)) * MIX_2
    return z ^ (z >> 31)


cdef inline double uniform_at(u64 key, u64 index) nogil:
    return <double>(mix64(key + (index + 1) * GOLDEN) >> 11) * U53


def backend_name():
    return "cython"


def prefix_plus_count(double[::1] g, long long m, u64 key,
                      long long shot0, long long stride, long long n_total):
    """Count shots whose depth-k prefix sign product is +1 (k = len(g))."""
    cdef long long k = g.shape[0]
    cdef long long t, j, count = 0
    cdef u64 base
    cdef double pi, h, gj, p, u
    for t in range(m):
        base = <u64>((shot0 + t * stride) * n_total)
        pi = 1.0
        h = 1.0
        for j in range(k):
            gj = g[j]
            u = uniform_at(key, base + <u64>j)
            if gj == 0.0:
                p = 0.5
            else:
                if h <= 0.0:
                    raise ValueError("degenerate conditional: running weight <= 0")
                p = 0.5 * (1.0 + gj * pi / h)
            if u < p:
                pi = pi * 1.0
            else:
                pi = pi * -1.0
            if gj != 0.0:
                h = h + gj * pi
        if pi > 0.0:
            count += 1
    return count


def sample_bits(double[::1] g, long long m, u64 key,
                long long shot0, long long stride, long long n_total,
                unsigned char[:, ::1] out):
    """Fill out[t, j] with outcome bits for m shots (len(g) == n_total)."""
    cdef long long t, j
    cdef u64 base
    cdef double pi, h, gj, p, u, tj
    if g.shape[0] != n_total or out.shape[0] < m or out.shape[1] != n_total:
        raise ValueError("output buffer shape mismatch")
    for t in range(m):
        base = <u64>((shot0 + t * stride) * n_total)
        pi = 1.0
        h = 1.0
        for j in range(n_total):
            gj = g[j]
            u = uniform_at(key, base + <u64>j)
            if gj == 0.0:
                p = 0.5
            else:
                if h <= 0.0:
                    raise ValueError("degenerate conditional: running weight <= 0")
                p = 0.5 * (1.0 + gj * pi / h)
            if u < p:
                tj = 1.0
                out[t, j] = 0
            else:
                tj = -1.0
                out[t, j] = 1
            pi = pi * tj
            if gj != 0.0:
                h = h + gj * pi
    return None


def signature_counts(double[::1] g, long long m, u64 key,
                     long long shot0, long long stride, long long n_total,
                     long long[::1] out):
    """Histogram shots by sign signature: bit j of the index is 1 iff the
    running product of the first j+1 signs is negative."""
    cdef long long t, j, sig
    cdef u64 base
    cdef double pi, h, gj, p, u
    if g.shape[0] != n_total or out.shape[0] != (1 << n_total):
        raise ValueError("output buffer shape mismatch")
    for t in range(m):
        base = <u64>((shot0 + t * stride) * n_total)
        pi = 1.0
        h = 1.0
        sig = 0
        for j in range(n_total):
            gj = g[j]
            u = uniform_at(key, base + <u64>j)
            if gj == 0.0:
                p = 0.5
            else:
                if h <= 0.0:
                    raise ValueError("degenerate conditional: running weight <= 0")
                p = 0.5 * (1.0 + gj * pi / h)
            if u < p:
                pi = pi * 1.0
            else:
                pi = pi * -1.0
            if pi < 0.0:
                sig |= (1 << j)
            if gj != 0.0:
                h = h + gj * pi
        out[sig] += 1
    return None
