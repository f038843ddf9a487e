# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel: fused two-nonzero factor application along a tensor axis."""


def pair_mix_3d(const double[::1] diag, const long long[::1] partner,
                const double[::1] off, const double[:, :, ::1] x,
                double[:, :, ::1] out):
    """out[l,i,r] = diag[i]*x[l,i,r] + off[i]*x[l,partner[i],r]."""
    cdef Py_ssize_t L = x.shape[0]
    cdef Py_ssize_t m = x.shape[1]
    cdef Py_ssize_t R = x.shape[2]
    cdef Py_ssize_t l, i, r, p
    cdef double d, o
    with nogil:
        for l in range(L):
            for i in range(m):
                d = diag[i]
                o = off[i]
                if o == 0.0:
                    for r in range(R):
                        out[l, i, r] = d * x[l, i, r]
                else:
                    p = partner[i]
                    for r in range(R):
                        out[l, i, r] = d * x[l, i, r] + o * x[l, p, r]
