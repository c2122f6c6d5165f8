# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels in ``_kernels_py``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline void _qmul(const double* p, const double* q, double* r) noexcept nogil:
    r[0] = p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3]
    r[1] = p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2]
    r[2] = p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1]
    r[3] = p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0]


def _flat(p, q):
    p, q = np.broadcast_arrays(p, q)
    shape = p.shape
    return (np.ascontiguousarray(p, dtype=np.float64).reshape(-1, 4),
            np.ascontiguousarray(q, dtype=np.float64).reshape(-1, 4),
            shape)


def qmul(p, q):
    pf, qf, shape = _flat(p, q)
    cdef const double[:, ::1] P = pf
    cdef const double[:, ::1] Q = qf
    out = np.empty((pf.shape[0], 4))
    cdef double[:, ::1] R = out
    cdef Py_ssize_t n = pf.shape[0], k
    with nogil:
        for k in range(n):
            _qmul(&P[k, 0], &Q[k, 0], &R[k, 0])
    return out.reshape(shape)


def sandwich(lam, p):
    lf, pf, shape = _flat(lam, p)
    cdef const double[:, ::1] L = lf
    cdef const double[:, ::1] P = pf
    out = np.empty((lf.shape[0], 4))
    cdef double[:, ::1] R = out
    cdef double lc[4]
    cdef double t[4]
    cdef Py_ssize_t n = lf.shape[0], k
    with nogil:
        for k in range(n):
            lc[0] = L[k, 0]
            lc[1] = -L[k, 1]
            lc[2] = -L[k, 2]
            lc[3] = -L[k, 3]
            _qmul(lc, &P[k, 0], t)
            _qmul(t, &L[k, 0], &R[k, 0])
    return out.reshape(shape)


def integrate_paths(a_u, a_v, double hu, double hv, Py_ssize_t i0, Py_ssize_t j0):
    cdef const double[:, :, ::1] A = np.ascontiguousarray(a_u, dtype=np.float64)
    cdef const double[:, :, ::1] B = np.ascontiguousarray(a_v, dtype=np.float64)
    cdef Py_ssize_t nu = A.shape[0], nv = A.shape[1], i, j, c
    cu_arr = np.zeros((nu, nv, 4))
    cv_arr = np.zeros((nu, nv, 4))
    FA_arr = np.empty((nu, nv, 4))
    FB_arr = np.empty((nu, nv, 4))
    cdef double[:, :, ::1] cu = cu_arr
    cdef double[:, :, ::1] cv = cv_arr
    cdef double[:, :, ::1] FA = FA_arr
    cdef double[:, :, ::1] FB = FB_arr
    with nogil:
        for i in range(1, nu):
            for j in range(nv):
                for c in range(4):
                    cu[i, j, c] = cu[i - 1, j, c] + 0.5 * hu * (A[i, j, c] + A[i - 1, j, c])
        for i in range(nu):
            for j in range(1, nv):
                for c in range(4):
                    cv[i, j, c] = cv[i, j - 1, c] + 0.5 * hv * (B[i, j, c] + B[i, j - 1, c])
        for i in range(nu):
            for j in range(nv):
                for c in range(4):
                    FA[i, j, c] = (cu[i, j0, c] - cu[i0, j0, c]) + (cv[i, j, c] - cv[i, j0, c])
                    FB[i, j, c] = (cv[i0, j, c] - cv[i0, j0, c]) + (cu[i, j, c] - cu[i0, j, c])
    return FA_arr, FB_arr


def propagate_signs(lam, Py_ssize_t i0, Py_ssize_t j0):
    out = np.array(lam, dtype=np.float64, order="C", copy=True)
    cdef double[:, :, ::1] L = out
    cdef Py_ssize_t nu = L.shape[0], nv = L.shape[1]
    done_arr = np.zeros((nu, nv), dtype=np.uint8)
    queue_arr = np.empty(nu * nv, dtype=np.intp)
    cdef unsigned char[:, ::1] done = done_arr
    cdef Py_ssize_t[::1] queue = queue_arr
    cdef Py_ssize_t head = 0, tail = 0, idx, i, j, a, b, c, d, s, e, k
    cdef int[4] di = [-1, 1, 0, 0]
    cdef int[4] dj = [0, 0, -1, 1]
    cdef double acc[4]
    cdef double dot
    done[i0, j0] = 1
    queue[tail] = i0 * nv + j0
    tail += 1
    with nogil:
        while head < tail:
            idx = queue[head]
            head += 1
            i = idx // nv
            j = idx % nv
            for s in range(4):
                a = i + di[s]
                b = j + dj[s]
                if a < 0 or a >= nu or b < 0 or b >= nv or done[a, b]:
                    continue
                for k in range(4):
                    acc[k] = 0.0
                for e in range(4):
                    c = a + di[e]
                    d = b + dj[e]
                    if 0 <= c < nu and 0 <= d < nv and done[c, d]:
                        for k in range(4):
                            acc[k] += L[c, d, k]
                dot = acc[0] * L[a, b, 0] + acc[1] * L[a, b, 1] + acc[2] * L[a, b, 2] + acc[3] * L[a, b, 3]
                if dot < 0.0:
                    for k in range(4):
                        L[a, b, k] = -L[a, b, k]
                done[a, b] = 1
                queue[tail] = a * nv + b
                tail += 1
    return out
