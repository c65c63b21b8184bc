# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels. Must mirror reference.py."""

import numpy as np

cimport cython
cimport numpy as cnp
from libc.math cimport exp, fabs, log, sqrt, pow
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()

NAME = "native"

PROB_EPS = 1e-12

cdef double _PROB_EPS = 1e-12
cdef unsigned long long _FNV_OFFSET = 0xCBF29CE484222325ULL
cdef unsigned long long _FNV_PRIME = 0x100000001B3ULL
cdef unsigned long long _GAMMA = 0x9E3779B97F4A7C15ULL


def fnv1a64(bytes data):
    """64-bit FNV-1a over raw bytes."""
    cdef unsigned long long h = _FNV_OFFSET
    cdef unsigned char b
    for b in data:
        h ^= b
        h *= _FNV_PRIME
    return h


def stub_expand(key, int n):
    """Expand a 64-bit key into n doubles in [-1, 1); bit-identical to the
    reference backend."""
    cdef unsigned long long k = <unsigned long long> key
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] view = out
    cdef unsigned long long z
    cdef Py_ssize_t i
    for i in range(n):
        z = k + (<unsigned long long> (i + 1)) * _GAMMA
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
        z = z ^ (z >> 31)
        view[i] = (<double> (z >> 11)) * (2.0 ** -53) * 2.0 - 1.0
    return out


cdef inline double _sigmoid_scalar(double z) nogil:
    cdef double e = exp(-fabs(z))
    if z >= 0.0:
        return 1.0 / (1.0 + e)
    return e / (1.0 + e)


# Row-major matmul helpers on top of Fortran dgemm: a row-major product
# C = op(A) @ op(B) is computed as the column-major product
# C^T = op(B)^T @ op(A)^T, where a row-major buffer read column-major is
# already the transpose.

cdef void _mm_nn(double[:, ::1] A, double[:, ::1] B, double[:, ::1] C) nogil:
    # C (m x n) = A (m x k) @ B (k x n)
    cdef int m = A.shape[0], k = A.shape[1], n = B.shape[1]
    cdef double alpha = 1.0, beta = 0.0
    cdef char no = b'N'
    dgemm(&no, &no, &n, &m, &k, &alpha, &B[0, 0], &n, &A[0, 0], &k, &beta, &C[0, 0], &n)


cdef void _mm_tn(double[:, ::1] A, double[:, ::1] B, double[:, ::1] C) nogil:
    # C (k x n) = A^T, with A (m x k), @ B (m x n)
    cdef int m = A.shape[0], k = A.shape[1], n = B.shape[1]
    cdef double alpha = 1.0, beta = 0.0
    cdef char no = b'N', tr = b'T'
    dgemm(&no, &tr, &n, &k, &m, &alpha, &B[0, 0], &n, &A[0, 0], &k, &beta, &C[0, 0], &n)


cdef void _mm_nt(double[:, ::1] A, double[:, ::1] B, double[:, ::1] C) nogil:
    # C (m x k) = A (m x n) @ B^T, with B (k x n)
    cdef int m = A.shape[0], n = A.shape[1], k = B.shape[0]
    cdef double alpha = 1.0, beta = 0.0
    cdef char no = b'N', tr = b'T'
    dgemm(&tr, &no, &k, &m, &n, &alpha, &B[0, 0], &n, &A[0, 0], &n, &beta, &C[0, 0], &k)


cdef void _affine_relu(double[:, ::1] X, double[:, ::1] W, double[::1] b,
                       double[:, ::1] out, bint relu) nogil:
    cdef Py_ssize_t n = X.shape[0], h = W.shape[1]
    cdef Py_ssize_t i, j
    _mm_nn(X, W, out)
    for i in range(n):
        for j in range(h):
            out[i, j] += b[j]
            if relu and out[i, j] < 0.0:
                out[i, j] = 0.0


def forward_batch(X, W1, b1, W2, b2, bint binary):
    """Forward pass over a batch; returns (hidden, logits, probs)."""
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[:, ::1] W1v = np.ascontiguousarray(W1, dtype=np.float64)
    cdef double[::1] b1v = np.ascontiguousarray(b1, dtype=np.float64)
    cdef double[:, ::1] W2v = np.ascontiguousarray(W2, dtype=np.float64)
    cdef double[::1] b2v = np.ascontiguousarray(b2, dtype=np.float64)
    cdef Py_ssize_t n = Xv.shape[0], hid = W1v.shape[1], k = W2v.shape[1]

    H = np.empty((n, hid), dtype=np.float64)
    Z = np.empty((n, k), dtype=np.float64)
    P = np.empty((n, k), dtype=np.float64)
    cdef double[:, ::1] Hv = H, Zv = Z, Pv = P
    cdef Py_ssize_t i, j
    cdef double zmax, total

    with nogil:
        _affine_relu(Xv, W1v, b1v, Hv, True)
        _affine_relu(Hv, W2v, b2v, Zv, False)
        for i in range(n):
            if binary:
                for j in range(k):
                    Pv[i, j] = _sigmoid_scalar(Zv[i, j])
            else:
                zmax = Zv[i, 0]
                for j in range(1, k):
                    if Zv[i, j] > zmax:
                        zmax = Zv[i, j]
                total = 0.0
                for j in range(k):
                    Pv[i, j] = exp(Zv[i, j] - zmax)
                    total += Pv[i, j]
                for j in range(k):
                    Pv[i, j] /= total
    return H, Z, P


def mean_loss(P, y, bint binary):
    """Mean batch loss from probabilities; clamping matches reference."""
    cdef double[:, ::1] Pv = np.ascontiguousarray(P, dtype=np.float64)
    cdef long[::1] yv = np.ascontiguousarray(y, dtype=np.int64)
    cdef Py_ssize_t n = Pv.shape[0], k = Pv.shape[1]
    cdef Py_ssize_t i, j
    cdef double total = 0.0, row, p, t
    with nogil:
        for i in range(n):
            if binary:
                row = 0.0
                for j in range(k):
                    p = Pv[i, j]
                    if p < _PROB_EPS:
                        p = _PROB_EPS
                    elif p > 1.0 - _PROB_EPS:
                        p = 1.0 - _PROB_EPS
                    t = 1.0 if j == yv[i] else 0.0
                    row += -(t * log(p) + (1.0 - t) * log(1.0 - p))
                total += row / k
            else:
                p = Pv[i, yv[i]]
                if p < _PROB_EPS:
                    p = _PROB_EPS
                elif p > 1.0 - _PROB_EPS:
                    p = 1.0 - _PROB_EPS
                total += -log(p)
    return total / n


def batch_gradients(X, y, W1, b1, W2, b2, bint binary):
    """Fused forward/backward; returns (loss, gW1, gb1, gW2, gb2)."""
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef long[::1] yv = np.ascontiguousarray(y, dtype=np.int64)
    H, Z, P = forward_batch(X, W1, b1, W2, b2, binary)
    cdef double[:, ::1] Hv = H, Pv = P
    cdef double[:, ::1] W2v = np.ascontiguousarray(W2, dtype=np.float64)
    cdef Py_ssize_t n = Xv.shape[0], d = Xv.shape[1]
    cdef Py_ssize_t hid = Hv.shape[1], k = Pv.shape[1]

    dZ = np.empty((n, k), dtype=np.float64)
    gW1 = np.empty((d, hid), dtype=np.float64)
    gb1 = np.zeros(hid, dtype=np.float64)
    gW2 = np.empty((hid, k), dtype=np.float64)
    gb2 = np.zeros(k, dtype=np.float64)
    dH = np.empty((n, hid), dtype=np.float64)
    cdef double[:, ::1] dZv = dZ, gW1v = gW1, gW2v = gW2, dHv = dH
    cdef double[::1] gb1v = gb1, gb2v = gb2
    cdef Py_ssize_t i, j, q
    cdef double scale = 1.0 / (k * n) if binary else 1.0 / n

    with nogil:
        for i in range(n):
            for j in range(k):
                dZv[i, j] = (Pv[i, j] - (1.0 if j == yv[i] else 0.0)) * scale
        _mm_tn(Hv, dZv, gW2v)          # gW2 = H^T @ dZ
        for i in range(n):
            for q in range(k):
                gb2v[q] += dZv[i, q]
        _mm_nt(dZv, W2v, dHv)          # dH = dZ @ W2^T, masked by the relu
        for i in range(n):
            for j in range(hid):
                if Hv[i, j] <= 0.0:
                    dHv[i, j] = 0.0
        _mm_tn(Xv, dHv, gW1v)          # gW1 = X^T @ dH
        for i in range(n):
            for q in range(hid):
                gb1v[q] += dHv[i, q]
    return mean_loss(P, y, binary), gW1, gb1, gW2, gb2


def adam_step(param, grad, m, v, int step, double lr, double beta1,
              double beta2, double eps):
    """One in-place Adam update on arrays of any shape."""
    cdef double[::1] p = param.reshape(-1)
    cdef double[::1] g = np.ascontiguousarray(grad, dtype=np.float64).reshape(-1)
    cdef double[::1] mv = m.reshape(-1)
    cdef double[::1] vv = v.reshape(-1)
    cdef Py_ssize_t i, n = p.shape[0]
    cdef double c1 = 1.0 - pow(beta1, step)
    cdef double c2 = 1.0 - pow(beta2, step)
    with nogil:
        for i in range(n):
            mv[i] = beta1 * mv[i] + (1.0 - beta1) * g[i]
            vv[i] = beta2 * vv[i] + (1.0 - beta2) * g[i] * g[i]
            p[i] -= lr * (mv[i] / c1) / (sqrt(vv[i] / c2) + eps)
