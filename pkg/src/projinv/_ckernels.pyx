# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; same contract as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, floor, sqrt, fmin, fmax
from cython.parallel cimport prange

cnp.import_array()


cdef inline double _bilin(const double[:, ::1] img, Py_ssize_t h, Py_ssize_t w,
                          double x, double y) noexcept nogil:
    cdef Py_ssize_t x0, y0, x1, y1
    cdef double fx, fy
    x = fmin(fmax(x, 0.0), w - 1.0)
    y = fmin(fmax(y, 0.0), h - 1.0)
    x0 = <Py_ssize_t>floor(x)
    y0 = <Py_ssize_t>floor(y)
    if w > 1 and x0 > w - 2:
        x0 = w - 2
    if h > 1 and y0 > h - 2:
        y0 = h - 2
    if w == 1:
        x0 = 0
    if h == 1:
        y0 = 0
    x1 = x0 + 1 if x0 + 1 < w else w - 1
    y1 = y0 + 1 if y0 + 1 < h else h - 1
    fx = x - x0
    fy = y - y0
    return ((img[y0, x0] * (1.0 - fx) + img[y0, x1] * fx) * (1.0 - fy)
            + (img[y1, x0] * (1.0 - fx) + img[y1, x1] * fx) * fy)


def bilinear(img, xs, ys):
    cdef const double[:, ::1] im = np.ascontiguousarray(img, dtype=np.float64)
    xa = np.ascontiguousarray(xs, dtype=np.float64)
    ya = np.ascontiguousarray(ys, dtype=np.float64)
    shape = np.broadcast(xa, ya).shape
    cdef const double[::1] xv = np.broadcast_to(xa, shape).ravel().copy()
    cdef const double[::1] yv = np.broadcast_to(ya, shape).ravel().copy()
    out = np.empty(xv.shape[0])
    cdef double[::1] ov = out
    cdef Py_ssize_t i, h = im.shape[0], w = im.shape[1]
    with nogil:
        for i in range(xv.shape[0]):
            ov[i] = _bilin(im, h, w, xv[i], yv[i])
    return out.reshape(shape)


def sobel(img, xs, ys):
    cdef const double[:, ::1] im = np.ascontiguousarray(img, dtype=np.float64)
    xa = np.ascontiguousarray(xs, dtype=np.float64)
    ya = np.ascontiguousarray(ys, dtype=np.float64)
    shape = np.broadcast(xa, ya).shape
    cdef const double[::1] xv = np.broadcast_to(xa, shape).ravel().copy()
    cdef const double[::1] yv = np.broadcast_to(ya, shape).ravel().copy()
    p = np.empty(xv.shape[0])
    q = np.empty(xv.shape[0])
    cdef double[::1] pv = p, qv = q
    cdef Py_ssize_t i, h = im.shape[0], w = im.shape[1]
    cdef double x, y, a, b, c, d, f, g, k, l
    with nogil:
        for i in range(xv.shape[0]):
            x = xv[i]
            y = yv[i]
            # a b c / d . f / g k l around (x, y)
            a = _bilin(im, h, w, x - 1, y - 1)
            b = _bilin(im, h, w, x, y - 1)
            c = _bilin(im, h, w, x + 1, y - 1)
            d = _bilin(im, h, w, x - 1, y)
            f = _bilin(im, h, w, x + 1, y)
            g = _bilin(im, h, w, x - 1, y + 1)
            k = _bilin(im, h, w, x, y + 1)
            l = _bilin(im, h, w, x + 1, y + 1)
            pv[i] = ((c - a) + 2.0 * (f - d) + (l - g)) / 8.0
            qv[i] = ((g - a) + 2.0 * (k - b) + (l - c)) / 8.0
    return p.reshape(shape), q.reshape(shape)


def warp(img, hinv, int out_h, int out_w, int threads=1):
    cdef const double[:, ::1] im = np.ascontiguousarray(img, dtype=np.float64)
    cdef const double[:, ::1] H = np.ascontiguousarray(hinv, dtype=np.float64)
    out = np.empty((out_h, out_w))
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t r, c, h = im.shape[0], w = im.shape[1]
    cdef double den, X, Y
    for r in prange(out_h, nogil=True, num_threads=max(threads, 1), schedule="static"):
        for c in range(out_w):
            den = H[2, 0] * c + H[2, 1] * r + H[2, 2]
            if fabs(den) < 1e-300:
                ov[r, c] = 0.0
            else:
                X = (H[0, 0] * c + H[0, 1] * r + H[0, 2]) / den
                Y = (H[1, 0] * c + H[1, 1] * r + H[1, 2]) / den
                ov[r, c] = _bilin(im, h, w, X, Y)
    return out


cdef inline double _delta(const double[:, :, ::1] v, Py_ssize_t t,
                          Py_ssize_t i, Py_ssize_t j, Py_ssize_t k) noexcept nogil:
    return (v[t, i, 0] * (v[t, j, 1] - v[t, k, 1]) - v[t, j, 0] * (v[t, i, 1] - v[t, k, 1])
            + v[t, k, 0] * (v[t, i, 1] - v[t, j, 1]))


cdef inline double _phi1(const double[:, :, ::1] v, Py_ssize_t t,
                         Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    return (v[t, i, 0] - v[t, j, 0]) * v[t, 0, 2] + (v[t, i, 1] - v[t, j, 1]) * v[t, 0, 3]


def frame_jacobian_batch(cfgs, double eps_gp, int threads=1):
    cdef const double[:, :, ::1] v = np.ascontiguousarray(cfgs, dtype=np.float64)
    cdef Py_ssize_t m = v.shape[0], n = v.shape[1]
    C = np.zeros(m)
    okarr = np.zeros(m, dtype=np.uint8)
    cdef double[::1] Cv = C
    cdef unsigned char[::1] okv = okarr
    cdef Py_ssize_t t, i, j, k
    cdef double L, G, dx, dy, r, d, f12, f13, xs, den, m23, tol
    cdef double a0, a1, a2, b0, b1, b2, c0, c1, D, s, prod, x1, y1, p1, q1, x2, y2, x3, y3
    cdef bint ok
    for t in prange(m, nogil=True, num_threads=max(threads, 1), schedule="static"):
        L = 0.0
        G = 0.0
        for i in range(n):
            r = sqrt(v[t, i, 2] * v[t, i, 2] + v[t, i, 3] * v[t, i, 3])
            G = fmax(G, r)
            for j in range(i + 1, n):
                dx = v[t, i, 0] - v[t, j, 0]
                dy = v[t, i, 1] - v[t, j, 1]
                L = fmax(L, sqrt(dx * dx + dy * dy))
        L = fmax(L, 1e-300)
        d = _delta(v, t, 0, 1, 2)
        f12 = _phi1(v, t, 0, 1)
        f13 = _phi1(v, t, 0, 2)
        ok = fabs(d) / (L * L) > eps_gp
        if G > 0:
            ok = ok and fmin(fabs(f12), fabs(f13)) / (L * G) > eps_gp
        else:
            ok = ok and 0.0 > eps_gp
        xs = L * L * fmax(1.0, L * G)
        for k in range(3, n):
            ok = ok and fabs(_delta(v, t, 1, 2, k) + d * _phi1(v, t, 0, k)) / xs > eps_gp

        x1 = v[t, 0, 0]
        y1 = v[t, 0, 1]
        p1 = v[t, 0, 2]
        q1 = v[t, 0, 3]
        x2 = v[t, 1, 0]
        y2 = v[t, 1, 1]
        x3 = v[t, 2, 0]
        y3 = v[t, 2, 1]
        m23 = x2 * y3 - x3 * y2
        den = d * (q1 * y1 + p1 * x1) + m23
        ok = ok and fabs(den) > 1e-14 * L * L * fmax(1.0, L * sqrt(p1 * p1 + q1 * q1))
        if not ok:
            okv[t] = 0
            Cv[t] = 0.0
            continue
        a0 = (y2 - y3) / den
        a1 = (x3 - x2) / den
        a2 = m23 / den
        b0 = f13 * (y1 - y2) / den
        b1 = f13 * (x2 - x1) / den
        b2 = f13 * (x1 * y2 - x2 * y1) / den
        c0 = (y2 - y3 - p1 * d) / den
        c1 = (x3 - x2 - q1 * d) / den
        D = a0 * (b1 - b2 * c1) - a1 * (b0 - b2 * c0) + a2 * (b0 * c1 - b1 * c0)
        tol = 1e-10 * (1.0 + fabs(c0) + fabs(c1))
        prod = 1.0
        for i in range(n):
            s = c0 * v[t, i, 0] + c1 * v[t, i, 1] + 1.0
            if fabs(s) <= tol:
                ok = False
            else:
                prod = prod * (D / (s * s * s))
        okv[t] = ok
        Cv[t] = prod if ok else 0.0
    return C, okarr.astype(bool)
