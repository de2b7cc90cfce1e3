# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled orbit-sum and labelling kernels.

Each point's sum runs sequentially over the elements in canonical order
with Neumaier compensation, so the result is independent of the number of
OpenMP threads.  Must not be built with -ffast-math (it would remove the
compensation).
"""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport log, exp, cos, sin, sqrt, atan2, fabs

cnp.import_array()


cdef inline void _neumaier(double *s, double *comp, double v) noexcept nogil:
    # branch-free two-sum; the error term is exact, as in Neumaier's variant
    cdef double t = s[0] + v
    cdef double bp = t - s[0]
    comp[0] += (s[0] - (t - bp)) + (v - bp)
    s[0] = t


# pi/2 split into three parts for Cody-Waite reduction
cdef double _PIO2_1 = 1.57079632673412561417e+00
cdef double _PIO2_2 = 6.07710050650619224932e-11
cdef double _PIO2_3 = 2.02226624879595063154e-21
cdef double _TWO_OVER_PI = 6.36619772367581382433e-01
# adding and subtracting 1.5 * 2^52 rounds to the nearest integer
cdef double _ROUND = 6755399441055744.0
cdef double _SIGN_C[4]
cdef double _SIGN_S[4]
_SIGN_C[:] = [1.0, -1.0, -1.0, 1.0]
_SIGN_S[:] = [1.0, 1.0, -1.0, -1.0]


cdef inline void _sincos(double x, double *sn, double *cs) noexcept nogil:
    """Branch-free sin/cos for |x| < 1e9, error about 1e-16.

    glibc's cos is several times slower here because its range tests
    mispredict on the irregular phases of an orbit sum.
    """
    cdef double k = (x * _TWO_OVER_PI + _ROUND) - _ROUND
    cdef double r = ((x - k * _PIO2_1) - k * _PIO2_2) - k * _PIO2_3
    cdef double r2 = r * r
    cdef double ps = -7.64716373181981647590e-13
    ps = 1.60590438368216145994e-10 + r2 * ps
    ps = -2.50521083854417187751e-08 + r2 * ps
    ps = 2.75573192239858906526e-06 + r2 * ps
    ps = -1.98412698412698412698e-04 + r2 * ps
    ps = 8.33333333333333333333e-03 + r2 * ps
    ps = -1.66666666666666666667e-01 + r2 * ps
    cdef double s = r + r * r2 * ps
    cdef double pc = 4.77947733238738529744e-14
    pc = -1.14707455977297247139e-11 + r2 * pc
    pc = 2.08767569878680989792e-09 + r2 * pc
    pc = -2.75573192239858906526e-07 + r2 * pc
    pc = 2.48015873015873015873e-05 + r2 * pc
    pc = -1.38888888888888888889e-03 + r2 * pc
    pc = 4.16666666666666666667e-02 + r2 * pc
    pc = -0.5 + r2 * pc
    cdef double c = 1.0 + r2 * pc
    cdef long q = (<long>k) & 3
    cdef double v[2]
    # table lookups instead of branches: quadrants are unpredictable
    v[0] = c
    v[1] = s
    cs[0] = _SIGN_C[q] * v[q & 1]
    sn[0] = _SIGN_S[q] * v[(q & 1) ^ 1]


cdef void _wave_point(double x, double y, const double *er, const double *ei,
                      const double *c, const double *ec, Py_ssize_t m, double lam,
                      bint want_imag, double *out_re, double *out_im,
                      double *out_mag) noexcept nogil:
    # exp(B/2) = exp(c/2) sqrt(1 - |z|^2) / |z - eta|, so no exp per term
    cdef double r2 = x * x + y * y
    cdef double p = 1.0 - r2
    cdef double logp = log(p)
    cdef double sp = sqrt(p)
    cdef double sr = 0.0, cr = 0.0, si = 0.0, ci = 0.0, sm = 0.0, cm = 0.0
    cdef double dx, dy, d2, b, w, sn, cs
    cdef Py_ssize_t j
    for j in range(m):
        dx = x - er[j]
        dy = y - ei[j]
        d2 = dx * dx + dy * dy
        b = c[j] + logp - log(d2)
        w = ec[j] * sp / sqrt(d2)
        _sincos(lam * b, &sn, &cs)
        _neumaier(&sr, &cr, w * cs)
        if want_imag:
            _neumaier(&si, &ci, w * sn)
        _neumaier(&sm, &cm, w)
    out_re[0] = sr + cr
    out_im[0] = si + ci
    out_mag[0] = sm + cm


def wave_sum(const double[::1] x, const double[::1] y, const double[::1] eta_re,
             const double[::1] eta_im, const double[::1] c, double lam,
             bint want_imag, int nthreads=1):
    cdef Py_ssize_t n = x.shape[0], m = c.shape[0], i
    re = np.empty(n)
    im = np.empty(n)
    mag = np.empty(n)
    ec_arr = np.exp(0.5 * np.asarray(c))
    cdef double[::1] ec = ec_arr
    cdef double[::1] vre = re, vim = im, vmag = mag
    cdef int nt = max(1, nthreads)
    for i in prange(n, nogil=True, num_threads=nt, schedule="static"):
        _wave_point(x[i], y[i], &eta_re[0], &eta_im[0], &c[0], &ec[0], m, lam, want_imag,
                    &vre[i], &vim[i], &vmag[i])
    return re, (im if want_imag else None), mag


cdef double _e1_point(double x, double y, const double *er, const double *ei,
                      const double *c, Py_ssize_t m) noexcept nogil:
    cdef double logp = log(1.0 - (x * x + y * y))
    cdef double s = 0.0, comp = 0.0, dx, dy
    cdef Py_ssize_t j
    for j in range(m):
        dx = x - er[j]
        dy = y - ei[j]
        _neumaier(&s, &comp, exp(c[j] + logp - log(dx * dx + dy * dy)))
    return s + comp


def e1_sum(const double[::1] x, const double[::1] y, const double[::1] eta_re,
           const double[::1] eta_im, const double[::1] c, int nthreads=1):
    cdef Py_ssize_t n = x.shape[0], m = c.shape[0], i
    out = np.empty(n)
    cdef double[::1] vout = out
    cdef int nt = max(1, nthreads)
    for i in prange(n, nogil=True, num_threads=nt, schedule="static"):
        vout[i] = _e1_point(x[i], y[i], &eta_re[0], &eta_im[0], &c[0], m)
    return out


cdef void _holo_point(double x, double y, const double *er, const double *ei,
                      const double *cp, Py_ssize_t m, double lam,
                      double *out_re, double *out_im, double *out_scale) noexcept nogil:
    # w0 = 1 - z^2, w1 = 1 - z conj(eta), w2 = 1 - z eta
    cdef double w0r = 1.0 - (x * x - y * y), w0i = -2.0 * x * y
    cdef double lr0 = 0.5 * log(w0r * w0r + w0i * w0i)
    cdef double li0 = atan2(w0i, w0r)
    cdef double w1r, w1i, w2r, w2i, li, lr, s = 0.0
    cdef double amp, ca, sa, a, v, ep, em, ch, sh, cr, ci
    cdef double sre = 0.0, cre = 0.0, sim = 0.0, cim = 0.0
    cdef Py_ssize_t j
    for j in range(m):
        w1r = 1.0 - (x * er[j] + y * ei[j])
        w1i = -(y * er[j] - x * ei[j])
        w2r = 1.0 - (x * er[j] - y * ei[j])
        w2i = -(x * ei[j] + y * er[j])
        li = li0 - atan2(w1i, w1r) - atan2(w2i, w2r)
        if fabs(li) > s:
            s = fabs(li)
    s = lam * s
    for j in range(m):
        w1r = 1.0 - (x * er[j] + y * ei[j])
        w1i = -(y * er[j] - x * ei[j])
        w2r = 1.0 - (x * er[j] - y * ei[j])
        w2i = -(x * ei[j] + y * er[j])
        lr = lr0 - 0.5 * log(w1r * w1r + w1i * w1i) - 0.5 * log(w2r * w2r + w2i * w2i)
        li = li0 - atan2(w1i, w1r) - atan2(w2i, w2r)
        amp = exp(0.5 * (cp[j] + lr))
        ca = cos(0.5 * li)
        sa = sin(0.5 * li)
        a = lam * (cp[j] + lr)
        v = lam * li
        ep = exp(v - s)
        em = exp(-v - s)
        ch = 0.5 * (ep + em)
        sh = 0.5 * (ep - em)
        cr = cos(a) * ch
        ci = -sin(a) * sh
        _neumaier(&sre, &cre, amp * (ca * cr - sa * ci))
        _neumaier(&sim, &cim, amp * (ca * ci + sa * cr))
    out_re[0] = sre + cre
    out_im[0] = sim + cim
    out_scale[0] = s


def holo_sum(const double[::1] x, const double[::1] y, const double[::1] eta_re,
             const double[::1] eta_im, const double[::1] cprime, double lam,
             int nthreads=1):
    cdef Py_ssize_t n = x.shape[0], m = cprime.shape[0], i
    re = np.empty(n)
    im = np.empty(n)
    scale = np.empty(n)
    cdef double[::1] vre = re, vim = im, vsc = scale
    cdef int nt = max(1, nthreads)
    for i in prange(n, nogil=True, num_threads=nt, schedule="static"):
        _holo_point(x[i], y[i], &eta_re[0], &eta_im[0], &cprime[0], m, lam,
                    &vre[i], &vim[i], &vsc[i])
    return re, im, scale


cdef inline Py_ssize_t _find(Py_ssize_t *parent, Py_ssize_t a) noexcept nogil:
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


cdef inline void _union(Py_ssize_t *parent, Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    a = _find(parent, a)
    b = _find(parent, b)
    if a < b:
        parent[b] = a
    elif b < a:
        parent[a] = b


def label_components(sign, mask):
    """4-connected same-sign components of the masked nodes.

    Labels follow first appearance in row-major order; unmasked nodes get -1.
    """
    cdef cnp.int8_t[:, ::1] sg = np.ascontiguousarray(sign, dtype=np.int8)
    cdef cnp.uint8_t[:, ::1] mk = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef Py_ssize_t nx = mk.shape[0], ny = mk.shape[1], i, j, k, r
    parent_arr = np.arange(nx * ny, dtype=np.intp)
    labels_arr = np.full(nx * ny, -1, dtype=np.int64)
    cdef Py_ssize_t[::1] parent = parent_arr
    cdef cnp.int64_t[::1] labels = labels_arr
    cdef Py_ssize_t *pp = &parent[0]
    cdef cnp.int64_t count = 0
    with nogil:
        for i in range(nx):
            for j in range(ny):
                if not mk[i, j]:
                    continue
                k = i * ny + j
                if j + 1 < ny and mk[i, j + 1] and sg[i, j] == sg[i, j + 1]:
                    _union(pp, k, k + 1)
                if i + 1 < nx and mk[i + 1, j] and sg[i, j] == sg[i + 1, j]:
                    _union(pp, k, k + ny)
        # roots are component minima, so a raster scan meets each root first
        for k in range(nx * ny):
            if not mk[k // ny, k % ny]:
                continue
            r = _find(pp, k)
            if r == k:
                labels[k] = count
                count += 1
            else:
                labels[k] = labels[r]
    return labels_arr.reshape(nx, ny), int(count)
