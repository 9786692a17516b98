# cython: language_level=3, boundscheck=False, cdivision=True
"""Scalar kernels, compiled implementation.

Mirrors psl2rep._kernel_py exactly; see that module for conventions.
"""

from libc.math cimport (acosh, atan2, cos, fabs, floor, isfinite, sin,
                        sqrt)

IMPL = "cython"

cdef double PI = 3.141592653589793


cdef inline void _mul4(double a1, double b1, double c1, double d1,
                       double a2, double b2, double c2, double d2,
                       double* out) noexcept:
    out[0] = a1 * a2 + b1 * c2
    out[1] = a1 * b2 + b1 * d2
    out[2] = c1 * a2 + d1 * c2
    out[3] = c1 * b2 + d1 * d2


cdef inline int _norm4(double a, double b, double c, double d,
                       double* out) noexcept:
    cdef double dt = a * d - b * c
    cdef double s
    if dt <= 0.0 or not isfinite(dt):
        return 0
    s = 1.0 / sqrt(dt)
    out[0] = a * s
    out[1] = b * s
    out[2] = c * s
    out[3] = d * s
    return 1


cdef inline double _bact(double a, double b, double c, double d,
                         double t) noexcept:
    cdef double u1 = -cos(t)
    cdef double u2 = sin(t)
    cdef double w1 = a * u1 + b * u2
    cdef double w2 = c * u1 + d * u2
    cdef double r = atan2(w2, -w1)
    r = r - PI * floor(r / PI)
    if r >= PI or r < 0.0:
        r = 0.0
    return r


cdef inline double _lift0(double a, double b, double c, double d,
                          double t) noexcept:
    cdef double k = floor(t / PI)
    cdef double t0 = t - k * PI
    cdef double f0, f00
    if t0 < 0.0:
        t0 = 0.0
    elif t0 >= PI:
        t0 = 0.0
        k += 1.0
    f0 = _bact(a, b, c, d, t0)
    f00 = _bact(a, b, c, d, 0.0)
    if f0 < f00:
        f0 += PI
    return f0 + k * PI


def det(double a, double b, double c, double d):
    return a * d - b * c


def norm1(double a, double b, double c, double d):
    cdef double out[4]
    if not _norm4(a, b, c, d, out):
        raise ValueError("matrix determinant must be positive and finite")
    return (out[0], out[1], out[2], out[3])


def mul(double a1, double b1, double c1, double d1,
        double a2, double b2, double c2, double d2):
    cdef double out[4]
    _mul4(a1, b1, c1, d1, a2, b2, c2, d2, out)
    return (out[0], out[1], out[2], out[3])


def inv(double a, double b, double c, double d):
    return (d, -b, -c, a)


def mob(double a, double b, double c, double d, double x, double y):
    cdef double cx = c * x + d
    cdef double cy = c * y
    cdef double den = cx * cx + cy * cy
    cdef double wx = ((a * x + b) * cx + (a * c) * y * y) / den
    return (wx, y / den)


def dist(double x1, double y1, double x2, double y2):
    cdef double dx = x1 - x2
    cdef double dy = y1 - y2
    return acosh(1.0 + (dx * dx + dy * dy) / (2.0 * y1 * y2))


def bact(double a, double b, double c, double d, double t):
    return _bact(a, b, c, d, t)


def lift0(double a, double b, double c, double d, double t):
    return _lift0(a, b, c, d, t)


def mu_float(double a1, double b1, double c1, double d1,
             double a2, double b2, double c2, double d2):
    cdef double t = _bact(a2, b2, c2, d2, 0.0)
    cdef double v = _lift0(a1, b1, c1, d1, t)
    cdef double p[4]
    cdef double q[4]
    _mul4(a1, b1, c1, d1, a2, b2, c2, d2, p)
    if not _norm4(p[0], p[1], p[2], p[3], q):
        raise ValueError("matrix determinant must be positive and finite")
    cdef double w = _bact(q[0], q[1], q[2], q[3], 0.0)
    return (v - w) / PI


cdef inline void _gap(double* a, double* b, double* ti, double* r) noexcept:
    cdef double m[4]
    cdef double n[4]
    cdef double s
    _mul4(a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3], m)
    _mul4(m[0], m[1], m[2], m[3], a[3], -a[1], -a[2], a[0], n)
    _mul4(n[0], n[1], n[2], n[3], b[3], -b[1], -b[2], b[0], m)
    _mul4(m[0], m[1], m[2], m[3], ti[0], ti[1], ti[2], ti[3], n)
    s = 1.0 if (n[0] + n[3]) >= 0.0 else -1.0
    r[0] = s * n[0] - 1.0
    r[1] = s * n[1]
    r[2] = s * n[2]


cdef inline int _bump4(double* m, double e1, double e2, double e3,
                       double* out) noexcept:
    cdef double p[4]
    _mul4(m[0], m[1], m[2], m[3], 1.0 + e1, e2, e3, 1.0 - e1, p)
    return _norm4(p[0], p[1], p[2], p[3], out)


def gn_commutator(double ta, double tb, double tc, double td,
                  double aa, double ab, double ac, double ad,
                  double ba, double bb, double bc, double bd,
                  int max_iter, double tol):
    """Damped Gauss-Newton solve of [A, B] = +-T from the given seeds."""
    cdef double ti[4]
    cdef double a[4]
    cdef double b[4]
    cdef double a2[4]
    cdef double b2[4]
    cdef double r[3]
    cdef double r2[3]
    cdef double jac[6][3]
    cdef double g[3][3]
    cdef double m2[3][3]
    cdef double y[3]
    cdef double step[6]
    cdef double e[6]
    cdef double rn, rn2, dg, dm, lam, h
    cdef int it, k, i, j, col, improved, ls
    ti[0] = td
    ti[1] = -tb
    ti[2] = -tc
    ti[3] = ta
    if not _norm4(aa, ab, ac, ad, a) or not _norm4(ba, bb, bc, bd, b):
        return (0, (aa, ab, ac, ad), (ba, bb, bc, bd))
    _gap(a, b, ti, r)
    rn = r[0] * r[0] + r[1] * r[1] + r[2] * r[2]
    h = 1e-6
    for it in range(max_iter):
        if fabs(r[0]) < tol and fabs(r[1]) < tol and fabs(r[2]) < tol:
            return (1, (a[0], a[1], a[2], a[3]), (b[0], b[1], b[2], b[3]))
        for k in range(6):
            for i in range(6):
                e[i] = 0.0
            e[k] = h
            if not _bump4(a, e[0], e[1], e[2], a2):
                return (0, (a[0], a[1], a[2], a[3]),
                        (b[0], b[1], b[2], b[3]))
            if not _bump4(b, e[3], e[4], e[5], b2):
                return (0, (a[0], a[1], a[2], a[3]),
                        (b[0], b[1], b[2], b[3]))
            _gap(a2, b2, ti, r2)
            jac[k][0] = (r2[0] - r[0]) / h
            jac[k][1] = (r2[1] - r[1]) / h
            jac[k][2] = (r2[2] - r[2]) / h
        for i in range(3):
            for j in range(3):
                g[i][j] = 0.0
                for k in range(6):
                    g[i][j] += jac[k][i] * jac[k][j]
        dg = (g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
              - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
              + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]))
        if not isfinite(dg) or fabs(dg) < 1e-300:
            return (0, (a[0], a[1], a[2], a[3]), (b[0], b[1], b[2], b[3]))
        for col in range(3):
            for i in range(3):
                for j in range(3):
                    m2[i][j] = -r[i] if j == col else g[i][j]
            dm = (m2[0][0] * (m2[1][1] * m2[2][2] - m2[1][2] * m2[2][1])
                  - m2[0][1] * (m2[1][0] * m2[2][2] - m2[1][2] * m2[2][0])
                  + m2[0][2] * (m2[1][0] * m2[2][1] - m2[1][1] * m2[2][0]))
            y[col] = dm / dg
        for k in range(6):
            step[k] = jac[k][0] * y[0] + jac[k][1] * y[1] + jac[k][2] * y[2]
        lam = 1.0
        improved = 0
        for ls in range(25):
            if (_bump4(a, lam * step[0], lam * step[1], lam * step[2], a2)
                    and _bump4(b, lam * step[3], lam * step[4],
                               lam * step[5], b2)):
                _gap(a2, b2, ti, r2)
                rn2 = r2[0] * r2[0] + r2[1] * r2[1] + r2[2] * r2[2]
                if rn2 < rn:
                    for i in range(4):
                        a[i] = a2[i]
                        b[i] = b2[i]
                    for i in range(3):
                        r[i] = r2[i]
                    rn = rn2
                    improved = 1
                    break
            lam *= 0.5
        if not improved:
            return (0, (a[0], a[1], a[2], a[3]), (b[0], b[1], b[2], b[3]))
    if fabs(r[0]) < tol and fabs(r[1]) < tol and fabs(r[2]) < tol:
        return (1, (a[0], a[1], a[2], a[3]), (b[0], b[1], b[2], b[3]))
    return (0, (a[0], a[1], a[2], a[3]), (b[0], b[1], b[2], b[3]))
