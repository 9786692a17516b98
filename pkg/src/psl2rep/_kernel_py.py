"""Scalar kernels, pure-Python reference implementation.

Matrices are (a, b, c, d) tuples, row-major, determinant 1 unless noted.
Boundary points are angles in [0, pi); theta maps to the projective
vector (-cos theta, sin theta), so theta = 0 is the point at infinity
and increasing theta moves anticlockwise.
"""

import math

IMPL = "pure"

PI = math.pi


def det(a, b, c, d):
    return a * d - b * c


def norm1(a, b, c, d):
    # determinant must be positive; scaling is the only normalization
    dt = a * d - b * c
    if dt <= 0.0 or not math.isfinite(dt):
        raise ValueError("matrix determinant must be positive and finite")
    s = 1.0 / math.sqrt(dt)
    return (a * s, b * s, c * s, d * s)


def mul(a1, b1, c1, d1, a2, b2, c2, d2):
    return (
        a1 * a2 + b1 * c2,
        a1 * b2 + b1 * d2,
        c1 * a2 + d1 * c2,
        c1 * b2 + d1 * d2,
    )


def inv(a, b, c, d):
    # valid for determinant-1 input
    return (d, -b, -c, a)


def mob(a, b, c, d, x, y):
    # image of x + iy under the Moebius map, determinant-1 input
    cx = c * x + d
    cy = c * y
    den = cx * cx + cy * cy
    wx = ((a * x + b) * cx + (a * c) * y * y) / den
    wy = y / den
    return (wx, wy)


def dist(x1, y1, x2, y2):
    dx = x1 - x2
    dy = y1 - y2
    q = (dx * dx + dy * dy) / (2.0 * y1 * y2)
    return math.acosh(1.0 + q)


def bact(a, b, c, d, t):
    # boundary action in the theta chart, result wrapped into [0, pi)
    u1 = -math.cos(t)
    u2 = math.sin(t)
    w1 = a * u1 + b * u2
    w2 = c * u1 + d * u2
    r = math.atan2(w2, -w1)
    r %= PI
    if r >= PI:
        r = 0.0
    return r


def lift0(a, b, c, d, t):
    # canonical lift: branch with value in [bact(0), bact(0) + pi) on [0, pi)
    k = math.floor(t / PI)
    t0 = t - k * PI
    if t0 < 0.0:
        t0 = 0.0
    elif t0 >= PI:
        t0 = 0.0
        k += 1
    f0 = bact(a, b, c, d, t0)
    f00 = bact(a, b, c, d, 0.0)
    if f0 < f00:
        f0 += PI
    return f0 + k * PI


def mu_float(a1, b1, c1, d1, a2, b2, c2, d2):
    # un-rounded lift cocycle of the pair; caller rounds and guards
    t = bact(a2, b2, c2, d2, 0.0)
    v = lift0(a1, b1, c1, d1, t)
    pa, pb, pc, pd = norm1(*mul(a1, b1, c1, d1, a2, b2, c2, d2))
    w = bact(pa, pb, pc, pd, 0.0)
    return (v - w) / PI


def _commutator_gap(aa, ab, ac, ad, ba, bb, bc, bd, ia, ib, ic, id_):
    # residual of [A, B] * Tinv against +-identity, three components
    m = mul(aa, ab, ac, ad, ba, bb, bc, bd)
    n = mul(m[0], m[1], m[2], m[3], ad, -ab, -ac, aa)
    m = mul(n[0], n[1], n[2], n[3], bd, -bb, -bc, ba)
    m = mul(m[0], m[1], m[2], m[3], ia, ib, ic, id_)
    s = 1.0 if (m[0] + m[3]) >= 0.0 else -1.0
    return (s * m[0] - 1.0, s * m[1], s * m[2])


def _bump(a, b, c, d, e1, e2, e3):
    # right-multiply by I + e1*H + e2*E + e3*F and renormalize
    p = mul(a, b, c, d, 1.0 + e1, e2, e3, 1.0 - e1)
    return norm1(*p)


def gn_commutator(ta, tb, tc, td, aa, ab, ac, ad, ba, bb, bc, bd,
                  max_iter, tol):
    """Damped Gauss-Newton solve of [A, B] = +-T from the given seeds.

    T is consumed as its inverse; returns (ok, A, B) with ok 1 on
    convergence of the three-component residual below tol.
    """
    ia, ib, ic, id_ = (td, -tb, -tc, ta)
    try:
        a = norm1(aa, ab, ac, ad)
        b = norm1(ba, bb, bc, bd)
    except ValueError:
        return (0, (aa, ab, ac, ad), (ba, bb, bc, bd))
    r = _commutator_gap(*a, *b, ia, ib, ic, id_)
    rn = r[0] * r[0] + r[1] * r[1] + r[2] * r[2]
    h = 1e-6
    for _ in range(max_iter):
        if max(abs(r[0]), abs(r[1]), abs(r[2])) < tol:
            return (1, a, b)
        jac = []
        for k in range(6):
            e = [0.0] * 6
            e[k] = h
            try:
                a2 = _bump(*a, e[0], e[1], e[2])
                b2 = _bump(*b, e[3], e[4], e[5])
            except ValueError:
                return (0, a, b)
            r2 = _commutator_gap(*a2, *b2, ia, ib, ic, id_)
            jac.append(((r2[0] - r[0]) / h, (r2[1] - r[1]) / h,
                        (r2[2] - r[2]) / h))
        # least-norm step: s = J^T (J J^T)^{-1} (-r), J is 3x6
        g = [[0.0] * 3 for _ in range(3)]
        for i in range(3):
            for j in range(3):
                g[i][j] = sum(jac[k][i] * jac[k][j] for k in range(6))
        dg = (g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
              - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
              + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]))
        if not math.isfinite(dg) or abs(dg) < 1e-300:
            return (0, a, b)
        # solve G y = -r by Cramer
        y = []
        for col in range(3):
            m2 = [[g[i][j] if j != col else -r[i] for j in range(3)]
                  for i in range(3)]
            dm = (m2[0][0] * (m2[1][1] * m2[2][2] - m2[1][2] * m2[2][1])
                  - m2[0][1] * (m2[1][0] * m2[2][2] - m2[1][2] * m2[2][0])
                  + m2[0][2] * (m2[1][0] * m2[2][1] - m2[1][1] * m2[2][0]))
            y.append(dm / dg)
        step = [sum(jac[k][i] * y[i] for i in range(3)) for k in range(6)]
        lam = 1.0
        improved = False
        for _ in range(25):
            try:
                a2 = _bump(*a, lam * step[0], lam * step[1], lam * step[2])
                b2 = _bump(*b, lam * step[3], lam * step[4], lam * step[5])
            except ValueError:
                # bump left the positive-determinant chart; shorten
                lam *= 0.5
                continue
            r2 = _commutator_gap(*a2, *b2, ia, ib, ic, id_)
            rn2 = r2[0] * r2[0] + r2[1] * r2[1] + r2[2] * r2[2]
            if rn2 < rn:
                a, b, r, rn = a2, b2, r2, rn2
                improved = True
                break
            lam *= 0.5
        if not improved:
            return (0, a, b)
    if max(abs(r[0]), abs(r[1]), abs(r[2])) < tol:
        return (1, a, b)
    return (0, a, b)
