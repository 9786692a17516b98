"""Explicit representation constructors: regular-polygon Fuchsian
holonomy, free-factor representations, the degenerating families with
one long handle, degree-2 cover pullbacks, and seeded random valid
representations.
"""

from __future__ import annotations

import math

import numpy as np

from psl2rep._core import kernel
from psl2rep.group import (Representation, Word, a_index, b_index,
                           evaluate)
from psl2rep.hyp2 import (PI, BoundaryPoint, Isometry, NonConvergence,
                          Point, _circ_gap, _frame, direction_angle,
                          exp_point)


class FixedBoundaryPoint(Exception):
    """A base generator fixes the requested attracting point."""


class RewritingFailure(Exception):
    """Coset rewriting produced generators violating the relator."""


class SamplerExhausted(Exception):
    """The random sampler hit its retry cap without a valid output."""


# ------------------------------------------------------ axis construction

def _direction_to_boundary(p: Point, b: BoundaryPoint) -> float:
    """Frame angle at p of the geodesic ray from p to the boundary
    point b."""
    e = b.real_coordinate()
    if math.isinf(e):
        return PI / 2.0
    if abs(e - p.x) <= 1e-12 * (1.0 + abs(e) + abs(p.x)):
        return -PI / 2.0
    c = ((p.x * p.x + p.y * p.y) - e * e) / (2.0 * (p.x - e))
    psi = math.atan2(p.y, p.x - c)
    if e > c:
        tx, ty = math.sin(psi), -math.cos(psi)
    else:
        tx, ty = -math.sin(psi), math.cos(psi)
    return math.atan2(ty, tx)


def hyperbolic_with_axis(x0: Point, a0: BoundaryPoint,
                         length: float) -> Isometry:
    """The hyperbolic isometry whose axis passes through x0 with
    attracting endpoint a0 and the given translation length."""
    if not (length > 0.0):
        raise ValueError("translation length must be positive")
    phi = _direction_to_boundary(x0, a0)
    f = _frame(x0.x, x0.y, phi)
    s = math.exp(length / 2.0)
    m = kernel.mul(*f, s, 0.0, 0.0, 1.0 / s)
    m = kernel.mul(*m, *kernel.inv(*f))
    return Isometry(*m)


# -------------------------------------------------- regular polygon images

def _polygon_vertices(g: int, radius: float) -> list[Point]:
    k = 4 * g
    center = Point(0.0, 1.0)
    return [exp_point(center, radius, 2.0 * PI * j / k) for j in range(k)]


def _polygon_vertex_angle(g: int, radius: float) -> float:
    vs = _polygon_vertices(g, radius)
    a1 = direction_angle(vs[0], vs[1])
    a2 = direction_angle(vs[0], vs[-1])
    d = abs(a1 - a2) % (2.0 * PI)
    return min(d, 2.0 * PI - d)


def _regular_radius(g: int) -> float:
    """Circumradius at which the regular 4g-gon has vertex angle
    2*pi/(4g), found by bisection (the angle decreases in the
    radius)."""
    target = PI / (2.0 * g)
    lo, hi = 0.05, 30.0
    if not (_polygon_vertex_angle(g, lo) > target
            > _polygon_vertex_angle(g, hi)):
        raise NonConvergence("radius bracket does not straddle the target")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _polygon_vertex_angle(g, mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14:
            break
    return 0.5 * (lo + hi)


def _carry(p1: Point, p2: Point, q1: Point, q2: Point) -> Isometry:
    """The orientation-preserving isometry taking the oriented segment
    (p1 -> p2) to (q1 -> q2); the segments must have equal length."""
    f_src = _frame(p1.x, p1.y, direction_angle(p1, p2))
    f_dst = _frame(q1.x, q1.y, direction_angle(q1, q2))
    return Isometry(*kernel.mul(*f_dst, *kernel.inv(*f_src)))


def _fuchsian_images(g: int) -> Representation:
    # Sides are labeled a_i, b_i, a_i^-1, b_i^-1 in blocks of four read
    # counterclockwise.  Each pairing map sends the polygon across one
    # of its two sides (boundary orientation reversed); the a/b
    # conventions differ so that the vertex cycle spells the standard
    # relator rather than a rewriting of it.
    radius = _regular_radius(g)
    vs = _polygon_vertices(g, radius)
    vs.append(vs[0])
    imgs: list[Isometry] = []
    for i in range(g):
        base = 4 * i
        p, q = base, base + 2
        imgs.append(_carry(vs[q], vs[q + 1], vs[p + 1], vs[p]))
        p, q = base + 1, base + 3
        imgs.append(_carry(vs[p], vs[p + 1], vs[q + 1], vs[q]))
    return Representation(g, tuple(imgs))


def fuchsian_regular(g: int) -> Representation:
    """Holonomy of the hyperbolic surface glued from a regular 4g-gon
    with vertex angle 2*pi/(4g): a discrete faithful representation
    with extremal Euler number."""
    rep = _fuchsian_images(g)
    if rep.residual >= 1e-8:
        raise NonConvergence("side pairings violate the relator")
    return rep


# --------------------------------------------------------- small families

def free_factor_rep(g: int, x: Isometry, y: Isometry) -> Representation:
    """Representation factoring through the free group on two letters:
    a1 -> x, a2 -> y, every other generator -> identity.  Every
    commutator in the relator collapses, so the relator is exact and
    the Euler number vanishes."""
    ident = Isometry.identity()
    imgs = [ident] * (2 * g)
    imgs[a_index(1) - 1] = x
    imgs[a_index(2) - 1] = y
    return Representation(g, tuple(imgs))


def rho_n_prime(base: Representation, a0: BoundaryPoint, x0: Point,
                n: int) -> Representation:
    """Genus g+1 representation extending the base by a trivial
    a-generator and a b-generator translating by n along the axis
    through x0 toward a0."""
    if n < 1:
        raise ValueError("the added handle needs translation length >= 1")
    for img in base.images:
        if _circ_gap(img.boundary_map(a0.theta), a0.theta) < 1e-6:
            raise FixedBoundaryPoint(
                "a base generator fixes the attracting point")
    long_b = hyperbolic_with_axis(x0, a0, float(n))
    images = base.images + (Isometry.identity(), long_b)
    return Representation(base.genus + 1, images)


def double_cover_pullback(rho: Representation) -> Representation:
    """Pullback along the connected double cover dual to the mod-2
    class of the last a-generator.  Subgroup generators come from
    coset rewriting with representatives {1, a_g}; the Euler number
    doubles."""
    g = rho.genus
    if rho.residual >= 1e-6:
        raise RewritingFailure("the base representation is not valid")
    t = Word((a_index(g),))
    words: list[Word] = []
    for i in range(1, g):
        words.append(Word((a_index(i),)))
        words.append(Word((b_index(i),)))
    for i in range(1, g):
        words.append(t * Word((a_index(i),)) * t.inverse())
        words.append(t * Word((b_index(i),)) * t.inverse())
    words.append(t * t)
    words.append(Word((b_index(g),)))
    imgs = tuple(evaluate(rho, w) for w in words)
    out = Representation(2 * g - 1, imgs)
    if out.residual >= 1e-6:
        raise RewritingFailure("rewritten generators violate the relator")
    return out


# ------------------------------------------------------------ random reps

def _random_isometry(rng: np.random.Generator) -> Isometry:
    while True:
        a, b, c, d = rng.uniform(-2.0, 2.0, size=4)
        if a * d - b * c > 0.1:
            return Isometry(*kernel.norm1(a, b, c, d))


def random_representation(g: int, seed: int,
                          max_attempts: int = 64) -> Representation:
    """Seeded random valid representation: the first g-1 handles are
    sampled freely and the last pair is solved so that its commutator
    cancels the partial relator product."""
    if g < 2:
        raise ValueError("genus must be at least 2")
    rng = np.random.default_rng(seed)
    ident = (1.0, 0.0, 0.0, 1.0)
    for _ in range(max_attempts):
        imgs = [_random_isometry(rng) for _ in range(2 * (g - 1))]
        m = ident
        for i in range(g - 1):
            am = imgs[2 * i].entries
            bm = imgs[2 * i + 1].entries
            m = kernel.mul(*m, *am)
            m = kernel.mul(*m, *bm)
            m = kernel.mul(*m, *kernel.inv(*am))
            m = kernel.mul(*m, *kernel.inv(*bm))
        target = kernel.inv(*kernel.norm1(*m))
        seed_a = _random_isometry(rng)
        seed_b = _random_isometry(rng)
        ok, am, bm = kernel.gn_commutator(*target, *seed_a.entries,
                                          *seed_b.entries, 200, 1e-12)
        if not ok:
            continue
        rho = Representation(
            g, tuple(imgs) + (Isometry(*am), Isometry(*bm)))
        if rho.residual < 1e-8:
            return rho
    raise SamplerExhausted(
        "no valid representation within the retry cap")
