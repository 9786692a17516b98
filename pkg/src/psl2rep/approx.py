"""Equivariant approximation checks between labeled configurations in
the (rescaled) hyperbolic plane and in metric trees, plus the
degeneration experiment driver that compares rescaled orbit distances
against their tree limits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import mpmath as mp
import numpy as np

from psl2rep.families import SamplerExhausted, _direction_to_boundary
from psl2rep.group import (Representation, Word, a_index, b_index, evaluate,
                           word_display)
from psl2rep.hyp2 import (C0, BoundaryPoint, DegenerateConfiguration, Point,
                          ScaledPlane, _circ_gap, _frame,
                          boundary_fixed_points, fermat_point, min_displacement,
                          segment_order)
from psl2rep.rtree import (FatTree, MetricTree, TreePoint, bass_serre_length,
                           tree_triple_sign, tripod_center)


class LabelMismatch(Exception):
    pass


# ------------------------------------------------------- configurations

def _space_delta(space) -> float:
    """Four-point hyperbolicity constant of the ambient space."""
    if isinstance(space, ScaledPlane):
        return space.delta
    if isinstance(space, (MetricTree, FatTree)):
        return 0.0
    raise TypeError(f"unsupported space {type(space).__name__}")


def _metric(space):
    if isinstance(space, ScaledPlane):
        return space.point_distance
    if isinstance(space, MetricTree):
        return space.point_distance
    if isinstance(space, FatTree):
        return space.tree.point_distance
    raise TypeError(f"unsupported space {type(space).__name__}")


def _move(space, action, w: Word, point):
    """Image of a point under the action of the word."""
    if isinstance(space, ScaledPlane):
        return evaluate(action, w).apply(point)
    return action.move_point(w.letters, point)


@dataclass(frozen=True)
class Configuration:
    """A labeled finite list of points in a rescaled hyperbolic plane,
    a metric tree, or a fat tree."""

    labels: tuple
    points: tuple
    space: object

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "points", tuple(self.points))
        if len(self.labels) != len(self.points):
            raise ValueError("one label per point is required")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("labels must be unique")
        _space_delta(self.space)

    @property
    def delta(self) -> float:
        return _space_delta(self.space)


@dataclass(frozen=True)
class ApproxReport:
    """Outcome of an approximation check at tolerance eps."""

    max_distortion: float
    delta_gap: float
    order_agreement: bool
    witnesses: tuple
    eps: float

    def __post_init__(self):
        if self.max_distortion < 0.0:
            raise ValueError("distortion is a max of absolute values")

    @property
    def passed(self) -> bool:
        return (self.max_distortion < self.eps
                and self.delta_gap < self.eps
                and self.order_agreement)


def _paired_points(k1: Configuration, k2: Configuration):
    if set(k1.labels) != set(k2.labels):
        raise LabelMismatch("configurations carry different label sets")
    index2 = {lab: i for i, lab in enumerate(k2.labels)}
    pairs = [(p, k2.points[index2[lab]])
             for lab, p in zip(k1.labels, k1.points)]
    return list(k1.labels), pairs


def epsilon_check(k1: Configuration, k2: Configuration, rho, rho2,
                  words: Sequence[Word], eps: float) -> ApproxReport:
    """Maximum distortion of moved-point distances between the two
    configurations over all pairs of words and labels, together with
    the gap of the two hyperbolicity constants.  An empty word list is
    treated as the singleton identity, which compares the raw
    configuration distances."""
    labels, pairs = _paired_points(k1, k2)
    ws = list(words) if words else [Word(())]
    d1, d2 = _metric(k1.space), _metric(k2.space)
    moved1 = [[_move(k1.space, rho, w, p) for p, _ in pairs] for w in ws]
    moved2 = [[_move(k2.space, rho2, w, q) for _, q in pairs] for w in ws]
    distortion = 0.0
    for gi in range(len(ws)):
        for hi in range(gi, len(ws)):
            for i in range(len(pairs)):
                for j in range(len(pairs)):
                    gap = abs(d1(moved1[gi][i], moved1[hi][j])
                              - d2(moved2[gi][i], moved2[hi][j]))
                    distortion = max(distortion, gap)
    delta_gap = abs(_space_delta(k1.space) - _space_delta(k2.space))
    return ApproxReport(distortion, delta_gap, True, (), float(eps))


def _fat_at_level(space, triple, a: float) -> bool:
    """Every permuted triangle-inequality excess exceeds 2a."""
    d = _metric(space)
    for m in range(3):
        i, k = (m + 1) % 3, (m + 2) % 3
        excess = (d(triple[i], triple[m]) + d(triple[m], triple[k])
                  - d(triple[i], triple[k]))
        if excess <= 2.0 * a:
            return False
    return True


def _triple_sign(space, triple) -> int:
    """Orientation of a fat triple: the cyclic order of the three ray
    germs at the point minimizing the sum of distances to the triple."""
    if isinstance(space, ScaledPlane):
        center = fermat_point(*triple)
        return segment_order(center, center, center, *triple)
    if isinstance(space, FatTree):
        center = tripod_center(space.tree, *triple)
        return tree_triple_sign(space, (center, center, center), triple)
    raise TypeError("ordering needs an oriented space "
                    "(a plane or a fat tree)")


def oriented_check(k1: Configuration, k2: Configuration, rho, rho2,
                   words: Sequence[Word], eps: float) -> ApproxReport:
    """epsilon_check plus sign agreement: every triple of configuration
    points that is fat at level C0*(delta + eps) + 3*eps on the first
    side must come in the same cyclic order on both sides.  Mismatching
    label triples are reported as witnesses."""
    base = epsilon_check(k1, k2, rho, rho2, words, eps)
    level = C0 * (_space_delta(k1.space) + eps) + 3.0 * eps
    labels, pairs = _paired_points(k1, k2)
    witnesses = []
    for i, j, m in combinations(range(len(labels)), 3):
        t1 = (pairs[i][0], pairs[j][0], pairs[m][0])
        if not _fat_at_level(k1.space, t1, level):
            continue
        t2 = (pairs[i][1], pairs[j][1], pairs[m][1])
        if _triple_sign(k1.space, t1) != _triple_sign(k2.space, t2):
            witnesses.append((labels[i], labels[j], labels[m]))
    return ApproxReport(base.max_distortion, base.delta_gap,
                        not witnesses, tuple(witnesses), float(eps))


# ----------------------------------------------------------- rescaling

def rescale(rho: Representation) -> tuple[ScaledPlane, float]:
    """Plane rescaled by max(1, d) where d is the minimal joint
    displacement of the generators."""
    d = min_displacement(rho).displacement
    return ScaledPlane(max(1.0, d)), d


# ------------------------------------------------- degeneration driver

@dataclass(frozen=True)
class DegenerationRow:
    n: int
    word: str
    scaled_distance: float
    tree_length: float
    gap: float


def default_degeneration_words(g: int) -> tuple[Word, ...]:
    """Test words whose syllable exponents against the last handle sum
    to 0, 1, 2 and 5."""
    if g < 3:
        raise ValueError("the default word set needs two base handles")
    z = b_index(g)
    return (
        Word((a_index(1),)),
        Word((z,)),
        Word((a_index(1), z, a_index(2), -z)),
        Word((a_index(1), z, z, a_index(2), -z, -z, -z)),
    )


def _shares_fixed_boundary_point(base: Representation) -> bool:
    """Heuristic elementarity test: some boundary point fixed by every
    generator (identity generators fix everything)."""
    moving = [g for g in base.images if not g.is_identity(1e-9)]
    if not moving:
        return True
    candidates = None
    for g in moving:
        fps = boundary_fixed_points(g)
        if fps:
            candidates = fps
            break
    if candidates is None:
        return False
    for b in candidates:
        if all(_circ_gap(g.boundary_map(b.theta), b.theta) < 1e-6
               for g in moving):
            return True
    return False


def _sample_axis_end(base: Representation, seed: int) -> BoundaryPoint:
    """Boundary point not fixed by any generator of base, drawn from a
    seeded stream with rejection."""
    rng = np.random.default_rng(seed)
    for _ in range(64):
        b = BoundaryPoint(float(rng.uniform(0.0, math.pi)))
        if all(_circ_gap(g.boundary_map(b.theta), b.theta) >= 1e-6
               for g in base.images if not g.is_identity(1e-9)):
            return b
    raise SamplerExhausted("no boundary point escaped the generators")


def _mp_mat(entries):
    a, b, c, d = entries
    return [[mp.mpf(a), mp.mpf(b)], [mp.mpf(c), mp.mpf(d)]]


def _mp_mul(m1, m2):
    return [[m1[0][0] * m2[0][0] + m1[0][1] * m2[1][0],
             m1[0][0] * m2[0][1] + m1[0][1] * m2[1][1]],
            [m1[1][0] * m2[0][0] + m1[1][1] * m2[1][0],
             m1[1][0] * m2[0][1] + m1[1][1] * m2[1][1]]]


def _mp_inv(m):
    det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    return [[m[1][1] / det, -m[0][1] / det],
            [-m[1][0] / det, m[0][0] / det]]


def _mp_dist(z1, z2):
    q = ((z1.real - z2.real) ** 2 + (z1.imag - z2.imag) ** 2) / (
        2 * z1.imag * z2.imag)
    return mp.acosh(1 + q)


def _degeneration_row(g: int, base: Representation, w: Word, n: int,
                      x0: Point, a0: BoundaryPoint) -> DegenerationRow:
    z_letters = sum(1 for letter in w.letters if abs(letter) == b_index(g))
    # matrix entries reach exp(n * z_letters / 2); the imaginary part of
    # the moved point survives a cancellation of the squared entry
    # scale, so the precision must cover 2 * log2(e) / 2 = 1.443 bits
    # per unit of n * z_letters
    bits = 256 + math.ceil(1.5 * n * max(1, z_letters)) + 8 * len(w.letters)
    with mp.workprec(bits):
        phi = _direction_to_boundary(x0, a0)
        frame = _mp_mat(_frame(x0.x, x0.y, phi))
        lam = mp.exp(mp.mpf(n) / 2)
        diag = [[lam, mp.mpf(0)], [mp.mpf(0), 1 / lam]]
        a_n = _mp_mul(_mp_mul(frame, diag), _mp_inv(frame))
        mats = [_mp_mat(img.entries) for img in base.images]
        mats.append(_mp_mat((1.0, 0.0, 0.0, 1.0)))
        mats.append(a_n)
        acc = [[mp.mpf(1), mp.mpf(0)], [mp.mpf(0), mp.mpf(1)]]
        for letter in w.letters:
            step = mats[letter - 1] if letter > 0 else _mp_inv(
                mats[-letter - 1])
            acc = _mp_mul(acc, step)
        z0 = mp.mpc(x0.x, x0.y)
        z1 = (acc[0][0] * z0 + acc[0][1]) / (acc[1][0] * z0 + acc[1][1])
        scaled = float(_mp_dist(z0, z1) / n)
    tree_length = bass_serre_length(g, w)
    return DegenerationRow(int(n), word_display(w), scaled,
                           tree_length, abs(scaled - tree_length))


def degeneration_table(g: int, base: Representation, words: Sequence[Word],
                       ns: Sequence[int], *, x0: Point = Point(0.0, 1.0),
                       seed: int = 0) -> list[DegenerationRow]:
    """Rescaled orbit distances of the degenerating family against
    their tree limits.

    For each n, the genus-g family fixes the base representation on the
    first g-1 handles, kills the next-to-last generator, and sends the
    last one to the hyperbolic isometry of translation length n whose
    axis passes through x0 toward a sampled boundary point.  Each row
    reports d(x0, w.x0)/n against the orbit length of w in the dual
    tree of the free-product splitting.  Matrix arithmetic runs at a
    working precision that grows with n, so distances far beyond double
    range stay exact to many digits."""
    if g < 2:
        raise ValueError("genus must be at least 2")
    if base.genus != g - 1:
        raise ValueError("base representation must have genus g - 1")
    if _shares_fixed_boundary_point(base):
        raise DegenerateConfiguration(
            "base generators share a fixed boundary point")
    a0 = _sample_axis_end(base, seed)
    rows = []
    for n in ns:
        if n < 1:
            raise ValueError("n must be at least 1")
        for w in words:
            rows.append(_degeneration_row(g, base, w, int(n), x0, a0))
    return rows
