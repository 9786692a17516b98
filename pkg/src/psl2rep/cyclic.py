"""Finite cyclic orders, lifts of order bijections to the line of
levels, Euler class from finite orbit order data, dyadic angle
recovery, and order-based comparison of representations.

A cyclic order on n labeled elements is a sign table on ordered
triples: +1 for anticlockwise, -1 for clockwise, 0 when arguments
repeat. Lifts replace the circle by level copies: the set Z x X ordered
lexicographically with the base point x0 first inside each level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cmp_to_key
from typing import Callable, Mapping, Sequence

from psl2rep._core import kernel
from psl2rep.group import (Presentation, Representation, Word, ball,
                           evaluate, pref_set)
from psl2rep.hyp2 import BoundaryPoint, _circ_gap, _order_theta

PI = math.pi


class InvalidOrder(Exception):
    """The sign table violates the cyclic-order axioms."""


class NotOrderPreserving(Exception):
    """The bijection does not preserve the cyclic order."""


class HypothesisViolation(Exception):
    """The finite orbit data does not satisfy the hypotheses under
    which the order determines the Euler class."""


class DegenerateAngle(Exception):
    """The rotation angle is an exact half-period; the dyadic probe
    cannot see it (the order data does not distinguish rotation by
    half the circle from the identity)."""


@dataclass(frozen=True)
class FiniteCyclicOrder:
    """Sign table over ordered triples of n indexed elements."""

    labels: tuple
    table: Mapping[tuple[int, int, int], int]

    @property
    def n(self) -> int:
        return len(self.labels)

    def sign(self, i: int, j: int, k: int) -> int:
        if i == j or j == k or i == k:
            return 0
        return self.table[(i, j, k)]

    @staticmethod
    def from_positions(labels: Sequence, ranks: Sequence[int]
                       ) -> "FiniteCyclicOrder":
        """Order of elements placed anticlockwise at distinct circular
        ranks."""
        n = len(labels)
        table = {}
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if i == j or j == k or i == k:
                        continue
                    u = (ranks[j] - ranks[i]) % n
                    v = (ranks[k] - ranks[i]) % n
                    table[(i, j, k)] = 1 if u < v else -1
        return FiniteCyclicOrder(tuple(labels), table)

    @staticmethod
    def from_sequence(labels: Sequence) -> "FiniteCyclicOrder":
        """Order in which the labels are listed anticlockwise."""
        return FiniteCyclicOrder.from_positions(labels, range(len(labels)))

    @staticmethod
    def from_circle(labels: Sequence, angles: Sequence[float],
                    period: float = 2.0 * PI,
                    tol: float = 1e-12) -> "FiniteCyclicOrder":
        """Order of points at the given circular angles. Coincident
        angles (within tol, circularly) get zero signs with every
        third element."""
        n = len(labels)
        table = {}
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if i == j or j == k or i == k:
                        continue
                    a, b, c = angles[i], angles[j], angles[k]
                    ga = min((a - b) % period, (b - a) % period)
                    gb = min((b - c) % period, (c - b) % period)
                    gc = min((a - c) % period, (c - a) % period)
                    if ga <= tol or gb <= tol or gc <= tol:
                        table[(i, j, k)] = 0
                        continue
                    u = (b - a) % period
                    v = (c - a) % period
                    table[(i, j, k)] = 1 if u < v else -1
        return FiniteCyclicOrder(tuple(labels), table)

    @staticmethod
    def from_signs(labels: Sequence,
                   fn: Callable[[int, int, int], int]) -> "FiniteCyclicOrder":
        n = len(labels)
        table = {}
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if i == j or j == k or i == k:
                        continue
                    table[(i, j, k)] = int(fn(i, j, k))
        return FiniteCyclicOrder(tuple(labels), table)


def validate(o: FiniteCyclicOrder) -> bool:
    """True iff the table is a total cyclic order: nonzero on distinct
    triples, invariant under cyclic permutation, antisymmetric under
    transposition, and transitive (equivalently, induced by a circular
    arrangement)."""
    n = o.n
    if n < 3:
        return True
    trips = [(i, j, k) for i in range(n) for j in range(n) for k in range(n)
             if i != j and j != k and i != k]
    for i, j, k in trips:
        s = o.sign(i, j, k)
        if s not in (-1, 1):
            return False
        if o.sign(j, k, i) != s or o.sign(i, k, j) != -s:
            return False
    try:
        seq = [0] + linearize(o, 0)
    except InvalidOrder:
        return False
    pos = {e: r for r, e in enumerate(seq)}
    for i, j, k in trips:
        u = (pos[j] - pos[i]) % n
        v = (pos[k] - pos[i]) % n
        if o.sign(i, j, k) != (1 if u < v else -1):
            return False
    return True


def linearize(o: FiniteCyclicOrder, x0: int) -> list[int]:
    """Total order on the other indices: y before z iff o(x0,y,z)=+1.
    Raises InvalidOrder when the comparisons are not consistent."""
    rest = [i for i in range(o.n) if i != x0]
    for y in rest:
        for z in rest:
            if y == z:
                continue
            if o.sign(x0, y, z) != -o.sign(x0, z, y) or \
                    o.sign(x0, y, z) not in (-1, 1):
                raise InvalidOrder("base comparisons are not a tournament")
    srt = sorted(rest, key=cmp_to_key(lambda y, z: -o.sign(x0, y, z)))
    for a in range(len(srt)):
        for b in range(a + 1, len(srt)):
            if o.sign(x0, srt[a], srt[b]) != 1:
                raise InvalidOrder("comparisons are not transitive")
    return srt


@dataclass(frozen=True)
class LiftedOrderBijection:
    """An order-preserving bijection f together with the level jumps
    of one of its lifts to Z x X with the order based at x0.

    The lift sends (k, x) to (k + level[x], f[x]).
    """

    order: FiniteCyclicOrder
    x0: int
    f: tuple[int, ...]
    level: tuple[int, ...]

    def apply(self, k: int, x: int) -> tuple[int, int]:
        return (k + self.level[x], self.f[x])

    def shifted(self, n: int) -> "LiftedOrderBijection":
        """The same bijection lifted n central shifts higher."""
        return LiftedOrderBijection(
            self.order, self.x0, self.f,
            tuple(v + n for v in self.level))


def _linear_rank(o: FiniteCyclicOrder, x0: int) -> dict[int, int]:
    ranks = {x0: 0}
    for r, e in enumerate(linearize(o, x0), start=1):
        ranks[e] = r
    return ranks


def _check_preserving(o: FiniteCyclicOrder, f: Sequence[int]):
    n = o.n
    if sorted(f) != list(range(n)):
        raise NotOrderPreserving("map is not a bijection of the indices")
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if i == j or j == k or i == k:
                    continue
                if o.sign(i, j, k) != o.sign(f[i], f[j], f[k]):
                    raise NotOrderPreserving(
                        f"sign of ({i},{j},{k}) not preserved")


def lift_bijection(o: FiniteCyclicOrder, f: Sequence[int],
                   x0: int) -> LiftedOrderBijection:
    """Canonical lift of an order-preserving bijection: the image of
    (0, y) wraps past the base exactly when f(y) comes strictly before
    f(x0) in the order based at x0."""
    _check_preserving(o, f)
    fx0 = f[x0]
    level = []
    for y in range(o.n):
        if y == x0:
            level.append(0)
        elif f[y] == x0 and fx0 != x0:
            level.append(1)
        else:
            level.append(max(0, -o.sign(x0, fx0, f[y])))
    return LiftedOrderBijection(o, x0, tuple(f), tuple(level))


def compose_lifts(l1: LiftedOrderBijection,
                  l2: LiftedOrderBijection) -> LiftedOrderBijection:
    """Composition as maps of Z x X (l1 applied after l2)."""
    f = tuple(l1.f[l2.f[x]] for x in range(l2.order.n))
    level = tuple(l2.level[x] + l1.level[l2.f[x]]
                  for x in range(l2.order.n))
    return LiftedOrderBijection(l1.order, l1.x0, f, level)


def shift_power(l: LiftedOrderBijection) -> int:
    """The n with l = central shift h^n. Raises NotOrderPreserving
    when l does not project to the identity or has uneven levels."""
    n = l.order.n
    if l.f != tuple(range(n)) or len(set(l.level)) != 1:
        raise NotOrderPreserving("lift is not a power of the shift")
    return l.level[0]


def transport(o: FiniteCyclicOrder, x0: int, x1: int) -> LiftedOrderBijection:
    """Base-change transport on Z x X: identity downstairs, raising by
    one level exactly the elements strictly between x0 and x1. The
    composition transport(x0, x1) o transport(x1, x0) is the central
    shift h."""
    rank0 = _linear_rank(o, x0)
    level = tuple(1 if rank0[y] < rank0[x1] else 0 for y in range(o.n))
    return LiftedOrderBijection(o, x0, tuple(range(o.n)), level)


# -------------------------------------------------- Euler from order data

@dataclass(frozen=True)
class OrderData:
    """Finite orbit order data sufficient for the Euler-class scan.

    order is a total cyclic order on deduplicated orbit points.
    x_label maps () and single signed letters (l,) to the label index
    of the corresponding translate of the base point x0; y_label maps
    each reference word (reduced letter tuple) to the label index of
    its translate of y0.
    """

    order: FiniteCyclicOrder
    x_label: Mapping[tuple[int, ...], int]
    y_label: Mapping[tuple[int, ...], int]


def _inverse_prefix(rel: tuple[int, ...], j: int) -> tuple[int, ...]:
    """Reduced letters of the inverse of the length-j relator prefix."""
    return tuple(-rel[i] for i in range(j - 1, -1, -1))


def euler_from_order_data(g: int, data: OrderData) -> int:
    """Euler class read off finite orbit order data alone.

    Walks the relator right to left along the inverse-prefix orbit of
    y0 (an exact free-group recursion: applying the j-th letter to the
    translate by the inverse of the length-(j+1) prefix gives the
    translate by the inverse of the length-j prefix), accumulating the
    level jump of the canonical lift of each letter at the current
    point. Letters fixing the base point x0 contribute through the
    sandwich normalization, whose hypotheses are checked on the
    extremal orbit points. The result equals Milnor's algorithm on any
    representation inducing the same order data.
    """
    o = data.order
    x0 = data.x_label[()]
    y_points = sorted(set(data.y_label.values()))
    if x0 in y_points:
        raise HypothesisViolation("base point lies on the reference orbit")
    rank = _linear_rank(o, x0)
    x1 = min(y_points, key=lambda p: rank[p])
    x2 = max(y_points, key=lambda p: rank[p])

    rel = Presentation(g).relator.letters
    level = 0
    for j in range(len(rel) - 1, -1, -1):
        letter = rel[j]
        q_old = data.y_label[_inverse_prefix(rel, j + 1)]
        q_new = data.y_label[_inverse_prefix(rel, j)]
        gen = letter if letter > 0 else -letter
        gx = data.x_label[(gen,)]
        if gx == x0:
            # sandwich lift: zero contribution, hypotheses checked
            if o.sign(x1, x2, q_old) > 0 or o.sign(x1, x2, q_new) > 0:
                raise HypothesisViolation(
                    "orbit point escapes the extremal sandwich")
            continue
        if letter > 0:
            level += max(0, -o.sign(x0, gx, q_new))
        else:
            level -= max(0, -o.sign(x0, gx, q_old))
    return level


def orbit_order_data_from_boundary(rho: Representation,
                                   x0: BoundaryPoint, y0: BoundaryPoint,
                                   tol: float = 1e-9,
                                   min_gap: float = 1e-7) -> OrderData:
    """Order data sampled from the boundary orbit of a representation:
    translates of y0 by the reference words and of x0 by the single
    letters, deduplicated within tol and cyclically ordered.

    Raises HypothesisViolation when x0's family touches the y0 orbit
    or when distinct orbit points are closer than min_gap (callers
    resample the base points)."""
    g = rho.genus
    keys_x = [()] + [(s * i,) for i in range(1, 2 * g + 1)
                     for s in (1, -1)]
    keys_y = [w.letters for w in pref_set(g)]

    thetas: list[float] = []
    owners: list[tuple[str, tuple[int, ...]]] = []
    for key in keys_x:
        m = evaluate(rho, Word(key))
        thetas.append(m.boundary_map(x0.theta))
        owners.append(("x", key))
    for key in keys_y:
        m = evaluate(rho, Word(key))
        thetas.append(m.boundary_map(y0.theta))
        owners.append(("y", key))

    reps: list[float] = []
    assign: list[int] = []
    for t in thetas:
        hit = -1
        for idx, r in enumerate(reps):
            if _circ_gap(t, r) <= tol:
                hit = idx
                break
        if hit < 0:
            reps.append(t)
            hit = len(reps) - 1
        assign.append(hit)

    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            if _circ_gap(reps[i], reps[j]) < min_gap:
                raise HypothesisViolation(
                    "orbit points too close to order reliably")

    order = FiniteCyclicOrder.from_circle(
        tuple(range(len(reps))), reps, period=PI, tol=tol)
    x_label = {}
    y_label = {}
    for (kind, key), lab in zip(owners, assign):
        if kind == "x":
            x_label[key] = lab
        else:
            y_label[key] = lab
    if x_label[()] in set(y_label.values()):
        raise HypothesisViolation(
            "x0 collides with the reference orbit of y0")
    return OrderData(order, x_label, y_label)


# ------------------------------------------------------- angle recovery

def dyadic_angle_recovery(oracle: Callable[[int], int], bits: int) -> float:
    """Binary digits of theta/pi for an elliptic rotation, read from
    triple-order probes of doubled powers: probe(n) is the order sign
    of (a, A^(2^(n-1)) a, A^(2^n) a).

    Sign +1 contributes digit 1, -1 contributes digit 0. A zero sign
    means the residual angle hit an exact half-period: as the final
    digit 1 when some digits were already read, as DegenerateAngle on
    the very first probe (theta = pi/2 is invisible to the data).
    Error is at most 2^-bits.
    """
    if bits < 1:
        raise ValueError("bits must be at least 1")
    value = 0.0
    for n in range(1, bits + 1):
        s = oracle(n)
        if s == 0:
            if n == 1:
                raise DegenerateAngle(
                    "first probe is degenerate: angle is half the period")
            return value + 2.0 ** (-n)
        if s > 0:
            value += 2.0 ** (-n)
    return value


def angle_probe_oracle(a: BoundaryPoint, step: float,
                       tol: float = 1e-9) -> Callable[[int], int]:
    """Probe for a rotation translating the boundary chart by step:
    returns the sign convention consumed by dyadic_angle_recovery
    (positive exactly when the doubling sequence wraps clockwise)."""

    def probe(n: int) -> int:
        t0 = a.theta % PI
        t1 = (a.theta + (2 ** (n - 1)) * step) % PI
        t2 = (a.theta + (2 ** n) * step) % PI
        return -_order_theta(t0, t1, t2, tol)

    return probe


def isometry_probe_oracle(g, a: BoundaryPoint,
                          tol: float = 1e-9) -> Callable[[int], int]:
    """Probe built from an actual isometry by repeated squaring of its
    boundary action applied to the base point a."""
    entries = g.entries

    def probe(n: int) -> int:
        m = entries
        for _ in range(n - 1):
            m = kernel.norm1(*kernel.mul(*m, *m))
        t0 = a.theta
        t1 = kernel.bact(*m, t0)
        m2 = kernel.norm1(*kernel.mul(*m, *m))
        t2 = kernel.bact(*m2, t0)
        return -_order_theta(t0, t1, t2, tol)

    return probe


# ----------------------------------------------------- order comparison

def order_distinguishes(rho1: Representation, rho2: Representation,
                        a1: BoundaryPoint, a2: BoundaryPoint,
                        depth: int, tol: float = 1e-9) -> bool:
    """True when some triple of ball-of-radius-depth translates of the
    base points is ordered differently under the two representations.
    Zero signs (coincidences within tol) are never witnesses. Note the
    blind spot: composing one action with rotation by half the circle
    produces identical order data."""
    words = ball(rho1.genus, depth)
    t1 = [evaluate(rho1, w).boundary_map(a1.theta) for w in words]
    t2 = [evaluate(rho2, w).boundary_map(a2.theta) for w in words]
    m = len(words)
    for i in range(m):
        for j in range(i + 1, m):
            for k in range(j + 1, m):
                s1 = _order_theta(t1[i], t1[j], t1[k], tol)
                s2 = _order_theta(t2[i], t2[j], t2[k], tol)
                if s1 != 0 and s2 != 0 and s1 != s2:
                    return True
    return False
