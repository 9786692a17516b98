"""Lifts of boundary actions to the real line, the central shift, and
Milnor's algorithm for the Euler class.

The boundary circle is the angle chart [0, pi); lifts live on the real
line and commute with translation by pi. The central shift z is the
lift of the identity translating by +pi. The canonical lift of an
isometry is the branch whose value at 0 lies in [0, pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from psl2rep._core import kernel
from psl2rep.group import Representation, relator_residual
from psl2rep.hyp2 import Isometry

PI = math.pi

MU_GUARD = 1e-6


class NotCentral(Exception):
    """The lift does not project to the identity."""


class InvalidRepresentation(Exception):
    """The relator residual is too large for Euler-class evaluation."""


class BranchAmbiguity(Exception):
    """A branch integer could not be read off unambiguously."""


@dataclass(frozen=True)
class LiftedIsometry:
    """A lift F = F0 + branch*pi of the boundary action of base,
    where F0 is the canonical lift with F0(0) in [0, pi)."""

    base: Isometry
    branch: int = 0

    def value(self, t: float) -> float:
        return kernel.lift0(*self.base.entries, t) + self.branch * PI


def canonical_lift(a: Isometry) -> LiftedIsometry:
    return LiftedIsometry(a, 0)


def z_shift(n: int) -> LiftedIsometry:
    """n-th power of the central element: translation by n*pi."""
    return LiftedIsometry(Isometry.identity(), n)


def mu(a1: Isometry, a2: Isometry) -> int:
    """Comparison cocycle: the integer with F0_{a1} o F0_{a2} =
    F0_{a1 a2} + mu*pi. Always 0 or 1."""
    m = kernel.mu_float(*a1.entries, *a2.entries)
    r = round(m)
    if abs(m - r) > MU_GUARD or r not in (0, 1):
        raise BranchAmbiguity(f"cocycle value {m!r} is not a clean 0 or 1")
    return r


def compose(l1: LiftedIsometry, l2: LiftedIsometry) -> LiftedIsometry:
    return LiftedIsometry(l1.base @ l2.base,
                          l1.branch + l2.branch + mu(l1.base, l2.base))


def inverse(l: LiftedIsometry) -> LiftedIsometry:
    inv_base = l.base.inverse()
    # mu(base, inv_base) via the generic cocycle reads the canonical
    # branch of the float product base @ inv_base, which sits within
    # rounding noise of the branch cut at the identity and can come
    # back wrapped by pi.  The true product is exactly the identity,
    # whose canonical lift vanishes at 0, so the composed chain value
    # is an exact multiple of pi and can be rounded directly.
    v = kernel.lift0(*l.base.entries,
                     kernel.lift0(*inv_base.entries, 0.0))
    m = v / PI
    r = round(m)
    if abs(m - r) > MU_GUARD or r not in (0, 1):
        raise BranchAmbiguity(
            f"inverse cocycle value {m!r} is not a clean 0 or 1")
    return LiftedIsometry(inv_base, -l.branch - r)


def power_of_z(l: LiftedIsometry, tol: float = 1e-9) -> int:
    """The integer n with F = translation by n*pi, for lifts of the
    identity. Raises NotCentral when the base is not +-identity."""
    if not l.base.is_identity(tol):
        raise NotCentral("base is not the identity in PSL(2, R)")
    v = l.value(0.0) / PI
    return round(v)


def rotation_number(l: LiftedIsometry, iterations: int) -> float:
    """Orbit-average translation number (F^n(0))/(n*pi)."""
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    t = 0.0
    for _ in range(iterations):
        t = l.value(t)
    return t / (iterations * PI)


def euler_milnor(rho: Representation, tol: float = 1e-6,
                 branches: Sequence[int] | None = None) -> int:
    """Euler class by Milnor's algorithm: the power of the central
    shift reached by the lifted commutator product
    [L(a1), L(b1)] ... [L(ag), L(bg)].

    branches optionally re-branches each generator lift; the result is
    independent of that choice because every lift appears once with
    each sign in the product.
    """
    if relator_residual(rho) >= tol:
        raise InvalidRepresentation(
            f"relator residual {relator_residual(rho):.3g} >= {tol:.3g}")
    if branches is None:
        branches = [0] * (2 * rho.genus)
    if len(branches) != 2 * rho.genus:
        raise ValueError("need one branch per generator")
    lifts = [LiftedIsometry(g, int(k))
             for g, k in zip(rho.images, branches)]
    total = z_shift(0)
    for i in range(rho.genus):
        la, lb = lifts[2 * i], lifts[2 * i + 1]
        comm = compose(compose(compose(la, lb), inverse(la)), inverse(lb))
        total = compose(total, comm)
    try:
        return power_of_z(total, tol=tol)
    except NotCentral as exc:
        raise BranchAmbiguity(
            "lifted relator does not project to the identity") from exc
