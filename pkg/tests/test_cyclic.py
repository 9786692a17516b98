"""Finite cyclic orders, lifted bijections, and angle recovery."""

import math
from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from oracles import binary_digits_with_half_rule, circle_order
from psl2rep.cyclic import (
    DegenerateAngle,
    FiniteCyclicOrder,
    HypothesisViolation,
    InvalidOrder,
    NotOrderPreserving,
    OrderData,
    angle_probe_oracle,
    compose_lifts,
    dyadic_angle_recovery,
    euler_from_order_data,
    isometry_probe_oracle,
    lift_bijection,
    linearize,
    orbit_order_data_from_boundary,
    order_distinguishes,
    shift_power,
    transport,
    validate,
)
from psl2rep.families import free_factor_rep, fuchsian_regular, random_representation
from psl2rep.hyp2 import BoundaryPoint, Isometry
from psl2rep.lift import euler_milnor

PI = math.pi


def _circ_gap(u, v, period=2.0 * PI):
    d = (u - v) % period
    return min(d, period - d)


angle_lists = st.lists(
    st.floats(min_value=0.0, max_value=2.0 * PI, exclude_max=True),
    min_size=3,
    max_size=7,
)


@given(angle_lists)
def test_from_circle_matches_oracle_and_validates(angles):
    gaps = [
        _circ_gap(angles[i], angles[j])
        for i in range(len(angles))
        for j in range(i + 1, len(angles))
    ]
    assume(min(gaps) > 1e-6)
    o = FiniteCyclicOrder.from_circle(tuple(range(len(angles))), angles)
    assert validate(o)
    for i in range(o.n):
        for j in range(o.n):
            for k in range(o.n):
                if len({i, j, k}) < 3:
                    assert o.sign(i, j, k) == 0
                else:
                    want = circle_order(angles[i], angles[j], angles[k], 2.0 * PI)
                    assert o.sign(i, j, k) == want


def test_from_sequence_is_listing_order():
    o = FiniteCyclicOrder.from_sequence("abcde")
    for i in range(5):
        for j in range(i + 1, 5):
            for k in range(j + 1, 5):
                assert o.sign(i, j, k) == 1
    assert o.sign(2, 0, 1) == 1  # cyclic permutations keep the sign
    assert o.sign(0, 2, 1) == -1
    assert o.sign(2, 1, 0) == -1


def test_validate_rejects_corruption():
    base = FiniteCyclicOrder.from_sequence(range(5))

    flipped = FiniteCyclicOrder.from_signs(
        range(5),
        lambda i, j, k: -base.sign(i, j, k)
        if (i, j, k) == (0, 1, 2)
        else base.sign(i, j, k),
    )
    assert not validate(flipped)

    zeroed = FiniteCyclicOrder.from_signs(
        range(5),
        lambda i, j, k: 0 if (i, j, k) == (0, 1, 2) else base.sign(i, j, k),
    )
    assert not validate(zeroed)

    # fewer than three elements: nothing to check
    assert validate(FiniteCyclicOrder.from_sequence("ab"))


def test_linearize_unrolls_at_base():
    o = FiniteCyclicOrder.from_sequence("abcde")
    assert linearize(o, 2) == [3, 4, 0, 1]
    assert linearize(o, 0) == [1, 2, 3, 4]
    broken = FiniteCyclicOrder.from_signs(
        range(4),
        lambda i, j, k: 0 if (i, j, k) == (0, 1, 2) else
        FiniteCyclicOrder.from_sequence(range(4)).sign(i, j, k),
    )
    with pytest.raises(InvalidOrder):
        linearize(broken, 0)


def _rotation_map(n, k):
    return [(i + k) % n for i in range(n)]


def test_lift_bijection_full_turn_is_central_shift():
    n = 6
    o = FiniteCyclicOrder.from_sequence(range(n))
    step = lift_bijection(o, _rotation_map(n, 1), 0)
    acc = lift_bijection(o, _rotation_map(n, 0), 0)
    assert shift_power(acc) == 0
    for _ in range(n):
        acc = compose_lifts(step, acc)
    assert shift_power(acc) == 1
    # two full turns reach the second level
    for _ in range(n):
        acc = compose_lifts(step, acc)
    assert shift_power(acc) == 2


def test_lift_bijection_levels_count_wraps():
    n = 5
    o = FiniteCyclicOrder.from_sequence(range(n))
    l = lift_bijection(o, _rotation_map(n, 2), 0)
    # exactly the two preimages of {0, 1} wrap past the base point
    assert sum(l.level) == 2
    assert l.apply(0, 3) == (1, 0)
    assert l.apply(0, 0) == (0, 2)
    assert l.shifted(4).apply(0, 0) == (4, 2)


def test_lift_bijection_rejects_reflection():
    n = 5
    o = FiniteCyclicOrder.from_sequence(range(n))
    with pytest.raises(NotOrderPreserving):
        lift_bijection(o, [(n - i) % n for i in range(n)], 0)
    with pytest.raises(NotOrderPreserving):
        lift_bijection(o, [0, 0, 1, 2, 3], 0)


def test_transport_round_trip_is_central_shift():
    o = FiniteCyclicOrder.from_sequence(range(6))
    for x1 in range(1, 6):
        round_trip = compose_lifts(transport(o, 0, x1), transport(o, x1, 0))
        assert shift_power(round_trip) == 1


def test_shift_power_requires_central_lift():
    o = FiniteCyclicOrder.from_sequence(range(5))
    with pytest.raises(NotOrderPreserving):
        shift_power(lift_bijection(o, _rotation_map(5, 1), 0))


@given(st.integers(min_value=2, max_value=512), st.integers(min_value=1))
def test_dyadic_recovery_matches_binary_oracle(den, num_raw):
    num = num_raw % den
    assume(num != 0)
    assume(Fraction(num, den) != Fraction(1, 2))
    bits = 16
    digits, early = binary_digits_with_half_rule(num, den, bits)
    want = sum(d * 2.0 ** (-(i + 1)) for i, d in enumerate(digits))
    got = dyadic_angle_recovery(angle_probe_oracle(BoundaryPoint(0.7), (num / den) * PI), bits)
    assert got == pytest.approx(want, abs=1e-12)
    assert abs(got - num / den) <= 2.0 ** (-bits) + 1e-12
    if early:
        # exact dyadic rationals are recovered with no error at all
        assert got == pytest.approx(num / den, abs=1e-12)


def test_dyadic_recovery_half_angle_degenerate():
    with pytest.raises(DegenerateAngle):
        dyadic_angle_recovery(angle_probe_oracle(BoundaryPoint(0.7), PI / 2.0), 8)
    with pytest.raises(ValueError):
        dyadic_angle_recovery(lambda n: 1, 0)


def test_isometry_probe_agrees_with_chart_probe():
    a = BoundaryPoint(0.7)
    for x in (0.3, 0.292893218813, 1.0 / 3.0, 0.71234):
        step = x * PI
        chart = angle_probe_oracle(a, step)
        matrix = isometry_probe_oracle(Isometry.rotation(step), a)
        for n in range(1, 13):
            assert matrix(n) == chart(n), (x, n)


def test_recovery_from_matrix_probe():
    x = 0.32471
    probe = isometry_probe_oracle(Isometry.rotation(x * PI), BoundaryPoint(0.7))
    got = dyadic_angle_recovery(probe, 20)
    assert abs(got - x) <= 2.0 ** (-20)


def _order_data(rho, tries=12):
    for k in range(tries):
        x0 = BoundaryPoint(0.31 + 0.17 * k)
        y0 = BoundaryPoint(1.03 + 0.23 * k)
        try:
            return orbit_order_data_from_boundary(rho, x0, y0)
        except HypothesisViolation:
            continue
    raise AssertionError("no valid base points found")


def test_euler_from_order_data_matches_lift_algorithm():
    for rho in (
        fuchsian_regular(2),
        free_factor_rep(2, Isometry(math.exp(0.6), 0.0, 0.0, math.exp(-0.6)),
                        Isometry.rotation(1.1)),
        random_representation(2, 11),
        random_representation(2, 12),
        random_representation(3, 13),
    ):
        data = _order_data(rho)
        assert euler_from_order_data(rho.genus, data) == euler_milnor(rho)


def test_orbit_order_data_rejects_colliding_base_points():
    rho = fuchsian_regular(2)
    with pytest.raises(HypothesisViolation):
        orbit_order_data_from_boundary(rho, BoundaryPoint(0.7), BoundaryPoint(0.7))


def test_order_distinguishes_representations():
    fuchs = fuchsian_regular(2)
    free = free_factor_rep(
        2,
        Isometry(math.exp(0.6), 0.0, 0.0, math.exp(-0.6)),
        Isometry.rotation(1.1),
    )
    a = BoundaryPoint(0.4)
    assert not order_distinguishes(fuchs, fuchs, a, a, depth=1)
    assert order_distinguishes(fuchs, free, a, a, depth=2)
