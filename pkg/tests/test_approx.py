"""Configuration comparison, order checks, rescaling, degeneration table."""

import math

import pytest

from psl2rep.approx import (
    ApproxReport,
    Configuration,
    DegenerationRow,
    LabelMismatch,
    default_degeneration_words,
    degeneration_table,
    epsilon_check,
    oriented_check,
    rescale,
)
from psl2rep.families import free_factor_rep, fuchsian_regular, random_representation
from psl2rep.group import Representation, Word, word_display
from psl2rep.hyp2 import (
    DELTA_H2,
    UNSCALED,
    DegenerateConfiguration,
    Isometry,
    Point,
    ScaledPlane,
    distance,
    exp_point,
)
from psl2rep.rtree import (
    FatTree,
    MetricTree,
    TreeAction,
    TreeIsometry,
    bass_serre_length,
)

PI = math.pi


def _trivial_rep():
    return Representation(2, (Isometry.identity(),) * 4)


def _star_fat(k=6):
    tree = MetricTree(k + 1, [(0, i, 1.0) for i in range(1, k + 1)])
    return FatTree(tree, [tuple(range(k))] + [(i,) for i in range(k)])


def _identity_action(fat):
    return TreeAction(fat, [TreeIsometry.identity(fat.tree)] * 4)


def test_configuration_validation_and_delta():
    p = Point(0.0, 1.0)
    with pytest.raises(ValueError):
        Configuration(("a", "a"), (p, p), UNSCALED)
    with pytest.raises(ValueError):
        Configuration(("a", "b"), (p,), UNSCALED)
    with pytest.raises(TypeError):
        Configuration(("a",), (p,), object())
    assert Configuration(("a",), (p,), UNSCALED).delta == pytest.approx(DELTA_H2)
    assert Configuration(("a",), (p,), ScaledPlane(4.0)).delta == (
        pytest.approx(DELTA_H2 / 4.0)
    )
    fat = _star_fat()
    leaf = fat.tree.vertex_point(1)
    assert Configuration(("a",), (leaf,), fat.tree).delta == 0.0
    assert Configuration(("a",), (leaf,), fat).delta == 0.0


def _plane_config(labels, points, space=UNSCALED):
    return Configuration(tuple(labels), tuple(points), space)


def test_epsilon_check_identical_configuration():
    pts = [Point(0.0, 1.0), Point(1.0, 2.0), Point(-0.5, 0.7)]
    k = _plane_config("pqr", pts)
    report = epsilon_check(k, k, _trivial_rep(), _trivial_rep(), [], 1e-6)
    assert report.max_distortion == 0.0
    assert report.delta_gap == 0.0
    assert report.passed


def test_epsilon_check_measures_exact_distortion():
    eta = 0.125
    k1 = _plane_config("ab", [Point(0.0, 1.0), Point(0.0, math.e)])
    k2 = _plane_config("ab", [Point(0.0, 1.0), Point(0.0, math.e ** (1.0 + eta))])
    report = epsilon_check(k1, k2, _trivial_rep(), _trivial_rep(), [], 0.01)
    assert report.max_distortion == pytest.approx(eta, abs=1e-9)
    assert not report.passed
    assert epsilon_check(k1, k2, _trivial_rep(), _trivial_rep(), [], 0.2).passed


def test_epsilon_check_sees_action_difference():
    pts = [Point(0.0, 1.0), Point(1.0, 1.5)]
    k = _plane_config("ab", pts)
    rho2 = free_factor_rep(2, Isometry.rotation(0.4), Isometry.identity())
    # a single word sees only isometric images; the identity must stay
    # in the word list for cross-word comparisons to reveal the action
    lone = epsilon_check(k, k, _trivial_rep(), rho2, [Word((1,))], 1e-6)
    assert lone.max_distortion < 1e-9
    report = epsilon_check(k, k, _trivial_rep(), rho2, [Word(()), Word((1,))], 1e-6)
    assert report.max_distortion > 0.1
    base = epsilon_check(k, k, _trivial_rep(), rho2, [], 1e-6)
    assert base.max_distortion == 0.0


def test_epsilon_check_label_handling():
    pts = [Point(0.0, 1.0), Point(1.0, 1.5)]
    k1 = _plane_config("ab", pts)
    with pytest.raises(LabelMismatch):
        epsilon_check(k1, _plane_config("ac", pts), _trivial_rep(),
                      _trivial_rep(), [], 0.1)
    # pairing is by label, not by storage position
    k2 = _plane_config("ba", list(reversed(pts)))
    report = epsilon_check(k1, k2, _trivial_rep(), _trivial_rep(), [], 1e-9)
    assert report.max_distortion == 0.0


def test_epsilon_check_plane_against_tree():
    fat = _star_fat()
    tree = fat.tree
    leaves = [tree.vertex_point(v) for v in (1, 3, 5)]
    k2 = Configuration("pqr", tuple(leaves), tree)
    c = Point(0.0, 1.0)
    plane_pts = [exp_point(c, 1.0, 0.3 + k * 2.0 * PI / 3.0) for k in range(3)]
    k1 = _plane_config("pqr", plane_pts)
    side = distance(plane_pts[0], plane_pts[1])
    report = epsilon_check(k1, k2, _trivial_rep(), _identity_action(fat), [], 0.05)
    # tree leaves sit at pairwise distance 2, the plane triple at `side`
    assert report.max_distortion == pytest.approx(abs(side - 2.0), abs=1e-9)
    assert report.delta_gap == pytest.approx(DELTA_H2)


def _fat_plane_triple(radius=4.0, phase=0.3):
    c = Point(0.0, 1.0)
    return [exp_point(c, radius, phase + k * 2.0 * PI / 3.0) for k in range(3)]


def test_oriented_check_flags_reflection():
    pts = _fat_plane_triple()
    k1 = _plane_config("pqr", pts)
    reflected = _plane_config("pqr", [Point(-p.x, p.y) for p in pts])
    report = oriented_check(k1, reflected, _trivial_rep(), _trivial_rep(), [], 0.01)
    assert report.max_distortion < 1e-9  # a reflection is an isometry
    assert not report.order_agreement
    assert report.witnesses == (("p", "q", "r"),)
    assert not report.passed


def test_oriented_check_passes_isometric_image():
    pts = _fat_plane_triple()
    g = Isometry(1.3, 0.4, 0.1, 1.0)
    k1 = _plane_config("pqr", pts)
    k2 = _plane_config("pqr", [g.apply(p) for p in pts])
    report = oriented_check(k1, k2, _trivial_rep(), _trivial_rep(), [], 0.01)
    assert report.order_agreement and report.witnesses == ()
    assert report.passed


def test_oriented_check_thin_triples_are_vacuous():
    pts = _fat_plane_triple(radius=0.2)
    k1 = _plane_config("pqr", pts)
    reflected = _plane_config("pqr", [Point(-p.x, p.y) for p in pts])
    report = oriented_check(k1, reflected, _trivial_rep(), _trivial_rep(), [], 0.01)
    # nothing is fat at the required level, so no triple is compared
    assert report.order_agreement and report.witnesses == ()


def test_oriented_check_plane_against_fat_tree():
    fat = _star_fat()
    mirrored = FatTree(
        fat.tree, [tuple(reversed(fat.rotations[0]))] + list(fat.rotations[1:])
    )
    leaves = tuple(fat.tree.vertex_point(v) for v in (1, 3, 5))
    k1 = _plane_config("pqr", _fat_plane_triple())
    straight = oriented_check(
        k1, Configuration("pqr", leaves, fat),
        _trivial_rep(), _identity_action(fat), [], 0.01,
    )
    flipped = oriented_check(
        k1, Configuration("pqr", leaves, mirrored),
        _trivial_rep(), _identity_action(mirrored), [], 0.01,
    )
    # the two planar structures order the same leaves oppositely, so
    # exactly one of them matches the plane triple
    assert straight.order_agreement != flipped.order_agreement
    bad = straight if not straight.order_agreement else flipped
    assert bad.witnesses == (("p", "q", "r"),)


def test_report_passed_requires_all_three():
    assert ApproxReport(0.0, 0.0, True, (), 1e-3).passed
    assert not ApproxReport(0.1, 0.0, True, (), 1e-3).passed
    assert not ApproxReport(0.0, 0.1, True, (), 1e-3).passed
    assert not ApproxReport(0.0, 0.0, False, (("p", "q", "r"),), 1e-3).passed
    with pytest.raises(ValueError):
        ApproxReport(-1.0, 0.0, True, (), 1e-3)


def test_rescale_by_joint_displacement():
    plane, d = rescale(fuchsian_regular(2))
    assert d > 2.0
    assert plane.scale == pytest.approx(d)
    # elliptic generators about one point displace arbitrarily little
    rot = free_factor_rep(2, Isometry.rotation(0.8), Isometry.rotation(1.9))
    plane2, d2 = rescale(rot)
    assert d2 == pytest.approx(0.0, abs=1e-6)
    assert plane2.scale == 1.0


def test_rescale_conjugation_invariance():
    rho = fuchsian_regular(2)
    h = Isometry(1.2, 0.3, -0.1, 1.0)
    moved = Representation(2, tuple(h @ m @ h.inverse() for m in rho.images))
    _, d1 = rescale(rho)
    _, d2 = rescale(moved)
    assert d1 == pytest.approx(d2, abs=1e-6)


def test_default_degeneration_words_profiles():
    words = default_degeneration_words(3)
    sums = [bass_serre_length(3, w) for w in words]
    assert sums == [0.0, 1.0, 2.0, 5.0]
    with pytest.raises(ValueError):
        default_degeneration_words(2)


def test_degeneration_table_rows():
    base = random_representation(2, 7)
    words = default_degeneration_words(3)
    rows = degeneration_table(3, base, words, (16, 64))
    assert len(rows) == 8
    assert [r.n for r in rows] == [16] * 4 + [64] * 4
    assert [r.word for r in rows[:4]] == [word_display(w) for w in words]
    for row in rows:
        assert isinstance(row, DegenerationRow)
        assert row.gap == pytest.approx(
            abs(row.scaled_distance - row.tree_length), abs=1e-15
        )
    by_word = {}
    for row in rows:
        by_word.setdefault(row.word, []).append(row)
    for word, seq in by_word.items():
        # the scaled orbit distance approaches the dual-tree distance
        assert seq[1].gap <= seq[0].gap + 1e-12, word
    # the pure stable-letter word achieves its tree length exactly
    z_rows = [r for r in rows if r.word == "b3"]
    for r in z_rows:
        assert r.scaled_distance == pytest.approx(1.0, abs=1e-9)
        assert r.tree_length == 1.0


def test_degeneration_table_validation():
    base = random_representation(2, 7)
    words = default_degeneration_words(3)
    with pytest.raises(ValueError):
        degeneration_table(3, fuchsian_regular(3), words, (4,))
    with pytest.raises(ValueError):
        degeneration_table(3, base, words, (0,))
    diag = Isometry(2.0, 0.0, 0.0, 0.5)
    elementary = Representation(
        2, (diag, diag @ diag, Isometry.identity(), Isometry.identity())
    )
    with pytest.raises(DegenerateConfiguration):
        degeneration_table(3, elementary, words, (4,))
