"""Command-line driver: file formats, subcommand output, error paths."""

import math

import pytest

from psl2rep.cli import main, read_rep_file, write_rep_file
from psl2rep.families import fuchsian_regular, random_representation
from psl2rep.group import Representation
from psl2rep.hyp2 import Isometry, Point, min_displacement


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def _trivial_file(tmp_path):
    rho = Representation(2, tuple(Isometry.identity() for _ in range(4)))
    path = tmp_path / "trivial.rep"
    write_rep_file(str(path), rho)
    return str(path)


def test_rep_file_roundtrip_is_exact(tmp_path):
    rho = random_representation(2, 3)
    path = tmp_path / "r.rep"
    write_rep_file(str(path), rho)
    back = read_rep_file(str(path))
    assert back.genus == rho.genus
    for img, orig in zip(back.images, rho.images):
        assert img.entries == orig.entries


def test_rep_file_ignores_comments_and_blanks(tmp_path):
    path = _write(tmp_path / "c.rep", (
        "# header comment\n"
        "genus 2  # trailing note\n"
        "\n"
        "1 0 0 1\n1 1 0 1\n# row comment\n1 0 1 1\n2 0 0 0.5\n"))
    rho = read_rep_file(path)
    assert rho.genus == 2
    assert rho.images[3].entries == (2.0, 0.0, 0.0, 0.5)


def test_rep_file_rejects_bad_determinant(tmp_path):
    path = _write(tmp_path / "bad.rep",
                  "genus 2\n1 0 0 1\n1 0 0 1\n1 0 0 1\n2 0 0 1\n")
    with pytest.raises(ValueError, match="determinant"):
        read_rep_file(path)


def test_rep_file_rejects_bad_header(tmp_path):
    path = _write(tmp_path / "bad.rep", "genus two\n1 0 0 1\n")
    with pytest.raises(ValueError, match="genus"):
        read_rep_file(path)
    path = _write(tmp_path / "bad2.rep", "1 0 0 1\n")
    with pytest.raises(ValueError, match="genus"):
        read_rep_file(path)


def test_rep_file_rejects_wrong_row_count(tmp_path):
    path = _write(tmp_path / "short.rep", "genus 2\n1 0 0 1\n1 0 0 1\n")
    with pytest.raises(ValueError, match="rows"):
        read_rep_file(path)


def test_euler_command_trivial(tmp_path, capsys):
    assert main(["euler", "--rep", _trivial_file(tmp_path)]) == 0
    assert capsys.readouterr().out == "e = 0\n"


def test_euler_command_fuchsian(tmp_path, capsys):
    path = tmp_path / "f.rep"
    write_rep_file(str(path), fuchsian_regular(2))
    assert main(["euler", "--rep", str(path)]) == 0
    assert capsys.readouterr().out == "e = 2\n"


def test_euler_command_bad_file_exits_2(tmp_path, capsys):
    path = _write(tmp_path / "bad.rep",
                  "genus 2\n1 0 0 1\n1 0 0 1\n1 0 0 1\n2 0 0 1\n")
    assert main(["euler", "--rep", path]) == 2
    err = capsys.readouterr().err
    assert err.startswith("error:")
    assert err.count("\n") == 1


def test_euler_command_missing_file_exits_2(tmp_path, capsys):
    assert main(["euler", "--rep", str(tmp_path / "nope.rep")]) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_scan_counts_and_determinism(capsys):
    assert main(["scan", "--genus", "2", "--samples", "30",
                 "--seed", "50"]) == 0
    first = capsys.readouterr().out
    lines = first.strip().split("\n")
    assert [ln.split(":")[0] for ln in lines] == [
        f"e={v}" for v in range(-2, 3)]
    assert sum(int(ln.split(": ")[1]) for ln in lines) == 30
    # seeds 50..79 include seed 60, which lands away from zero
    counts = {ln.split(":")[0]: int(ln.split(": ")[1]) for ln in lines}
    assert counts["e=0"] < 30
    assert main(["scan", "--genus", "2", "--samples", "30",
                 "--seed", "50"]) == 0
    assert capsys.readouterr().out == first


def test_scan_rejects_nonpositive_samples(capsys):
    assert main(["scan", "--samples", "0"]) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_degenerate_csv_shape_and_determinism(capsys):
    argv = ["degenerate", "--genus", "3", "--n", "4,64", "--seed", "7"]
    assert main(argv) == 0
    first = capsys.readouterr().out
    lines = first.strip().split("\n")
    assert lines[0] == "n,word,scaled_distance,tree_length,gap"
    # two lengths, four default words
    assert len(lines) == 1 + 2 * 4
    for ln in lines[1:]:
        n, word, scaled, tree, gap = ln.split(",")
        assert int(n) in (4, 64)
        assert abs(float(gap) - abs(float(scaled) - float(tree))) < 1e-9
    assert main(argv) == 0
    assert capsys.readouterr().out == first


def test_degenerate_gap_shrinks_with_n(capsys):
    assert main(["degenerate", "--genus", "3", "--n", "4,64",
                 "--seed", "7"]) == 0
    lines = capsys.readouterr().out.strip().split("\n")[1:]
    gaps = {}
    for ln in lines:
        n, word, _, _, gap = ln.split(",")
        gaps.setdefault(word, {})[int(n)] = float(gap)
    for word, by_n in gaps.items():
        assert by_n[64] <= by_n[4] + 1e-12


def test_degenerate_words_file(tmp_path, capsys):
    words = _write(tmp_path / "w.txt", "a1\nb3^2\n")
    assert main(["degenerate", "--genus", "3", "--n", "8",
                 "--words", words, "--seed", "7"]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert len(lines) == 3
    assert lines[1].split(",")[1] == "a1"
    assert lines[2].split(",")[1] == "b3^2"
    # a generator outside the collapsing handle keeps its scaled length
    row_b3 = lines[2].split(",")
    assert abs(float(row_b3[2]) - float(row_b3[3])) < 1e-6


def test_degenerate_rejects_bad_n(capsys):
    assert main(["degenerate", "--n", "4,x"]) == 2
    assert capsys.readouterr().err.startswith("error:")
    assert main(["degenerate", "--n", ","]) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_angle_recovers_within_tolerance(capsys):
    assert main(["angle", "--theta-over-pi", "0.3", "--bits", "12"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("theta/pi = ")
    assert abs(float(out.split("=")[1]) - 0.3) <= 2.0 ** -12


def test_angle_rejects_out_of_range(capsys):
    for bad in ("0", "1", "1.5", "-0.25"):
        assert main(["angle", "--theta-over-pi", bad]) == 2
        assert capsys.readouterr().err.startswith("error:")


def _points_file(tmp_path, name, pts):
    body = "".join(f"{lab} {p.x:.17g} {p.y:.17g}\n" for lab, p in pts)
    return _write(tmp_path / name, body)


_TRIPLE = [("p", Point(0.0, 1.0)), ("q", Point(0.4, 2.0)),
           ("r", Point(-0.3, 0.7))]


def test_align_recovers_isometry(tmp_path, capsys):
    g = Isometry(2.0, 1.0, 1.0, 1.0)
    one = _points_file(tmp_path, "one.txt", _TRIPLE)
    # the second file lists the moved points in a different order
    moved = [(lab, g.apply(p)) for lab, p in reversed(_TRIPLE)]
    two = _points_file(tmp_path, "two.txt", moved)
    assert main(["align", "--config", one, "--config", two]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert float(lines[0].split("=")[1]) < 1e-6
    assert lines[1] == "reflected = no"
    entries = tuple(float(t) for t in lines[2].split("=")[1].split())
    for lab, p in _TRIPLE:
        q = Isometry(*entries).apply(p)
        want = g.apply(p)
        assert math.hypot(q.x - want.x, q.y - want.y) < 1e-6


def test_align_reflection_needs_flag(tmp_path, capsys):
    one = _points_file(tmp_path, "one.txt", _TRIPLE)
    mirrored = [(lab, Point(-p.x, p.y)) for lab, p in _TRIPLE]
    two = _points_file(tmp_path, "two.txt", mirrored)
    assert main(["align", "--config", one, "--config", two]) == 0
    res_direct = float(capsys.readouterr().out.split("\n")[0].split("=")[1])
    assert res_direct > 1e-3
    assert main(["align", "--config", one, "--config", two,
                 "--allow-reflection"]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert float(lines[0].split("=")[1]) < 1e-6
    assert lines[1] == "reflected = yes"


def test_align_label_mismatch_exits_2(tmp_path, capsys):
    one = _points_file(tmp_path, "one.txt", _TRIPLE)
    renamed = [("s", _TRIPLE[0][1])] + _TRIPLE[1:]
    two = _points_file(tmp_path, "two.txt", renamed)
    assert main(["align", "--config", one, "--config", two]) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_align_needs_two_configs(tmp_path, capsys):
    one = _points_file(tmp_path, "one.txt", _TRIPLE)
    assert main(["align", "--config", one]) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_points_file_rejects_duplicate_labels(tmp_path, capsys):
    dup = _points_file(tmp_path, "dup.txt",
                       [("p", Point(0, 1)), ("p", Point(1, 1))])
    assert main(["align", "--config", dup, "--config", dup]) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_min_disp_matches_library(tmp_path, capsys):
    rho = fuchsian_regular(2)
    path = tmp_path / "f.rep"
    write_rep_file(str(path), rho)
    assert main(["min-disp", "--rep", str(path)]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    got_d = float(lines[0].split("=")[1])
    xy = [float(t) for t in lines[1].split("=")[1].split()]
    want = min_displacement(rho)
    assert abs(got_d - want.displacement) < 1e-9
    assert math.hypot(xy[0] - want.point.x, xy[1] - want.point.y) < 1e-9


def test_unknown_subcommand_raises_system_exit():
    with pytest.raises(SystemExit):
        main(["frobnicate"])
    with pytest.raises(SystemExit):
        main([])
