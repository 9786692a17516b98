"""Command-line surface: representation file I/O, experiment drivers,
CSV emission."""

from __future__ import annotations

import argparse
import math
import sys
from collections import Counter

from psl2rep.approx import (DegenerationRow, LabelMismatch,
                            default_degeneration_words, degeneration_table)
from psl2rep.cyclic import (DegenerateAngle, HypothesisViolation,
                            InvalidOrder, NotOrderPreserving,
                            dyadic_angle_recovery, isometry_probe_oracle)
from psl2rep.families import (FixedBoundaryPoint, RewritingFailure,
                              SamplerExhausted, random_representation)
from psl2rep.group import Representation, Word, parse_word
from psl2rep.hyp2 import (BoundaryPoint, DegenerateConfiguration, Isometry,
                          NonConvergence, NotBig, NotInU, Point, Unbounded,
                          align_configurations, min_displacement)
from psl2rep.lift import BranchAmbiguity, InvalidRepresentation, euler_milnor
from psl2rep.rtree import IncoherentStructure, NotIsometry

_DOMAIN_ERRORS = (ValueError, OSError, LabelMismatch, DegenerateAngle,
                  HypothesisViolation, InvalidOrder, NotOrderPreserving,
                  FixedBoundaryPoint, RewritingFailure, SamplerExhausted,
                  DegenerateConfiguration, NonConvergence, NotBig, NotInU,
                  Unbounded, BranchAmbiguity, InvalidRepresentation,
                  IncoherentStructure, NotIsometry)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


# ----------------------------------------------------------- file I/O

def _data_lines(path: str):
    with open(path, encoding="utf-8") as handle:
        for raw in handle:
            line = raw.split("#", 1)[0].strip()
            if line:
                yield line


def read_rep_file(path: str) -> Representation:
    """Parse 'genus <g>' followed by 2g rows of matrix entries."""
    lines = list(_data_lines(path))
    if not lines:
        raise ValueError(f"{path}: empty representation file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "genus":
        raise ValueError(f"{path}: first line must be 'genus <g>'")
    try:
        g = int(head[1])
    except ValueError as err:
        raise ValueError(f"{path}: bad genus {head[1]!r}") from err
    if len(lines) != 1 + 2 * g:
        raise ValueError(
            f"{path}: expected {2 * g} matrix rows, found {len(lines) - 1}")
    images = []
    for k, line in enumerate(lines[1:], start=1):
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"{path}: row {k} must hold 4 numbers")
        try:
            a, b, c, d = (float(p) for p in parts)
        except ValueError as err:
            raise ValueError(f"{path}: row {k} has a bad number") from err
        if abs(a * d - b * c - 1.0) >= 1e-6:
            raise ValueError(f"{path}: row {k} determinant is not 1")
        images.append(Isometry(a, b, c, d))
    return Representation(g, tuple(images))


def write_rep_file(path: str, rho: Representation) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(f"genus {rho.genus}\n")
        for img in rho.images:
            handle.write(" ".join(f"{e:.17g}" for e in img.entries) + "\n")


def read_points_file(path: str) -> tuple[list[str], list[Point]]:
    """Parse 'label x y' rows."""
    labels: list[str] = []
    points: list[Point] = []
    for k, line in enumerate(_data_lines(path), start=1):
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"{path}: row {k} must be 'label x y'")
        try:
            x, y = float(parts[1]), float(parts[2])
        except ValueError as err:
            raise ValueError(f"{path}: row {k} has a bad number") from err
        labels.append(parts[0])
        points.append(Point(x, y))
    if len(set(labels)) != len(labels):
        raise ValueError(f"{path}: labels must be unique")
    return labels, points


def _read_words_file(path: str) -> list[Word]:
    words = [parse_word(line) for line in _data_lines(path)]
    if not words:
        raise ValueError(f"{path}: no words found")
    return words


# --------------------------------------------------------- subcommands

def _cmd_euler(args) -> int:
    rho = read_rep_file(args.rep)
    print(f"e = {euler_milnor(rho)}")
    return 0


def _cmd_scan(args) -> int:
    if args.samples < 1:
        raise ValueError("--samples must be positive")
    counts: Counter[int] = Counter()
    for k in range(args.samples):
        rho = random_representation(args.genus, args.seed + k)
        counts[euler_milnor(rho)] += 1
    bound = 2 * args.genus - 2
    for value in range(-bound, bound + 1):
        print(f"e={value}: {counts.get(value, 0)}")
    stray = {v: c for v, c in counts.items() if abs(v) > bound}
    for value in sorted(stray):
        print(f"e={value}: {stray[value]} (outside the expected range)")
    return 0


def _cmd_degenerate(args) -> int:
    try:
        ns = [int(tok) for tok in args.n.split(",") if tok.strip()]
    except ValueError as err:
        raise ValueError(f"bad --n list {args.n!r}") from err
    if not ns:
        raise ValueError("--n must list at least one value")
    if args.words == "default":
        words = list(default_degeneration_words(args.genus))
    else:
        words = _read_words_file(args.words)
    base = None
    for bump in range(16):
        candidate = random_representation(args.genus - 1, args.seed + bump)
        try:
            rows = degeneration_table(args.genus, candidate, words, ns,
                                      seed=args.seed)
        except DegenerateConfiguration:
            continue
        base = candidate
        break
    if base is None:
        raise SamplerExhausted(
            "no sampled base representation passed the degeneracy check")
    print("n,word,scaled_distance,tree_length,gap")
    for row in rows:
        print(f"{row.n},{row.word},{_fmt(row.scaled_distance)},"
              f"{_fmt(row.tree_length)},{_fmt(row.gap)}")
    return 0


def _cmd_angle(args) -> int:
    x = args.theta_over_pi
    if not (0.0 < x < 1.0):
        raise ValueError("--theta-over-pi must lie strictly between 0 and 1")
    if args.bits < 1:
        raise ValueError("--bits must be positive")
    rot = Isometry.rotation(x * math.pi)
    oracle = isometry_probe_oracle(rot, BoundaryPoint(0.7))
    recovered = dyadic_angle_recovery(oracle, args.bits)
    print(f"theta/pi = {_fmt(recovered)}")
    return 0


def _cmd_align(args) -> int:
    if len(args.config) != 2:
        raise ValueError("exactly two --config files are required")
    labels1, points1 = read_points_file(args.config[0])
    labels2, points2 = read_points_file(args.config[1])
    if set(labels1) != set(labels2):
        raise LabelMismatch("the two configurations label different points")
    by_label = dict(zip(labels2, points2))
    matched = [by_label[lab] for lab in labels1]
    result = align_configurations(points1, matched,
                                  allow_reflection=args.allow_reflection)
    print(f"residual = {_fmt(result.residual)}")
    print(f"reflected = {'yes' if result.reflected else 'no'}")
    print("matrix = " + " ".join(_fmt(e) for e in result.isometry.entries))
    return 0


def _cmd_min_disp(args) -> int:
    rho = read_rep_file(args.rep)
    result = min_displacement(rho)
    print(f"d = {_fmt(result.displacement)}")
    print(f"point = {_fmt(result.point.x)} {_fmt(result.point.y)}")
    return 0


# -------------------------------------------------------------- parser

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="psl2rep",
        description="Euler classes, displacement functionals and "
                    "tree degenerations of surface-group representations")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("euler", help="Euler class of a representation file")
    p.add_argument("--rep", required=True)
    p.set_defaults(func=_cmd_euler)

    p = sub.add_parser("scan", help="Euler-class histogram of random "
                                    "representations")
    p.add_argument("--genus", type=int, default=2)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("degenerate", help="rescaled orbit distances "
                                          "against tree lengths, as CSV")
    p.add_argument("--genus", type=int, default=3)
    p.add_argument("--n", required=True,
                   help="comma-separated translation lengths")
    p.add_argument("--words", default="default",
                   help="'default' or a file of words like 'a1 b3^-2'")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_degenerate)

    p = sub.add_parser("angle", help="recover a rotation angle from "
                                     "boundary order probes")
    p.add_argument("--theta-over-pi", type=float, required=True,
                   dest="theta_over_pi")
    p.add_argument("--bits", type=int, default=20)
    p.set_defaults(func=_cmd_angle)

    p = sub.add_parser("align", help="best isometry between two labeled "
                                     "point files")
    p.add_argument("--config", action="append", required=True,
                   help="points file; pass twice")
    p.add_argument("--allow-reflection", action="store_true")
    p.set_defaults(func=_cmd_align)

    p = sub.add_parser("min-disp", help="minimal joint displacement of "
                                        "the generators")
    p.add_argument("--rep", required=True)
    p.set_defaults(func=_cmd_min_disp)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _DOMAIN_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
