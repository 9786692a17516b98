"""Finite metric trees, fat trees with coherent end orders, tree
isometries and their translation lengths, and the combinatorial length
function of the surface-group action on the dual tree of the free
product decomposition.

Infinite trees are represented by finite truncations; leaves of the
truncation stand in for ends.  Points on edges are (edge id, offset)
pairs with offsets in [0, length].
"""

from __future__ import annotations

from dataclasses import dataclass

from psl2rep.cyclic import (FiniteCyclicOrder, HypothesisViolation,
                            OrderData, _inverse_prefix,
                            euler_from_order_data)
from psl2rep.group import (Presentation, Word, free_product_normal_form)
from psl2rep.hyp2 import DegenerateConfiguration


class NotIsometry(Exception):
    """The vertex map does not preserve the tree metric."""


class IncoherentStructure(Exception):
    """The fat structure does not induce a coherent order on ends."""


class OrientationNotPreserved(Exception):
    """The action does not preserve the fat structure."""


# ------------------------------------------------------------ metric trees

class MetricTree:
    """Finite combinatorial tree with positive edge lengths.

    Vertices are 0..n-1; edges are (u, v, length) triples indexed by
    position.  Connectivity and acyclicity are checked at construction.
    """

    def __init__(self, n: int, edges):
        if n < 1:
            raise ValueError("a tree needs at least one vertex")
        edges = tuple((int(u), int(v), float(length))
                      for u, v, length in edges)
        if len(edges) != n - 1:
            raise ValueError("a tree on n vertices has n - 1 edges")
        for u, v, length in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError("edge endpoint out of range")
            if u == v:
                raise ValueError("loop edges are not allowed")
            if not (length > 0.0):
                raise ValueError("edge lengths must be positive")
        self.n = n
        self.edges = edges
        incident: list[list[int]] = [[] for _ in range(n)]
        for e, (u, v, _) in enumerate(edges):
            incident[u].append(e)
            incident[v].append(e)
        self.incident = tuple(tuple(es) for es in incident)
        # connectivity; acyclicity then follows from the edge count
        seen = [False] * n
        stack = [0]
        seen[0] = True
        while stack:
            w = stack.pop()
            for e in self.incident[w]:
                u, v, _ = edges[e]
                o = v if u == w else u
                if not seen[o]:
                    seen[o] = True
                    stack.append(o)
        if not all(seen):
            raise ValueError("the edge set is not connected")
        self._dist: list[list[float]] | None = None

    @property
    def leaves(self) -> tuple[int, ...]:
        return tuple(v for v in range(self.n)
                     if len(self.incident[v]) == 1)

    def degree(self, v: int) -> int:
        return len(self.incident[v])

    def other_end(self, e: int, v: int) -> int:
        u, w, _ = self.edges[e]
        if v == u:
            return w
        if v == w:
            return u
        raise ValueError("vertex is not an endpoint of the edge")

    def _distance_matrix(self) -> list[list[float]]:
        if self._dist is None:
            n = self.n
            mat = [[0.0] * n for _ in range(n)]
            for root in range(n):
                row = mat[root]
                seen = [False] * n
                seen[root] = True
                stack = [root]
                while stack:
                    w = stack.pop()
                    for e in self.incident[w]:
                        o = self.other_end(e, w)
                        if not seen[o]:
                            seen[o] = True
                            row[o] = row[w] + self.edges[e][2]
                            stack.append(o)
            self._dist = mat
        return self._dist

    def vertex_distance(self, u: int, v: int) -> float:
        return self._distance_matrix()[u][v]

    def vertex_point(self, v: int) -> "TreePoint":
        """Canonical TreePoint at a vertex (lowest incident edge id)."""
        if not self.incident[v]:
            raise ValueError("an isolated vertex carries no edge point")
        e = min(self.incident[v])
        u, w, length = self.edges[e]
        return TreePoint(e, 0.0 if v == u else length)

    def vertex_at(self, p: "TreePoint", tol: float = 1e-9) -> int | None:
        """Vertex id when p sits at an edge endpoint within tol."""
        u, v, length = self.edges[p.edge]
        snap = tol * max(1.0, length)
        if p.offset <= snap:
            return u
        if p.offset >= length - snap:
            return v
        return None

    def point_distance(self, p: "TreePoint", q: "TreePoint") -> float:
        return point_distance(self, p, q)


@dataclass(frozen=True)
class TreePoint:
    """A point of a metric tree: an edge id and an offset from the
    edge's first endpoint, in [0, length]."""

    edge: int
    offset: float


def _ends_of(tree: MetricTree, p: TreePoint) -> tuple[tuple[int, float],
                                                      tuple[int, float]]:
    u, v, length = tree.edges[p.edge]
    if not (0.0 <= p.offset <= length):
        raise ValueError("offset outside the edge")
    return (u, p.offset), (v, length - p.offset)


def point_distance(tree: MetricTree, p: TreePoint, q: TreePoint) -> float:
    """Metric distance between two points of the tree."""
    if p.edge == q.edge:
        _ends_of(tree, p)
        _ends_of(tree, q)
        return abs(p.offset - q.offset)
    best = float("inf")
    for a, da in _ends_of(tree, p):
        for b, db in _ends_of(tree, q):
            best = min(best, da + tree.vertex_distance(a, b) + db)
    return best


def _exit_vertex(tree: MetricTree, p: TreePoint, q: TreePoint) -> int:
    """First vertex on the geodesic from p to q (the endpoint of p's
    edge the path leaves through).  Requires p != q."""
    if p.edge == q.edge:
        if q.offset > p.offset:
            return tree.edges[p.edge][1]
        if q.offset < p.offset:
            return tree.edges[p.edge][0]
        raise ValueError("the two points coincide")
    (a, da), (b, db) = _ends_of(tree, p)
    qa = min(da2 + tree.vertex_distance(a, v2)
             for v2, da2 in _ends_of(tree, q))
    qb = min(da2 + tree.vertex_distance(b, v2)
             for v2, da2 in _ends_of(tree, q))
    return a if da + qa <= db + qb else b


def point_on_path(tree: MetricTree, p: TreePoint, q: TreePoint,
                  t: float) -> TreePoint:
    """The point at distance t from p along the geodesic [p, q]."""
    total = point_distance(tree, p, q)
    if not (-1e-12 <= t <= total + 1e-12):
        raise ValueError("parameter outside the segment")
    t = min(max(t, 0.0), total)
    if total == 0.0:
        return p
    if p.edge == q.edge:
        step = t if q.offset > p.offset else -t
        return TreePoint(p.edge, p.offset + step)
    a = _exit_vertex(tree, p, q)
    u, v, length = tree.edges[p.edge]
    s = p.offset if a == u else length - p.offset
    if t <= s:
        step = -t if a == u else t
        return TreePoint(p.edge, p.offset + step)
    t -= s
    # walk vertex to vertex toward the entry endpoint of q's edge
    (bu, du), (bv, dv) = _ends_of(tree, q)
    if tree.vertex_distance(a, bu) + du <= tree.vertex_distance(a, bv) + dv:
        target = bu
    else:
        target = bv
    w = a
    while w != target:
        nxt = None
        for e in tree.incident[w]:
            o = tree.other_end(e, w)
            le = tree.edges[e][2]
            if abs(le + tree.vertex_distance(o, target)
                   - tree.vertex_distance(w, target)) <= 1e-9 * (
                       1.0 + tree.vertex_distance(w, target)):
                nxt = (e, o, le)
                break
        if nxt is None:
            raise ValueError("no descent edge found; broken tree metric")
        e, o, le = nxt
        if t <= le:
            eu = tree.edges[e][0]
            return TreePoint(e, t if w == eu else le - t)
        t -= le
        w = o
    # inside q's edge, approaching from target
    eu, ev, le = tree.edges[q.edge]
    if target == eu:
        return TreePoint(q.edge, min(t, le))
    return TreePoint(q.edge, max(le - t, 0.0))


def tripod_center(tree: MetricTree, x: TreePoint, y: TreePoint,
                  z: TreePoint) -> TreePoint:
    """The median of three points: the single point common to the three
    pairwise geodesics, which is also their Fermat point."""
    dxy = point_distance(tree, x, y)
    dxz = point_distance(tree, x, z)
    dyz = point_distance(tree, y, z)
    t = 0.5 * (dxy + dxz - dyz)
    t = min(max(t, 0.0), dxy)
    return point_on_path(tree, x, y, t)


# --------------------------------------------------------------- fat trees

class FatTree:
    """Metric tree plus a cyclic order of incident edges at every
    vertex (a rotation system, i.e. a planar structure)."""

    def __init__(self, tree: MetricTree, rotations):
        rotations = tuple(tuple(r) for r in rotations)
        if len(rotations) != tree.n:
            raise ValueError("one rotation per vertex is required")
        for v in range(tree.n):
            if sorted(rotations[v]) != sorted(tree.incident[v]):
                raise ValueError(
                    "rotation must permute the incident edges")
        self.tree = tree
        self.rotations = rotations
        self._order: FiniteCyclicOrder | None = None


def contour_leaf_sequence(fat: FatTree) -> tuple[int, ...]:
    """Leaves in the circular order of the contour traversal that
    follows each rotation's successor at every vertex."""
    tree = fat.tree
    if tree.n == 1:
        return ()
    leaves = tree.leaves
    if not leaves:
        raise IncoherentStructure("a finite tree must have leaves")
    start_leaf = min(leaves)
    e0 = tree.incident[start_leaf][0]
    state = (e0, start_leaf)  # edge, tail vertex
    out: list[int] = []
    for _ in range(2 * (tree.n - 1)):
        e, tail = state
        head = tree.other_end(e, tail)
        if tree.degree(head) == 1:
            out.append(head)
        rot = fat.rotations[head]
        nxt = rot[(rot.index(e) + 1) % len(rot)]
        state = (nxt, head)
        if state == (e0, start_leaf):
            break
    if state != (e0, start_leaf) or sorted(out) != sorted(leaves):
        raise IncoherentStructure("contour traversal did not close up")
    return tuple(out)


def ends_order(fat: FatTree) -> FiniteCyclicOrder:
    """The coherent cyclic order induced on the leaves by the planar
    structure (contour traversal order)."""
    if fat._order is None:
        fat._order = FiniteCyclicOrder.from_sequence(
            contour_leaf_sequence(fat))
    return fat._order


def _same_component(tree: MetricTree, p: TreePoint, q: TreePoint,
                    cut: TreePoint, tol: float) -> bool:
    """Whether p and q lie in one connected component of the tree with
    the point cut removed (in particular neither equals cut)."""
    dpq = point_distance(tree, p, q)
    dpc = point_distance(tree, p, cut)
    dcq = point_distance(tree, cut, q)
    return dpc + dcq > dpq + tol


def tree_triple_predicate(tree: MetricTree,
                          xs: tuple[TreePoint, TreePoint, TreePoint],
                          ys: tuple[TreePoint, TreePoint, TreePoint],
                          tol: float = 1e-9) -> bool:
    """Whether each x_i lies, together with the two other y's, in the
    same connected component of the tree minus y_i.  Under this
    condition the segment directions [x_i, y_i) define a triple sign
    independent of the choice of continuing rays."""
    for i in range(3):
        cut = ys[i]
        if not _same_component(tree, xs[i], ys[(i + 1) % 3], cut, tol):
            return False
        if not _same_component(tree, ys[(i + 1) % 3], ys[(i + 2) % 3],
                               cut, tol):
            return False
    return True


def leaves_beyond(tree: MetricTree, c: TreePoint, q: TreePoint,
                  tol: float = 1e-9) -> tuple[int, ...]:
    """Leaves whose geodesic from c passes through q.  Every such leaf
    continues the germ of direction at c toward q."""
    dcq = point_distance(tree, c, q)
    if dcq <= tol:
        raise ValueError("the germ needs two distinct points")
    out = []
    for leaf in tree.leaves:
        lp = tree.vertex_point(leaf)
        dcl = point_distance(tree, c, lp)
        dql = point_distance(tree, q, lp)
        if abs(dcq + dql - dcl) <= tol * (1.0 + dcl):
            out.append(leaf)
    return tuple(out)


def tree_triple_sign(fat: FatTree,
                     xs: tuple[TreePoint, TreePoint, TreePoint],
                     ys: tuple[TreePoint, TreePoint, TreePoint],
                     tol: float = 1e-9) -> int:
    """Sign of the three segment directions [x_i, y_i): the cyclic
    order of the three ends they determine.  Requires the component
    condition of tree_triple_predicate."""
    tree = fat.tree
    if not tree_triple_predicate(tree, xs, ys, tol):
        raise DegenerateConfiguration(
            "segment directions do not determine three distinct ends")
    center = tripod_center(tree, ys[0], ys[1], ys[2])
    picks = []
    for i in range(3):
        if point_distance(tree, center, ys[i]) <= tol:
            raise DegenerateConfiguration("degenerate reference tripod")
        cands = leaves_beyond(tree, center, ys[i], tol)
        if not cands:
            raise DegenerateConfiguration("no leaf continues the germ")
        picks.append(cands[0])
    if len(set(picks)) < 3:
        raise DegenerateConfiguration("germ leaves are not distinct")
    order = ends_order(fat)
    # the sign table is indexed by contour position, not leaf vertex id
    position = {leaf: idx for idx, leaf in enumerate(order.labels)}
    return order.sign(position[picks[0]], position[picks[1]],
                      position[picks[2]])


# ---------------------------------------------------------- tree isometries

class TreeIsometry:
    """Isometry of a metric tree given by a (possibly partial) vertex
    map; None marks vertices whose image falls outside the truncation.
    All defined images must preserve pairwise distances."""

    def __init__(self, tree: MetricTree, vertex_map):
        vertex_map = tuple(None if w is None else int(w)
                           for w in vertex_map)
        if len(vertex_map) != tree.n:
            raise NotIsometry("one image per vertex is required")
        defined = [(v, w) for v, w in enumerate(vertex_map)
                   if w is not None]
        for _, w in defined:
            if not (0 <= w < tree.n):
                raise NotIsometry("image vertex out of range")
        if len({w for _, w in defined}) != len(defined):
            raise NotIsometry("vertex map is not injective")
        for i, (v1, w1) in enumerate(defined):
            for v2, w2 in defined[i + 1:]:
                d0 = tree.vertex_distance(v1, v2)
                d1 = tree.vertex_distance(w1, w2)
                if abs(d0 - d1) > 1e-9 * (1.0 + d0):
                    raise NotIsometry("vertex map distorts distances")
        self.tree = tree
        self.vertex_map = vertex_map

    @staticmethod
    def identity(tree: MetricTree) -> "TreeIsometry":
        return TreeIsometry(tree, tuple(range(tree.n)))

    def apply(self, v: int) -> int:
        w = self.vertex_map[v]
        if w is None:
            raise HypothesisViolation(
                "vertex image falls outside the truncation")
        return w

    def __matmul__(self, other: "TreeIsometry") -> "TreeIsometry":
        out = []
        for v in range(self.tree.n):
            mid = other.vertex_map[v]
            out.append(None if mid is None else self.vertex_map[mid])
        return TreeIsometry(self.tree, out)

    def inverse(self) -> "TreeIsometry":
        out: list[int | None] = [None] * self.tree.n
        for v, w in enumerate(self.vertex_map):
            if w is not None:
                out[w] = v
        return TreeIsometry(self.tree, out)

    def edge_image(self, e: int) -> int | None:
        """Image edge id, or None when an endpoint image is missing."""
        u, v, length = self.tree.edges[e]
        iu, iv = self.vertex_map[u], self.vertex_map[v]
        if iu is None or iv is None:
            return None
        for e2 in self.tree.incident[iu]:
            if self.tree.other_end(e2, iu) == iv:
                return e2
        raise NotIsometry("adjacent vertices map to non-adjacent ones")

    def apply_point(self, p: TreePoint) -> TreePoint:
        """Image of an interior point; the offset flips when the image
        edge is stored with the opposite endpoint order."""
        e2 = self.edge_image(p.edge)
        if e2 is None:
            raise HypothesisViolation(
                "edge image falls outside the truncation")
        u, v, length = self.tree.edges[p.edge]
        u2, v2, length2 = self.tree.edges[e2]
        if self.vertex_map[u] == u2:
            return TreePoint(e2, p.offset)
        return TreePoint(e2, length2 - p.offset)


def tree_translation_length(tree: MetricTree, phi: TreeIsometry) -> float:
    """Translation length of the isometry: zero when a point of the
    tree is fixed (a vertex or an inverted edge midpoint), else the
    minimum vertex displacement, attained along the axis."""
    for v, w in enumerate(phi.vertex_map):
        if w == v:
            return 0.0
    for u, v, _ in tree.edges:
        if phi.vertex_map[u] == v and phi.vertex_map[v] == u:
            return 0.0
    moves = [tree.vertex_distance(v, w)
             for v, w in enumerate(phi.vertex_map) if w is not None]
    if not moves:
        raise NotIsometry("the vertex map is empty")
    return min(moves)


def _preserves_rotations(fat: FatTree, phi: TreeIsometry) -> bool:
    """Whether the isometry maps each vertex rotation to the rotation
    at the image vertex up to cyclic shift (same orientation)."""
    for v in range(fat.tree.n):
        w = phi.vertex_map[v]
        if w is None:
            continue
        try:
            image = [phi.edge_image(e) for e in fat.rotations[v]]
        except NotIsometry:
            return False
        if any(e is None for e in image):
            continue
        target = list(fat.rotations[w])
        if len(image) != len(target):
            return False
        if len(image) <= 2:
            continue
        k = target.index(image[0])
        rotated = target[k:] + target[:k]
        if rotated != image:
            return False
    return True


class TreeAction:
    """Group action on a fat tree: one isometry per generator, with a
    flag recording whether every generator preserves the fat
    structure."""

    def __init__(self, fat: FatTree, maps):
        maps = tuple(maps)
        for m in maps:
            if m.tree is not fat.tree:
                raise NotIsometry(
                    "all generators must act on the same tree")
        self.fat = fat
        self.maps = maps
        self.preserves_fat = all(_preserves_rotations(fat, m)
                                 for m in maps)
        self._inverses = tuple(m.inverse() for m in maps)

    def apply_word(self, letters: tuple[int, ...], v: int) -> int:
        """Image of vertex v under the word (letters act on the left,
        so the rightmost letter is applied first)."""
        for letter in reversed(letters):
            if letter > 0:
                v = self.maps[letter - 1].apply(v)
            else:
                v = self._inverses[-letter - 1].apply(v)
        return v

    def move_point(self, letters: tuple[int, ...], p: TreePoint) -> TreePoint:
        """Image of a tree point under the word, rightmost letter first."""
        for letter in reversed(letters):
            if letter > 0:
                p = self.maps[letter - 1].apply_point(p)
            else:
                p = self._inverses[-letter - 1].apply_point(p)
        return p


# -------------------------------------------- dual-tree length functions

def bass_serre_length(g: int, w: Word) -> float:
    """Distance the word moves the base vertex of the unit-edge dual
    tree of the free product decomposition: the sum of the absolute
    z-exponents of the free product normal form, taken as written."""
    return float(sum(abs(n)
                     for n in free_product_normal_form(w, g).z_profile))


def _fp_syllables(w: Word, g: int) -> list[tuple[str, object]]:
    out: list[tuple[str, object]] = []
    for u, n in free_product_normal_form(w, g).parts:
        if not u.is_empty:
            out.append(("w", u))
        if n != 0:
            out.append(("z", n))
    return out


def bass_serre_translation_length(g: int, w: Word) -> float:
    """Translation length of the word on the dual tree: the absolute
    z-exponent sum after cyclic reduction in the free product (merging
    same-kind first and last syllables until the ends differ)."""
    syl = _fp_syllables(w, g)
    while len(syl) >= 2 and syl[0][0] == syl[-1][0]:
        kind, last = syl.pop()
        first = syl.pop(0)[1]
        if kind == "z":
            m = last + first
            if m != 0:
                syl.insert(0, ("z", m))
        else:
            m = last * first
            if not m.is_empty:
                syl.insert(0, ("w", m))
    return float(sum(abs(n) for kind, n in syl if kind == "z"))


def fat_action_euler(g: int, fat: FatTree, action: TreeAction,
                     x0: int, y0: int) -> int:
    """Euler number of a surface group action on a fat tree, read off
    the end order of the orbit of two base leaves."""
    if len(action.maps) != 2 * g:
        raise ValueError("the action needs one map per generator")
    if not action.preserves_fat:
        raise OrientationNotPreserved(
            "a generator reverses the fat structure")
    leaves = set(fat.tree.leaves)
    if x0 not in leaves or y0 not in leaves:
        raise HypothesisViolation("base points must be leaves")
    order = ends_order(fat)
    # the order's sign table is indexed by contour position, not by
    # the vertex id of the leaf
    position = {leaf: idx for idx, leaf in enumerate(order.labels)}

    def labeled(key: tuple[int, ...], v: int) -> int:
        img = action.apply_word(key, v)
        if img not in leaves:
            raise HypothesisViolation(
                "the orbit leaves the set of ends of the truncation")
        return position[img]

    rel = Presentation(g).relator.letters
    x_label = {(): position[x0]}
    for i in range(1, 2 * g + 1):
        x_label[(i,)] = labeled((i,), x0)
    y_label = {}
    for j in range(len(rel) + 1):
        key = _inverse_prefix(rel, j)
        y_label[key] = labeled(key, y0)
    return euler_from_order_data(g, OrderData(order, x_label, y_label))
