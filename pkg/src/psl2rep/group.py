"""Surface-group words, the standard presentation, representations,
reference subword sets, free-product normal forms, and Dehn twists.

Generator indexing: the genus-g surface group has generators
a1, b1, ..., ag, bg; letter +(2i-1) is a_i, letter +(2i) is b_i, and
negative letters are inverses. The relator is [a1,b1]...[ag,bg].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from psl2rep._core import kernel
from psl2rep.hyp2 import Isometry


def _free_reduce(letters: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


@dataclass(frozen=True)
class Word:
    """Freely reduced word in signed generator indices."""

    letters: tuple[int, ...] = ()

    def __post_init__(self):
        ls = tuple(int(x) for x in self.letters)
        if any(x == 0 for x in ls):
            raise ValueError("letters must be nonzero signed indices")
        object.__setattr__(self, "letters", _free_reduce(ls))

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word(tuple(-x for x in reversed(self.letters)))

    @property
    def is_empty(self) -> bool:
        return not self.letters


def a_index(i: int) -> int:
    return 2 * i - 1


def b_index(i: int) -> int:
    return 2 * i


def generator_name(letter: int) -> str:
    i = abs(letter)
    name = f"a{(i + 1) // 2}" if i % 2 else f"b{i // 2}"
    return name if letter > 0 else name + "^-1"


def word_display(w: "Word") -> str:
    """Readable form with runs folded into exponents: a1 b2^-3 a1."""
    if not w.letters:
        return "1"
    out: list[str] = []
    run, count = w.letters[0], 0
    for letter in w.letters + (0,):
        if letter == run:
            count += 1
            continue
        i = abs(run)
        name = f"a{(i + 1) // 2}" if i % 2 else f"b{i // 2}"
        exp = count if run > 0 else -count
        out.append(name if exp == 1 else f"{name}^{exp}")
        run, count = letter, 1
    return " ".join(out)


def parse_word(text: str) -> "Word":
    """Inverse of word_display; accepts tokens like a1, b3^2, a2^-1."""
    letters: list[int] = []
    for token in text.split():
        if token == "1":
            continue
        head, _, exp_part = token.partition("^")
        if len(head) < 2 or head[0] not in "ab":
            raise ValueError(f"bad generator token {token!r}")
        try:
            i = int(head[1:])
            exp = int(exp_part) if exp_part else 1
        except ValueError as err:
            raise ValueError(f"bad generator token {token!r}") from err
        if i < 1:
            raise ValueError(f"bad generator token {token!r}")
        letter = a_index(i) if head[0] == "a" else b_index(i)
        letters.extend([letter if exp > 0 else -letter] * abs(exp))
    return Word(tuple(letters))


@dataclass(frozen=True)
class Presentation:
    """Standard presentation of the genus-g surface group."""

    genus: int

    def __post_init__(self):
        if self.genus < 2:
            raise ValueError("genus must be at least 2")

    @property
    def generator_count(self) -> int:
        return 2 * self.genus

    @property
    def relator(self) -> Word:
        ls: list[int] = []
        for i in range(1, self.genus + 1):
            ai, bi = a_index(i), b_index(i)
            ls.extend((ai, bi, -ai, -bi))
        return Word(tuple(ls))


@dataclass(frozen=True)
class Representation:
    """Tuple of generator images in PSL(2, R) for a genus-g surface
    group. The relator residual is computed on demand and cached."""

    genus: int
    images: tuple[Isometry, ...]

    def __post_init__(self):
        if self.genus < 2:
            raise ValueError("genus must be at least 2")
        imgs = tuple(self.images)
        if len(imgs) != 2 * self.genus:
            raise ValueError("need 2*genus generator images")
        object.__setattr__(self, "images", imgs)

    def image_of(self, letter: int) -> Isometry:
        g = self.images[abs(letter) - 1]
        return g if letter > 0 else g.inverse()

    @property
    def residual(self) -> float:
        cached = self.__dict__.get("_residual_cache")
        if cached is None:
            cached = relator_residual(self)
            object.__setattr__(self, "_residual_cache", cached)
        return cached


def evaluate(rho: Representation, w: Word) -> Isometry:
    m = (1.0, 0.0, 0.0, 1.0)
    for letter in w.letters:
        g = rho.image_of(letter)
        m = kernel.mul(*m, *g.entries)
    return Isometry(*m)


def _dist_to_identity(g: Isometry) -> float:
    a, b, c, d = g.entries
    plus = max(abs(a - 1.0), abs(b), abs(c), abs(d - 1.0))
    minus = max(abs(a + 1.0), abs(b), abs(c), abs(d + 1.0))
    return min(plus, minus)


def relator_residual(rho: Representation) -> float:
    """Max-entry deviation of the evaluated relator from +-identity."""
    w = Presentation(rho.genus).relator
    return _dist_to_identity(evaluate(rho, w))


def pref_set(g: int) -> list[Word]:
    """Prefix subwords of the relator, closed under inversion,
    deduplicated. Contains the empty word and the full relator."""
    if g < 2:
        raise ValueError("genus must be at least 2")
    rel = Presentation(g).relator.letters
    seen: dict[tuple[int, ...], Word] = {}
    for n in range(len(rel) + 1):
        w = Word(rel[:n])
        seen.setdefault(w.letters, w)
        wi = w.inverse()
        seen.setdefault(wi.letters, wi)
    return list(seen.values())


def ball(g: int, radius: int) -> list[Word]:
    """All freely reduced words of length at most radius, shortest
    first. The empty word is included."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    alphabet = [s * i for i in range(1, 2 * g + 1) for s in (1, -1)]
    out = [Word(())]
    layer = [()]
    for _ in range(radius):
        nxt = []
        for ls in layer:
            for x in alphabet:
                if ls and ls[-1] == -x:
                    continue
                nxt.append(ls + (x,))
        out.extend(Word(ls) for ls in nxt)
        layer = nxt
    return out


# ------------------------------------------------- free product normal form

@dataclass(frozen=True)
class FreeProductElement:
    """Alternating normal form u1 z^{n1} u2 z^{n2} ... u_k z^{n_k} in
    the free product of the genus-(g-1) surface group with the integers.

    parts holds the (u_i, n_i) pairs. u_1 may be empty and n_k may be
    zero; all other u_i are nonempty and all other n_i nonzero. Words
    u_i are reduced only freely, never modulo the surface relator.
    """

    parts: tuple[tuple[Word, int], ...] = ()

    def __post_init__(self):
        for idx, (u, n) in enumerate(self.parts):
            if idx > 0 and u.is_empty:
                raise ValueError("interior factor words must be nonempty")
            if idx < len(self.parts) - 1 and n == 0:
                raise ValueError("interior z-exponents must be nonzero")

    @property
    def is_identity(self) -> bool:
        return not self.parts or (
            len(self.parts) == 1 and self.parts[0][0].is_empty
            and self.parts[0][1] == 0)

    @property
    def z_profile(self) -> tuple[int, ...]:
        return tuple(n for _, n in self.parts)

    def multiply(self, other: "FreeProductElement") -> "FreeProductElement":
        b = _FPBuilder()
        for u, n in self.parts:
            b.push_word(u.letters)
            b.push_z(n)
        for u, n in other.parts:
            b.push_word(u.letters)
            b.push_z(n)
        return b.finish()

    def inverse(self) -> "FreeProductElement":
        b = _FPBuilder()
        for u, n in reversed(self.parts):
            b.push_z(-n)
            b.push_word(u.inverse().letters)
        return b.finish()


class _FPBuilder:
    """Stack of alternating ("w", letters) / ("z", n) items with no
    empty words, no zero exponents, and no same-kind adjacency."""

    def __init__(self):
        self.stack: list[list] = []

    def push_letter(self, x: int):
        if self.stack and self.stack[-1][0] == "w":
            word = self.stack[-1][1]
            if word and word[-1] == -x:
                word.pop()
                if not word:
                    self.stack.pop()
            else:
                word.append(x)
        else:
            self.stack.append(["w", [x]])

    def push_word(self, letters: Sequence[int]):
        for x in letters:
            self.push_letter(x)

    def push_z(self, n: int):
        if n == 0:
            return
        if self.stack and self.stack[-1][0] == "z":
            self.stack[-1][1] += n
            if self.stack[-1][1] == 0:
                self.stack.pop()
        else:
            self.stack.append(["z", n])

    def finish(self) -> FreeProductElement:
        parts: list[tuple[Word, int]] = []
        idx = 0
        items = self.stack
        while idx < len(items):
            if items[idx][0] == "w":
                u = Word(tuple(items[idx][1]))
                idx += 1
            else:
                u = Word(())
            if idx < len(items) and items[idx][0] == "z":
                n = items[idx][1]
                idx += 1
            else:
                n = 0
            parts.append((u, n))
        return FreeProductElement(tuple(parts))


def free_product_normal_form(w: Word, g: int) -> FreeProductElement:
    """Image of a genus-g word under the quotient killing a_g and
    sending b_g to the free letter z, in alternating normal form."""
    if g < 2:
        raise ValueError("genus must be at least 2")
    ag, bg = a_index(g), b_index(g)
    b = _FPBuilder()
    for x in w.letters:
        i = abs(x)
        if i == ag:
            continue
        if i == bg:
            b.push_z(1 if x > 0 else -1)
        else:
            b.push_letter(x)
    return b.finish()


# -------------------------------------------------------------- Dehn twists

@dataclass(frozen=True)
class TwistSpec:
    """Dehn twist along the a-curve of one handle: b_i -> b_i a_i^n."""

    handle: int
    power: int

    def __post_init__(self):
        if self.handle < 1:
            raise ValueError("handle index starts at 1")


def dehn_twist(t: TwistSpec, w: Word) -> Word:
    """Apply the substitution a_i -> a_i, b_i -> b_i a_i^n letterwise
    and reduce. This substitution fixes the surface relator exactly, so
    twisting is relator-preserving."""
    ai, bi = a_index(t.handle), b_index(t.handle)
    out: list[int] = []
    for x in w.letters:
        if x == bi:
            out.append(bi)
            out.extend([ai] * t.power if t.power >= 0
                       else [-ai] * (-t.power))
        elif x == -bi:
            out.extend([-ai] * t.power if t.power >= 0
                       else [ai] * (-t.power))
            out.append(-bi)
        else:
            out.append(x)
    return Word(tuple(out))
