"""Words and elements of the free group F_N.

Letters are signed integers: ``+i`` is the generator s_i and ``-i`` its
inverse, for ``1 <= i <= N``.  A word is a tuple of letters; a group
element is identified with its unique reduced word, so element equality is
tuple equality and elements are hashable.

Most functions here do not need the rank and are module level.  Anything
that validates letters or enumerates elements goes through `FreeGroup`.
"""

from __future__ import annotations

import itertools
import string
from collections.abc import Iterable, Iterator, Sequence

import numpy as np

from .errors import InvalidInput

Word = tuple[int, ...]

IDENTITY: Word = ()


def reduce_word(word: Iterable[int]) -> Word:
    """Free reduction by a single left-to-right stack pass."""
    out: list[int] = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def is_reduced(word: Sequence[int]) -> bool:
    return all(word[i] != -word[i + 1] for i in range(len(word) - 1))


def inverse(g: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(g))


def multiply(g: Sequence[int], h: Sequence[int]) -> Word:
    """Product of two reduced words; only the seam can cancel."""
    i, m = 0, min(len(g), len(h))
    while i < m and g[len(g) - 1 - i] == -h[i]:
        i += 1
    return tuple(g[: len(g) - i]) + tuple(h[i:])


def conjugate(g: Sequence[int], by: Sequence[int]) -> Word:
    """Return ``by * g * by^-1``."""
    return multiply(multiply(by, g), inverse(by))


def cyclic_permutation(word: Sequence[int], t: int = 1) -> Word:
    """Rotate right by ``t`` places: sigma_1(w_1..w_k) = w_k w_1..w_{k-1}.

    Negative ``t`` rotates left.  The empty word is fixed.
    """
    w = tuple(word)
    if not w:
        return w
    t %= len(w)
    if t == 0:
        return w
    return w[-t:] + w[:-t]


def is_cyclically_reduced(word: Sequence[int]) -> bool:
    if not is_reduced(word):
        return False
    return len(word) < 2 or word[0] != -word[-1]


def root_decomposition(g: Sequence[int]) -> tuple[Word, Word]:
    """Split a reduced word as ``u v u^-1`` with ``v`` cyclically reduced.

    The product has no cancellation, so ``len(g) == 2*len(u) + len(v)``.
    """
    g = tuple(g)
    if not is_reduced(g):
        raise InvalidInput(f"root_decomposition needs a reduced word, got {g}")
    n, p = len(g), 0
    while 2 * p + 1 < n and g[p] == -g[n - 1 - p]:
        p += 1
    return g[:p], g[p:n - p]


def root(g: Sequence[int]) -> Word:
    return root_decomposition(g)[1]


def is_periodic(word: Sequence[int], period: int, start: int = 1, stop: int | None = None) -> bool:
    """True iff ``w_n == w_m`` whenever ``|n - m| == period``.

    Positions are 1-indexed and restricted to ``start..stop`` (``stop``
    defaults to the word length).  An empty window is vacuously periodic.
    """
    if period <= 0:
        raise InvalidInput(f"period must be positive, got {period}")
    if stop is None:
        stop = len(word)
    stop = min(stop, len(word))
    start = max(start, 1)
    return all(word[n - 1] == word[n + period - 1] for n in range(start, stop - period + 1))


def cyclic_closure(g: Sequence[int]) -> set[Word]:
    """All cyclic permutations of ``g`` and of ``g^-1``."""
    g = tuple(g)
    out = {cyclic_permutation(g, t) for t in range(max(len(g), 1))}
    gi = inverse(g)
    out |= {cyclic_permutation(gi, t) for t in range(max(len(gi), 1))}
    return out


def conjugacy_representative(g: Sequence[int]) -> Word:
    """Canonical label for the class of ``g`` up to conjugation and inversion.

    Lexicographically least element of the cyclic closure of the root.
    """
    return min(cyclic_closure(root(reduce_word(g))))


# -- text syntax ------------------------------------------------------------

def parse_word(text: str) -> Word:
    """Parse ``"1 2 -1"`` or the compact ``"abA"`` form (uppercase = inverse).

    Returns the word as written, unreduced.  The empty string is the
    identity.
    """
    text = text.strip()
    if not text:
        return IDENTITY
    if any(ch.isdigit() for ch in text):
        try:
            letters = tuple(int(tok) for tok in text.replace(",", " ").split())
        except ValueError:
            raise InvalidInput(f"cannot parse word {text!r}") from None
        if 0 in letters:
            raise InvalidInput(f"letter 0 is not a generator in {text!r}")
        return letters
    letters = []
    for ch in text:
        if ch.isspace():
            continue
        if ch in string.ascii_lowercase:
            letters.append(string.ascii_lowercase.index(ch) + 1)
        elif ch in string.ascii_uppercase:
            letters.append(-(string.ascii_uppercase.index(ch) + 1))
        else:
            raise InvalidInput(f"cannot parse word {text!r}")
    return tuple(letters)


def format_word(word: Sequence[int], style: str = "int") -> str:
    if style == "int":
        return " ".join(str(x) for x in word)
    if style == "alpha":
        return "".join(
            string.ascii_lowercase[x - 1] if x > 0 else string.ascii_uppercase[-x - 1]
            for x in word
        )
    raise InvalidInput(f"unknown word style {style!r}")


# -- rank-aware operations --------------------------------------------------

class FreeGroup:
    """The free group on ``rank`` distinguished generators."""

    def __init__(self, rank: int):
        if int(rank) != rank or rank < 2:
            raise InvalidInput(f"rank must be an integer >= 2, got {rank}")
        self.rank = int(rank)
        # alphabet order used by every enumeration: 1, -1, 2, -2, ...
        self.letters: tuple[int, ...] = tuple(
            x for i in range(1, self.rank + 1) for x in (i, -i)
        )

    def __repr__(self):
        return f"FreeGroup({self.rank})"

    def __eq__(self, other):
        return isinstance(other, FreeGroup) and other.rank == self.rank

    def __hash__(self):
        return hash(("FreeGroup", self.rank))

    @property
    def generators(self) -> list[Word]:
        return [(i,) for i in range(1, self.rank + 1)]

    def check(self, word: Iterable[int]) -> Word:
        w = tuple(word)
        for x in w:
            if int(x) != x or x == 0 or abs(x) > self.rank:
                raise InvalidInput(f"letter {x} out of range for rank {self.rank}")
        return w

    def reduce(self, word: Iterable[int]) -> Word:
        return reduce_word(self.check(word))

    def element(self, text_or_word) -> Word:
        """Reduced element from a text word or a letter sequence."""
        if isinstance(text_or_word, str):
            text_or_word = parse_word(text_or_word)
        return self.reduce(text_or_word)

    def multiply(self, g: Sequence[int], h: Sequence[int]) -> Word:
        return multiply(self.reduce(g), self.reduce(h))

    def inverse(self, g: Sequence[int]) -> Word:
        return inverse(self.check(g))

    def sphere_size(self, length: int) -> int:
        """Number of reduced words of the given length."""
        if length < 0:
            raise InvalidInput(f"length must be >= 0, got {length}")
        if length == 0:
            return 1
        return 2 * self.rank * (2 * self.rank - 1) ** (length - 1)

    def enumerate_reduced(self, length: int) -> Iterator[Word]:
        """Every reduced word of the given length, once, in a fixed order."""
        if length < 0:
            raise InvalidInput(f"length must be >= 0, got {length}")
        if length == 0:
            yield IDENTITY
            return
        stack: list[int] = []

        def extend() -> Iterator[Word]:
            if len(stack) == length:
                yield tuple(stack)
                return
            for x in self.letters:
                if stack and stack[-1] == -x:
                    continue
                stack.append(x)
                yield from extend()
                stack.pop()

        yield from extend()

    def reduced_array(self, length: int) -> np.ndarray:
        """All reduced words of ``length`` as rows of an int8 array.

        Row order matches `enumerate_reduced`.
        """
        if length < 0:
            raise InvalidInput(f"length must be >= 0, got {length}")
        if length == 0:
            return np.zeros((1, 0), dtype=np.int8)
        letters = np.array(self.letters, dtype=np.int8)
        # successor table: for each last letter, the 2N-1 allowed next letters
        position = np.empty(2 * self.rank + 1, dtype=np.intp)
        position[letters.astype(np.intp) + self.rank] = np.arange(len(letters))
        succ = np.array([[y for y in self.letters if y != -x] for x in self.letters], dtype=np.int8)
        rows = letters[:, None]
        last = np.arange(len(letters))
        for _ in range(length - 1):
            nxt = succ[last]                                    # (n, 2N-1)
            rows = np.concatenate(
                [np.repeat(rows, nxt.shape[1], axis=0), nxt.reshape(-1, 1)], axis=1
            )
            last = position[nxt.reshape(-1).astype(np.intp) + self.rank]
        return rows

    def enumerate_conjugates(self, g0: Sequence[int], target_length: int) -> set[Word]:
        """All reduced elements of ``target_length`` conjugate to g0 or g0^-1.

        Built as ``u r u^-1`` for r a cyclic permutation of g0^{+-1} and u a
        conjugator whose last letter cancels neither end of r.
        """
        g0 = self.reduce(g0)
        if not is_cyclically_reduced(g0):
            raise InvalidInput(f"g0 must be cyclically reduced, got {format_word(g0)}")
        if target_length < len(g0):
            raise InvalidInput(
                f"target length {target_length} is shorter than l(g0) = {len(g0)}"
            )
        extra = target_length - len(g0)
        if extra % 2:
            return set()
        m = extra // 2
        cores = cyclic_closure(g0)
        if m == 0:
            return cores
        out = set()
        for u in self.enumerate_reduced(m):
            for r in cores:
                if u[-1] == -r[0] or u[-1] == r[-1]:
                    continue
                out.add(u + r + inverse(u))
        return out

    def random_word(self, length: int, rng: np.random.Generator, reduced: bool = False) -> Word:
        if not reduced:
            return tuple(int(x) for x in rng.choice(self.letters, size=length))
        out: list[int] = []
        while len(out) < length:
            x = int(rng.choice(self.letters))
            if out and out[-1] == -x:
                continue
            out.append(x)
        return tuple(out)


def words_up_to(group: FreeGroup, max_length: int) -> Iterator[Word]:
    return itertools.chain.from_iterable(
        group.enumerate_reduced(n) for n in range(max_length + 1)
    )
