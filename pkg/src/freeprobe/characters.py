"""Positive characters on F_N and the group algebra they extend to.

A character here is a function phi on F_N with phi(e) = 1, constant on
conjugacy classes, positive definite and nonnegative.  Three kinds:

* `DeltaCharacter`: 1 at e, 0 elsewhere (free Haar unitaries).
* `TraceCharacter`: phi(g) = |tr(U_g)/d|^2 for a unitary family, i.e.
  (tau (x) tau^op) composed with g -> U_g (x) conj(U_g).
* `TableCharacter`: user-supplied values per conjugacy class.  Not
  certified positive definite; see `gram_matrix`.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import spectral, walks
from .errors import InvalidInput, ResourceLimitError, WitnessNotFound
from .freegroup import (
    FreeGroup,
    Word,
    conjugacy_representative,
    conjugate,
    format_word,
    inverse,
    multiply,
    parse_word,
    reduce_word,
)
from .unitaries import UnitaryFamily

PSD_SLACK = 1e-8
POSITIVITY_SLACK = 1e-9
MOMENT_RTOL = 1e-6
MAX_SUPPORT = 5_000_000


class Character:
    descriptor = "abstract"

    def __init__(self, rank: int):
        self.group = FreeGroup(rank)

    @property
    def rank(self) -> int:
        return self.group.rank

    def __call__(self, g: Sequence[int]) -> float:
        return self.evaluate(self.group.reduce(g))

    def evaluate(self, g: Word) -> float:
        raise NotImplementedError

    def evaluate_many(self, rows: np.ndarray) -> np.ndarray:
        """Values on the rows of an (n, L) array of reduced words."""
        return np.array([self.evaluate(tuple(int(x) for x in row)) for row in rows], dtype=float)

    def __repr__(self):
        return f"{type(self).__name__}(rank={self.rank})"


class DeltaCharacter(Character):
    descriptor = "delta"

    def evaluate(self, g):
        return 1.0 if not g else 0.0

    def evaluate_many(self, rows):
        rows = np.asarray(rows)
        return np.full(len(rows), 1.0 if rows.shape[1] == 0 else 0.0)


class TraceCharacter(Character):
    descriptor = "trace"
    chunk = 1 << 15

    def __init__(self, family: UnitaryFamily):
        super().__init__(family.rank)
        self.family = family
        mats = family.matrices
        # index 0..N-1: u_i, N..2N-1: u_i^*
        self._letters = np.concatenate([mats, np.conj(np.transpose(mats, (0, 2, 1)))])

    def evaluate(self, g):
        t = np.trace(self.family.word_matrix(g)) / self.family.dim
        return float(abs(t) ** 2)

    def evaluate_many(self, rows):
        rows = np.asarray(rows)
        n, length = rows.shape
        d = self.family.dim
        if length == 0:
            return np.ones(n)
        codes = np.where(rows > 0, rows - 1, self.rank - rows - 1).astype(np.intp)
        out = np.empty(n)
        for start in range(0, n, self.chunk):
            block = codes[start:start + self.chunk]
            acc = self._letters[block[:, 0]]
            for j in range(1, length):
                acc = acc @ self._letters[block[:, j]]
            tr = np.trace(acc, axis1=1, axis2=2) / d
            out[start:start + self.chunk] = np.abs(tr) ** 2
        return out


class TableCharacter(Character):
    """Values stored per class; everything not listed is 0, and phi(e) = 1.

    Keys are normalised with `conjugacy_representative`, so the table is
    conjugation- and inversion-invariant by construction.
    """

    descriptor = "table"

    def __init__(self, rank: int, entries: Mapping | None = None):
        super().__init__(rank)
        self.entries: dict[Word, float] = {}
        for word, value in (entries or {}).items():
            if isinstance(word, str):
                word = parse_word(word)
            g = self.group.reduce(word)
            value = float(value)
            if not math.isfinite(value) or value < 0:
                raise InvalidInput(f"table value for {format_word(g)!r} must be >= 0, got {value}")
            if not g:
                if value != 1.0:
                    raise InvalidInput(f"phi(e) must be 1, table says {value}")
                continue
            key = conjugacy_representative(g)
            if key in self.entries and self.entries[key] != value:
                raise InvalidInput(
                    f"conflicting values for the class of {format_word(key)!r}: "
                    f"{self.entries[key]} and {value}"
                )
            self.entries[key] = value

    def evaluate(self, g):
        if not g:
            return 1.0
        return self.entries.get(conjugacy_representative(g), 0.0)

    @classmethod
    def from_json(cls, data: dict) -> "TableCharacter":
        try:
            rank = int(data["N"])
            raw = data.get("entries", [])
            entries = {}
            for item in raw:
                w = parse_word(item["word"])
                if w in entries and entries[w] != item["value"]:
                    raise InvalidInput(f"word {item['word']!r} listed twice with different values")
                entries[w] = item["value"]
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidInput):
                raise
            raise InvalidInput(f"malformed table character: {exc}") from None
        return cls(rank, entries)

    @classmethod
    def load(cls, path) -> "TableCharacter":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInput(f"cannot read table character {path}: {exc}") from None
        return cls.from_json(data)

    def to_json(self) -> dict:
        return {
            "N": self.rank,
            "entries": [{"word": format_word(k), "value": v} for k, v in sorted(self.entries.items())],
        }

    @classmethod
    def from_character(cls, phi: Character, max_length: int) -> "TableCharacter":
        """Record phi on every class with a representative of length <= max_length."""
        entries = {}
        for length in range(1, max_length + 1):
            for g in phi.group.enumerate_reduced(length):
                key = conjugacy_representative(g)
                if key not in entries:
                    value = phi.evaluate(key)
                    if value > 0:
                        entries[key] = value
        return cls(phi.rank, entries)


def delta_character(rank: int) -> DeltaCharacter:
    return DeltaCharacter(rank)


def trace_character(family: UnitaryFamily) -> TraceCharacter:
    return TraceCharacter(family)


def table_character(entries: Mapping, rank: int) -> TableCharacter:
    return TableCharacter(rank, entries)


# -- group algebra -----------------------------------------------------------

class GroupAlgebraElement:
    """Finitely supported sum of group elements with real coefficients."""

    def __init__(self, rank: int, terms: Mapping[Word, float] | None = None):
        self.rank = rank
        self.terms: dict[Word, float] = {}
        for g, c in (terms or {}).items():
            if c:
                g = reduce_word(g)
                self.terms[g] = self.terms.get(g, 0) + c
        self.terms = {g: c for g, c in self.terms.items() if c}

    @classmethod
    def generator_sum(cls, rank: int) -> "GroupAlgebraElement":
        """a = sum_i s_i + s_i^-1."""
        return cls(rank, {(x,): 1 for x in FreeGroup(rank).letters})

    @classmethod
    def unit(cls, rank: int) -> "GroupAlgebraElement":
        return cls(rank, {(): 1})

    def __len__(self):
        return len(self.terms)

    def coefficient(self, g: Sequence[int]):
        return self.terms.get(reduce_word(g), 0)

    def __mul__(self, other: "GroupAlgebraElement") -> "GroupAlgebraElement":
        if other.rank != self.rank:
            raise InvalidInput(f"rank mismatch: {self.rank} vs {other.rank}")
        acc: dict[Word, float] = defaultdict(int)
        for g, a in self.terms.items():
            for h, b in other.terms.items():
                acc[multiply(g, h)] += a * b
            if len(acc) > MAX_SUPPORT:
                raise ResourceLimitError(f"group algebra product support exceeds {MAX_SUPPORT}")
        out = GroupAlgebraElement(self.rank)
        out.terms = {g: c for g, c in acc.items() if c}
        return out

    def __eq__(self, other):
        return isinstance(other, GroupAlgebraElement) and self.rank == other.rank and self.terms == other.terms

    def __repr__(self):
        return f"GroupAlgebraElement(rank={self.rank}, support={len(self.terms)})"


def power_convolve(x: GroupAlgebraElement, n: int) -> GroupAlgebraElement:
    """x^n by repeated convolution with x."""
    if n < 0:
        raise InvalidInput(f"power must be >= 0, got {n}")
    out = GroupAlgebraElement.unit(x.rank)
    for _ in range(n):
        out = out * x
    return out


def apply_character(phi: Character, x: GroupAlgebraElement) -> float:
    """Linear extension: phi(sum a_g g) = sum a_g phi(g)."""
    by_length: dict[int, list[tuple[Word, float]]] = defaultdict(list)
    for g, c in x.terms.items():
        by_length[len(g)].append((g, c))
    total = 0.0
    for length, items in by_length.items():
        rows = np.array([g for g, _ in items], dtype=np.int8).reshape(len(items), length)
        coeffs = np.array([c for _, c in items], dtype=float)
        total += float(coeffs @ phi.evaluate_many(rows))
    return total


# -- moments -----------------------------------------------------------------

def moment(phi: Character, n: int, method: str = "auto"):
    """phi(a^(2n)).

    Routes: ``"convolution"`` (any character), ``"walks"`` (delta only,
    exact integer), ``"spectral"`` (trace characters, tr(T^2n)/d^2).
    The delta route returns an int because the values overflow floats
    long before the DP becomes slow.
    """
    if n < 0:
        raise InvalidInput(f"n must be >= 0, got {n}")
    if method == "auto":
        if isinstance(phi, DeltaCharacter):
            method = "walks"
        elif isinstance(phi, TraceCharacter) and phi.family.dim ** 2 <= spectral.DENSE_LIMIT:
            method = "spectral"
        else:
            method = "convolution"
    if n == 0:
        return 1 if method == "walks" else 1.0
    if method == "walks":
        if not isinstance(phi, DeltaCharacter):
            raise InvalidInput("the walk-count route only applies to the delta character")
        return walks.closed_walk_count(n, phi.rank)
    if method == "spectral":
        if not isinstance(phi, TraceCharacter):
            raise InvalidInput("the spectral route only applies to trace characters")
        return spectral.trace_moment(phi.family, n)
    if method == "convolution":
        return apply_character(phi, power_convolve(GroupAlgebraElement.generator_sum(phi.rank), 2 * n))
    raise InvalidInput(f"unknown moment method {method!r}")


def moment_root(phi: Character, n: int, method: str = "auto") -> float:
    """phi(a^(2n))^(1/(2n)); nondecreasing in n by Hoelder."""
    m = moment(phi, n, method)
    if isinstance(m, int):
        return walks.moment_root(m, n)
    if n == 0:
        return 1.0
    return float(m) ** (1.0 / (2 * n)) if m > 0 else 0.0


def moment_series(phi: Character, n_max: int, method: str = "auto") -> list[tuple[int, float, float]]:
    """Rows (2n, moment, root) for n = 1..n_max."""
    if isinstance(phi, DeltaCharacter) and method in ("auto", "walks"):
        counts = walks.closed_walk_counts(n_max, phi.rank)
        return [(2 * n, counts[n], walks.moment_root(counts[n], n)) for n in range(1, n_max + 1)]
    if isinstance(phi, TraceCharacter) and method in ("auto", "spectral") and phi.family.dim ** 2 <= spectral.DENSE_LIMIT:
        ev = spectral.dense_spectrum(phi.family)
        rows = []
        for n in range(1, n_max + 1):
            m = float(np.mean(ev ** (2 * n)))
            rows.append((2 * n, m, m ** (1.0 / (2 * n))))
        return rows
    if method not in ("auto", "convolution"):
        return [(2 * n, moment(phi, n, method), moment_root(phi, n, method)) for n in range(1, n_max + 1)]
    # one pass of convolutions serves every n
    a2 = power_convolve(GroupAlgebraElement.generator_sum(phi.rank), 2)
    power = GroupAlgebraElement.unit(phi.rank)
    rows = []
    for n in range(1, n_max + 1):
        power = power * a2
        m = apply_character(phi, power)
        rows.append((2 * n, m, m ** (1.0 / (2 * n)) if m > 0 else 0.0))
    return rows


# -- positivity ----------------------------------------------------------------

@dataclass(frozen=True)
class GramMatrix:
    """A[i][j] = phi(h_i^-1 h_j) over h_0 = e, h_1, ..., h_k."""

    elements: tuple[Word, ...]
    matrix: np.ndarray

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix).min())

    def is_positive(self, slack: float = PSD_SLACK) -> bool:
        return self.min_eigenvalue() >= -slack


def gram_matrix(phi: Character, elements: Iterable[Sequence[int]]) -> GramMatrix:
    hs = ((),) + tuple(phi.group.reduce(h) for h in elements)
    k = len(hs)
    a = np.empty((k, k))
    for i in range(k):
        hi = inverse(hs[i])
        for j in range(i, k):
            a[i, j] = a[j, i] = phi.evaluate(multiply(hi, hs[j]))
    return GramMatrix(hs, a)


class PositivityBound(NamedTuple):
    lhs: float
    rhs: float
    holds: bool
    alpha: float
    mean: float              # b: mean of phi(h_i^-1 h_j) over 1 <= i, j <= k
    quadratic_form: float    # v^t A v at v = (1, -eps, ..., -eps), eps = 1/(k alpha)


def product_positivity_bound(phi: Character, elements: Sequence[Sequence[int]]) -> PositivityBound:
    """Check sum_{i,j} phi(h_i^-1 h_j) >= k^2 alpha^2 with alpha = min phi(h_i).

    The same test vector as for equal values works with the minimum:
    v^t A v = 1 - 2 eps sum_i phi(h_i) + eps^2 lhs <= 1 - 2 + lhs/(k alpha)^2.
    """
    gram = gram_matrix(phi, elements)
    k = len(gram.elements) - 1
    if k == 0:
        raise InvalidInput("need at least one element")
    values = gram.matrix[0, 1:]
    alpha = float(values.min())
    if alpha <= 0:
        raise InvalidInput(f"precondition alpha = min phi(h_i) > 0 fails: alpha = {alpha}")
    inner = gram.matrix[1:, 1:]
    lhs = float(inner.sum())
    rhs = k * k * alpha * alpha
    eps = 1.0 / (k * alpha)
    v = np.concatenate([[1.0], np.full(k, -eps)])
    return PositivityBound(
        lhs=lhs,
        rhs=rhs,
        holds=lhs >= rhs - POSITIVITY_SLACK,
        alpha=alpha,
        mean=lhs / (k * k),
        quadratic_form=float(v @ gram.matrix @ v),
    )


def distinct_conjugates(g0: Sequence[int], count: int, group: FreeGroup, max_conjugator: int = 64) -> list[Word]:
    """First ``count`` distinct conjugates of g0, by conjugator length then alphabet order."""
    g0 = group.reduce(g0)
    seen: list[Word] = []
    found = set()
    for length in range(max_conjugator + 1):
        for c in group.enumerate_reduced(length):
            h = conjugate(g0, c)
            if h not in found:
                found.add(h)
                seen.append(h)
                if len(seen) == count:
                    return seen
    raise ResourceLimitError(f"fewer than {count} conjugates with conjugator length <= {max_conjugator}")


def find_even_length_witness(phi: Character, g0: Sequence[int]) -> Word:
    """An element of even length with phi > 0, starting from phi(g0) > 0.

    For odd l(g0) take k > 1/alpha^2 distinct conjugates h_i; the h_i^-1 h_j
    have even length and their off-diagonal sum is >= alpha^2 k^2 - k > 0.
    """
    g0 = phi.group.reduce(g0)
    if not g0:
        raise InvalidInput("g0 must not be the identity")
    alpha = phi.evaluate(g0)
    if alpha <= 0:
        raise InvalidInput(f"precondition phi(g0) > 0 fails: phi(g0) = {alpha}")
    if len(g0) % 2 == 0:
        return g0
    k = math.floor(2 / alpha ** 2) + 1
    hs = distinct_conjugates(g0, k, phi.group)
    off_diagonal = 0.0
    for i, hi in enumerate(hs):
        hinv = inverse(hi)
        for j, hj in enumerate(hs):
            if i == j:
                continue
            g1 = multiply(hinv, hj)
            value = phi.evaluate(g1)
            if value > 0:
                return g1
            off_diagonal += value
    raise WitnessNotFound(
        f"no positive h_i^-1 h_j among {k} conjugates of {format_word(g0)!r}; "
        "the character is not positive definite",
        diagnostics={
            "alpha": alpha,
            "k": k,
            "off_diagonal_sum": off_diagonal,
            "required": alpha ** 2 * k ** 2 - k,
            "conjugates": [format_word(h) for h in hs],
        },
    )
