"""Compact sets of reduced words.

Sets in the construction run to tens of millions of words, far past what
Python tuples in a ``set`` can hold in a few GB.  Words are bucketed by
length and each reduced word is packed into one or more uint64 keys by a
mixed-radix code: the first letter is a digit in base 2N, every later
letter a digit in base 2N-1 (its position among the letters that do not
cancel the previous one).  Up to 39 letters of an F_2 word fit one key.
A bucket is a sorted array of unique keys: plain uint64 when one key
suffices, a structured dtype of several uint64 fields otherwise.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
from functools import lru_cache

import numpy as np

from .errors import InvalidInput
from .freegroup import Word

_KEY_MAX = (1 << 63) - 1     # keys are computed in int64


@lru_cache(maxsize=None)
def _chunks(length: int, rank: int) -> tuple[tuple[int, int], ...]:
    """Position ranges [start, stop) sharing one key."""
    out = []
    start, cap = 0, 1
    for t in range(length):
        radix = 2 * rank if t == 0 else 2 * rank - 1
        if cap * radix > _KEY_MAX:
            out.append((start, t))
            start, cap = t, 1
        cap *= radix
    out.append((start, length))
    return tuple(out)


@lru_cache(maxsize=None)
def _weights(length: int, rank: int) -> tuple[np.ndarray, ...]:
    """Place values of each position within its key."""
    out = []
    for start, stop in _chunks(length, rank):
        w, place = [], 1
        for t in range(stop - 1, start - 1, -1):
            w.append(place)
            place *= 2 * rank if t == 0 else 2 * rank - 1
        out.append(np.array(w[::-1], dtype=np.int64))
    return tuple(out)


@lru_cache(maxsize=None)
def _tables(rank: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Letter -> index, (prev, index) -> digit, (prev, digit) -> index.

    Indices: letters 1..N are 0..N-1, letters -1..-N are N..2N-1.
    """
    m = 2 * rank
    letter_to_index = np.zeros(m + 1, dtype=np.int8)      # offset by rank
    for x in range(1, rank + 1):
        letter_to_index[x + rank] = x - 1
        letter_to_index[-x + rank] = rank + x - 1
    to_digit = np.full((m, m), -1, dtype=np.int8)
    to_index = np.zeros((m, m), dtype=np.int8)
    for prev in range(m):
        forbidden = (prev + rank) % m
        allowed = [c for c in range(m) if c != forbidden]
        for d, c in enumerate(allowed):
            to_digit[prev, c] = d
            to_index[prev, d] = c
    return letter_to_index, to_digit, to_index


def key_dtype(length: int, rank: int) -> np.dtype:
    ncols = len(_chunks(length, rank))
    if ncols == 1:
        return np.dtype(np.uint64)
    return np.dtype([(f"c{i}", np.uint64) for i in range(ncols)])


def pack(rows: np.ndarray, rank: int) -> np.ndarray:
    """(n, L) reduced words in signed letters -> length-n array of keys."""
    rows = np.asarray(rows)
    n, length = rows.shape
    letter_to_index, to_digit, _ = _tables(rank)
    idx = letter_to_index[rows.astype(np.int64) + rank]
    digits = idx.copy()
    if length > 1:
        digits[:, 1:] = to_digit[idx[:, :-1], idx[:, 1:]]
        if (digits[:, 1:] < 0).any():
            raise InvalidInput("cannot pack a word that is not reduced")
    chunks = _chunks(length, rank)
    cols = np.empty((n, len(chunks)), dtype=np.int64)
    for c, ((start, stop), w) in enumerate(zip(chunks, _weights(length, rank))):
        cols[:, c] = digits[:, start:stop].astype(np.int64) @ w
    cols = cols.view(np.uint64)
    if len(chunks) == 1:
        return cols[:, 0].copy()
    return np.ascontiguousarray(cols).view(key_dtype(length, rank)).reshape(n)


def unpack(keys: np.ndarray, length: int, rank: int) -> np.ndarray:
    keys = np.asarray(keys)
    n = len(keys)
    chunks = _chunks(length, rank)
    if keys.dtype.fields is None:
        cols = keys.reshape(n, 1)
    else:
        cols = keys.view(np.uint64).reshape(n, len(chunks))
    cols = cols.view(np.int64)
    _, _, to_index = _tables(rank)
    radix = np.full(length, 2 * rank - 1, dtype=np.int64)
    if length:
        radix[0] = 2 * rank
    idx = np.empty((n, length), dtype=np.int8)
    for c, ((start, stop), w) in enumerate(zip(chunks, _weights(length, rank))):
        idx[:, start:stop] = (cols[:, c:c + 1] // w) % radix[start:stop]
    for t in range(1, length):
        idx[:, t] = to_index[idx[:, t - 1], idx[:, t]]
    out = idx + 1
    neg = idx >= rank
    out[neg] = rank - 1 - idx[neg]
    return out


class WordSet:
    """A finite set of reduced words over F_N, bucketed by length."""

    def __init__(self, rank: int, label: str = "", params: dict | None = None):
        self.rank = rank
        self.label = label
        self.params = dict(params or {})
        self.sampled = False
        self.stats: dict = {}
        self._buckets: dict[int, np.ndarray] = {}

    # -- construction ----------------------------------------------------

    @classmethod
    def from_words(cls, rank: int, words: Iterable[Sequence[int]], **kw) -> "WordSet":
        by_length: dict[int, list] = {}
        for w in words:
            by_length.setdefault(len(w), []).append(tuple(w))
        out = cls(rank, **kw)
        for length, ws in by_length.items():
            out.add_rows(np.array(ws, dtype=np.int8).reshape(len(ws), length))
        return out

    @classmethod
    def from_rows(cls, rank: int, rows: np.ndarray, **kw) -> "WordSet":
        out = cls(rank, **kw)
        out.add_rows(rows)
        return out

    def add_rows(self, rows: np.ndarray) -> None:
        rows = np.asarray(rows)
        if rows.ndim != 2:
            raise InvalidInput(f"expected an (n, L) array, got shape {rows.shape}")
        if len(rows):
            self.add_keys(rows.shape[1], pack(rows, self.rank))

    def add_keys(self, length: int, keys: np.ndarray) -> None:
        if length in self._buckets:
            keys = np.concatenate([self._buckets[length], keys])
        self._buckets[length] = np.unique(keys)

    def copy_empty(self, label: str | None = None, **params) -> "WordSet":
        out = WordSet(self.rank, label if label is not None else self.label, {**self.params, **params})
        return out

    # -- access ----------------------------------------------------------

    def __len__(self) -> int:
        return int(sum(len(b) for b in self._buckets.values()))

    def __bool__(self) -> bool:
        return len(self) > 0

    def lengths(self) -> list[int]:
        return sorted(L for L, b in self._buckets.items() if len(b))

    def keys(self, length: int) -> np.ndarray:
        return self._buckets.get(length, np.empty(0, dtype=key_dtype(length, self.rank)))

    def rows(self, length: int, start: int = 0, stop: int | None = None) -> np.ndarray:
        return unpack(self.keys(length)[start:stop], length, self.rank)

    def iter_rows(self, chunk: int = 1 << 18) -> Iterator[np.ndarray]:
        for length in self.lengths():
            n = len(self._buckets[length])
            for start in range(0, n, chunk):
                yield self.rows(length, start, start + chunk)

    def __iter__(self) -> Iterator[Word]:
        for rows in self.iter_rows():
            for row in rows:
                yield tuple(int(x) for x in row)

    def __contains__(self, word) -> bool:
        word = tuple(word)
        bucket = self._buckets.get(len(word))
        if bucket is None or not len(bucket):
            return False
        key = pack(np.array([word], dtype=np.int8).reshape(1, len(word)), self.rank)
        i = int(np.searchsorted(bucket, key)[0])
        return i < len(bucket) and bucket[i] == key[0]

    def to_set(self) -> set[Word]:
        return set(self)

    def histogram(self) -> dict[int, int]:
        return {L: len(self._buckets[L]) for L in self.lengths()}

    # -- set algebra -----------------------------------------------------

    def _combine(self, other: "WordSet", op) -> "WordSet":
        if other.rank != self.rank:
            raise InvalidInput(f"rank mismatch: {self.rank} vs {other.rank}")
        out = WordSet(self.rank)
        for length in set(self._buckets) | set(other._buckets):
            keys = op(self.keys(length), other.keys(length))
            if len(keys):
                out._buckets[length] = keys
        return out

    def union(self, other: "WordSet") -> "WordSet":
        return self._combine(other, np.union1d)

    def intersection(self, other: "WordSet") -> "WordSet":
        return self._combine(other, lambda a, b: np.intersect1d(a, b, assume_unique=True))

    def difference(self, other: "WordSet") -> "WordSet":
        return self._combine(other, lambda a, b: np.setdiff1d(a, b, assume_unique=True))

    def issubset(self, other: "WordSet") -> bool:
        return len(self.difference(other)) == 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, WordSet) or other.rank != self.rank:
            return NotImplemented
        if self.histogram() != other.histogram():
            return False
        return all(np.array_equal(self.keys(L), other.keys(L)) for L in self.lengths())

    __hash__ = None

    def map_rows(self, fn, label: str | None = None, chunk: int = 1 << 18) -> "WordSet":
        """Image under a length-preserving row transform."""
        out = self.copy_empty(label)
        for length in self.lengths():
            parts = []
            n = len(self._buckets[length])
            for start in range(0, n, chunk):
                parts.append(pack(fn(self.rows(length, start, start + chunk)), self.rank))
            out._buckets[length] = np.unique(np.concatenate(parts))
        return out

    def inverse(self) -> "WordSet":
        return self.map_rows(lambda rows: -rows[:, ::-1], label=f"{self.label}^-1")

    def __repr__(self):
        extra = ", sampled" if self.sampled else ""
        return f"WordSet({self.label!r}, size={len(self)}, lengths={self.lengths()}{extra})"
