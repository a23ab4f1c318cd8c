import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freeprobe.errors import InvalidInput
from freeprobe.freegroup import (
    FreeGroup,
    conjugacy_representative,
    cyclic_closure,
    cyclic_permutation,
    format_word,
    inverse,
    is_cyclically_reduced,
    is_periodic,
    is_reduced,
    multiply,
    parse_word,
    reduce_word,
    root,
    root_decomposition,
)

F2 = FreeGroup(2)
letters2 = st.sampled_from([1, -1, 2, -2])
words2 = st.lists(letters2, max_size=14).map(tuple)
reduced2 = words2.map(reduce_word)


@pytest.mark.parametrize("word, expected", [
    ((), ()),
    ((1, -1), ()),
    ((1, 2, -2, -1), ()),
    ((1, 2, -2, 2), (1, 2)),
    ((-1, 1, 1), (1,)),
    ((2, 1, -1, -2, 1), (1,)),
])
def test_reduce_word(word, expected):
    assert reduce_word(word) == expected


def test_multiply_cancels_at_the_seam():
    assert multiply((1, 2), (-2, 1)) == (1, 1)
    assert multiply((1, 2), (-2, -1)) == ()
    assert multiply((), (2,)) == (2,)


@given(reduced2, reduced2, reduced2)
def test_group_axioms(a, b, c):
    assert multiply(multiply(a, b), c) == multiply(a, multiply(b, c))
    assert multiply(a, inverse(a)) == ()
    assert multiply(a, ()) == a
    assert inverse(multiply(a, b)) == multiply(inverse(b), inverse(a))


@given(words2)
def test_reduce_is_idempotent_and_reduced(w):
    r = reduce_word(w)
    assert is_reduced(r)
    assert reduce_word(r) == r


def test_sphere_sizes_match_enumeration():
    for n in range(6):
        words = list(F2.enumerate_reduced(n))
        assert len(words) == len(set(words)) == F2.sphere_size(n)
        assert all(is_reduced(w) for w in words)


@pytest.mark.parametrize("rank, length", [(2, 1), (2, 5), (3, 3), (4, 2)])
def test_reduced_array_matches_generator(rank, length):
    g = FreeGroup(rank)
    rows = [tuple(int(x) for x in r) for r in g.reduced_array(length)]
    assert rows == list(g.enumerate_reduced(length))


def test_reduced_words_are_exactly_the_irreducible_ones():
    n = 4
    brute = {w for w in itertools.product([1, -1, 2, -2], repeat=n) if reduce_word(w) == w}
    assert brute == set(F2.enumerate_reduced(n))


@pytest.mark.parametrize("w, t, expected", [
    ((1, 2, 3), 1, (3, 1, 2)),
    ((1, 2, 3), 3, (1, 2, 3)),
    ((1, 2, 3), -1, (2, 3, 1)),
    ((), 5, ()),
])
def test_cyclic_permutation(w, t, expected):
    assert cyclic_permutation(w, t) == expected


@pytest.mark.parametrize("w, expected", [
    ((1, 2), True),
    ((1, 2, -1), False),
    ((1,), True),
    ((), True),
    ((1, -1), False),
])
def test_is_cyclically_reduced(w, expected):
    assert is_cyclically_reduced(w) is expected


@given(reduced2)
def test_root_decomposition_roundtrip(g):
    u, v = root_decomposition(g)
    assert multiply(u, multiply(v, inverse(u))) == g
    assert len(g) == 2 * len(u) + len(v)
    assert is_cyclically_reduced(v)


def test_root_examples():
    assert root_decomposition((1, 2, -1)) == ((1,), (2,))
    assert root((1, 2)) == (1, 2)
    assert root(()) == ()
    with pytest.raises(InvalidInput):
        root_decomposition((1, -1))


@pytest.mark.parametrize("w, period, start, stop, expected", [
    ((1, 2, 1, 2, 1), 2, 1, None, True),
    ((1, 2, 1, 1), 2, 1, None, False),
    ((1, 2, 1, 1), 2, 1, 3, True),
    ((2, 2, 1, 2, 1), 2, 2, None, True),
    ((1, 2), 4, 1, None, True),            # empty window
])
def test_is_periodic(w, period, start, stop, expected):
    assert is_periodic(w, period, start, stop) is expected


def test_is_periodic_rejects_nonpositive_period():
    with pytest.raises(InvalidInput):
        is_periodic((1, 2), 0)


def test_cyclic_closure_of_s1s2_and_periodic_word():
    assert cyclic_closure((1, 2)) == {(1, 2), (2, 1), (-2, -1), (-1, -2)}
    assert cyclic_closure((1, 1)) == {(1, 1), (-1, -1)}


@given(reduced2, reduced2)
@settings(max_examples=200)
def test_conjugacy_representative_is_class_invariant(g, c):
    h = multiply(multiply(c, g), inverse(c))
    assert conjugacy_representative(h) == conjugacy_representative(g)
    assert conjugacy_representative(inverse(g)) == conjugacy_representative(g)


def test_enumerate_conjugates_small_case():
    assert F2.enumerate_conjugates((1, 2), 2) == {(1, 2), (2, 1), (-2, -1), (-1, -2)}
    assert F2.enumerate_conjugates((1, 2), 5) == set()
    with pytest.raises(InvalidInput):
        F2.enumerate_conjugates((1, 2, -1), 5)
    with pytest.raises(InvalidInput):
        F2.enumerate_conjugates((1, 2), 1)


@pytest.mark.parametrize("length", [4, 6, 8])
def test_enumerate_conjugates_against_filtering(length):
    target = conjugacy_representative((1, 2))
    brute = {w for w in F2.enumerate_reduced(length) if conjugacy_representative(w) == target}
    assert F2.enumerate_conjugates((1, 2), length) == brute


@pytest.mark.parametrize("text, word", [
    ("1 2 -1", (1, 2, -1)),
    ("abA", (1, 2, -1)),
    ("", ()),
    ("  ", ()),
    ("1,-2", (1, -2)),
])
def test_parse_word(text, word):
    assert parse_word(text) == word


@pytest.mark.parametrize("text", ["1 x", "0 1", "a1?", "ab!"])
def test_parse_word_rejects_garbage(text):
    with pytest.raises(InvalidInput):
        parse_word(text)


def test_format_word_roundtrip():
    w = (1, -2, 3)
    assert format_word(w) == "1 -2 3"
    assert format_word(w, "alpha") == "aBc"
    assert parse_word(format_word(w, "alpha")) == w


def test_group_validates_letters():
    with pytest.raises(InvalidInput):
        F2.reduce((3,))
    with pytest.raises(InvalidInput):
        FreeGroup(1)


def test_random_reduced_word():
    rng = np.random.default_rng(1)
    for n in range(10):
        w = F2.random_word(n, rng, reduced=True)
        assert len(w) == n and is_reduced(w)
