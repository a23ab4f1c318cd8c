"""Exact path counts on the Cayley tree of F_N.

Everything here is integer arithmetic.  ``n`` is always a half-length:
walks have 2n steps and end at an element of length 2k.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from functools import lru_cache

import numpy as np

from .errors import InvalidInput, ResourceLimitError
from .freegroup import FreeGroup, reduce_word

# cap on the number of group elements tracked by the tree DP
MAX_BALL_ENTRIES = 20_000_000


def binomial(n: int, k: int) -> int:
    if n < 0:
        raise InvalidInput(f"binomial needs n >= 0, got {n}")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def catalan_triangle(n: int, k: int) -> int:
    """C_{n,k} = binom(2n, n-k) - binom(2n, n-k-1).

    Counts lattice paths of 2n steps of +-1 that start at 0, stay >= 0
    and end at height 2k.
    """
    if n < 0 or k < 0 or k > n:
        raise InvalidInput(f"catalan_triangle needs 0 <= k <= n, got n={n}, k={k}")
    return binomial(2 * n, n - k) - binomial(2 * n, n - k - 1)


def lattice_path_count(n: int, k: int) -> int:
    """Nonnegative +-1 paths of length 2n ending at 2k, by direct DP."""
    if n < 0 or k < 0 or k > n:
        raise InvalidInput(f"need 0 <= k <= n, got n={n}, k={k}")
    heights = [1]
    for _ in range(2 * n):
        nxt = [0] * (len(heights) + 1)
        for h, c in enumerate(heights):
            if c:
                nxt[h + 1] += c
                if h:
                    nxt[h - 1] += c
        heights = nxt
    return heights[2 * k] if 2 * k < len(heights) else 0


def walk_count_bound(n: int, k: int, rank: int) -> int:
    """N_{n,k} = C_{n,k} (2N-1)^(n-k).

    A lower bound on the number of 2n-letter words that reduce to a fixed
    element of length 2k; equality fails already at n=1, k=0.
    """
    if rank < 2:
        raise InvalidInput(f"rank must be >= 2, got {rank}")
    return catalan_triangle(n, k) * (2 * rank - 1) ** (n - k)


def closed_walk_counts(n_max: int, rank: int) -> list[int]:
    """Number of words of length 2n reducing to e, for n = 0..n_max.

    Distance-from-identity DP: a step away from e has 2N choices at the
    identity and 2N-1 elsewhere; a step back has exactly one.
    """
    if n_max < 0:
        raise InvalidInput(f"n_max must be >= 0, got {n_max}")
    if rank < 2:
        raise InvalidInput(f"rank must be >= 2, got {rank}")
    q = 2 * rank - 1
    steps = 2 * n_max
    counts = [1]
    out = [1]
    for s in range(1, steps + 1):
        # distances beyond steps - s can never come back in time
        top = min(s, steps - s)
        nxt = [0] * (top + 1)
        for d, c in enumerate(counts):
            if not c:
                continue
            if d + 1 <= top:
                nxt[d + 1] += c * (2 * rank if d == 0 else q)
            if d >= 1 and d - 1 <= top:
                nxt[d - 1] += c
        counts = nxt
        if s % 2 == 0:
            out.append(counts[0])
    return out


def closed_walk_count(n: int, rank: int) -> int:
    return closed_walk_counts(n, rank)[n]


def closed_walk_count_ballot(n: int, rank: int) -> int:
    """Same count as `closed_walk_count`, summed over Dyck paths by returns.

    A Dyck path of length 2n with j up-steps from height 0 is weighted
    (2N)^j (2N-1)^(n-j); there are j/(2n-j) * binom(2n-j, n) of them.
    """
    if n == 0:
        return 1
    q = 2 * rank - 1
    total = 0
    for j in range(1, n + 1):
        paths = j * binomial(2 * n - j, n) // (2 * n - j)
        total += paths * (2 * rank) ** j * q ** (n - j)
    return total


def closed_walk_count_bruteforce(n: int, rank: int) -> int:
    """Enumerate all (2N)^(2n) words; only sensible for tiny n."""
    import itertools

    letters = FreeGroup(rank).letters
    return sum(
        1 for w in itertools.product(letters, repeat=2 * n) if not reduce_word(w)
    )


# -- per-element counts: DP over the tree ---------------------------------
#
# A reduced word x_1..x_L (L >= 1) is indexed by
#     code = a_1 (2N-1)^(L-1) + d_2 (2N-1)^(L-2) + ... + d_L
# with a_1 the alphabet position of x_1 and d_j the position of x_j among
# the 2N-1 letters other than x_{j-1}^-1.  Appending a letter maps code to
# code*(2N-1) + d; cancelling the last letter maps it to code // (2N-1).

def _element_code(g: Sequence[int], group: FreeGroup) -> int:
    if not g:
        return 0
    letters = group.letters
    code = letters.index(g[0])
    prev = g[0]
    for x in g[1:]:
        succ = [y for y in letters if y != -prev]
        code = code * (2 * group.rank - 1) + succ.index(x)
        prev = x
    return code


@lru_cache(maxsize=8)
def _tree_walk_table(n: int, rank: int) -> tuple[np.ndarray, ...]:
    group = FreeGroup(rank)
    twoN, q = 2 * rank, 2 * rank - 1
    steps = 2 * n
    entries = sum(group.sphere_size(L) for L in range(steps + 1))
    if entries > MAX_BALL_ENTRIES:
        raise ResourceLimitError(
            f"tree DP for n={n}, N={rank} tracks {entries} elements "
            f"(cap {MAX_BALL_ENTRIES})"
        )
    if steps * math.log2(twoN) >= 63:
        raise ResourceLimitError(f"counts for n={n}, N={rank} overflow int64")

    spheres = [np.ones(1, dtype=np.int64)]
    for s in range(1, steps + 1):
        nxt = [np.zeros(group.sphere_size(L), dtype=np.int64) for L in range(s + 1)]
        for L, c in enumerate(spheres):
            if L == 0:
                nxt[1] += c[0]
                continue
            # one letter extends in each of 2N-1 directions
            nxt[L + 1] += np.repeat(c, q)
            # the remaining letter cancels back to the parent
            if L == 1:
                nxt[0][0] += c.sum()
            else:
                nxt[L - 1] += c.reshape(-1, q).sum(axis=1)
        spheres = nxt
    return tuple(spheres)


def sphere_walk_counts(n: int, k: int, rank: int) -> np.ndarray:
    """Exact counts for every element of length 2k, one entry per element."""
    if k < 0 or k > n:
        raise InvalidInput(f"need 0 <= k <= n, got n={n}, k={k}")
    return _tree_walk_table(n, rank)[2 * k]


def exact_walk_count(n: int, g: Sequence[int], rank: int) -> int:
    """Number of words w with l(w) = 2n and reduce(w) = g."""
    group = FreeGroup(rank)
    g = group.reduce(g)
    if n < 0:
        raise InvalidInput(f"n must be >= 0, got {n}")
    if len(g) > 2 * n or len(g) % 2:
        return 0
    return int(_tree_walk_table(n, rank)[len(g)][_element_code(g, group)])


def walk_table(n_max: int, rank: int, exact: bool = True) -> list[dict]:
    """Rows (n, k, C_{n,k}, N_{n,k}, exact_count) for 0 <= k <= n <= n_max.

    ``exact_count`` is None when the tree DP is out of reach.
    """
    rows = []
    for n in range(n_max + 1):
        table = None
        if exact:
            try:
                table = _tree_walk_table(n, rank)
            except ResourceLimitError:
                table = None
        for k in range(n + 1):
            rows.append({
                "n": n,
                "k": k,
                "C_nk": catalan_triangle(n, k),
                "N_nk": walk_count_bound(n, k, rank),
                "exact_count": int(table[2 * k][0]) if table is not None else None,
            })
    return rows


def moment_root(count: int, n: int) -> float:
    """count^(1/(2n)) for an arbitrarily large integer count."""
    if n == 0:
        return 1.0
    if count <= 0:
        return 0.0
    return math.exp(math.log(count) / (2 * n))


def central_binomial_ratio(n: int, k: int | None = None) -> float:
    """binom(2n, n-k) sqrt(pi n) / 4^n, with k = ceil(n^(1/3)) by default."""
    if k is None:
        k = integer_cube_root_ceil(n)
    log_value = math.log(binomial(2 * n, n - k)) + 0.5 * math.log(math.pi * n) - 2 * n * math.log(2)
    return math.exp(log_value)


def integer_cube_root_ceil(n: int) -> int:
    """Smallest integer c with c^3 >= n, without float rounding."""
    if n < 0:
        raise InvalidInput(f"need n >= 0, got {n}")
    c = round(n ** (1 / 3))
    while c ** 3 < n:
        c += 1
    while c > 0 and (c - 1) ** 3 >= n:
        c -= 1
    return c
