"""Word sets built from a cyclically reduced g0 of even length 2*l0.

    R_0        cyclic permutations of g0 and g0^-1
    C_i        conjugates of g0^{+-1} of length 2i, i.e. u r u^-1 with r in R_0
    C_i(j)     members of C_i whose letters k0+1 .. i-l0 are 2j-periodic
    C_i'       C_i minus the C_i(j), 1 <= j <= (i-l0)/k0
    R_i        roots of the products h h' (h, h' in C_i') longer than 4i - 2k0
    R_i^sigma  rotations sigma_j(R_i), 0 <= j <= (i-l0)/k0
    C_i(k)     elements of length 2k whose root lies in R_i^sigma

Every cardinality, length window and disjointness claim about these sets
is checked by construction.  Mass bounds are reported and never asserted:
they are asymptotic in i and k0.
"""

from __future__ import annotations

import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np

from .characters import Character
from .errors import InvalidInput, ResourceLimitError
from .freegroup import (
    FreeGroup,
    Word,
    cyclic_closure,
    cyclic_permutation,
    format_word,
    inverse,
    is_cyclically_reduced,
    is_periodic,
    is_reduced,
    reduce_word,
    root,
)
from .wordsets import WordSet, pack

# pair products examined by build_Ri before it falls back to sampling
MAX_PAIR_CHECKS = 25_000_000
PAIR_BLOCK = 1 << 20


@dataclass(frozen=True)
class ConstructionParams:
    g0: Word
    rank: int = 2
    k0: int | None = None
    alpha: float = 1.0
    check_k0: bool = False

    def __post_init__(self):
        group = FreeGroup(self.rank)
        g0 = group.reduce(self.g0)
        if not g0 or len(g0) % 2:
            raise InvalidInput(f"g0 must have even positive length, got {format_word(g0)!r}")
        if not is_cyclically_reduced(g0):
            raise InvalidInput(f"g0 must be cyclically reduced, got {format_word(g0)!r}")
        if not 0 < self.alpha <= 1:
            raise InvalidInput(f"alpha must lie in (0, 1], got {self.alpha}")
        object.__setattr__(self, "g0", g0)
        k0 = self.k0 if self.k0 is not None else default_k0(self.rank, self.alpha)
        if k0 < 4:
            raise InvalidInput(f"k0 must be >= 4, got {k0}")
        if self.check_k0 and (2 * self.rank - 1) ** (-k0) > self.alpha ** 2 / 4:
            raise InvalidInput(f"(2N-1)^-k0 <= alpha^2/4 fails for k0={k0}, alpha={self.alpha}")
        object.__setattr__(self, "k0", k0)

    @property
    def group(self) -> FreeGroup:
        return FreeGroup(self.rank)

    @property
    def l0(self) -> int:
        return len(self.g0) // 2

    @property
    def r0_size(self) -> int:
        return len(cyclic_closure(self.g0))

    @property
    def c0(self) -> float:
        q = 2 * self.rank - 1
        return self.r0_size * (2 * self.rank - 2) / q ** (self.l0 + 1)

    def ci_size(self, i: int) -> int:
        """|R_0| (2N-2) (2N-1)^(i-l0-1), exact."""
        if i <= self.l0:
            raise InvalidInput(f"need i > l0 = {self.l0}, got {i}")
        return self.r0_size * (2 * self.rank - 2) * (2 * self.rank - 1) ** (i - self.l0 - 1)

    def cij_bound(self, j: int) -> float:
        return self.c0 * (2 * self.rank - 1) ** (2 * j + self.k0 + self.l0)

    def sigma_steps(self, i: int) -> int:
        """floor((i - l0) / k0): the largest rotation used for R_i^sigma."""
        return (i - self.l0) // self.k0

    def as_dict(self) -> dict:
        return {
            "g0": format_word(self.g0),
            "rank": self.rank,
            "l0": self.l0,
            "k0": self.k0,
            "alpha": self.alpha,
            "c0": self.c0,
        }


def default_k0(rank: int, alpha: float) -> int:
    """max(4, least k0 with (2N-1)^-k0 <= alpha^2 / 4)."""
    q = 2 * rank - 1
    k = 1
    while q ** (-k) > alpha ** 2 / 4:
        k += 1
    return max(4, k)


# -- R_0 and C_i --------------------------------------------------------------

def build_R0(params: ConstructionParams) -> WordSet:
    return WordSet.from_words(params.rank, sorted(cyclic_closure(params.g0)), label="R_0", params={})


def build_Ci(params: ConstructionParams, i: int) -> WordSet:
    """All conjugates of g0^{+-1} of length 2i.

    u r u^-1 is reduced as written iff the last letter of u cancels
    neither the first nor the last letter of r.
    """
    if i <= params.l0:
        raise InvalidInput(f"need i > l0 = {params.l0}, got {i}")
    m = i - params.l0
    us = params.group.reduced_array(m)
    uinv = -us[:, ::-1]
    out = WordSet(params.rank, label="C_i", params={"i": i})
    for r in sorted(cyclic_closure(params.g0)):
        keep = (us[:, -1] != -r[0]) & (us[:, -1] != r[-1])
        core = np.broadcast_to(np.array(r, dtype=np.int8), (int(keep.sum()), len(r)))
        out.add_rows(np.concatenate([us[keep], core, uinv[keep]], axis=1))
    return out


def conjugates_by_search(params: ConstructionParams, i: int) -> set[Word]:
    """Oracle for `build_Ci`: conjugate every r in R_0 by every reduced u of
    length i - l0, reduce, and keep what has length 2i."""
    out = set()
    cores = cyclic_closure(params.g0)
    for u in params.group.enumerate_reduced(i - params.l0):
        ui = inverse(u)
        for r in cores:
            g = reduce_word(u + r + ui)
            if len(g) == 2 * i:
                out.add(g)
    return out


def _periodic_mask(rows: np.ndarray, period: int, start: int, stop: int) -> np.ndarray:
    """Row-wise `is_periodic` on 1-indexed positions start..stop."""
    ok = np.ones(len(rows), dtype=bool)
    for n in range(start, stop - period + 1):
        ok &= rows[:, n - 1] == rows[:, n + period - 1]
    return ok


def periodicity_window(params: ConstructionParams, i: int) -> tuple[int, int]:
    return params.k0 + 1, i - params.l0


def window_is_vacuous(params: ConstructionParams, i: int, j: int) -> bool:
    start, stop = periodicity_window(params, i)
    return stop - start < 2 * j


def build_Cij(params: ConstructionParams, i: int, j: int, ci: WordSet | None = None) -> WordSet:
    if j <= 0:
        raise InvalidInput(f"j must be positive, got {j}")
    ci = ci if ci is not None else build_Ci(params, i)
    start, stop = periodicity_window(params, i)
    rows = ci.rows(2 * i)
    keep = _periodic_mask(rows, 2 * j, start, stop)
    return WordSet.from_rows(params.rank, rows[keep], label="C_i_j", params={"i": i, "j": j})


def excluded_periods(params: ConstructionParams, i: int, mode: str = "nonvacuous") -> list[int]:
    """The j removed from C_i to form C_i'.

    ``"literal"`` takes every 1 <= j <= (i-l0)/k0.  ``"nonvacuous"`` (the
    default) skips j whose periodicity window contains no pair of
    positions 2j apart: such a C_i(j) is all of C_i and flags nothing.
    """
    js = list(range(1, params.sigma_steps(i) + 1))
    if mode == "literal":
        return js
    if mode == "nonvacuous":
        return [j for j in js if not window_is_vacuous(params, i, j)]
    raise InvalidInput(f"unknown exclusion mode {mode!r}")


def build_Ci_prime(params: ConstructionParams, i: int, mode: str = "nonvacuous", ci: WordSet | None = None) -> WordSet:
    ci = ci if ci is not None else build_Ci(params, i)
    rows = ci.rows(2 * i)
    start, stop = periodicity_window(params, i)
    bad = np.zeros(len(rows), dtype=bool)
    js = excluded_periods(params, i, mode)
    for j in js:
        bad |= _periodic_mask(rows, 2 * j, start, stop)
    out = WordSet.from_rows(params.rank, rows[~bad], label="C_i_prime", params={"i": i, "mode": mode})
    out.stats = {"excluded_periods": js, "removed": int(bad.sum())}
    return out


# -- R_i ---------------------------------------------------------------------

def _roots_of_rows(g: np.ndarray) -> dict[int, np.ndarray]:
    """Split reduced rows of equal length into roots, grouped by root length."""
    n, length = g.shape
    half = (length - 1) // 2
    if half <= 0:
        return {length: g}
    mirror = g[:, :half] == -g[:, ::-1][:, :half]
    p = np.cumprod(mirror, axis=1).sum(axis=1)
    out = {}
    for pv in np.unique(p):
        sel = p == pv
        out[length - 2 * int(pv)] = g[sel][:, pv:length - pv]
    return out


def build_Ri(
    params: ConstructionParams,
    i: int,
    ci_prime: WordSet | None = None,
    max_pairs: int = MAX_PAIR_CHECKS,
    seed: int = 0,
) -> WordSet:
    """Roots r(h h') over pairs in C_i' with l(h h') > 4i - 2k0.

    l(h h') = 4i - 2c where c is the cancellation at the seam, so the pair
    is kept iff fewer than k0 letters cancel; only the first k0 letters of
    h' against h^-1 are ever compared.  Past ``max_pairs`` pair checks a
    seeded uniform sample of first factors is used and the set is marked
    sampled.
    """
    cp = ci_prime if ci_prime is not None else build_Ci_prime(params, i)
    h = cp.rows(2 * i)
    n = len(h)
    k0 = params.k0
    head = min(k0, 2 * i)
    out = WordSet(params.rank, label="R_i", params={"i": i})
    first = np.arange(n)
    if n * n > max_pairs:
        rng = np.random.default_rng(seed)
        first = np.sort(rng.choice(n, size=max(1, max_pairs // n), replace=False))
        out.sampled = True
    tail_inv = -h[:, ::-1][:, :head]        # first letters of h^-1
    h_head = h[:, :head]
    block = max(1, PAIR_BLOCK // max(n, 1))
    collected: dict[int, list[np.ndarray]] = {}
    pairs = kept = 0
    for start in range(0, len(first), block):
        ia_rows = first[start:start + block]
        eq = tail_inv[ia_rows][:, None, :] == h_head[None, :, :]
        cancel = np.cumprod(eq, axis=2).sum(axis=2)      # (block, n)
        pairs += cancel.size
        for c in range(min(k0, 2 * i)):
            a_idx, b_idx = np.nonzero(cancel == c)
            if not len(a_idx):
                continue
            kept += len(a_idx)
            g = np.concatenate([h[ia_rows[a_idx], :2 * i - c], h[b_idx, c:]], axis=1)
            for length, roots in _roots_of_rows(g).items():
                collected.setdefault(length, []).append(pack(roots, params.rank))
    max_mult = 0
    for length, parts in collected.items():
        keys, counts = np.unique(np.concatenate(parts), return_counts=True)
        out._buckets[length] = keys
        max_mult = max(max_mult, int(counts.max()))
    out.stats = {
        "pairs_checked": pairs,
        "pairs_kept": kept,
        "first_factors": len(first),
        "ci_prime_size": n,
        "max_multiplicity": max_mult,
        "multiplicity_bound": (2 * params.rank - 1) ** k0,
    }
    return out


def root_window(params: ConstructionParams, i: int) -> tuple[int, int]:
    return 4 * i - 4 * params.k0 + 4, 4 * i


def root_window_violations(params: ConstructionParams, i: int, ri: WordSet, limit: int = 10) -> list[str]:
    """Members of R_i that are not cyclically reduced of even length in the window."""
    lo, hi = root_window(params, i)
    bad = []
    for length in ri.lengths():
        if length % 2 or not lo <= length <= hi:
            bad.append(f"length {length} outside [{lo}, {hi}]")
        for start in range(0, len(ri.keys(length)), 1 << 18):
            rows = ri.rows(length, start, start + (1 << 18))
            inner = (rows[:, 1:] == -rows[:, :-1]).any(axis=1)
            wrap = rows[:, 0] == -rows[:, -1]
            for r in rows[inner | wrap][:limit]:
                bad.append(f"not cyclically reduced: {format_word(r.tolist())}")
    return bad[:limit]


def build_Ri_sigma(params: ConstructionParams, i: int, ri: WordSet | None = None) -> WordSet:
    """Union of sigma_j(R_i), 0 <= j <= floor((i-l0)/k0).

    stats["collisions"] = (J+1)|R_i| - |R_i^sigma|; zero means every
    rotation of every root is new.
    """
    ri = ri if ri is not None else build_Ri(params, i)
    steps = params.sigma_steps(i)
    out = WordSet(params.rank, label="R_i_sigma", params={"i": i})
    out.sampled = ri.sampled
    for length in ri.lengths():
        parts = []
        for start in range(0, len(ri.keys(length)), 1 << 18):
            rows = ri.rows(length, start, start + (1 << 18))
            for j in range(steps + 1):
                parts.append(pack(np.roll(rows, j, axis=1), params.rank))
        out._buckets[length] = np.unique(np.concatenate(parts))
    expected = (steps + 1) * len(ri)
    out.stats = {"rotations": steps + 1, "expected": expected, "collisions": expected - len(out)}
    return out


# -- C_i(k): elements of length 2k with root in a given set ----------------------

def conjugator_count(root_length: int, total_length: int, rank: int) -> int:
    """Elements of the given length whose root is a fixed cyclically
    reduced word of ``root_length`` letters."""
    if total_length < root_length or (total_length - root_length) % 2:
        return 0
    c = (total_length - root_length) // 2
    if c == 0:
        return 1
    return (2 * rank - 2) * (2 * rank - 1) ** (c - 1)


class RootShell:
    """{g : l(g) = 2k, r(g) in roots}, kept implicit through its roots.

    A reduced word has exactly one root, so membership, size, disjointness
    and phi-mass (phi is a class function) all reduce to the root set.
    """

    label = "script_C_i_k"

    def __init__(self, roots: WordSet, k: int, params: dict | None = None):
        self.roots = roots
        self.k = k
        self.rank = roots.rank
        self.params = {"k": k, **(params or {})}
        self.sampled = roots.sampled

    def live_lengths(self) -> list[int]:
        return [L for L in self.roots.lengths() if conjugator_count(L, 2 * self.k, self.rank)]

    def __len__(self) -> int:
        return sum(len(self.roots.keys(L)) * conjugator_count(L, 2 * self.k, self.rank)
                   for L in self.roots.lengths())

    def __contains__(self, g) -> bool:
        g = tuple(g)
        if len(g) != 2 * self.k or not is_reduced(g):
            return False
        return root(g) in self.roots

    def histogram(self) -> dict[int, int]:
        return {2 * self.k: len(self)} if len(self) else {}

    def roots_in_use(self) -> WordSet:
        out = WordSet(self.rank, label="roots")
        for L in self.live_lengths():
            out._buckets[L] = self.roots.keys(L)
        return out

    def isdisjoint(self, other: "RootShell") -> bool:
        if other.k != self.k:
            return True
        return len(self.roots_in_use().intersection(other.roots_in_use())) == 0

    def intersection_size(self, other: "RootShell") -> int:
        if other.k != self.k:
            return 0
        common = self.roots_in_use().intersection(other.roots_in_use())
        return sum(len(common.keys(L)) * conjugator_count(L, 2 * self.k, self.rank) for L in common.lengths())

    def extensions(self, r: Sequence[int]) -> Iterator[Word]:
        """The elements of length 2k with root r."""
        r = tuple(r)
        c = (2 * self.k - len(r)) // 2
        if conjugator_count(len(r), 2 * self.k, self.rank) == 0:
            return
        if c == 0:
            yield r
            return
        for u in FreeGroup(self.rank).enumerate_reduced(c):
            if u[-1] == -r[0] or u[-1] == r[-1]:
                continue
            yield u + r + inverse(u)

    def __iter__(self) -> Iterator[Word]:
        for L in self.live_lengths():
            for rows in (self.roots.rows(L),):
                for r in rows:
                    yield from self.extensions(tuple(int(x) for x in r))

    def __repr__(self):
        return f"RootShell(k={self.k}, size={len(self)}, roots={len(self.roots)})"


def build_script_Ci_k(params: ConstructionParams, i: int, k: int, ri_sigma: WordSet | None = None) -> RootShell:
    if k < 2 * i:
        raise InvalidInput(f"need k >= 2i = {2 * i}, got {k}")
    ri_sigma = ri_sigma if ri_sigma is not None else build_Ri_sigma(params, i)
    return RootShell(ri_sigma, k, params={"i": i})


# -- circular permutation lemma ----------------------------------------------------

@dataclass
class CircularReport:
    trials: int
    hits: int = 0
    nontrivial_hits: int = 0
    planted: int = 0
    counterexamples: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    def as_dict(self) -> dict:
        return {
            "trials": self.trials,
            "hypothesis_hits": self.hits,
            "nontrivial_hits": self.nontrivial_hits,
            "planted": self.planted,
            "counterexamples": self.counterexamples,
            "passed": self.passed,
        }


def _random_tail(rng, group: FreeGroup, length: int, after: int | None) -> list[int]:
    out: list[int] = []
    prev = after
    while len(out) < length:
        x = int(rng.choice(group.letters))
        if prev is not None and x == -prev:
            continue
        out.append(x)
        prev = x
    return out


def _periodic_word(rng, group: FreeGroup, length: int, period: int) -> list[int] | None:
    block = _random_tail(rng, group, period, None)
    if block[0] == -block[-1]:
        return None
    return [block[t % period] for t in range(length)]


def _split(g: Word, lu: int, la: int) -> tuple[Word, Word, Word, Word] | None:
    """Read g as u a u^-1 b with l(u) = lu, l(a) = la, no cancellation."""
    if 2 * lu + la > len(g) or not is_reduced(g):
        return None
    u, a = g[:lu], g[lu:lu + la]
    if g[lu + la:2 * lu + la] != inverse(u):
        return None
    return u, a, inverse(u), g[2 * lu + la:]


def verify_circular_lemma(trials: int = 10_000, max_len: int = 12, seed: int = 0, rank: int = 2) -> CircularReport:
    """Randomised search for g = sigma_t(g') with g = u a u^-1 b and
    g' = u' a' u'^-1 b' of matching block lengths but u not 2t-periodic.

    Half of the trials draw g' at random and keep the rotations that
    happen to split; half plant the split by construction so that
    nontrivial t are exercised.  Every hit also replays u_i = u'_{i-t}
    for t < i <= l and u_i = u'_{i+t} for 1 <= i <= l - t.
    """
    group = FreeGroup(rank)
    rng = np.random.default_rng(seed)
    report = CircularReport(trials)
    for trial in range(trials):
        lu = int(rng.integers(1, max(2, max_len // 2)))
        rest = max_len - 2 * lu
        la = int(rng.integers(0, rest + 1))
        lb = int(rng.integers(0, rest - la + 1))
        planted = trial % 2 == 1
        if planted:
            t = int(rng.integers(1, max(2, (lu + 1) // 2)))
            if 2 * t >= lu or la < t or lb < t:
                planted = False
        if planted:
            u = _periodic_word(rng, group, lu, 2 * t)
            if u is None:
                continue
            uprime = [u[(j + t) % (2 * t)] for j in range(lu)]
            a_head = _random_tail(rng, group, la - t, uprime[-1])
            a_prime = a_head + list(inverse(u))[:t]
            b_head = _random_tail(rng, group, lb - t, -uprime[0])
            b_prime = b_head + u[:t]
            gp = tuple(uprime + a_prime + list(inverse(uprime)) + b_prime)
            report.planted += 1
        else:
            uprime = _random_tail(rng, group, lu, None)
            a_prime = _random_tail(rng, group, la, uprime[-1])
            b_prime = _random_tail(rng, group, lb, -uprime[0])
            gp = tuple(uprime + a_prime + list(inverse(uprime)) + b_prime)
            t = int(rng.integers(0, len(gp)))
        if _split(gp, lu, la) is None:
            continue
        g = cyclic_permutation(gp, t)
        parts = _split(g, lu, la)
        if parts is None:
            continue
        report.hits += 1
        u = parts[0]
        up = gp[:lu]
        if t == 0 or 2 * t >= lu:
            continue
        report.nontrivial_hits += 1
        problems = []
        if not is_periodic(u, 2 * t):
            problems.append("u not 2t-periodic")
        if any(u[i - 1] != up[i - t - 1] for i in range(t + 1, lu + 1)):
            problems.append("u_i != u'_(i-t)")
        if any(u[i - 1] != up[i + t - 1] for i in range(1, lu - t + 1)):
            problems.append("u_i != u'_(i+t)")
        if problems:
            report.counterexamples.append({
                "g_prime": format_word(gp), "g": format_word(g), "t": t,
                "l_u": lu, "l_a": la, "problems": problems,
            })
    return report


# -- reports ---------------------------------------------------------------

@dataclass
class SetReport:
    label: str
    params: dict
    cardinality: int
    histogram: dict
    mass: float | None
    bound: float | None
    bound_kind: str
    satisfied: bool | None
    sampled: bool = False
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "params": self.params,
            "cardinality": self.cardinality,
            "length_histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "mass": self.mass,
            "bound": self.bound,
            "bound_kind": self.bound_kind,
            "bound_satisfied": self.satisfied,
            "sampled": self.sampled,
            **self.extras,
        }


def wordset_mass(phi: Character, ws: WordSet) -> float:
    total = 0.0
    for rows in ws.iter_rows():
        total += float(phi.evaluate_many(rows).sum())
    return total


def shell_mass(phi: Character, shell: RootShell) -> float:
    total = 0.0
    for L in shell.live_lengths():
        weight = conjugator_count(L, 2 * shell.k, shell.rank)
        n = len(shell.roots.keys(L))
        for start in range(0, n, 1 << 18):
            total += weight * float(phi.evaluate_many(shell.roots.rows(L, start, start + (1 << 18))).sum())
    return total


def mass_bound(params: ConstructionParams, label: str, alpha: float, i: int | None = None,
               j: int | None = None, k: int | None = None) -> tuple[float | None, str]:
    """The lower bound on sum phi over the named set, or the size bound for C_i(j)."""
    q = 2 * params.rank - 1
    c0, k0 = params.c0, params.k0
    if label == "R_0":
        return alpha * params.r0_size, "mass_lower"
    if label == "C_i":
        return alpha * c0 * q ** i, "mass_lower"
    if label == "C_i_prime":
        return alpha * (c0 / 2) * q ** i, "mass_lower"
    if label == "C_i_j":
        return params.cij_bound(j), "cardinality_upper"
    if label == "R_i":
        return (c0 / 8) * alpha ** 2 * q ** (2 * i - k0), "mass_lower"
    if label == "R_i_sigma":
        return params.sigma_steps(i) * (c0 / 8) * alpha ** 2 * q ** (2 * i - k0), "mass_lower"
    if label == "script_C_i_k":
        if i is None or k is None:
            return None, "none"
        per_root = (2 * params.rank - 2) * q ** (k - 2 * i - 1) if k > 2 * i else 1
        return per_root * params.sigma_steps(i) * (c0 / 8) * alpha ** 2 * q ** (2 * i - k0), "mass_lower"
    return None, "none"


def phi_mass_report(phi: Character, ws, params: ConstructionParams) -> SetReport:
    """Sum of phi over a set against the matching lower bound.

    alpha is phi(g0).  Bounds are only claimed for large i and k0, so
    ``satisfied`` is an observation, not an assertion.
    """
    alpha = phi(params.g0)
    label = ws.label
    i, j, k = ws.params.get("i"), ws.params.get("j"), ws.params.get("k")
    extras: dict = {"alpha": alpha}
    if isinstance(ws, RootShell):
        mass = shell_mass(phi, ws)
        hist = ws.histogram()
        if i:
            extras["empirical_constant"] = mass / (i * (2 * params.rank - 1) ** k)
    else:
        mass = wordset_mass(phi, ws)
        hist = ws.histogram()
    extras.update({f"stat_{key}": v for key, v in getattr(ws, "stats", {}).items()})
    bound, kind = mass_bound(params, label, alpha, i=i, j=j, k=k)
    if kind == "mass_lower":
        satisfied = mass >= bound * (1 - 1e-12)
    elif kind == "cardinality_upper":
        satisfied = len(ws) <= bound
    else:
        satisfied = None
    return SetReport(
        label=label,
        params={**params.as_dict(), **ws.params},
        cardinality=len(ws),
        histogram=hist,
        mass=mass,
        bound=bound,
        bound_kind=kind,
        satisfied=satisfied,
        sampled=ws.sampled,
        extras=extras,
    )


def sphere_mass(phi: Character, k: int) -> dict:
    """sum_{l(g)=2k} phi(g) and the ratio to k^2 (2N-1)^k."""
    group = phi.group
    rows = group.reduced_array(2 * k)
    mass = float(phi.evaluate_many(rows).sum())
    scale = k * k * (2 * group.rank - 1) ** k if k else 1
    return {"k": k, "mass": mass, "constant": mass / scale}


def ci2_chain(phi: Character, params: ConstructionParams, i: int, ci_prime: WordSet | None = None,
              max_pairs: int = 4_000_000) -> dict:
    """Quantities in the bound on sum_{R_i} phi, computed over all pairs.

    * short pairs per h: #{h' : l(h h') <= 4i - 2k0}, at most c0 (2N-1)^(i-k0)
    * full = sum_{h,h'} phi(h h') >= |C_i'|^2 alpha^2  (positivity lemma)
    * long = same sum over pairs with l(h h') > 4i - 2k0
    """
    cp = ci_prime if ci_prime is not None else build_Ci_prime(params, i)
    h = cp.rows(2 * i)
    n = len(h)
    if n * n > max_pairs:
        raise ResourceLimitError(f"{n * n} pairs exceed the cap {max_pairs}")
    alpha = phi(params.g0)
    k0 = params.k0
    full = long = 0.0
    short_max = 0
    for a in range(n):
        prods = _products_with(h[a], h)
        vals = np.array([phi.evaluate(p) for p in prods])
        short = np.array([len(p) <= 4 * i - 2 * k0 for p in prods])
        full += vals.sum()
        long += vals[~short].sum()
        short_max = max(short_max, int(short.sum()))
    short_bound = params.c0 * (2 * params.rank - 1) ** (i - k0)
    return {
        "i": i,
        "ci_prime_size": n,
        "alpha": alpha,
        "full_sum": full,
        "positivity_rhs": n * n * alpha ** 2,
        "positivity_holds": full >= n * n * alpha ** 2 - 1e-9,
        "long_sum": long,
        "long_rhs": n * n * alpha ** 2 - short_bound * n,
        "long_holds": long >= n * n * alpha ** 2 - short_bound * n - 1e-9,
        "short_pairs_max": short_max,
        "short_pairs_bound": short_bound,
        "short_holds": short_max <= short_bound,
    }


def _products_with(h: np.ndarray, others: np.ndarray) -> list[Word]:
    from .freegroup import multiply

    hh = tuple(int(x) for x in h)
    return [multiply(hh, tuple(int(x) for x in o)) for o in others]
