"""Named verification suites behind ``freeprobe verify --lemma NAME``.

Each suite returns a `VerifyReport` listing every check with its instance
parameters.  Checks are either assertions (they decide pass/fail) or
observations (recorded only; used for bounds that are asymptotic).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import walks
from .characters import gram_matrix, product_positivity_bound, trace_character
from .constructions import (
    ConstructionParams,
    build_Ci,
    build_Ci_prime,
    build_Cij,
    build_Ri,
    build_Ri_sigma,
    build_script_Ci_k,
    conjugates_by_search,
    root_window_violations,
    verify_circular_lemma,
)
from .errors import InvalidInput
from .freegroup import FreeGroup, format_word
from .unitaries import UnitaryFamily

LEMMAS = ("cardinality", "rootwindow", "sigma-distinct", "disjoint", "circular", "gram", "alphabeta", "catalan")


@dataclass
class Check:
    name: str
    params: dict
    passed: bool
    assertion: bool = True
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"name": self.name, "params": self.params, "passed": self.passed,
                "mode": "assert" if self.assertion else "report", **self.detail}


@dataclass
class VerifyReport:
    lemma: str
    checks: list[Check] = field(default_factory=list)
    counterexamples: list = field(default_factory=list)

    def add(self, name, params, passed, assertion=True, **detail) -> Check:
        c = Check(name, params, bool(passed), assertion, detail)
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.assertion) and not self.counterexamples

    def as_dict(self) -> dict:
        return {
            "lemma": self.lemma,
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
            "counterexamples": self.counterexamples,
        }


def verify_cardinality(params: ConstructionParams, i_values, j_max: int = 2, exhaustive_max: int = 5) -> VerifyReport:
    """|C_i| against the closed form (and exhaustive search for small i),
    |C_i(j)| against its bound, and the inclusions and inverse closure of C_i'."""
    rep = VerifyReport("cardinality")
    for i in i_values:
        ci = build_Ci(params, i)
        rep.add("C_i size", {"i": i}, len(ci) == params.ci_size(i), size=len(ci), formula=params.ci_size(i))
        if i <= exhaustive_max:
            same = ci.to_set() == conjugates_by_search(params, i)
            rep.add("C_i equals exhaustive conjugates", {"i": i}, same)
        for j in range(1, j_max + 1):
            cij = build_Cij(params, i, j, ci=ci)
            bound = params.cij_bound(j)
            rep.add("C_i(j) bound", {"i": i, "j": j}, len(cij) <= bound and cij.issubset(ci),
                    size=len(cij), bound=bound)
        cp = build_Ci_prime(params, i, ci=ci)
        rep.add("C_i' subset and inverse closed", {"i": i}, cp.issubset(ci) and cp.inverse() == cp, size=len(cp))
        target = params.c0 / 2 * (2 * params.rank - 1) ** i
        rep.add("C_i' >= (c0/2)(2N-1)^i", {"i": i}, len(cp) >= target, assertion=False,
                size=len(cp), bound=target)
    return rep


def verify_rootwindow(params: ConstructionParams, i_values, max_pairs: int | None = None, seed: int = 0) -> VerifyReport:
    rep = VerifyReport("rootwindow")
    kw = {} if max_pairs is None else {"max_pairs": max_pairs}
    for i in i_values:
        ri = build_Ri(params, i, seed=seed, **kw)
        bad = root_window_violations(params, i, ri)
        rep.add("R_i root window", {"i": i}, not bad and len(ri) > 0, size=len(ri), sampled=ri.sampled,
                histogram={str(k): v for k, v in ri.histogram().items()}, violations=bad)
        mult = ri.stats["max_multiplicity"] <= ri.stats["multiplicity_bound"]
        rep.add("pairs per root <= (2N-1)^k0", {"i": i}, mult, assertion=False,
                max_multiplicity=ri.stats["max_multiplicity"], bound=ri.stats["multiplicity_bound"])
    return rep


def verify_sigma_distinct(params: ConstructionParams, i_values, max_pairs: int | None = None, seed: int = 0) -> VerifyReport:
    rep = VerifyReport("sigma-distinct")
    kw = {} if max_pairs is None else {"max_pairs": max_pairs}
    for i in i_values:
        ri = build_Ri(params, i, seed=seed, **kw)
        rs = build_Ri_sigma(params, i, ri)
        rep.add("|R_i^sigma| = (J+1)|R_i|", {"i": i}, rs.stats["collisions"] == 0,
                size=len(rs), expected=rs.stats["expected"], collisions=rs.stats["collisions"],
                sampled=rs.sampled)
    return rep


def verify_disjoint(params: ConstructionParams, i: int, i2: int, k: int, max_pairs: int | None = None,
                    seed: int = 0) -> VerifyReport:
    """Intersection of C_i(k) and C_i2(k), computed exactly through roots."""
    rep = VerifyReport("disjoint")
    kw = {} if max_pairs is None else {"max_pairs": max_pairs}
    shells = []
    for ii in (i, i2):
        rs = build_Ri_sigma(params, ii, build_Ri(params, ii, seed=seed, **kw))
        shells.append(build_script_Ci_k(params, ii, k, rs))
    common = shells[0].intersection_size(shells[1])
    claimed = abs(i - i2) >= params.k0
    rep.add("C_i(k) and C_i'(k) disjoint", {"i": i, "i2": i2, "k": k}, common == 0 or not claimed,
            assertion=claimed, sizes=[len(s) for s in shells], intersection=common,
            sampled=any(s.sampled for s in shells))
    return rep


def verify_circular(trials: int = 10_000, max_len: int = 12, seed: int = 0, rank: int = 2) -> VerifyReport:
    rep = VerifyReport("circular")
    res = verify_circular_lemma(trials, max_len, seed, rank)
    d = res.as_dict()
    rep.add("u is 2t-periodic", {"trials": trials, "max_len": max_len, "seed": seed}, res.passed,
            hypothesis_hits=d["hypothesis_hits"], nontrivial_hits=d["nontrivial_hits"], planted=d["planted"])
    rep.counterexamples = res.counterexamples
    return rep


def _random_instance(seed: int, rank: int, max_d: int, max_k: int, max_len: int):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, max_d + 1))
    family = UnitaryFamily.haar(d, rank, seed=int(rng.integers(2 ** 32)))
    group = FreeGroup(rank)
    k = int(rng.integers(1, max_k + 1))
    hs = [group.random_word(int(rng.integers(0, max_len + 1)), rng, reduced=True) for _ in range(k)]
    return d, trace_character(family), hs


def _positivity_trials(kind: str, samples: int, seed: int, rank: int, max_d: int, max_k: int, max_len: int,
                       threads: int) -> VerifyReport:
    rep = VerifyReport(kind)

    def run(s):
        d, phi, hs = _random_instance(int(np.random.SeedSequence([seed, s]).generate_state(1)[0]),
                                      rank, max_d, max_k, max_len)
        params = {"sample": s, "d": d, "elements": [format_word(h) for h in hs]}
        if kind == "gram":
            ev = gram_matrix(phi, hs).min_eigenvalue()
            return params, ev >= -1e-8, {"min_eigenvalue": ev}
        b = product_positivity_bound(phi, hs)
        return params, b.holds, {"lhs": b.lhs, "rhs": b.rhs, "alpha": b.alpha}

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(run, range(samples)))
    for params, ok, detail in results:
        rep.add("Gram PSD" if kind == "gram" else "sum >= k^2 alpha^2", params, ok, **detail)
        if not ok:
            rep.counterexamples.append({**params, **detail})
    return rep


def verify_gram(samples: int = 50, seed: int = 0, rank: int = 2, max_d: int = 8, max_k: int = 6,
                max_len: int = 6, threads: int = 1) -> VerifyReport:
    return _positivity_trials("gram", samples, seed, rank, max_d, max_k, max_len, threads)


def verify_alphabeta(samples: int = 50, seed: int = 0, rank: int = 2, max_d: int = 8, max_k: int = 6,
                     max_len: int = 6, threads: int = 1) -> VerifyReport:
    return _positivity_trials("alphabeta", samples, seed, rank, max_d, max_k, max_len, threads)


def verify_catalan(max_n: int = 12, ranks=(2, 3), walk_max_n: int = 5) -> VerifyReport:
    """Catalan triangle against the path DP, closed walks against the ballot
    sum, and the exact walk counts against C_{n,k}(2N-1)^(n-k)."""
    rep = VerifyReport("catalan")
    for n in range(max_n + 1):
        for k in range(n + 1):
            c, p = walks.catalan_triangle(n, k), walks.lattice_path_count(n, k)
            if c != p:
                rep.counterexamples.append({"n": n, "k": k, "closed_form": c, "paths": p})
    rep.add("C_{n,k} equals lattice path count", {"max_n": max_n}, not rep.counterexamples)
    for N in ranks:
        dp = walks.closed_walk_counts(max_n, N)
        ok = all(dp[n] == walks.closed_walk_count_ballot(n, N) for n in range(max_n + 1))
        rep.add("closed walks: distance DP equals ballot sum", {"rank": N, "max_n": max_n}, ok)
        bad = []
        for n in range(1, walk_max_n + 1):
            for k in range(n + 1):
                counts = walks.sphere_walk_counts(n, k, N)
                bound = walks.walk_count_bound(n, k, N)
                if counts.min() < bound or counts.min() != counts.max():
                    bad.append({"rank": N, "n": n, "k": k, "min": int(counts.min()),
                                "max": int(counts.max()), "bound": bound})
        rep.add("walk count >= C_{n,k}(2N-1)^(n-k), constant on spheres", {"rank": N, "max_n": walk_max_n},
                not bad, violations=bad)
        rep.counterexamples.extend(bad)
    return rep


def run(lemma: str, **kw) -> VerifyReport:
    fns = {
        "cardinality": verify_cardinality,
        "rootwindow": verify_rootwindow,
        "sigma-distinct": verify_sigma_distinct,
        "disjoint": verify_disjoint,
        "circular": verify_circular,
        "gram": verify_gram,
        "alphabeta": verify_alphabeta,
        "catalan": verify_catalan,
    }
    if lemma not in fns:
        raise InvalidInput(f"unknown lemma {lemma!r}; choose from {', '.join(LEMMAS)}")
    return fns[lemma](**kw)

