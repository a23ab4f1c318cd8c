"""The ten acceptance criteria, each at its stated tolerance.

Every test records a single PASS/FAIL line (shown in the terminal summary)
before asserting.
"""

import math
import time

import numpy as np

from freeprobe import spectral, walks
from freeprobe.characters import (
    GroupAlgebraElement,
    TableCharacter,
    find_even_length_witness,
    power_convolve,
    trace_character,
)
from freeprobe.constructions import (
    ConstructionParams,
    build_Ci,
    build_Cij,
    build_Ri,
    build_Ri_sigma,
    build_script_Ci_k,
    root_window_violations,
)
from freeprobe.freegroup import conjugacy_representative
from freeprobe.unitaries import UnitaryFamily
from freeprobe.verify import verify_alphabeta, verify_circular, verify_gram

SQ3 = 2 * math.sqrt(3)


def test_1_return_moments_three_routes(report_criterion):
    t = time.perf_counter()
    expected = [4, 28, 232]
    ns = (1, 2, 3)
    brute = [walks.closed_walk_count_bruteforce(n, 2) for n in ns]
    dp = [walks.closed_walk_count(n, 2) for n in ns]
    a = GroupAlgebraElement.generator_sum(2)
    conv = [power_convolve(a, 2 * n).coefficient(()) for n in ns]
    elapsed = time.perf_counter() - t
    ok = brute == dp == expected and [int(c) for c in conv] == expected and elapsed < 60
    report_criterion(1, ok, f"enumeration {brute}, DP {dp}, convolution {conv}, {elapsed:.1f}s")
    assert ok


def test_2_kesten_threshold_convergence(report_criterion):
    t = time.perf_counter()
    counts = walks.closed_walk_counts(1000, 2)
    roots = [walks.moment_root(counts[n], n) for n in range(1, 1001)]
    elapsed = time.perf_counter() - t
    last = roots[-1]
    monotone = all(b >= a for a, b in zip(roots, roots[1:]))
    ok = 0.98 * SQ3 <= last < SQ3 and monotone and elapsed < 300
    report_criterion(2, ok, f"root at 2n=2000 is {last:.6f} ({(1 - last / SQ3) * 100:.3f}% below 2sqrt3), "
                            f"nondecreasing={monotone}, {elapsed:.1f}s")
    assert ok


def test_3_catalan_walk_bound(report_criterion):
    violations = []
    for rank in (2, 3):
        for n in range(1, 6):
            for k in range(n + 1):
                counts = walks.sphere_walk_counts(n, k, rank)
                bound = walks.walk_count_bound(n, k, rank)
                if counts.min() < bound or counts.min() != counts.max():
                    violations.append((rank, n, k))
    ok = not violations
    report_criterion(3, ok, f"N in (2, 3), n <= 5, exhaustive over spheres: {len(violations)} violations")
    assert ok


def test_4_gram_positivity(report_criterion):
    gram = verify_gram(samples=50, seed=0, max_d=8, max_k=6, max_len=6)
    ab = verify_alphabeta(samples=50, seed=0, max_d=8, max_k=6, max_len=6)
    worst = min(c.detail["min_eigenvalue"] for c in gram.checks)
    bad = len(gram.counterexamples) + len(ab.counterexamples)
    ok = gram.passed and ab.passed
    report_criterion(4, ok, f"50 trace characters, min Gram eigenvalue {worst:.3e}, {bad} violations")
    assert ok


def test_5_spectral_sanity(report_criterion):
    t = time.perf_counter()
    problems = []
    for rank in (2, 3, 4):
        fam = UnitaryFamily(np.exp(1j * np.linspace(0.2, 2.5, rank)).reshape(rank, 1, 1))
        if abs(spectral.operator_norm(fam).value - 2 * rank) > 1e-9:
            problems.append(f"d=1 N={rank}")
    tested = 0
    for rank in (2, 3):
        for d in range(1, 9):
            for seed in range(2):
                fam = UnitaryFamily.haar(d, rank, seed=100 * d + seed)
                for sub in ("full", "traceless"):
                    est = spectral.operator_norm(fam, subspace=sub)
                    if abs(est.value - spectral.dense_norm(fam, sub)) > 1e-7:
                        problems.append(f"dense mismatch d={d} N={rank} {sub}")
                    if sub == "full" and not (2 * math.sqrt(2 * rank - 1) - 1e-7 <= est.value <= 2 * rank + 1e-7):
                        problems.append(f"bounds d={d} N={rank}")
                tested += 1
    elapsed = time.perf_counter() - t
    ok = not problems and elapsed < 120
    report_criterion(5, ok, f"{tested} families, problems {problems}, {elapsed:.1f}s")
    assert ok


def _median_abs_gap(d, seeds):
    return float(np.median([abs(spectral.freeness_gap(UnitaryFamily.haar(d, 2, seed=s))) for s in seeds]))


def test_6_asymptotic_freeness_trend(report_criterion):
    t = time.perf_counter()
    attempts = []
    for seeds in (range(10), range(1000, 1010)):
        small, large = _median_abs_gap(5, seeds), _median_abs_gap(50, seeds)
        attempts.append((small, large))
        if large < small:
            break
    elapsed = time.perf_counter() - t
    small, large = attempts[-1]
    ok = large < small and elapsed < 600
    report_criterion(6, ok, f"median |gap| d=5 {small:.4f}, d=50 {large:.4f}, attempts {len(attempts)}, "
                            f"{elapsed:.1f}s")
    assert ok


def test_7_construction_suite(report_criterion):
    t = time.perf_counter()
    p = ConstructionParams((1, 2), 2, k0=4)
    problems = []
    shells_roots = {}
    collisions = {}
    for i in range(5, 10):
        ci = build_Ci(p, i)
        if len(ci) != p.ci_size(i):
            problems.append(f"|C_{i}| = {len(ci)}")
        for j in (1, 2):
            if len(build_Cij(p, i, j, ci=ci)) > p.cij_bound(j):
                problems.append(f"|C_{i}({j})| over bound")
        ri = build_Ri(p, i)
        bad = root_window_violations(p, i, ri)
        if bad or not len(ri):
            problems.append(f"R_{i} window: {bad}")
        rs = build_Ri_sigma(p, i, ri)
        expected = (p.sigma_steps(i) + 1) * len(ri)
        collisions[i] = expected - len(rs)
        if len(rs) != expected:
            problems.append(f"|R_{i}^sigma| = {len(rs)} != {expected}")
        if i in (5, 9):
            shells_roots[i] = rs
        del ci, ri, rs
    a = build_script_Ci_k(p, 5, 18, shells_roots[5])
    b = build_script_Ci_k(p, 9, 18, shells_roots[9])
    common = a.intersection_size(b)
    if common:
        problems.append(f"C_5(18) and C_9(18) share {common}")
    elapsed = time.perf_counter() - t
    if elapsed >= 600:
        problems.append(f"runtime {elapsed:.0f}s")
    ok = not problems
    report_criterion(7, ok, f"sigma collisions by i {collisions}, disjoint(5,9,k=18) overlap {common}, "
                            f"{elapsed:.0f}s; problems {problems}")
    assert ok


def test_8_circular_permutation(report_criterion):
    rep = verify_circular(trials=10_000, max_len=12, seed=0, rank=2)
    detail = rep.checks[0].detail
    ok = rep.passed and not rep.counterexamples
    report_criterion(8, ok, f"10^4 trials, {detail['nontrivial_hits']} nontrivial hits, "
                            f"{len(rep.counterexamples)} counterexamples")
    assert ok


def test_9_even_length_witness(report_criterion):
    pauli = UnitaryFamily(np.array([np.diag([1, 1j]), [[0, 1], [1, 0]]], dtype=complex))
    entries = dict(TableCharacter.from_character(trace_character(pauli), 6).entries)
    entries[conjugacy_representative((1,))] = 0.5
    phi = TableCharacter(2, entries)
    w1 = find_even_length_witness(phi, (1,))
    w2 = find_even_length_witness(phi, (1,))
    ok = len(w1) % 2 == 0 and len(w1) > 0 and phi(w1) > 0 and w1 == w2
    report_criterion(9, ok, f"witness {w1} of length {len(w1)}, value {phi(w1):.4f}, deterministic={w1 == w2}")
    assert ok


def test_10_binomial_asymptotics(report_criterion):
    ratios = {n: walks.central_binomial_ratio(n, walks.integer_cube_root_ceil(n)) for n in (10 ** 3, 10 ** 4)}
    ok = all(abs(r - 1) <= 0.05 for r in ratios.values())
    shown = ", ".join(f"n={n}: {r:.4f} (exp(-k^2/n) = "
                      f"{math.exp(-walks.integer_cube_root_ceil(n) ** 2 / n):.4f})" for n, r in ratios.items())
    report_criterion(10, ok, shown)
    assert ok
