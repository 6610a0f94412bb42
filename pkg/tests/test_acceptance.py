"""Acceptance criteria, one test per criterion.

Each test records a single ``PASS``/``FAIL`` line with the measured
quantities; the lines are printed in the pytest terminal summary and when
this file is run directly with ``python3 tests/test_acceptance.py``.
"""

import math
import time

import numpy as np
import pytest
from scipy.stats import chisquare

from bandsis.analysis import TABLE1, TABLE2, TABLE2_N, clt_check, mcmc_reference, table2
from bandsis.chain import (
    chain_model,
    coupling_time_test,
    exact_theta_moments,
    extract_constants,
    max_correlation,
    paths_to_permutations,
    sample_uniform_many,
)
from bandsis.cli import main as cli_main
from bandsis.counting import count_matchings
from bandsis.graph import BandSpec, band_graph, enumerate_matchings, permanent_ryser
from bandsis.optprob import TABLE3, convergence_rate_check, solve_opt_probs, verify_bounded_ratio
from bandsis.sampler import estimate_count, log_mu
from bandsis.states import encode_permutation, enumerate_states

RESULTS: list[str] = []


def record(number: int, title: str, passed: bool, detail: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d} {title}: {detail}"
    RESULTS.append(line)
    assert passed, line


def test_01_oracle_equivalence():
    start = time.perf_counter()
    bad = []
    checked = 0
    for s in (1, 2, 3):
        for t in (1, 2, 3):
            for n in range(1, 11):
                spec = BandSpec(s, t, n)
                g = band_graph(spec)
                dp, ryser, listed = count_matchings(spec), permanent_ryser(g), len(enumerate_matchings(g))
                checked += 1
                if not dp == ryser == listed:
                    bad.append((s, t, n, dp, ryser, listed))
    elapsed = time.perf_counter() - start
    record(1, "oracle equivalence", not bad and elapsed < 30,
           f"{checked} instances, {len(bad)} mismatches, {elapsed:.1f}s (limit 30s)")


def test_02_fibonacci_identity():
    a = [count_matchings(BandSpec(1, 1, n)) for n in range(1, 31)]
    ok = all(a[k] == a[k - 1] + a[k - 2] for k in range(2, 30)) and a[:2] == [1, 2]
    record(2, "Fibonacci recurrence", ok, f"a_1..a_30 exact, a_30 = {a[-1]}")


def test_03_table3():
    start = time.perf_counter()
    dev = max(abs(p - q) for t in range(1, 10) for p, q in zip(solve_opt_probs(t).p, TABLE3[t]))
    elapsed = time.perf_counter() - start
    record(3, "Table 3", dev <= 1e-5 and elapsed < 1, f"45 entries, max |dev| = {dev:.2e} (tol 1e-5), {elapsed:.2f}s")


def test_04_table1():
    start = time.perf_counter()
    worst_c = worst_d = 0.0
    for (s, t), (c_ref, d_ref) in TABLE1.items():
        c, d = extract_constants(s, t, 2048)
        worst_c = max(worst_c, abs(c - c_ref))
        worst_d = max(worst_d, abs(d - d_ref))
    elapsed = time.perf_counter() - start
    ok = worst_c <= 1e-3 and worst_d <= 1e-3 and elapsed < 300
    record(4, "Table 1", ok, f"7 pairs at n = 2048/4096, max |dc| = {worst_c:.1e}, max |dd| = {worst_d:.1e} "
                             f"(tol 1e-3), {elapsed:.1f}s")


def test_05_table2():
    start = time.perf_counter()
    mcmc_dev = max(abs(mcmc_reference(n) - v) for n, v in zip(TABLE2_N, TABLE2["mcmc"]))
    pairs = [(2, 1), (3, 1), (3, 2)]
    sizes = (500, 1000, 2000)
    tab = table2(pairs, sizes)
    rel = max(
        abs(tab.value(*pair, n) / TABLE2[pair][TABLE2_N.index(n)] - 1) for pair in pairs for n in sizes
    )
    elapsed = time.perf_counter() - start
    ok = mcmc_dev <= 1e-3 and rel <= 0.05 and elapsed < 300
    record(5, "Table 2", ok, f"MCMC row max |dev| = {mcmc_dev:.1e} (tol 1e-3), predicted max rel dev = "
                             f"{rel:.2%} (tol 5%), {elapsed:.1f}s")


def test_06_bounded_ratio():
    spreads = {(t, n): verify_bounded_ratio(t, n) for t in (1, 2, 3) for n in range(1, 10)}
    worst = max(spreads.values())
    record(6, "bounded log-mu spread", worst <= 2 * math.log(2),
           f"max spread over t = 1..3, n <= 9 is {worst:.4f} (bound {2 * math.log(2):.4f})")


def test_07_convergence_rate():
    rep = convergence_rate_check(range(10, 26), (0, 1, 2))
    scaled = max(rep["scaled"].values())
    lo, hi = min(rep["ratios"].values()), max(rep["ratios"].values())
    ok = 0.25 <= lo and hi <= 0.75 and scaled < 1.0
    record(7, "convergence rate", ok,
           f"e*2^(t+k) <= {scaled:.3f} for t = 10..25, k = 0..2; ratios in [{lo:.4f}, {hi:.4f}] (need [0.25, 0.75])")


def test_08_clt():
    start = time.perf_counter()
    reps = [clt_check(BandSpec(2, 1, 500), 100_000, seed=0, workers=4),
            clt_check(BandSpec(1, 1, 1000), 100_000, seed=0, workers=4)]
    elapsed = time.perf_counter() - start
    ok = all(r.ks_statistic <= 0.02 for r in reps) and elapsed < 120
    detail = ", ".join(f"({r.spec.s},{r.spec.t},{r.spec.n}) KS = {r.ks_statistic:.4f} [raw {r.ks_raw:.4f}]"
                       for r in reps)
    record(8, "CLT", ok, f"{detail} (tol 0.02, continuity-corrected), N = 1e5, {elapsed:.1f}s")


def test_09_estimator():
    worst = 0.0
    for s in (1, 2):
        for t in (1, 2):
            for n in range(1, 9):
                spec = BandSpec(s, t, n)
                perms = enumerate_matchings(band_graph(spec))
                kinds = ("uniform", "sequence", "limiting") + (("opt-t1",) if t == 1 else ())
                for kind in kinds:
                    total = math.fsum(math.exp(log_mu(kind, spec, p)) for p in perms)
                    worst = max(worst, abs(total - 1))
    spec = BandSpec(2, 2, 30)
    est = estimate_count("sequence", spec, 100_000, seed=0)
    exact = math.log(count_matchings(spec))
    z = abs(est.log_estimate - exact) / est.stderr_log
    ok = worst <= 1e-12 and z <= 3
    record(9, "estimator", ok, f"max |sum mu - 1| = {worst:.1e} (tol 1e-12); (2,2,30) N = 1e5: "
                               f"{est.log_estimate:.4f} vs {exact:.4f}, {z:.2f} stderr (tol 3)")


def test_10_chain_validity():
    worst_row = 0.0
    for s in (1, 2, 3):
        for t in (1, 2, 3):
            for n in (1, 5, 17, 40):
                model = chain_model(BandSpec(s, t, n))
                pis = model.marginals()
                for i in range(n):
                    rows = model.kernel(i).matrix[pis[i] > 0].sum(axis=1)
                    worst_row = max(worst_row, float(np.max(np.abs(rows - 1))))
    spec = BandSpec(2, 2, 5)
    perms = enumerate_matchings(band_graph(spec))
    index = {p: k for k, p in enumerate(perms)}
    drawn = paths_to_permutations(enumerate_states(2, 2), sample_uniform_many(spec, 1_000_000, seed=0))
    keys = drawn @ (10 ** np.arange(4, -1, -1))
    lookup = {int(sum(v * 10 ** (4 - k) for k, v in enumerate(p))): index[p] for p in perms}
    counts = np.bincount([lookup[int(k)] for k in keys], minlength=len(perms))
    pvalue = chisquare(counts).pvalue
    worst_mom = 0.0
    for s in (1, 2, 3):
        for t in (1, 2, 3):
            for n in range(1, 9):
                sp = BandSpec(s, t, n)
                theta = np.array([sum(x[0] == -s for x in encode_permutation(p, sp)[:-1])
                                  for p in enumerate_matchings(band_graph(sp))], dtype=float)
                rep = exact_theta_moments(sp)
                for got, want in ((rep.E_theta, theta.mean()), (rep.Var_theta, theta.var())):
                    err = abs(got - want) / max(abs(want), 1e-300) if want else abs(got)
                    worst_mom = max(worst_mom, err)
    ok = worst_row <= 1e-12 and pvalue > 1e-3 and worst_mom <= 1e-12
    record(10, "chain validity", ok, f"max row-sum error {worst_row:.1e} (tol 1e-12); (2,2,5) chi-square "
                                     f"p = {pvalue:.3f} over {len(perms)} cells, 1e6 draws (need > 0.001); "
                                     f"moments max rel err {worst_mom:.1e} (tol 1e-12)")


def test_11_clt_premises():
    parts = []
    ok = True
    for s, t in ((2, 1), (2, 2)):
        reps = [max_correlation(BandSpec(s, t, n)) for n in (100, 200, 400)]
        gaps = [r.min_gap for r in reps]
        below = all(np.all(r.rho < 1) for r in reps)
        stable = max(gaps) - min(gaps) <= 1e-3
        ok &= below and stable
        parts.append(f"({s},{t}) max rho = {max(r.max_rho for r in reps):.4f}, min_gap spread "
                     f"{max(gaps) - min(gaps):.1e}")
    cpl = coupling_time_test(BandSpec(2, 1, 200), seed=0, trials=2000)
    ok &= cpl.mean_square < cpl.bound
    parts.append(f"coupling E[delay^2] = {cpl.mean_square:.2f} < {cpl.bound:.1f}")
    record(11, "CLT premises", ok, "; ".join(parts))


def test_12_determinism(capsys):
    spec = BandSpec(2, 1, 60)
    ests = {w: estimate_count("uniform", spec, 20_000, seed=42, workers=w) for w in (1, 4, 16)}
    clts = {w: clt_check(BandSpec(2, 1, 100), 20_000, seed=42, workers=w).ks_statistic for w in (1, 4, 16)}
    outs = set()
    for w in (1, 4, 16):
        cli_main(["estimate", "--s", "3", "--t", "2", "--n", "30", "--samples", "5000",
                  "--seed", "7", "--sampler", "limiting", "--workers", str(w)])
        outs.add(capsys.readouterr().out)
    ok = len(set(ests.values())) == 1 and len(set(clts.values())) == 1 and len(outs) == 1
    record(12, "determinism", ok, "estimate, clt and CLI output identical for workers 1, 4, 16")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
