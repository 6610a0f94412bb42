import math

import numpy as np
import pytest

from bandsis.analysis import (
    TABLE1,
    TABLE2,
    TABLE2_CROSSOVER,
    TABLE2_N,
    DegenerateDistributionError,
    clt_check,
    crossover_N_star,
    mcmc_reference,
    naive_variance_comparison,
    predicted_log_cost,
    table1,
    table2,
)
from bandsis.graph import BandSpec, band_graph, enumerate_matchings
from bandsis.sampler import log_mu, required_samples


@pytest.mark.parametrize("k, n", list(enumerate(TABLE2_N)))
def test_mcmc_row(k, n):
    assert mcmc_reference(n) == pytest.approx(TABLE2["mcmc"][k], abs=1e-3)


@pytest.mark.parametrize("pair", [(5, 1), (7, 1), (3, 2)])
def test_table1_rows(pair):
    [(s, t, c, d)] = table1([pair])
    assert (s, t) == pair
    assert c == pytest.approx(TABLE1[pair][0], abs=1e-3)
    assert d == pytest.approx(TABLE1[pair][1], abs=1e-3)


def test_constants_approach_log2():
    cs = [c for _, _, c, _ in table1([(s, 1) for s in range(2, 8)], n_big=1024)]
    assert all(a < b for a, b in zip(cs, cs[1:]))
    assert cs[-1] < math.log(2) and math.log(2) - cs[-1] < 2e-3


@pytest.mark.parametrize("pair", [(2, 1), (3, 1), (3, 2)])
def test_table2_rows_within_five_percent(pair):
    tab = table2([pair])
    for k, n in enumerate(TABLE2_N):
        assert tab.value(*pair, n) == pytest.approx(TABLE2[pair][k], rel=0.05)
    assert tab.mcmc_row()[100] == pytest.approx(33.7634, abs=1e-3)


def test_table2_is_required_samples_plus_log_n():
    spec = BandSpec(2, 1, 1000)
    assert predicted_log_cost(spec) == pytest.approx(required_samples(spec) + math.log(1000))
    assert predicted_log_cost(spec) == pytest.approx(27.7317, rel=0.05)
    assert table2([(2, 1)], [500]).to_json()[0]["n"] == 500


def test_naive_divergence_matches_enumeration():
    spec = BandSpec(1, 1, 8)
    perms = enumerate_matchings(band_graph(spec))
    inv_mu = sum(math.exp(-log_mu("uniform", spec, p)) for p in perms)
    chi2 = inv_mu / len(perms) ** 2 - 1
    log_naive, log_el = naive_variance_comparison(spec)
    assert log_naive == pytest.approx(math.log(chi2), rel=1e-12)
    assert log_el == pytest.approx(required_samples(spec))


def test_naive_bound_grows_faster():
    rows = [naive_variance_comparison(BandSpec(2, 1, n)) for n in (256, 512, 1024)]
    naive = np.array([r[0] for r in rows])
    el = np.array([r[1] for r in rows])
    assert np.all(np.diff(naive) > np.diff(el))


@pytest.mark.parametrize("s, n", [(3, 3), (5, 4), (6, 6)])
def test_uniform_sampler_has_zero_divergence(s, n):
    # with s >= n the band imposes nothing on the left and mu is uniform
    assert naive_variance_comparison(BandSpec(s, 1, n))[0] == -math.inf


def test_naive_size_limit():
    with pytest.raises(ValueError):
        naive_variance_comparison(BandSpec(2, 1, 5000))


def test_crossover_ordering_and_scale():
    wide = crossover_N_star((3, 2))
    narrow = crossover_N_star(BandSpec(2, 1, 10))
    assert wide.n_star < narrow.n_star
    assert TABLE2_CROSSOVER[(2, 1)] / 3 <= narrow.n_star <= 3 * TABLE2_CROSSOVER[(2, 1)]
    assert predicted_log_cost(BandSpec(2, 1, narrow.n_star)) >= mcmc_reference(narrow.n_star)
    assert predicted_log_cost(BandSpec(2, 1, narrow.n_star - 1)) < mcmc_reference(narrow.n_star - 1)


def test_crossover_finite_for_wide_band():
    rep = crossover_N_star((4, 4))
    assert 2 <= rep.n_star < 1000
    assert rep.to_json()["n_star"] == rep.n_star


def test_clt_small_instance():
    rep = clt_check(BandSpec(2, 1, 250), 20_000, seed=3)
    assert 0 <= rep.ks_statistic <= rep.ks_raw <= 1
    assert rep.ks_statistic < 0.02
    assert rep.sample_mean == pytest.approx(rep.mean, rel=0.01)
    assert set(rep.to_json()) >= {"ks_statistic", "ks_raw", "n_samples"}


def test_clt_rejects_degenerate_and_small():
    with pytest.raises(DegenerateDistributionError):
        clt_check(BandSpec(2, 1, 1), 10_000)
    with pytest.raises(ValueError):
        clt_check(BandSpec(2, 1, 50), 100)


def test_clt_improves_with_n():
    ks = [clt_check(BandSpec(2, 1, n), 100_000, seed=0, workers=4).ks_statistic for n in (250, 1000)]
    assert ks[1] <= ks[0] + 0.005
