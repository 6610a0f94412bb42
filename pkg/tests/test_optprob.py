import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from bandsis.graph import BandSpec
from bandsis.optprob import (
    TABLE3,
    OptProbs,
    conjecture_experiment,
    convergence_rate_check,
    limiting_kernel,
    limiting_prob,
    opt_residuals,
    solve_opt_probs,
    table3,
    verify_bounded_ratio,
)
from bandsis.states import enumerate_states

PHI = (1 + math.sqrt(5)) / 2


def test_t1_is_golden():
    assert solve_opt_probs(1).p[0] == pytest.approx(1 / PHI**2, abs=1e-15)


@pytest.mark.parametrize("t", range(1, 10))
def test_printed_rows(t):
    got = solve_opt_probs(t).p
    assert np.allclose(got, TABLE3[t], atol=1e-5, rtol=0)


@pytest.mark.parametrize("t", range(1, 10))
def test_printed_rows_are_truncations(t):
    got = solve_opt_probs(t).p
    assert [math.floor(p * 1e5) / 1e5 for p in got] == pytest.approx(list(TABLE3[t]), abs=1e-12)


def test_table3_shape():
    rows = table3()
    assert [len(r) for r in rows] == list(range(1, 10))


@pytest.mark.parametrize("t", [1, 5, 17, 40, 64])
def test_solution_properties(t):
    sol = solve_opt_probs(t)
    with mpmath.workdps(60):
        exact = sol.exact
        assert all(mpmath.mpf(1) / 3 < p < mpmath.mpf(1) / 2 for p in exact)
        assert all(a > b for a, b in zip(exact, exact[1:]))
        assert max(opt_residuals(sol.exact)) < mpmath.mpf("1e-20")


def test_solver_range():
    with pytest.raises(ValueError):
        solve_opt_probs(0)
    with pytest.raises(ValueError):
        solve_opt_probs(65)


@pytest.mark.parametrize("k, value", [(0, Fraction(1, 3)), (1, Fraction(3, 7)), (2, Fraction(7, 15))])
def test_limiting_probabilities(k, value):
    assert limiting_prob(k) == value
    assert float(solve_opt_probs(40).exact[40 - k - 1]) == pytest.approx(float(value), abs=1e-9)


def test_limits_are_close_to_row_nine():
    assert float(limiting_prob(1)) == pytest.approx(TABLE3[9][7], abs=5e-4)
    assert float(limiting_prob(2)) == pytest.approx(TABLE3[9][6], abs=5e-4)


def test_geometric_convergence():
    rep = convergence_rate_check(range(10, 26))
    assert len(rep["errors"]) == 48
    assert max(rep["scaled"].values()) < 1.0
    assert all(0.25 <= r <= 0.75 for r in rep["ratios"].values())


@pytest.mark.parametrize("t", [1, 2, 3])
@pytest.mark.parametrize("n", [1, 4, 9])
def test_bounded_ratio(t, n):
    spread = verify_bounded_ratio(t, n)
    assert 0 <= spread <= 2 * math.log(2)
    if n == 1:
        assert spread == 0


def test_uniform_probabilities_break_the_bound():
    # plain 1/2 sampling is not balanced: the spread grows with n
    with pytest.raises(AssertionError):
        verify_bounded_ratio(1, 12, OptProbs.uniform(1))


@pytest.mark.parametrize("s, t", [(1, 1), (2, 2), (3, 1)])
def test_limiting_kernel_rows(s, t):
    kern = limiting_kernel(s, t)
    space = enumerate_states(s, t)
    assert np.allclose(kern.probs.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(kern.probs[space.forced][:, 0] == 0)
    assert len(kern.to_json()["rows"]) == len(space)


def test_fibonacci_limiting_kernel_is_golden():
    kern = limiting_kernel(1, 1)
    a = enumerate_states(1, 1).index[(0,)]
    assert kern.probs[a, 0] == pytest.approx(1 / PHI**2, abs=1e-12)


def test_conjecture_experiment_shape():
    rows = conjecture_experiment(2, 2, 6)
    assert [r["n"] for r in rows] == list(range(1, 7))
    assert all(r["max_ratio"] >= 1 - 1e-12 for r in rows)
    with pytest.raises(ValueError):
        conjecture_experiment(2, 2, 13)


def test_balanced_sampler_on_fibonacci():
    # t = 1 case of the balanced family is the golden-ratio sampler
    from bandsis.sampler import weighted_t1_probs

    table = weighted_t1_probs(BandSpec(1, 1, 10), solve_opt_probs(1))
    assert table[0, enumerate_states(1, 1).index[(0,)], 0] == pytest.approx(1 / PHI**2)


@pytest.mark.parametrize("s", range(1, 10))
def test_balanced_probabilities_are_the_perron_kernel(s):
    # for one-step-right bands the two constructions give the same forward probabilities
    kern = limiting_kernel(s, 1).probs
    space = enumerate_states(s, 1)
    forward = [kern[space.index[(-k,)], 0] for k in range(s)]
    assert np.allclose(forward, solve_opt_probs(s).p, atol=1e-11, rtol=0)
