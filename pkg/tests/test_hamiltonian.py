import json
import math

import numpy as np
import pytest

from fibham.errors import EmptyWindow
from fibham.hamiltonian import (
    ALPHA,
    PotentialSpec,
    count_eigenvalues_below,
    default_eps_ladder,
    dos_interval,
    dos_weighted_energies,
    fibonacci_word,
    ids_estimate,
    ids_free,
    local_scaling_exponent,
    potential_value,
    potential_word,
)
from fibham.tracemap import fibonacci


def test_potential_values():
    spec = PotentialSpec(1.0, 0.0)
    assert potential_value(spec, 0) == 0.0
    assert potential_value(spec, 1) == 1.0
    assert abs(ALPHA - (math.sqrt(5) - 1) / 2) < 1e-16
    assert PotentialSpec(0.5, 1.25).omega == 0.25


def test_word_is_substitution_fixed_point():
    w = potential_word(PotentialSpec(1.0), 8)
    np.testing.assert_array_equal(w, [1, 0, 1, 1, 0, 1, 0, 1])
    for k in range(2, 16):
        n = fibonacci(k)
        np.testing.assert_array_equal(potential_word(PotentialSpec(1.0), n), fibonacci_word(n))


def test_window_counts_are_balanced():
    w = potential_word(PotentialSpec(1.0), 5000)
    for k in (5, 8, 11):
        F, F1 = fibonacci(k), fibonacci(k - 1)
        sums = np.convolve(w, np.ones(F), "valid")
        assert set(np.unique(sums)) <= {F1 - 1, F1, F1 + 1}


def test_free_counts_closed_form():
    assert count_eigenvalues_below(PotentialSpec(0.0), 3, 1.0) == 2
    L = 7
    ev = 2 * np.cos(np.arange(1, L + 1) * np.pi / (L + 1))
    E = np.linspace(-2.5, 2.5, 101)
    np.testing.assert_array_equal(count_eigenvalues_below(PotentialSpec(0.0), L, E), (ev[None, :] < E[:, None]).sum(1))


def test_counts_below_gershgorin_are_zero():
    for V in (0.0, 0.5, 1.0):
        assert count_eigenvalues_below(PotentialSpec(V, 0.3), 50, -2 - V - 1e-9) == 0


def test_free_ids_half_filling():
    assert abs(count_eigenvalues_below(PotentialSpec(0.0), 2000, 0.0) / 2000 - 0.5) <= 0.01


def test_counts_match_characteristic_polynomial_roots():
    rng = np.random.default_rng(5)
    for _ in range(100):
        V, w, L = rng.uniform(0, 1), rng.uniform(0, 1), int(rng.integers(1, 13))
        spec = PotentialSpec(V, w)
        d = potential_word(spec, L)
        H = np.diag(d) + np.diag(np.ones(L - 1), 1) + np.diag(np.ones(L - 1), -1)
        roots = np.sort(np.roots(np.poly(H)).real)
        E = rng.uniform(-3, 3)
        if np.min(np.abs(roots - E)) < 1e-6:
            continue
        assert count_eigenvalues_below(spec, L, E) == int(np.sum(roots < E))


def test_zero_pivots_are_handled():
    # the first pivot is exactly zero at E = 0, which is not an eigenvalue for even L
    spec = PotentialSpec(0.0)
    assert count_eigenvalues_below(spec, 2, 0.0) == 1
    assert count_eigenvalues_below(spec, 4, 0.0) == 2


def test_ids_free_values():
    assert ids_free(0.0) == 0.5
    assert ids_free(-2.0) == 0.0 and ids_free(2.0) == 1.0
    assert ids_free(-5.0) == 0.0 and ids_free(5.0) == 1.0
    assert abs(ids_free(math.sqrt(2)) - 0.75) < 1e-15


def test_ids_monotone_and_limits():
    est = ids_estimate(PotentialSpec(0.7, 0.1), 500, np.linspace(-3, 3, 200))
    assert np.all(np.diff(est.values) >= 0)
    assert est.values[0] == 0 and est.values[-1] == 1
    with pytest.raises(ValueError):
        ids_estimate(PotentialSpec(0.7), 10, [1.0, 0.0])


def test_ids_phase_independence():
    rng = np.random.default_rng(2)
    w1, w2 = rng.uniform(0, 1, 2)
    grid = np.linspace(-2.6, 2.6, 400)
    a = ids_estimate(PotentialSpec(0.5, w1), 10_000, grid)
    b = ids_estimate(PotentialSpec(0.5, w2), 10_000, grid)
    assert a.sup_distance(b) <= 0.01


def test_dos_interval():
    assert dos_interval(PotentialSpec(0.5), 100, 3.0, 4.0) == 0.0
    assert abs(dos_interval(PotentialSpec(0.0), 10_000, -2.0, 2.0) - 1.0) <= 1e-3
    with pytest.raises(ValueError):
        dos_interval(PotentialSpec(0.0), 10, 1.0, 1.0)


def test_default_ladder():
    eps = default_eps_ladder(100_000)
    assert eps[0] == 0.1 and np.all(np.diff(eps) < 0)
    assert eps[-1] >= 1e-4 and eps[-1] / 2 < 1e-4
    assert default_eps_ladder(1000)[-1] >= 10 / 1000


def test_free_scaling_exponents():
    spec = PotentialSpec(0.0)
    eps = 0.1 * 0.5 ** np.arange(7)
    assert abs(local_scaling_exponent(spec, 20_000, 0.0, eps).exponent - 1.0) <= 0.05
    assert abs(local_scaling_exponent(spec, 20_000, 2.0, eps).exponent - 0.5) <= 0.05


def test_empty_window_raised():
    with pytest.raises(EmptyWindow):
        local_scaling_exponent(PotentialSpec(0.5), 10, 0.05, [1e-2, 1e-4])
    with pytest.raises(ValueError):
        local_scaling_exponent(PotentialSpec(0.5), 10, 0.0, [1e-4, 1e-2])


def test_dos_weighted_energies_are_eigenvalues():
    spec = PotentialSpec(0.4)
    L = 300
    E = dos_weighted_energies(spec, L, 5)
    d = potential_word(spec, L)
    ev = np.linalg.eigvalsh(np.diag(d) + np.diag(np.ones(L - 1), 1) + np.diag(np.ones(L - 1), -1))
    idx = np.floor((np.arange(5) + 0.5) / 5 * L).astype(int)
    np.testing.assert_allclose(E, ev[idx], atol=1e-10)


def test_serialization():
    est = ids_estimate(PotentialSpec(0.2, 0.3), 50, [-1.0, 0.0, 1.0])
    doc = json.loads(est.to_json())
    assert doc["V"] == 0.2 and doc["L"] == 50 and doc["schema_version"] == 1
    assert est.to_csv().splitlines()[0] == "E,N"
    s = local_scaling_exponent(PotentialSpec(0.0), 2000, 0.0, [0.2, 0.1, 0.05])
    assert json.loads(s.to_json())["exponent"] == s.exponent
