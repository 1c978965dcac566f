import numpy as np
import pytest

from fibham.errors import ResolutionTooCoarse
from fibham.spectrum import (
    BandCover,
    band_cover,
    escape_indices,
    escape_test,
    gaps_from_cover,
    merge_intervals,
    spectral_cover,
)
from fibham.tracemap import fibonacci, half_traces


def periodic_band_edges(V, k):
    """Independent oracle: eigenvalues of the period-F_k operator at Bloch phases 0 and pi."""
    q, p = fibonacci(k), fibonacci(k - 1)
    n = np.arange(q)
    v = V * (((n * p) % q) >= q - p)
    edges = []
    for corner in (1.0, -1.0):
        H = np.diag(v.astype(float)) + np.diag(np.ones(q - 1), 1) + np.diag(np.ones(q - 1), -1)
        if q == 1:
            H[0, 0] += 2 * corner
        elif q == 2:
            H[0, 1] += corner
            H[1, 0] += corner
        else:
            H[0, -1] += corner
            H[-1, 0] += corner
        edges.append(np.linalg.eigvalsh(H))
    e = np.sort(np.concatenate(edges))
    return e.reshape(-1, 2)


@pytest.mark.parametrize("V,k", [(0.5, 6), (0.5, 9), (1.0, 10), (0.2, 11), (0.05, 8)])
def test_band_edges_match_periodic_oracle(V, k):
    cover = band_cover(V, k)
    ref = periodic_band_edges(V, k)
    assert len(cover) == fibonacci(k) == len(ref)
    np.testing.assert_allclose(cover.bands, ref, atol=1e-8)


def test_band_edges_sit_on_level_one():
    cover = band_cover(0.3, 14)
    x = half_traces(cover.bands.ravel(), 0.3, 14)
    np.testing.assert_allclose(np.abs(x), 1.0, atol=1e-5)


def test_free_cover_is_one_symmetric_band():
    for k in (1, 5, 12):
        c = band_cover(0.0, k)
        assert len(c) == 1
        np.testing.assert_allclose(c.bands[0], [-2, 2], atol=1e-9)


def test_lengths_shrink_and_counts_grow():
    lengths = [band_cover(0.5, k).total_length for k in range(8, 17)]
    assert lengths[4] < 4
    assert all(b <= a + 1e-6 for a, b in zip(lengths, lengths[1:]))
    counts = [len(band_cover(0.5, k)) for k in range(8, 17)]
    assert all(c2 >= c0 for c0, c2 in zip(counts, counts[2:]))


def test_approximants_nest():
    V = 0.4
    outer = spectral_cover(V, 10)
    inner = spectral_cover(V, 12)
    tol = 1e-9
    mids = inner.bands.ravel()
    assert np.all(outer.contains(mids, tol=tol))


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        band_cover(-0.1, 5)
    with pytest.raises(ValueError):
        band_cover(0.5, 0)
    with pytest.raises(ValueError):
        band_cover(0.5, 5, resolution=0)


def test_resolution_too_coarse_signalled():
    with pytest.raises(ResolutionTooCoarse):
        band_cover(0.01, 22)


def test_escape_basic_cases():
    v = escape_test(3.0, 0.0)
    assert v.escaped and v.escape_index is not None and v.witness is not None
    v = escape_test(0.0, 0.0, max_iter=1000)
    assert not v.escaped and v.escape_index is None
    with pytest.raises(ValueError):
        escape_test(0.0, 0.0, max_iter=0)


def test_escape_agrees_with_band_membership_at_zero():
    inside = band_cover(0.5, 16).contains(0.0)
    assert escape_test(0.0, 0.5, 2000).escaped == (not inside)


def test_escape_never_fires_inside_bands():
    V = 0.5
    rng = np.random.default_rng(11)
    E = rng.uniform(-2.5, 2.5, 1000)
    esc = escape_indices(E, V, 2000)
    # after escape at n every later half-trace exceeds 1, so E leaves sigma_k for k >= n - 1
    for k in range(2, 17):
        c = band_cover(V, k)
        gone = (esc >= 0) & (esc - 1 <= k)
        assert not np.any(c.contains(E[gone], tol=-1e-9))
    assert np.count_nonzero(esc >= 0) > 500
    # scalar and vector versions agree
    for e, n in zip(E[:50], esc[:50]):
        v = escape_test(e, V, 2000)
        assert v.escaped == (n >= 0)
        if v.escaped:
            assert v.escape_index == n


def test_gaps_from_cover():
    c = BandCover(0.0, 1, np.array([[0, 1], [2, 3]]))
    assert gaps_from_cover(c, (0, 3)) == [(1.0, 2.0)]
    assert gaps_from_cover(BandCover(0.0, 1, np.array([[-2, 2]])), (-2, 2)) == []
    with pytest.raises(ValueError):
        gaps_from_cover(c, (0.5, 3))


def test_largest_gap_stable_under_refinement():
    def largest(k):
        g = np.array(gaps_from_cover(band_cover(0.5, k)))
        return g[np.argmax(g[:, 1] - g[:, 0])]

    np.testing.assert_allclose(largest(14), largest(16), atol=1e-4)


def test_merge_intervals():
    iv = np.array([[3, 4], [0, 1], [0.5, 2], [4, 5]])
    np.testing.assert_array_equal(merge_intervals(iv), [[0, 2], [3, 5]])


def test_serialization_round_trip():
    c = band_cover(0.5, 7)
    back = BandCover.from_json(c.to_json())
    np.testing.assert_array_equal(back.bands, c.bands)
    lines = c.to_csv().splitlines()
    assert lines[0] == "level,band_index,a,b"
    assert len(lines) == len(c) + 1
    a = float(lines[1].split(",")[2])
    assert a == c.bands[0, 0]
