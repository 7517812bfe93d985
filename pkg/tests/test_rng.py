import numpy as np
import pytest
from scipy import stats

import spikedtensor as st
from spikedtensor.errors import ParameterError
from spikedtensor.rng import chunk_sizes, map_streams


def test_seedspec_determinism():
    a = st.sample_gaussian_tensor(4, 3, st.SeedSpec(123, 5))
    b = st.sample_gaussian_tensor(4, 3, st.SeedSpec(123, 5))
    assert np.array_equal(a, b)


def test_seedspec_streams_differ_and_decorrelate():
    g0 = st.SeedSpec(9, 0).generator()
    g1 = st.SeedSpec(9, 1).generator()
    x = g0.standard_normal(20000)
    y = g1.standard_normal(20000)
    assert not np.array_equal(x, y)
    corr = np.corrcoef(x, y)[0, 1]
    assert abs(corr) < 4.0 / np.sqrt(len(x))


def test_seedspec_validation():
    with pytest.raises(ParameterError):
        st.SeedSpec(-1, 0)
    with pytest.raises(ParameterError):
        st.SeedSpec(0, 2**64)


def test_gaussian_tensor_moments():
    n, d = 10, 5  # one draw gives 1e5 entry samples
    z = st.sample_gaussian_tensor(n, d, st.SeedSpec(1, 0))
    flat = z.ravel()
    count = flat.size
    assert count == 10**5
    # entries are N_C(0, 1/n): component std sqrt(1/2n), |z|^2 mean 1/n
    se_mean = np.sqrt(1.0 / (2 * n)) / np.sqrt(count)
    assert abs(np.mean(flat.real)) < 3 * se_mean
    assert abs(np.mean(flat.imag)) < 3 * se_mean
    sq = np.abs(flat) ** 2
    assert abs(np.mean(sq) - 1.0 / n) < 3 * np.std(sq) / np.sqrt(count)


def test_gaussian_tensor_total_energy():
    n, d, reps = 4, 3, 4000
    gen = st.SeedSpec(2, 0).generator()
    norms = np.array([np.sum(np.abs(st.sample_gaussian_tensor(n, d, gen)) ** 2) for _ in range(reps)])
    target = n ** (d - 1)
    assert abs(np.mean(norms) - target) < 3 * np.std(norms) / np.sqrt(reps)


def test_haar_unitarity():
    gen = st.SeedSpec(3, 0).generator()
    for n in (1, 2, 5, 9):
        for _ in range(10):
            u = st.sample_haar_unitary(n, gen)
            assert st.unitarity_defect(u) <= 1e-10


def test_haar_first_entry_moment():
    n, reps = 4, 20000
    us = st.sample_haar_unitaries(n, reps, st.SeedSpec(4, 0))
    sq = np.abs(us[:, 0, 0]) ** 2
    assert abs(np.mean(sq) - 1.0 / n) < 3 * np.std(sq) / np.sqrt(reps)


def test_haar_invariance_of_traces():
    # traces of V @ U, U @ V and U should all be indistinguishable in law
    n, reps = 5, 4000
    gen = st.SeedSpec(5, 0).generator()
    v = st.sample_haar_unitary(n, gen)
    t_plain = np.einsum("bii->b", st.sample_haar_unitaries(n, reps, gen))
    t_left = np.einsum("bii->b", v @ st.sample_haar_unitaries(n, reps, gen))
    t_right = np.einsum("bii->b", st.sample_haar_unitaries(n, reps, gen) @ v)
    for rotated in (t_left, t_right):
        for part in (np.real, np.imag):
            p = stats.mannwhitneyu(part(t_plain), part(rotated)).pvalue
            assert p > 0.01


def test_sphere_vector():
    gen = st.SeedSpec(6, 0).generator()
    for n in (1, 3, 8):
        v = st.sample_unit_sphere(n, gen)
        assert abs(np.linalg.norm(v) - 1.0) < 1e-12


def test_sphere_first_coordinate_moment():
    n, reps = 6, 20000
    gen = st.SeedSpec(7, 0).generator()
    sq = np.array([np.abs(st.sample_unit_sphere(n, gen)[0]) ** 2 for _ in range(reps)])
    assert abs(np.mean(sq) - 1.0 / n) < 3 * np.std(sq) / np.sqrt(reps)


def test_sphere_tail_matches_polar_law():
    # P(|v1| >= t) = (1 - t^2)^(n-1) at t = 0.5, n = 4
    n, t, reps = 4, 0.5, 40000
    gen = st.SeedSpec(8, 0).generator()
    hits = np.array([np.abs(st.sample_unit_sphere(n, gen)[0]) >= t for _ in range(reps)])
    p = np.mean(hits)
    target = (1 - t * t) ** (n - 1)
    assert abs(p - target) < 3 * np.sqrt(target * (1 - target) / reps)


def test_psi_block_norm_and_edges():
    gen = st.SeedSpec(9, 0).generator()
    for _ in range(50):
        b = st.sample_psi_block(6, 3, gen)
        assert np.linalg.norm(b, 2) <= 1.0 + 1e-12
    full = st.sample_psi_block(4, 4, gen)
    assert st.unitarity_defect(full) <= 1e-10
    with pytest.raises(ParameterError):
        st.sample_psi_block(3, 4, gen)


def test_psi_block_r1_is_sphere_coordinate():
    n, reps = 5, 20000
    gen = st.SeedSpec(10, 0).generator()
    sq = np.abs(st.sample_haar_unitaries(n, reps, gen)[:, 0, 0]) ** 2
    assert abs(np.mean(sq) - 1.0 / n) < 3 * np.std(sq) / np.sqrt(reps)


def test_chunk_sizes():
    assert chunk_sizes(10, 3) == [4, 3, 3]
    assert chunk_sizes(2, 16) == [1, 1]
    assert sum(chunk_sizes(100001, 16)) == 100001


def test_map_streams_order_and_thread_invariance():
    sizes = chunk_sizes(1000, 16)
    seed = st.SeedSpec(11, 0)

    def draw(_i, size, gen):
        return gen.standard_normal(size)

    serial = np.concatenate(map_streams(draw, sizes, seed, threads=1))
    parallel = np.concatenate(map_streams(draw, sizes, seed, threads=4))
    assert np.array_equal(serial, parallel)
