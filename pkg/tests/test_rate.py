import math

import numpy as np
import pytest

import spikedtensor as st
from conftest import make_random_spec
from spikedtensor.errors import DomainError, ParameterError
from spikedtensor.rate import _sample_psi_stack


def test_eta_expanded_identity_operators(gen):
    spec = make_random_spec(gen)
    eye = [np.eye(spec.n)] * spec.d
    emax = st.eta_max(spec.lambdas, st.gram_set(spec))
    assert st.eta_expanded(spec, eye) == pytest.approx(emax, rel=1e-12)


def test_eta_expanded_rank_one_product_form(gen):
    spec = make_random_spec(gen, r=1, n=5)
    thetas = [st.sample_haar_unitary(5, gen) for _ in range(spec.d)]
    xis = [np.vdot(chi[:, 0], th @ chi[:, 0]) for chi, th in zip(spec.factors, thetas)]
    expected = spec.lambdas[0] ** 2 * np.real(np.prod(xis))
    assert st.eta_expanded(spec, thetas) == pytest.approx(expected, rel=1e-12)


def test_eta_bounded_by_eta_max(gen):
    for _ in range(10):
        spec = make_random_spec(gen)
        emax = st.eta_max(spec.lambdas, st.gram_set(spec))
        for _ in range(50):
            thetas = list(st.sample_haar_unitaries(spec.n, spec.d, gen))
            assert abs(st.eta_expanded(spec, thetas)) <= emax + 1e-9


def test_eta_hadamard_zero_and_identity(gen):
    spec = make_random_spec(gen)
    svd = st.spike_svd(spec)
    zeros = st.PsiSet.from_blocks([np.zeros((spec.r, spec.r))] * spec.d)
    assert st.eta_hadamard(spec.lambdas, svd, zeros) == 0.0
    eyes = st.PsiSet.from_blocks([np.eye(spec.r)] * spec.d)
    emax = st.eta_max(spec.lambdas, st.gram_set(spec))
    assert st.eta_hadamard(spec.lambdas, svd, eyes) == pytest.approx(emax, rel=1e-12)


def test_eta_forms_agree_via_block_extraction(gen):
    for _ in range(60):
        spec = make_random_spec(gen)
        thetas = list(st.sample_haar_unitaries(spec.n, spec.d, gen))
        full = st.eta_expanded(spec, thetas)
        svd, psis = st.psi_blocks_from_mode_operators(spec.factors, thetas)
        reduced = st.eta_hadamard(spec.lambdas, svd, psis)
        assert abs(full - reduced) <= 1e-9 * (1.0 + abs(full))


def test_lemma_identity_case():
    lam = np.array([0.5, 0.25])
    bound = st.lemma_sup_bound(lam, [np.eye(2)] * 3, [1.0, 1.0, 1.0])
    assert bound == pytest.approx(np.sum(lam**2), abs=1e-14)


def test_lemma_plug_in_attains(gen):
    for _ in range(50):
        d = int(gen.integers(2, 5))
        r = int(gen.integers(1, 4))
        lam = gen.uniform(0.1, 1.0, size=r)
        mats = [gen.standard_normal((r, r)) + 1j * gen.standard_normal((r, r)) for _ in range(d)]
        alphas = gen.uniform(0.0, 1.0, size=d)
        bound = st.lemma_sup_bound(lam, mats, alphas)
        had = None
        for a, alpha in zip(mats, alphas):
            core = a @ (alpha * np.eye(r)) @ a.conj().T
            had = core if had is None else had * core
        attained = abs(lam @ had @ lam)
        assert attained <= bound + 1e-12
        assert attained == pytest.approx(bound, abs=1e-12)


def test_lemma_random_psis_never_exceed(gen):
    for _ in range(500):
        d = int(gen.integers(2, 5))
        r = int(gen.integers(1, 4))
        lam = gen.uniform(0.1, 1.0, size=r)
        mats = [gen.standard_normal((r, r)) + 1j * gen.standard_normal((r, r)) for _ in range(d)]
        alphas = gen.uniform(0.0, 1.0, size=d)
        had = None
        for a, alpha in zip(mats, alphas):
            psi = gen.standard_normal((r, r)) + 1j * gen.standard_normal((r, r))
            psi *= alpha / np.linalg.norm(psi, 2)
            core = a @ psi @ a.conj().T
            had = core if had is None else had * core
        value = abs(lam @ had @ lam)
        assert value <= st.lemma_sup_bound(lam, mats, alphas) + 1e-9


def test_grf_lower_bound_values():
    assert st.grf_lower_bound(0.0, 1.0, 3) == 0.0
    assert st.grf_lower_bound(1.0, 1.0, 3) == math.inf
    assert st.grf_lower_bound(-2.0, 1.5, 2) == math.inf
    assert st.grf_lower_bound(0.6, 1.0, 2) == pytest.approx(-2.0 * math.log(0.4), rel=1e-12)
    with pytest.raises(ParameterError):
        st.grf_lower_bound(0.1, 0.0, 3)


def test_grf_psi_rate_cases(gen):
    r = 3
    zeros = st.PsiSet.from_blocks([np.zeros((r, r))] * 2)
    assert st.grf_psi_rate(zeros) == 0.0

    # one unit singular value makes the rate -inf
    block = np.diag([1.0, 0.3, 0.0]).astype(complex)
    psis = st.PsiSet.from_blocks([block, np.zeros((r, r))])
    assert st.grf_psi_rate(psis) == -math.inf

    diag = np.diag([0.5, 0.2, 0.9]).astype(complex)
    psis = st.PsiSet.from_blocks([diag])
    expected = sum(math.log(1 - s * s) for s in (0.5, 0.2, 0.9))
    assert st.grf_psi_rate(psis) == pytest.approx(expected, rel=1e-12)


def test_psi_set_rejects_large_norms():
    with pytest.raises(ParameterError):
        st.PsiSet.from_blocks([1.5 * np.eye(2)])
    good = st.PsiSet.from_blocks([np.eye(2)])
    bad = st.PsiSet(blocks=(1.5 * np.eye(2),), norms=np.array([1.5]))
    with pytest.raises(DomainError):
        st.grf_psi_rate(bad)
    assert st.grf_psi_rate(good) == -math.inf


def test_generous_determinant_bound_per_matrix(gen):
    # log det(I - psi* psi) <= log(1 - |psi|_2^2) for every sampled block
    stack = _sample_psi_stack(3, 8, 4, 2000, gen)
    for pset in stack:
        for block in pset:
            s = np.linalg.svd(block, compute_uv=False)
            top = min(s[0], 1.0)
            with np.errstate(divide="ignore"):
                lhs = float(np.sum(np.log1p(-np.minimum(s, 1.0) ** 2)))
                rhs = float(np.log1p(-top * top))
            assert lhs <= rhs + 1e-12


def test_cloud_invariants(gen):
    spec = make_random_spec(gen, d=3, r=2, n=8)
    cloud = st.sample_grf_cloud(spec, 20000, st.SeedSpec(21, 0), bins=40)
    x, y = cloud.points[:, 0], cloud.points[:, 1]
    assert np.all(np.abs(x) <= cloud.eta_max + 1e-9)
    assert np.all(y <= 0.0)
    assert st.cloud_bound_violations(cloud) == 0
    assert len(cloud.envelope) <= 40
    assert np.all(np.abs(cloud.envelope[:, 0]) <= cloud.eta_max)
    assert np.all(cloud.envelope[:, 1] <= 0.0)


def test_cloud_scaling_covariance(gen):
    spec = make_random_spec(gen, d=3, r=2, n=6)
    seed = st.SeedSpec(22, 0)
    cloud1 = st.sample_grf_cloud(spec, 4000, seed, bins=30)
    c = 1.7
    scaled = st.SpikeSpec(d=spec.d, n=spec.n, r=spec.r, lambdas=c * spec.lambdas, factors=spec.factors)
    cloud2 = st.sample_grf_cloud(scaled, 4000, seed, bins=30)
    assert cloud2.eta_max == pytest.approx(c**2 * cloud1.eta_max, rel=1e-12)
    assert np.allclose(cloud2.points[:, 0], c**2 * cloud1.points[:, 0], rtol=1e-10, atol=1e-12)
    assert np.array_equal(cloud2.points[:, 1], cloud1.points[:, 1])
    assert st.cloud_bound_violations(cloud2) == 0


def test_cloud_thread_invariance(gen):
    spec = make_random_spec(gen, d=3, r=2, n=6)
    seed = st.SeedSpec(23, 0)
    a = st.sample_grf_cloud(spec, 3000, seed, bins=20, threads=1)
    b = st.sample_grf_cloud(spec, 3000, seed, bins=20, threads=3)
    assert np.array_equal(a.points, b.points)
    assert np.array_equal(a.envelope, b.envelope)


def test_cloud_rejects_degenerate_inputs(gen):
    spec = make_random_spec(gen)
    with pytest.raises(ParameterError):
        st.sample_grf_cloud(spec, 0, st.SeedSpec(1, 0), bins=10)
    with pytest.raises(ParameterError):
        st.sample_grf_cloud(spec, 10, st.SeedSpec(1, 0), bins=0)
