"""Shared builders for randomized checks; everything is seeded."""

import pytest

import spikedtensor as st


def make_random_spec(gen, d=None, r=None, n=None, lam_low=0.1, lam_high=1.5):
    """Random Gram-driven spike at a random desk-scale size."""
    d = d if d is not None else int(gen.integers(2, 5))
    if r is None:
        r = int(gen.integers(1, (3 if n is None else min(3, n)) + 1))
    n = n if n is not None else int(gen.integers(r, 17))
    grams = st.GramSet(tuple(st.random_gram(r, gen) for _ in range(d)))
    lambdas = gen.uniform(lam_low, lam_high, size=r)
    factors = st.factors_from_grams(grams, n)
    return st.SpikeSpec(d=d, n=n, r=r, lambdas=lambdas, factors=factors)


@pytest.fixture
def gen():
    return st.SeedSpec(20240809, 0).generator()
