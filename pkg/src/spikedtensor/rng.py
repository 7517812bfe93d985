"""Seeded random sampling: complex Gaussian tensors, Haar unitaries, sphere
vectors and corner blocks of Haar unitaries.

All sampling is driven by :class:`SeedSpec`, a (master_seed, stream_id) pair
that fully determines the generator state.  Parallel drivers derive disjoint
child streams from one SeedSpec so that results never depend on how work is
scheduled across threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

_U64 = 2**64


@dataclass(frozen=True)
class SeedSpec:
    """Reproducible seed handle: (master_seed, stream_id) -> one RNG stream."""

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            value = getattr(self, name)
            if not (0 <= int(value) < _U64):
                raise ParameterError(f"{name} must be an unsigned 64-bit integer, got {value!r}")

    def generator(self, *lane: int) -> np.random.Generator:
        """Create the generator for this stream, or a child lane of it.

        ``spec.generator()`` is the stream itself; ``spec.generator(i)``,
        ``spec.generator(i, j)``, ... are statistically independent child
        streams used by chunked Monte-Carlo drivers.
        """
        key = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.stream_id, *lane))
        return np.random.default_rng(key)

    def to_dict(self) -> dict:
        return {"master_seed": self.master_seed, "stream_id": self.stream_id}


def as_generator(rng) -> np.random.Generator:
    """Accept either a SeedSpec or an already-constructed Generator."""
    if isinstance(rng, SeedSpec):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise ParameterError(f"expected SeedSpec or numpy Generator, got {type(rng).__name__}")


def complex_normal(gen: np.random.Generator, shape, component_std: float) -> np.ndarray:
    """Circular complex Gaussian array; real and imaginary parts are
    independent N(0, component_std**2) each."""
    re = gen.standard_normal(shape)
    im = gen.standard_normal(shape)
    return component_std * (re + 1j * im)


def sample_gaussian_tensor(n: int, d: int, rng) -> np.ndarray:
    """Order-d tensor with i.i.d. circular complex Gaussian entries of
    variance 1/n (so each real component has variance 1/(2n))."""
    if n < 1 or d < 2:
        raise ParameterError(f"need n >= 1 and d >= 2, got n={n}, d={d}")
    gen = as_generator(rng)
    return complex_normal(gen, (n,) * d, np.sqrt(1.0 / (2.0 * n)))


def sample_haar_unitaries(n: int, count: int, rng) -> np.ndarray:
    """Stack of `count` independent Haar unitaries, shape (count, n, n).

    Construction: complex Ginibre matrix, QR factorization, then each column
    of Q is multiplied by the phase of the matching diagonal entry of R so
    that R's diagonal becomes real positive.  Plain QR is *not* Haar; the
    phase correction is what removes the factorization's sign ambiguity.
    """
    if n < 1:
        raise ParameterError(f"need n >= 1, got n={n}")
    gen = as_generator(rng)
    z = complex_normal(gen, (count, n, n), np.sqrt(0.5))
    q, r = np.linalg.qr(z)
    diag = np.einsum("...ii->...i", r)
    phase = diag / np.abs(diag)
    return q * phase[..., None, :]


def sample_haar_unitary(n: int, rng) -> np.ndarray:
    """One Haar-distributed n x n unitary matrix."""
    return sample_haar_unitaries(n, 1, rng)[0]


def sample_unit_sphere(n: int, rng) -> np.ndarray:
    """Uniform point on the unit sphere of C^n (normalized complex Gaussian)."""
    if n < 1:
        raise ParameterError(f"need n >= 1, got n={n}")
    gen = as_generator(rng)
    v = complex_normal(gen, (n,), np.sqrt(0.5))
    return v / np.linalg.norm(v)


def sample_psi_block(n: int, r: int, rng) -> np.ndarray:
    """Top-left r x r block of a Haar n x n unitary."""
    if not (1 <= r <= n):
        raise ParameterError(f"need 1 <= r <= n, got r={r}, n={n}")
    return sample_haar_unitary(n, rng)[:r, :r]


def unitarity_defect(m: np.ndarray) -> float:
    """max |M* M - I|, zero for an exactly unitary matrix."""
    n = m.shape[-1]
    return float(np.max(np.abs(m.conj().swapaxes(-1, -2) @ m - np.eye(n))))


def chunk_sizes(total: int, chunks: int) -> list[int]:
    """Split `total` items into `chunks` nearly equal parts (first parts get
    the remainder).  The split depends only on `total` and `chunks`, never on
    the worker count, which is what makes threaded runs reproducible."""
    if total < 1 or chunks < 1:
        raise ParameterError(f"need total >= 1 and chunks >= 1, got {total}, {chunks}")
    chunks = min(chunks, total)
    base, extra = divmod(total, chunks)
    return [base + (1 if i < extra else 0) for i in range(chunks)]


def map_streams(fn, sizes: list[int], seed: SeedSpec, threads: int = 1) -> list:
    """Evaluate ``fn(chunk_index, size, generator)`` for every chunk and
    return results in chunk order.

    Each chunk draws from its own child stream ``seed.generator(i)``, so the
    output is byte-identical for any `threads` value.
    """
    if threads < 1:
        raise ParameterError(f"need threads >= 1, got {threads}")

    def run(i: int):
        return fn(i, sizes[i], seed.generator(i))

    indices = range(len(sizes))
    if threads == 1 or len(sizes) == 1:
        return [run(i) for i in indices]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, indices))
