"""Monte-Carlo estimation of the squared likelihood ratio's second moment,
the two-piece split of that expectation, sphere-coordinate tail laws, and a
small likelihood-ratio testing simulator.

All exponential averages are accumulated in log-sum-exp form, and every
estimate reports the largest exponent seen (`log_domain_max`).  Near the
detectability threshold exp(2 n eta) has enormous relative variance: the
reported means are then dominated by rare draws and the asymptotic values
are not reachable by sampling at desk scale.  The estimators report honest
batch-means standard errors instead of hiding this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import logsumexp

from .errors import ParameterError
from .rng import (
    SeedSpec,
    as_generator,
    chunk_sizes,
    map_streams,
    sample_gaussian_tensor,
    sample_haar_unitaries,
)
from .spike import SpikeSpec, build_spike, eta_max, gram_set

_N_STREAMS = 16
_BLOCK = 1024


@dataclass(frozen=True)
class MCEstimate:
    """Monte-Carlo mean with batch-means standard error.

    `log_domain_max` is the largest exponent that entered the average; a
    value of order log(count) or more signals the heavy-tail regime where
    the mean is driven by a handful of draws.
    """

    count: int
    mean: float
    stderr: float
    log_domain_max: float
    seed: SeedSpec

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "mean": self.mean,
            "stderr": self.stderr,
            "log_domain_max": self.log_domain_max,
            "seed": self.seed.to_dict(),
        }


@dataclass(frozen=True, eq=False)
class HypothesisSample:
    """One simulated observation; `spike_used` holds the Haar-rotated spike
    realization under the alternative and is None under the null."""

    tensor: np.ndarray
    hypothesis: str
    spike_used: SpikeSpec | None = None


@dataclass(frozen=True, eq=False)
class RocCurve:
    """Empirical ROC rows (threshold, fpr, tpr) and the separation proxy
    max_t |tpr(t) - fpr(t)|."""

    points: np.ndarray  # shape (m, 3)
    tv_proxy: float


def _mean_from_exponents(chunks, seed: SeedSpec, count: int) -> MCEstimate:
    """Combine per-chunk exponent arrays into mean / batch-means stderr."""
    exponents = np.concatenate(chunks)
    log_n = np.log(count)
    mean = float(np.exp(logsumexp(exponents) - log_n))
    batch_means = np.array([np.exp(logsumexp(c) - np.log(len(c))) for c in chunks])
    stderr = 0.0
    if len(batch_means) >= 2:
        stderr = float(np.std(batch_means, ddof=1) / np.sqrt(len(batch_means)))
    return MCEstimate(
        count=count,
        mean=mean,
        stderr=stderr,
        log_domain_max=float(np.max(exponents)),
        seed=seed,
    )


def _eta_chunk(spec: SpikeSpec, size: int, gen: np.random.Generator) -> np.ndarray:
    """`size` draws of the alignment exponent under i.i.d. Haar rotations,
    computed through the r x r mode overlaps (never the full tensors)."""
    out = np.empty(size)
    done = 0
    while done < size:
        m = min(_BLOCK, size - done)
        had = None
        for chi in spec.factors:
            thetas = sample_haar_unitaries(spec.n, m, gen)
            overlap = np.einsum("ni,bnj->bij", np.conj(chi), thetas @ chi)
            had = overlap if had is None else had * overlap
        out[done : done + m] = np.real(np.einsum("i,bij,j->b", spec.lambdas, had, spec.lambdas))
        done += m
    return out


def second_moment_haar_mc(spec: SpikeSpec, samples: int, rng: SeedSpec, threads: int = 1) -> MCEstimate:
    """Estimate E[exp(2 n eta)] over i.i.d. Haar mode rotations.

    This equals the second moment of the likelihood ratio under the null
    once the spike prior is the Haar rotation of a fixed spike.
    """
    if samples < 2:
        raise ParameterError(f"need samples >= 2, got {samples}")
    scale = 2.0 * spec.n

    def worker(_i, size, gen):
        return scale * _eta_chunk(spec, size, gen)

    chunks = map_streams(worker, chunk_sizes(samples, _N_STREAMS), rng, threads)
    return _mean_from_exponents(chunks, rng, samples)


def default_epsilon(spec: SpikeSpec) -> float:
    """Split level min(eta_max / 4, r^2 * max_ij lambda_i lambda_j), small
    enough for the tail argument the split feeds."""
    lam = spec.lambdas
    return min(eta_max(lam, gram_set(spec)) / 4.0, spec.r**2 * float(np.max(lam)) ** 2)


def _complement(total: float, part: float) -> float:
    """The float v minimizing |v - (total - part)| subject to
    part + v == total exactly; nudges by ulps to defeat double rounding."""
    v = total - part
    for _ in range(8):
        s = part + v
        if s == total:
            return v
        v = math.nextafter(v, math.inf if s < total else -math.inf)
    raise ArithmeticError("could not form an exact complement")


def e1_e2_split(spec: SpikeSpec, epsilon: float, samples: int, rng: SeedSpec, threads: int = 1) -> tuple[MCEstimate, MCEstimate]:
    """Single-pass split of the second-moment average over the events
    {eta > epsilon} and {eta <= epsilon}.

    Runs on the same stream layout as `second_moment_haar_mc`, so with equal
    arguments the two bucket means add up to that estimator's mean exactly:
    the first bucket is scored as is and the second is defined as its exact
    complement (at most one ulp from its own log-sum-exp value).
    """
    if epsilon <= 0:
        raise ParameterError(f"need epsilon > 0, got {epsilon}")
    if samples < 2:
        raise ParameterError(f"need samples >= 2, got {samples}")
    scale = 2.0 * spec.n

    eta_chunks = map_streams(
        lambda _i, size, gen: _eta_chunk(spec, size, gen),
        chunk_sizes(samples, _N_STREAMS),
        rng,
        threads,
    )
    exp_chunks = [scale * c for c in eta_chunks]
    total = _mean_from_exponents(exp_chunks, rng, samples)

    log_n = np.log(samples)

    def bucket(select) -> tuple[float, float, float]:
        picked = [c[select(e)] for c, e in zip(exp_chunks, eta_chunks)]
        values = np.concatenate(picked)
        mean = float(np.exp(logsumexp(values) - log_n)) if values.size else 0.0
        batch = np.array([np.exp(logsumexp(p) - np.log(len(c))) if p.size else 0.0 for p, c in zip(picked, exp_chunks)])
        stderr = float(np.std(batch, ddof=1) / np.sqrt(len(batch))) if len(batch) >= 2 else 0.0
        dom = float(np.max(values)) if values.size else -math.inf
        return mean, stderr, dom

    e1_mean, e1_stderr, e1_dom = bucket(lambda e: e > epsilon)
    _, e2_stderr, e2_dom = bucket(lambda e: e <= epsilon)
    e1 = MCEstimate(count=samples, mean=e1_mean, stderr=e1_stderr, log_domain_max=e1_dom, seed=rng)
    e2 = MCEstimate(
        count=samples,
        mean=_complement(total.mean, e1_mean),
        stderr=e2_stderr,
        log_domain_max=e2_dom,
        seed=rng,
    )
    return e1, e2


def _rotated_spike_stack(spec: SpikeSpec, m: int, gen: np.random.Generator) -> np.ndarray:
    """`m` independent Haar rotations of the spike, flattened to (m, n^d)."""
    rotated = [sample_haar_unitaries(spec.n, m, gen) @ chi for chi in spec.factors]
    total = None
    for i in range(spec.r):
        term = spec.lambdas[i] * rotated[0][:, :, i]
        for k in range(1, spec.d):
            term = np.einsum("b...,bn->b...n", term, rotated[k][:, :, i])
        term = term.reshape(m, -1)
        total = term if total is None else total + term
    return total


def second_moment_direct_mc(
    spec: SpikeSpec,
    outer: int,
    inner: int,
    rng: SeedSpec,
    rotate: bool = True,
    threads: int = 1,
) -> MCEstimate:
    """Observation-side estimate of the second moment: draw null tensors Y,
    estimate the likelihood ratio of each by inner sampling of the spike
    prior, and average the square.

    The inner average makes this estimator biased by O(1/inner); it exists
    as an independent cross-check of `second_moment_haar_mc` at very small
    (n, d).  With `rotate=False` the spike is held fixed at its unrotated
    value, which corresponds to the deterministic-signal model whose second
    moment is exp(2 n |X0|_F^2).
    """
    if outer < 2 or inner < 1:
        raise ParameterError(f"need outer >= 2 and inner >= 1, got outer={outer}, inner={inner}")
    n = spec.n
    fixed = build_spike(spec).ravel()[None, :] if not rotate else None

    def worker(_i, size, gen):
        exponents = np.empty(size)
        for j in range(size):
            y = sample_gaussian_tensor(n, spec.d, gen).ravel()
            xs = fixed if fixed is not None else _rotated_spike_stack(spec, inner, gen)
            sq = np.real(np.einsum("bi,bi->b", xs, np.conj(xs)))
            a = 2.0 * n * np.real(np.conj(xs) @ y) - n * sq
            exponents[j] = 2.0 * (logsumexp(a) - np.log(len(a)))
        return exponents

    chunks = map_streams(worker, chunk_sizes(outer, _N_STREAMS), rng, threads)
    return _mean_from_exponents(chunks, rng, outer)


def xi_tail_probability(t: float, n: int) -> float:
    """Exact survival probability (1 - t^2)^(n-1) of the modulus of one
    coordinate of a uniform point on the unit sphere of C^n."""
    if not (0.0 <= t <= 1.0):
        raise ParameterError(f"need t in [0, 1], got {t}")
    if n < 2:
        raise ParameterError(f"need n >= 2, got {n}")
    return (1.0 - t * t) ** (n - 1)


def xi_empirical_tail(n: int, t: float, samples: int, rng: SeedSpec, threads: int = 1) -> MCEstimate:
    """Empirical frequency of |v_1| >= t over uniform sphere samples, with a
    binomial standard error."""
    if not (0.0 <= t <= 1.0):
        raise ParameterError(f"need t in [0, 1], got {t}")
    if n < 2 or samples < 1:
        raise ParameterError(f"need n >= 2 and samples >= 1, got n={n}, samples={samples}")

    def worker(_i, size, gen):
        hits = 0
        done = 0
        while done < size:
            m = min(_BLOCK * 16, size - done)
            v = np.sqrt(0.5) * (gen.standard_normal((m, n)) + 1j * gen.standard_normal((m, n)))
            frac = np.abs(v[:, 0]) / np.linalg.norm(v, axis=1)
            hits += int(np.sum(frac >= t))
            done += m
        return hits

    hits = sum(map_streams(worker, chunk_sizes(samples, _N_STREAMS), rng, threads))
    p = hits / samples
    return MCEstimate(
        count=samples,
        mean=p,
        stderr=float(np.sqrt(p * (1.0 - p) / samples)),
        log_domain_max=0.0,
        seed=rng,
    )


def simulate_observation(spec: SpikeSpec, hypothesis: str, rng) -> HypothesisSample:
    """Draw one observation: pure noise under "H0", Haar-rotated spike plus
    noise under "H1"."""
    if hypothesis not in ("H0", "H1"):
        raise ParameterError(f"hypothesis must be 'H0' or 'H1', got {hypothesis!r}")
    gen = as_generator(rng)
    if hypothesis == "H0":
        return HypothesisSample(tensor=sample_gaussian_tensor(spec.n, spec.d, gen), hypothesis="H0")
    rotated = replace(
        spec,
        factors=tuple(sample_haar_unitaries(spec.n, 1, gen)[0] @ chi for chi in spec.factors),
    )
    noise = sample_gaussian_tensor(spec.n, spec.d, gen)
    return HypothesisSample(tensor=build_spike(rotated) + noise, hypothesis="H1", spike_used=rotated)


def log_lr_mc(y: HypothesisSample, spec: SpikeSpec, inner: int, rng, rotate: bool = True) -> float:
    """Log of the inner-Monte-Carlo likelihood-ratio estimate
    log (1/inner) sum_m exp(2 n Re<Y, X_m> - n |X_m|_F^2),
    with X_m drawn from the rotation prior (or held at the unrotated spike
    when `rotate` is False, in which case inner=1 gives the exact value)."""
    if inner < 1:
        raise ParameterError(f"need inner >= 1, got {inner}")
    gen = as_generator(rng)
    n = spec.n
    yflat = y.tensor.ravel()
    xs = build_spike(spec).ravel()[None, :] if not rotate else _rotated_spike_stack(spec, inner, gen)
    sq = np.real(np.einsum("bi,bi->b", xs, np.conj(xs)))
    a = 2.0 * n * np.real(np.conj(xs) @ yflat) - n * sq
    return float(logsumexp(a) - np.log(len(a)))


def roc_experiment(spec: SpikeSpec, trials: int, inner: int, rng: SeedSpec, threads: int = 1) -> RocCurve:
    """Empirical ROC of the likelihood-ratio statistic over `trials` draws
    per hypothesis; the statistic is the Neyman-Pearson optimal one, which
    makes the random-guessing regime maximally visible."""
    if trials < 2:
        raise ParameterError(f"need trials >= 2, got {trials}")

    def worker(_i, size, gen):
        s0 = np.empty(size)
        s1 = np.empty(size)
        for j in range(size):
            y0 = simulate_observation(spec, "H0", gen)
            s0[j] = log_lr_mc(y0, spec, inner, gen)
            y1 = simulate_observation(spec, "H1", gen)
            s1[j] = log_lr_mc(y1, spec, inner, gen)
        return s0, s1

    results = map_streams(worker, chunk_sizes(trials, _N_STREAMS), rng, threads)
    s0 = np.sort(np.concatenate([r[0] for r in results]))
    s1 = np.sort(np.concatenate([r[1] for r in results]))
    thresholds = np.unique(np.concatenate([s0, s1]))
    fpr = 1.0 - np.searchsorted(s0, thresholds, side="left") / trials
    tpr = 1.0 - np.searchsorted(s1, thresholds, side="left") / trials
    return RocCurve(
        points=np.column_stack([thresholds, fpr, tpr]),
        tv_proxy=float(np.max(np.abs(tpr - fpr))),
    )
