"""Detectability thresholds: the order-d second-moment constant and the
closed-form non-detectability conditions built from it."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .spike import GramSet, SpikeSpec, eta_max, gram_set, _psd_sqrt

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_GRID_POINTS = 20001


def _objective(u: float, d: int) -> float:
    """-log(1 - u^2) / u^d on (0, 1), extended by its limits at the ends:
    1 at u=0 for d=2, +inf at u=0 for d>2, +inf at u=1."""
    if u <= 0.0:
        return 1.0 if d == 2 else math.inf
    if u >= 1.0:
        return math.inf
    # log1p keeps accuracy near u=0 where 1 - u^2 is close to 1
    return -math.log1p(-u * u) / u**d


def _golden_min(f, a: float, b: float, tol: float) -> tuple[float, float]:
    """Golden-section search for a minimum of f on [a, b]; returns the best
    evaluated (x, f(x)) once the bracket is narrower than tol."""
    c = b - _INV_PHI * (b - a)
    e = a + _INV_PHI * (b - a)
    fc, fe = f(c), f(e)
    while b - a > tol:
        if fc < fe:
            b, e, fe = e, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e, fe
            e = a + _INV_PHI * (b - a)
            fe = f(e)
    return (c, fc) if fc < fe else (e, fe)


def beta_d_second(d: int, u_tol: float = 1e-10) -> float:
    """Second-moment threshold constant:
    sqrt( min over u in [0, 1] of -log(1 - u^2) / u^d ).

    A dense grid scan locates the basin, golden-section refines the
    minimizer to `u_tol`, and the u -> 0 endpoint (where the infimum lives
    for d=2) is handled by explicit limit evaluation.
    """
    if d < 2:
        raise ParameterError(f"order d must be >= 2, got {d}")
    grid = np.linspace(0.0, 1.0, _GRID_POINTS)[1:-1]
    values = -np.log1p(-grid * grid) / grid**d
    i = int(np.argmin(values))
    h = grid[1] - grid[0]
    lo = max(0.0, grid[i] - h)
    hi = min(1.0, grid[i] + h)
    _, f_interior = _golden_min(lambda u: _objective(u, d), lo, hi, u_tol)
    best = min(f_interior, _objective(0.0, d))
    return math.sqrt(best)


def hoelder_condition(lambdas, d: int) -> tuple[bool, float]:
    """Strict test  sum(lambda) < sqrt(d/2) * beta_d_second(d); the margin is
    threshold minus statistic (positive means satisfied)."""
    lam = np.asarray(lambdas, dtype=float)
    if np.any(lam <= 0):
        raise ParameterError("amplitudes must be strictly positive")
    threshold = math.sqrt(d / 2.0) * beta_d_second(d)
    margin = threshold - float(np.sum(lam))
    return margin > 0.0, margin


def main_condition(lambdas, grams: GramSet, d: int) -> tuple[bool, float]:
    """Strict test  sqrt(eta_max) < sqrt(d/2) * beta_d_second(d); margin as in
    `hoelder_condition`.  Always at least as permissive as the Hoelder test
    since eta_max <= (sum lambda)^2."""
    threshold = math.sqrt(d / 2.0) * beta_d_second(d)
    margin = threshold - math.sqrt(eta_max(lambdas, grams))
    return margin > 0.0, margin


def matrix_case_mu_max(spec: SpikeSpec) -> float:
    """Largest eigenvalue of X0 X0* in the matrix case d=2.

    Computed from the r x r product diag(lambda) conj(G2) diag(lambda) G1,
    whose nonzero spectrum coincides with that of the assembled n x n
    matrix; evaluated through a Hermitian similarity for stability.
    """
    if spec.d != 2:
        raise ParameterError(f"matrix-case statistic requires d=2, got d={spec.d}")
    g1, g2 = gram_set(spec).grams
    lam = np.diag(spec.lambdas)
    root = _psd_sqrt(g1)
    core = root @ lam @ np.conj(g2) @ lam @ root
    return float(np.max(np.linalg.eigvalsh(core)))


@dataclass(frozen=True)
class ThresholdReport:
    """Verdicts and margins of both non-detectability conditions.

    `main_ok` states the raw inequality sqrt(eta_max) < sqrt(d/2) * beta_d;
    it implies indistinguishability only for d > 2.  For d = 2 the separate
    matrix-case verdict `d2_ok` (largest eigenvalue of X0 X0* below 1)
    applies, and `d2_mu_max`/`d2_ok` are None for d != 2.
    """

    d: int
    beta_d: float
    sum_lambda: float
    eta_max: float
    hoelder_ok: bool
    hoelder_margin: float
    main_ok: bool
    main_margin: float
    d2_mu_max: float | None = None
    d2_ok: bool | None = None

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "beta_d": self.beta_d,
            "sum_lambda": self.sum_lambda,
            "eta_max": self.eta_max,
            "hoelder_ok": self.hoelder_ok,
            "hoelder_margin": self.hoelder_margin,
            "main_ok": self.main_ok,
            "main_margin": self.main_margin,
            "d2_mu_max": self.d2_mu_max,
            "d2_ok": self.d2_ok,
        }


def threshold_report(spec: SpikeSpec) -> ThresholdReport:
    """Evaluate every applicable threshold condition for one spike."""
    grams = gram_set(spec)
    hoelder_ok, hoelder_margin = hoelder_condition(spec.lambdas, spec.d)
    main_ok, main_margin = main_condition(spec.lambdas, grams, spec.d)
    d2_mu_max = d2_ok = None
    if spec.d == 2:
        d2_mu_max = matrix_case_mu_max(spec)
        d2_ok = d2_mu_max < 1.0
    return ThresholdReport(
        d=spec.d,
        beta_d=beta_d_second(spec.d),
        sum_lambda=float(np.sum(spec.lambdas)),
        eta_max=eta_max(spec.lambdas, grams),
        hoelder_ok=hoelder_ok,
        hoelder_margin=hoelder_margin,
        main_ok=main_ok,
        main_margin=main_margin,
        d2_mu_max=d2_mu_max,
        d2_ok=d2_ok,
    )
