"""Dense complex tensor algebra for order-d arrays with equal mode sizes.

Tensors are plain numpy arrays of shape (n, ..., n) in row-major order; the
functions below validate that convention instead of wrapping arrays in a
class.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import DimensionError


def tensor_dims(t: np.ndarray) -> tuple[int, int]:
    """Return (order, dim) of a tensor, checking all modes share one size."""
    if t.ndim < 2:
        raise DimensionError(f"tensor order must be >= 2, got {t.ndim}")
    n = t.shape[0]
    if any(s != n for s in t.shape):
        raise DimensionError(f"all modes must have equal dimension, got shape {t.shape}")
    return t.ndim, n


def frobenius_inner(x: np.ndarray, y: np.ndarray) -> complex:
    """Scalar product sum_{i1..id} X * conj(Y) over all entries."""
    if x.shape != y.shape:
        raise DimensionError(f"shape mismatch: {x.shape} vs {y.shape}")
    return complex(np.vdot(y, x))


def frobenius_norm(x: np.ndarray) -> float:
    return float(np.linalg.norm(x.ravel()))


def mode_product(ops, z: np.ndarray) -> np.ndarray:
    """Apply one n x n matrix per mode:
    out[i1..id] = sum_{l1..ld} ops[0][i1,l1] * ... * ops[d-1][id,ld] * z[l1..ld].

    Computed as d successive single-mode contractions, O(d * n^(d+1)).
    For d=2 this is ops[0] @ z @ ops[1].T (transpose, not adjoint), which is
    what the index formula above gives.
    """
    d, n = tensor_dims(z)
    ops = list(ops)
    if len(ops) != d:
        raise DimensionError(f"need {d} mode operators, got {len(ops)}")
    out = z
    for k, m in enumerate(ops):
        if m.shape != (n, n):
            raise DimensionError(f"operator {k} has shape {m.shape}, expected {(n, n)}")
        # contract mode k, then restore the axis order
        out = np.moveaxis(np.tensordot(m, out, axes=([1], [k])), 0, k)
    return out


def mode_product_naive(ops, z: np.ndarray) -> np.ndarray:
    """Reference implementation of `mode_product` via the full d-fold sum.

    O(n^(2d)); only for cross-checking on tiny instances.
    """
    d, n = tensor_dims(z)
    ops = list(ops)
    if len(ops) != d:
        raise DimensionError(f"need {d} mode operators, got {len(ops)}")
    out = np.zeros_like(z)
    for idx in itertools.product(range(n), repeat=d):
        acc = 0.0 + 0.0j
        for src in itertools.product(range(n), repeat=d):
            coeff = 1.0 + 0.0j
            for k in range(d):
                coeff *= ops[k][idx[k], src[k]]
            acc += coeff * z[src]
        out[idx] = acc
    return out
