"""Checkable oracles for the three algebraic power inequalities.

Each oracle returns both sides of its inequality so callers can measure
margins instead of trusting a boolean.  Inputs are plain reals (or numpy
arrays, broadcast elementwise); the contract in every case is lhs <= rhs.
"""

from __future__ import annotations

import numpy as np

from .util import DomainError, signed_power


def pineq1_sides(a, b, p):
    """Difference-of-powers bound for the degenerate branch p >= 2.

    lhs = | sgn(a+b)|a+b|^(p-1) - sgn(a)|a|^(p-1) |,
    rhs = (p-1) |b| (|a|+|b|)^(p-2).
    """
    if np.any(np.asarray(p) < 2.0):
        raise DomainError(f"pineq1 requires p >= 2, got p={p}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lhs = np.abs(signed_power(a + b, p) - signed_power(a, p))
    rhs = (p - 1.0) * np.abs(b) * (np.abs(a) + np.abs(b)) ** (p - 2.0)
    return _as_pair(lhs, rhs)


def pineq2_sides(a, b, p):
    """Difference-of-powers bound for the singular branch 1 < p < 2.

    lhs as in ``pineq1_sides``; rhs = (3^(p-1) + 2^(p-1)) |b|^(p-1).
    """
    p_arr = np.asarray(p)
    if np.any(p_arr <= 1.0) or np.any(p_arr >= 2.0):
        raise DomainError(f"pineq2 requires 1 < p < 2, got p={p}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lhs = np.abs(signed_power(a + b, p) - signed_power(a, p))
    rhs = (3.0 ** (p - 1.0) + 2.0 ** (p - 1.0)) * np.abs(b) ** (p - 1.0)
    return _as_pair(lhs, rhs)


def pest_sides(a, b, p):
    """Splitting bound for nonnegative sums, p >= 2.

    Requires a + b >= 0.  lhs = |a+b|^(p-2)(a+b),
    rhs = 2^(p-2) (|a|^(p-2) a + |b|^(p-2) b); equality holds at p = 2
    and at a = b.
    """
    if np.any(np.asarray(p) < 2.0):
        raise DomainError(f"pest requires p >= 2, got p={p}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a + b < 0.0):
        raise DomainError("pest requires a + b >= 0")
    lhs = signed_power(a + b, p)
    rhs = 2.0 ** (p - 2.0) * (signed_power(a, p) + signed_power(b, p))
    return _as_pair(lhs, rhs)


def _as_pair(lhs, rhs):
    if np.ndim(lhs) == 0 and np.ndim(rhs) == 0:
        return float(lhs), float(rhs)
    lhs, rhs = np.broadcast_arrays(np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float))
    return lhs, rhs


def worst_margin(lhs, rhs, rel: float = 1e-9, abs_: float = 1e-12) -> float:
    """Largest violation lhs - rhs*(1+rel) - abs_; <= 0 means the bound holds."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    return float(np.max(lhs - rhs * (1.0 + rel) - abs_))


def sweep_lemmas(samples: int, seed: int) -> dict[str, dict[str, float]]:
    """Random sweeps over all three oracles; returns per-lemma worst margins.

    Sampling ranges: (a, b) uniform in [-10, 10]^2; p uniform in [2, 6] for
    the degenerate-branch oracles and in (1.01, 1.99) for the singular one.
    """
    rng = np.random.default_rng(seed)
    out: dict[str, dict[str, float]] = {}

    a = rng.uniform(-10.0, 10.0, samples)
    b = rng.uniform(-10.0, 10.0, samples)
    p = rng.uniform(2.0, 6.0, samples)
    lhs, rhs = pineq1_sides(a, b, p)
    out["pineq1"] = _margin_row(lhs, rhs, samples)

    p_sing = rng.uniform(1.01, 1.99, samples)
    lhs, rhs = pineq2_sides(a, b, p_sing)
    out["pineq2"] = _margin_row(lhs, rhs, samples)

    a2 = rng.uniform(-10.0, 10.0, samples)
    b2 = rng.uniform(-10.0, 10.0, samples)
    flip = a2 + b2 < 0.0
    a2[flip] *= -1.0
    b2[flip] *= -1.0
    lhs, rhs = pest_sides(a2, b2, p)
    out["pest"] = _margin_row(lhs, rhs, samples)
    return out


def _margin_row(lhs, rhs, samples: int) -> dict[str, float]:
    margin = worst_margin(lhs, rhs)
    denom = np.maximum(np.abs(rhs), 1e-300)
    rel = float(np.max((lhs - rhs) / denom))
    return {
        "samples": float(samples),
        "worst_margin": margin,
        "worst_relative": rel,
        "passed": float(margin <= 0.0),
    }
