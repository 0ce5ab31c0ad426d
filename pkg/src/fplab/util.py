"""Shared numerics: signed powers, sphere measures, panel quadrature rules."""

from __future__ import annotations

import numpy as np

# Beyond this radius all far-field integrals are bounded analytically
# instead of being discretized.
R_MAX = 64.0


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


def signed_power(t, p: float):
    """The increasing odd power map sign(t)*|t|^(p-1).

    Continuous extension through t=0 (value 0) for every p>1, which keeps
    the map well defined where the naive |t|^(p-2)*t form would produce
    0**negative for p<2.
    """
    t = np.asarray(t, dtype=float)
    out = np.sign(t) * np.abs(t) ** (p - 1.0)
    if out.ndim == 0:
        return float(out)
    return out


def sphere_measure(dim: int) -> float:
    """Measure of the unit sphere S^{n-1}: 2 for n=1, 2*pi for n=2."""
    if dim == 1:
        return 2.0
    if dim == 2:
        return 2.0 * np.pi
    raise DomainError(f"dim must be 1 or 2, got {dim}")


def ball_measure(dim: int, radius: float = 1.0) -> float:
    """Lebesgue measure of a ball of the given radius."""
    if dim == 1:
        return 2.0 * radius
    if dim == 2:
        return np.pi * radius**2
    raise DomainError(f"dim must be 1 or 2, got {dim}")


def gauss_panels(breaks: np.ndarray, order: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on the panels given by `breaks`.

    Returns flat arrays over all panels, in increasing order of position.
    """
    breaks = np.asarray(breaks, dtype=float)
    gx, gw = np.polynomial.legendre.leggauss(order)
    a = breaks[:-1]
    b = breaks[1:]
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    nodes = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    weights = (half[:, None] * gw[None, :]).ravel()
    return nodes, weights


def geometric_breaks(a: float, b: float, n_panels: int) -> np.ndarray:
    """Panel breakpoints on [a, b], geometrically graded toward a.

    Suited to power-law integrands that concentrate near the inner radius.
    """
    if not (0.0 < a < b):
        raise DomainError(f"need 0 < a < b, got a={a}, b={b}")
    if n_panels < 1:
        raise DomainError("need at least one panel")
    return a * (b / a) ** (np.arange(n_panels + 1) / n_panels)


def radial_rule(
    a: float,
    b: float,
    n_panels: int,
    order: int = 4,
    extra_breaks: tuple[float, ...] = (),
) -> tuple[np.ndarray, np.ndarray]:
    """Geometric-panel Gauss rule on [a, b] with optional forced breakpoints.

    Extra breakpoints (e.g. kinks of the integrand) are merged into the
    geometric grading so no panel straddles them.
    """
    breaks = geometric_breaks(a, b, n_panels)
    inside = [t for t in extra_breaks if a < t < b]
    if inside:
        breaks = np.unique(np.concatenate([breaks, np.asarray(inside, dtype=float)]))
    return gauss_panels(breaks, order)
