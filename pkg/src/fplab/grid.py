"""Grid functions on uniform boxes with declared exterior behavior.

A ``GridFunction`` stores node values on [-L, L]^n, interpolates
multilinearly inside the box, and delegates to an exterior rule outside.
The exterior rule plus a global sup bound is what makes far-field
integrals of the nonlocal operator meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .util import DomainError


# ---------------------------------------------------------------------------
# Exterior rules

class ConstantExterior:
    """u = c outside the box."""

    def __init__(self, c: float):
        self.c = float(c)

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return np.full(pts.shape[:-1], self.c)

    def sup(self) -> float:
        return abs(self.c)

    def bound_on_sphere(self, r: float) -> float:
        return abs(self.c)

    def describe(self) -> str:
        return f"const:{self.c!r}"


class ZeroExterior(ConstantExterior):
    """u = 0 outside the box."""

    def __init__(self):
        super().__init__(0.0)

    def describe(self) -> str:
        return "zero"


class GrowthBarrierExterior:
    """The growth-barrier profile t -> 2|2t|^eta - 1 in |x|.

    Unbounded; admitted only where the kernel tail makes the far integral
    finite (eta*(p-1) < gamma).
    """

    def __init__(self, eta: float):
        if eta <= 0.0:
            raise DomainError("growth barrier needs eta > 0")
        self.eta = float(eta)

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        r = np.linalg.norm(pts, axis=-1)
        return 2.0 * (2.0 * r) ** self.eta - 1.0

    def sup(self) -> float:
        return np.inf

    def bound_on_sphere(self, r: float) -> float:
        return abs(2.0 * (2.0 * r) ** self.eta - 1.0)

    def describe(self) -> str:
        return f"barrier:{self.eta!r}"


class ProfileExterior:
    """Explicit profile with a declared sup bound."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], sup_bound: float,
                 name: str = "profile"):
        self.fn = fn
        self.sup_bound = float(sup_bound)
        self.name = name

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return np.asarray(self.fn(pts), dtype=float)

    def sup(self) -> float:
        return self.sup_bound

    def bound_on_sphere(self, r: float) -> float:
        return self.sup_bound

    def describe(self) -> str:
        return self.name


# ---------------------------------------------------------------------------
# Analytic profiles

class BetaProfile:
    """The fixed radial bump ((1 - |x|^2)+)^2: value 1 at 0, support B_1."""

    support_radius = 1.0

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        r2 = np.sum(pts**2, axis=-1)
        return np.maximum(1.0 - r2, 0.0) ** 2

    # 1d derivatives, used by the local-limit comparator.
    def d1(self, t):
        t = np.asarray(t, dtype=float)
        inside = np.abs(t) < 1.0
        return np.where(inside, -4.0 * t * (1.0 - t**2), 0.0)

    def d2(self, t):
        t = np.asarray(t, dtype=float)
        inside = np.abs(t) < 1.0
        return np.where(inside, 12.0 * t**2 - 4.0, 0.0)


class SqrtBumpProfile:
    """((1 - |x|^2)+)^(1/2); the profile whose operator is flat inside B_1."""

    support_radius = 1.0

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        r2 = np.sum(pts**2, axis=-1)
        return np.sqrt(np.maximum(1.0 - r2, 0.0))


class PowerProfile:
    """|x|^alpha, the exact-oscillation test profile."""

    support_radius = np.inf

    def __init__(self, alpha: float):
        if alpha <= 0.0:
            raise DomainError("PowerProfile needs alpha > 0")
        self.alpha = float(alpha)

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        r = np.linalg.norm(pts, axis=-1)
        return r**self.alpha


# ---------------------------------------------------------------------------

@dataclass
class GridFunction:
    """Node values on the uniform grid of [-L, L]^dim plus exterior rule.

    Interpolation inside the box is multilinear and reproduces node values
    exactly; outside the box the exterior rule applies.  ``sup_bound``
    must dominate sup|u| over all of R^n (it may be inf only for the
    growth-barrier exterior).
    """

    dim: int
    L: float
    h: float
    values: np.ndarray
    exterior: object
    sup_bound: float = None  # type: ignore[assignment]
    profile: Optional[object] = None

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise DomainError(f"dim must be 1 or 2, got {self.dim}")
        m = round(2.0 * self.L / self.h)
        if abs(m * self.h - 2.0 * self.L) > 1e-9 * self.L:
            raise DomainError("box size 2L must be an integer multiple of h")
        self.n_cells = int(m)
        expected = (self.n_cells + 1,) * self.dim
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != expected:
            raise DomainError(f"values shape {self.values.shape}, expected {expected}")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("grid values must be finite")
        if self.sup_bound is None:
            ext_sup = self.exterior.sup()
            self.sup_bound = float(max(np.max(np.abs(self.values)), ext_sup))
        if np.max(np.abs(self.values)) > self.sup_bound * (1.0 + 1e-12) + 1e-12:
            raise DomainError("node values exceed the declared sup bound")

    # -- construction ------------------------------------------------------

    @classmethod
    def from_callable(cls, fn, dim: int, L: float, h: float, exterior,
                      sup_bound: float | None = None) -> "GridFunction":
        g = cls(dim, L, h, np.zeros((round(2 * L / h) + 1,) * dim), exterior,
                sup_bound=np.inf)
        vals = np.asarray(fn(g.nodes()), dtype=float).reshape(g.values.shape)
        return cls(dim, L, h, vals, exterior, sup_bound=sup_bound,
                   profile=fn if hasattr(fn, "support_radius") else None)

    @classmethod
    def constant(cls, c: float, dim: int, L: float, h: float) -> "GridFunction":
        shape = (round(2 * L / h) + 1,) * dim
        return cls(dim, L, h, np.full(shape, float(c)), ConstantExterior(c))

    # -- geometry ----------------------------------------------------------

    def axis(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.n_cells + 1)

    def nodes(self) -> np.ndarray:
        """All node coordinates, shape (m,)+(dim,) matching ``values``."""
        t = self.axis()
        if self.dim == 1:
            return t[:, None]
        xx, yy = np.meshgrid(t, t, indexing="ij")
        return np.stack([xx, yy], axis=-1)

    def copy(self) -> "GridFunction":
        return GridFunction(self.dim, self.L, self.h, self.values.copy(),
                            self.exterior, self.sup_bound, self.profile)

    # -- evaluation ---------------------------------------------------------

    def eval(self, pts) -> np.ndarray:
        """Multilinear interpolation inside the box, exterior rule outside."""
        pts = np.asarray(pts, dtype=float)
        scalar_in = pts.ndim == 1
        pts2 = pts[None, :] if scalar_in else pts
        flat = pts2.reshape(-1, self.dim)
        out = np.empty(len(flat))

        inside = np.all(np.abs(flat) <= self.L, axis=-1)
        if np.any(inside):
            q = flat[inside]
            idx = np.floor((q + self.L) / self.h).astype(int)
            idx = np.clip(idx, 0, self.n_cells - 1)
            frac = (q + self.L) / self.h - idx
            if self.dim == 1:
                i = idx[:, 0]
                w = frac[:, 0]
                out[inside] = (1 - w) * self.values[i] + w * self.values[i + 1]
            else:
                i, j = idx[:, 0], idx[:, 1]
                wx, wy = frac[:, 0], frac[:, 1]
                v = self.values
                out[inside] = (
                    (1 - wx) * (1 - wy) * v[i, j]
                    + wx * (1 - wy) * v[i + 1, j]
                    + (1 - wx) * wy * v[i, j + 1]
                    + wx * wy * v[i + 1, j + 1]
                )
        if np.any(~inside):
            out[~inside] = self.exterior(flat[~inside])

        out = out.reshape(pts2.shape[:-1])
        return float(out[0]) if scalar_in else out

    def local_diff_bounds(self, x, safety: float = 2.0) -> tuple[float, float]:
        """Discrete gradient / second-difference bounds of u near x.

        Sampled at scales h and 2h along the axes (and diagonals for n=2);
        inflated by ``safety``.  Used for the inner-ball error model.
        """
        x = np.asarray(x, dtype=float)
        dirs = [np.eye(self.dim)[k] for k in range(self.dim)]
        if self.dim == 2:
            dirs.append(np.array([1.0, 1.0]) / np.sqrt(2.0))
            dirs.append(np.array([1.0, -1.0]) / np.sqrt(2.0))
        c1 = 0.0
        c2 = 0.0
        u0 = self.eval(x)
        for d in dirs:
            for scale in (self.h, 2.0 * self.h):
                up = self.eval(x + scale * d)
                um = self.eval(x - scale * d)
                c1 = max(c1, abs(up - um) / (2.0 * scale))
                c2 = max(c2, abs(up + um - 2.0 * u0) / scale**2)
        return safety * c1, safety * c2
