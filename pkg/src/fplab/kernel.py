"""Kernel families comparable to |y|^(-n-s(x)p(x)) with heavy-tail control.

A kernel spec fixes a symmetric-in-y family K(x,y) together with the
constants of its structural bounds: two-sided power-law comparability on
B_2 (ellipticity band [lambda, Lambda]) and a one-sided decay bound
M*|y|^(-n-gamma) outside B_{1/4}.  Three concrete families are provided so
that both tight and slack instances of every bound are exercised:

* ``model``      -- exactly |y|^(-n-s(x)p(x));
* ``truncated``  -- the model family cut off outside |y| < 2;
* ``perturbed``  -- the model family times a symmetric modulation that
  stays inside [lambda, Lambda] (or deliberately escapes it when
  ``modulation_scale`` > 1, for negative tests).

Rescaled views K(x,y) -> r^(n+sp) K(r x + x0, r y) are represented by the
``origin``/``scale`` fields, so rescaling composes without wrapping.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .util import R_MAX, DomainError

FAMILIES = ("model", "truncated", "perturbed")

# Validation slack: bounds are accepted up to this relative roundoff.
_REL_SLACK = 1e-9
_ABS_SLACK = 1e-12


def _as_points(x, dim: int) -> np.ndarray:
    """Coerce positions to shape (..., dim)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        if dim != 1:
            raise DomainError("scalar position only valid for dim=1")
        return x.reshape(1)
    if x.shape[-1] != dim:
        raise DomainError(f"position has last axis {x.shape[-1]}, expected {dim}")
    return x


@dataclass(frozen=True)
class ExponentField:
    """The maps x -> s(x), p(x) with declared strict bounds.

    ``tau`` is the degeneracy margin for the singular branch: wherever
    p(x) < 2 the field must satisfy p(x)(1-s(x)) - 1 > tau.
    """

    s_of_x: Callable[[np.ndarray], np.ndarray]
    p_of_x: Callable[[np.ndarray], np.ndarray]
    s0: float
    s1: float
    p0: float
    p1: float
    tau: float = 0.0
    is_constant: bool = False
    descriptor: tuple = ("custom",)

    def __post_init__(self):
        if not (0.0 < self.s0 < self.s1 < 1.0):
            raise DomainError(f"need 0 < s0 < s1 < 1, got ({self.s0}, {self.s1})")
        if not (1.0 < self.p0 < self.p1):
            raise DomainError(f"need 1 < p0 < p1, got ({self.p0}, {self.p1})")
        if self.tau < 0.0:
            raise DomainError("tau must be >= 0")

    def s(self, x) -> np.ndarray:
        return np.asarray(self.s_of_x(np.asarray(x, dtype=float)), dtype=float)

    def p(self, x) -> np.ndarray:
        return np.asarray(self.p_of_x(np.asarray(x, dtype=float)), dtype=float)

    def check_samples(self, points: np.ndarray) -> None:
        """Raise if the field violates its invariants on the given sample."""
        s = self.s(points)
        p = self.p(points)
        if np.any(s <= self.s0) or np.any(s >= self.s1):
            raise DomainError("sampled s(x) escapes the declared (s0, s1) band")
        if np.any(p <= self.p0) or np.any(p >= self.p1):
            raise DomainError("sampled p(x) escapes the declared (p0, p1) band")
        singular = p < 2.0
        if np.any(singular):
            margin = p[singular] * (1.0 - s[singular]) - 1.0
            if np.any(margin <= self.tau):
                raise DomainError(
                    "singular branch requires p(x)*(1-s(x)) - 1 > tau; "
                    f"worst margin {margin.min():.6g} vs tau={self.tau}"
                )


class _Const:
    def __init__(self, v: float):
        self.v = float(v)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.full(x.shape[:-1] if x.ndim > 0 else (), self.v)


class _Piecewise:
    """Two values split by the sign of the first coordinate."""

    def __init__(self, lo: float, hi: float):
        self.lo = float(lo)
        self.hi = float(hi)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        first = x[..., 0] if x.ndim > 0 else x
        return np.where(first < 0.0, self.lo, self.hi)


class _Smooth:
    """Sinusoidal sweep of [lo, hi] along the first coordinate, smooth on B_2."""

    def __init__(self, lo: float, hi: float):
        self.lo = float(lo)
        self.hi = float(hi)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        first = x[..., 0] if x.ndim > 0 else x
        t = 0.5 * (1.0 + np.sin(np.pi * first / 4.0) * 0.999)
        return self.lo + (self.hi - self.lo) * t


def _auto_bounds(lo: float, hi: float, open_lo: float, open_hi: float) -> tuple[float, float]:
    pad = max(1e-6, 1e-6 * abs(hi))
    b0 = max(lo - pad, 0.5 * (open_lo + lo))
    b1 = min(hi + pad, 0.5 * (open_hi + hi)) if np.isfinite(open_hi) else hi + pad
    return b0, b1


def constant_exponents(s: float, p: float, tau: float = 0.0) -> ExponentField:
    """Constant-exponent field s(x) = s, p(x) = p with tight ambient bounds."""
    if not (0.0 < s < 1.0):
        raise DomainError(f"s must lie in (0,1), got {s}")
    if p <= 1.0:
        raise DomainError(f"p must exceed 1, got {p}")
    if p < 2.0 and p * (1.0 - s) - 1.0 <= tau:
        raise DomainError(
            f"p={p} < 2 requires p*(1-s) - 1 > tau, got {p * (1 - s) - 1:.6g} <= {tau}"
        )
    s0, s1 = _auto_bounds(s, s, 0.0, 1.0)
    p0, p1 = _auto_bounds(p, p, 1.0, np.inf)
    return ExponentField(
        _Const(s), _Const(p), s0, s1, p0, p1, tau,
        is_constant=True, descriptor=("const", s, p),
    )


def piecewise_exponents(
    s_values: tuple[float, float],
    p_values: tuple[float, float],
    tau: float = 0.0,
) -> ExponentField:
    """Piecewise-constant exponents split at {x_1 = 0}.

    The stress case: no regularity of the exponent maps is assumed anywhere.
    """
    s_lo, s_hi = min(s_values), max(s_values)
    p_lo, p_hi = min(p_values), max(p_values)
    s0, s1 = _auto_bounds(s_lo, s_hi, 0.0, 1.0)
    p0, p1 = _auto_bounds(p_lo, p_hi, 1.0, np.inf)
    fld = ExponentField(
        _Piecewise(*s_values), _Piecewise(*p_values), s0, s1, p0, p1, tau,
        is_constant=(s_lo == s_hi and p_lo == p_hi),
        descriptor=("piecewise", tuple(s_values), tuple(p_values)),
    )
    fld.check_samples(_sample_positions(1, 64))
    fld.check_samples(_sample_positions(2, 64))
    return fld


def smooth_exponents(
    s_range: tuple[float, float],
    p_range: tuple[float, float],
    tau: float = 0.0,
) -> ExponentField:
    """Smoothly varying exponents sweeping the given ranges over B_2."""
    s_lo, s_hi = min(s_range), max(s_range)
    p_lo, p_hi = min(p_range), max(p_range)
    s0, s1 = _auto_bounds(s_lo, s_hi, 0.0, 1.0)
    p0, p1 = _auto_bounds(p_lo, p_hi, 1.0, np.inf)
    fld = ExponentField(
        _Smooth(*s_range), _Smooth(*p_range), s0, s1, p0, p1, tau,
        is_constant=(s_lo == s_hi and p_lo == p_hi),
        descriptor=("smooth", tuple(s_range), tuple(p_range)),
    )
    fld.check_samples(_sample_positions(1, 64))
    fld.check_samples(_sample_positions(2, 64))
    return fld


def _sample_positions(dim: int, count: int) -> np.ndarray:
    """Deterministic lattice of positions filling B_2."""
    t = np.linspace(-2.0 + 1e-3, 2.0 - 1e-3, count)
    if dim == 1:
        return t[:, None]
    xx, yy = np.meshgrid(t, t)
    pts = np.stack([xx.ravel(), yy.ravel()], axis=-1)
    return pts[np.linalg.norm(pts, axis=-1) < 2.0]


@dataclass(frozen=True)
class KernelSpec:
    """A symmetric kernel family with ellipticity and tail bounds.

    ``origin`` and ``scale`` encode a rescaled view of the base family;
    ``scale == 1`` and ``origin == 0`` is the plain kernel.
    """

    dim: int
    exponents: ExponentField
    lam: float
    Lam: float
    M: float
    gamma: float
    family: str = "model"
    modulation_scale: float = 1.0
    origin: tuple = None  # type: ignore[assignment]
    scale: float = 1.0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise DomainError(f"dim must be 1 or 2, got {self.dim}")
        if not (0.0 < self.lam <= self.Lam):
            raise DomainError("need 0 < lambda <= Lambda")
        if self.M <= 0.0 or self.gamma <= 0.0:
            raise DomainError("need M > 0 and gamma > 0")
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.origin is None:
            object.__setattr__(self, "origin", (0.0,) * self.dim)
        if len(self.origin) != self.dim:
            raise DomainError("origin dimension mismatch")
        if not (0.0 < self.scale <= 1.0):
            raise DomainError(f"scale must lie in (0, 1], got {self.scale}")

    # Effective exponents of the (possibly rescaled) kernel at position x.
    def _base_point(self, x) -> np.ndarray:
        x = _as_points(x, self.dim)
        return self.scale * x + np.asarray(self.origin)

    def s_at(self, x):
        return self.exponents.s(self._base_point(x))

    def p_at(self, x):
        return self.exponents.p(self._base_point(x))

    def sp_at(self, x):
        z = self._base_point(x)
        return self.exponents.s(z) * self.exponents.p(z)


def _modulation(spec: KernelSpec, z: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Perturbed-family modulation; symmetric in y since it depends on |y|."""
    mid = 0.5 * (spec.lam + spec.Lam)
    half = 0.5 * (spec.Lam - spec.lam) * spec.modulation_scale
    wiggle = np.sin(1.7 * z[..., 0]) * np.cos(5.0 * r)
    return mid + half * wiggle


def eval_kernel(spec: KernelSpec, x, y):
    """Evaluate K(x, y).  y may be a single offset or an array of offsets."""
    x = _as_points(x, spec.dim)
    y = _as_points(y, spec.dim)
    r = np.linalg.norm(y, axis=-1)
    if np.any(r == 0.0):
        raise DomainError("kernel is singular at y = 0")
    z = spec.scale * x + np.asarray(spec.origin)
    w = spec.scale * r
    sp = spec.exponents.s(z) * spec.exponents.p(z)
    base = w ** -(spec.dim + sp)
    if spec.family == "truncated":
        base = np.where(w < 2.0, base, 0.0)
    elif spec.family == "perturbed":
        base = base * _modulation(spec, z, w)
    out = spec.scale ** (spec.dim + sp) * base
    if out.ndim == 0:
        return float(out)
    return out


def rescale_kernel(spec: KernelSpec, x0, scale: float) -> KernelSpec:
    """The zoomed kernel view r^(n+sp) K(r x + x0, r y) at ratio r = scale.

    Composes with existing views; the result keeps the ellipticity band
    [lambda, Lambda] on B_2 exactly, with exponents read at the mapped
    points.
    """
    if not (0.0 < scale <= 1.0):
        raise DomainError(f"scale must lie in (0, 1], got {scale}")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape != (spec.dim,):
        raise DomainError("x0 dimension mismatch")
    new_origin = tuple(spec.scale * x0 + np.asarray(spec.origin))
    return replace(spec, origin=new_origin, scale=spec.scale * scale)


@dataclass
class KernelValidation:
    """Worst-case violations of the structural bounds; <= 0 means satisfied."""

    symmetry: float
    lower_ellipticity: float
    upper_ellipticity: float
    tail: float
    samples: int
    passed: bool

    def worst(self) -> float:
        return max(self.symmetry, self.lower_ellipticity, self.upper_ellipticity, self.tail)


def validate_kernel(spec: KernelSpec, sample_count: int, seed: int = 0) -> KernelValidation:
    """Sample (x, y) pairs and report worst violations of the kernel bounds.

    Symmetry and the ellipticity band are checked for y in B_2, the tail
    bound outside B_{1/4}; all violations are normalized by the power-law
    factor so the singularity does not swamp the report.
    """
    if sample_count < 1:
        raise DomainError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    n = spec.dim

    xs = rng.uniform(-2.0, 2.0, size=(sample_count, n))
    xs = xs[np.linalg.norm(xs, axis=-1) < 2.0]
    if len(xs) == 0:
        xs = np.zeros((1, n))

    # Offsets in B_2 \ {0}: log-spaced radii stress the singular end.
    radii = np.exp(rng.uniform(np.log(1e-6), np.log(2.0 - 1e-9), size=len(xs)))
    dirs = rng.normal(size=(len(xs), n))
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    ys = radii[:, None] * dirs

    k_plus = np.asarray(eval_kernel(spec, xs, ys))
    k_minus = np.asarray(eval_kernel(spec, xs, -ys))
    scale_ref = np.maximum(np.abs(k_plus), np.abs(k_minus)) + _ABS_SLACK
    sym = float(np.max(np.abs(k_plus - k_minus) / scale_ref))

    sp = spec.sp_at(xs)
    normalized = k_plus * radii ** (n + sp)
    lower = float(np.max(spec.lam - normalized))
    upper = float(np.max(normalized - spec.Lam))

    tail_radii = np.exp(rng.uniform(np.log(0.25), np.log(2.0 * R_MAX), size=len(xs)))
    tail_ys = tail_radii[:, None] * dirs
    k_tail = np.asarray(eval_kernel(spec, xs, tail_ys))
    tail = float(np.max(np.maximum(-k_tail, k_tail * tail_radii ** (n + spec.gamma) - spec.M)))

    slack_ell = _REL_SLACK * max(spec.lam, spec.Lam) + _ABS_SLACK
    slack_tail = _REL_SLACK * spec.M + _ABS_SLACK
    passed = (
        sym <= _REL_SLACK
        and lower <= slack_ell
        and upper <= slack_ell
        and tail <= slack_tail
    )
    return KernelValidation(sym, lower, upper, tail, len(xs), passed)


# ---------------------------------------------------------------------------
# Plain-text serialization (section of key = value pairs)

def _exponents_to_strings(fld: ExponentField) -> dict[str, str]:
    kind = fld.descriptor[0]
    if kind == "const":
        return {"s": repr(fld.descriptor[1]), "p": repr(fld.descriptor[2])}
    if kind in ("piecewise", "smooth"):
        s_vals, p_vals = fld.descriptor[1], fld.descriptor[2]
        return {
            "s": f"{kind}:{s_vals[0]!r},{s_vals[1]!r}",
            "p": f"{kind}:{p_vals[0]!r},{p_vals[1]!r}",
        }
    raise DomainError("custom exponent fields cannot be serialized")


def _parse_exponent(text: str) -> tuple[str, tuple[float, ...]]:
    text = text.strip()
    if ":" in text:
        kind, rest = text.split(":", 1)
        vals = tuple(float(v) for v in rest.split(","))
        if kind not in ("piecewise", "smooth") or len(vals) != 2:
            raise DomainError(f"bad exponent descriptor {text!r}")
        return kind, vals
    return "const", (float(text),)


def kernel_to_section(spec: KernelSpec) -> dict[str, str]:
    """Serialize a kernel spec into a flat key -> value string mapping."""
    out = {
        "dim": str(spec.dim),
        "family": spec.family,
        "lambda": repr(spec.lam),
        "Lambda": repr(spec.Lam),
        "M": repr(spec.M),
        "gamma": repr(spec.gamma),
        "tau": repr(spec.exponents.tau),
    }
    out.update(_exponents_to_strings(spec.exponents))
    if spec.modulation_scale != 1.0:
        out["modulation_scale"] = repr(spec.modulation_scale)
    return out


def kernel_from_section(section: dict[str, str]) -> KernelSpec:
    """Parse a kernel spec from a key -> value string mapping."""
    known = {"dim", "family", "lambda", "Lambda", "M", "gamma", "s", "p", "tau",
             "modulation_scale"}
    unknown = set(section) - known
    if unknown:
        raise DomainError(f"unknown kernel key(s): {sorted(unknown)}")
    missing = {"dim", "family", "lambda", "Lambda", "M", "gamma", "s", "p"} - set(section)
    if missing:
        raise DomainError(f"missing kernel key(s): {sorted(missing)}")

    tau = float(section.get("tau", "0.0"))
    s_kind, s_vals = _parse_exponent(section["s"])
    p_kind, p_vals = _parse_exponent(section["p"])
    if s_kind == "const" and p_kind == "const":
        exps = constant_exponents(s_vals[0], p_vals[0], tau)
    else:
        # Promote a constant side to a degenerate pair of equal values.
        if s_kind == "const":
            s_vals = (s_vals[0], s_vals[0])
            s_kind = p_kind
        if p_kind == "const":
            p_vals = (p_vals[0], p_vals[0])
            p_kind = s_kind
        if s_kind != p_kind:
            raise DomainError("s and p descriptors must share the same kind")
        maker = piecewise_exponents if s_kind == "piecewise" else smooth_exponents
        exps = maker(s_vals, p_vals, tau)  # type: ignore[arg-type]

    return KernelSpec(
        dim=int(section["dim"]),
        exponents=exps,
        lam=float(section["lambda"]),
        Lam=float(section["Lambda"]),
        M=float(section["M"]),
        gamma=float(section["gamma"]),
        family=section["family"],
        modulation_scale=float(section.get("modulation_scale", "1.0")),
    )
