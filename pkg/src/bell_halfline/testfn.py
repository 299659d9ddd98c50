"""Explicit test-function families and the spinor quadruples built from them.

Functions are closed-form evaluators plus support metadata, never sampled
arrays; downstream quadrature picks its own nodes.  Alice-side spinor
components are stored as positive-half-line profiles with a mirror flag,
which turns every Alice/Bob pairing into a half-line integral with kernel
argument x + y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .quadrature import QuadratureSpec, integrate_1d
from .specfun import smooth_step

# mixing constant singled out by c^2 + 2c - 1 = 0
TSIRELSON_C = math.sqrt(2.0) - 1.0
assert abs(TSIRELSON_C**2 + 2.0 * TSIRELSON_C - 1.0) < 1e-15


@dataclass(frozen=True)
class TestFunction1D:
    """Real function on a closed interval, zero outside it."""

    fn: Callable[[np.ndarray], np.ndarray]
    lo: float
    hi: float
    family: str = "custom"
    l2_norm_cache: Optional[float] = None
    # (root function, scalar factor) when this is a scalar multiple of another
    base: Optional[tuple] = field(default=None, repr=False)

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        out = np.zeros_like(arr)
        inside = (arr >= self.lo) & (arr <= self.hi)
        if np.any(inside):
            out[inside] = np.asarray(self.fn(arr[inside]), dtype=float)
        return float(out[0]) if scalar else out.reshape(np.shape(x))

    @property
    def support(self):
        return (self.lo, self.hi)


def build_phi_tilde(eps):
    """Five-piece cutoff of the inverse-square-root profile.

    Zero on [0, eps/2]; smooth rise times x^(-1/2) on (eps/2, eps); exactly
    x^(-1/2) on [eps, 1/eps]; smooth fall on (1/eps, 2/eps); zero beyond.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"build_phi_tilde needs eps in (0, 1), got {eps!r}")

    def fn(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        rise = (x > eps / 2) & (x < eps)
        if np.any(rise):
            xr = x[rise]
            out[rise] = smooth_step(2.0 * xr - eps, eps) / np.sqrt(xr)
        plateau = (x >= eps) & (x <= 1.0 / eps)
        out[plateau] = 1.0 / np.sqrt(x[plateau])
        fall = (x > 1.0 / eps) & (x < 2.0 / eps)
        if np.any(fall):
            xf = x[fall]
            out[fall] = smooth_step(2.0 * eps - eps * eps * xf, eps) / np.sqrt(xf)
        return out

    return TestFunction1D(fn, eps / 2.0, 2.0 / eps, family=f"phi_eps({eps:g})")


def scale(phi, factor):
    """Pointwise scalar multiple, keeping a link to the root function."""
    root, f0 = phi.base if phi.base is not None else (phi, 1.0)
    cache = None
    if phi.l2_norm_cache is not None:
        cache = abs(factor) * phi.l2_norm_cache
    return TestFunction1D(lambda x, p=phi, c=factor: c * np.asarray(p.fn(x), dtype=float),
                          phi.lo, phi.hi, family=phi.family,
                          l2_norm_cache=cache, base=(root, factor * f0))


def l2_norm(phi, spec=QuadratureSpec()):
    """L2 norm over the support, by quadrature."""
    res = integrate_1d(lambda x: np.asarray(phi(x), dtype=float) ** 2,
                       phi.lo, phi.hi, spec)
    return math.sqrt(max(res.value, 0.0))


def normalize(phi, spec=QuadratureSpec()):
    """Divide by the L2 norm; the result carries l2_norm_cache = 1."""
    n = l2_norm(phi, spec)
    if not n > 0.0:
        raise ValueError("cannot normalize a zero function")
    out = scale(phi, 1.0 / n)
    return TestFunction1D(out.fn, out.lo, out.hi, family=phi.family,
                          l2_norm_cache=1.0, base=out.base)


def damp_exponential(phi_tilde):
    """Pointwise product with exp(-x); support unchanged."""
    def fn(x, p=phi_tilde):
        x = np.asarray(x, dtype=float)
        return np.exp(-x) * np.asarray(p.fn(x), dtype=float)
    return TestFunction1D(fn, phi_tilde.lo, phi_tilde.hi,
                          family=phi_tilde.family.replace("phi_eps", "phi_eps_damped"))


def dilate(phi, m):
    """Unitary dilation (U_m phi)(x) = sqrt(m) phi(m x); preserves the L2 norm."""
    if not m > 0.0:
        raise ValueError(f"dilate needs m > 0, got {m!r}")
    rm = math.sqrt(m)
    def fn(x, p=phi, mm=m, r=rm):
        return r * np.asarray(p(mm * np.asarray(x, dtype=float)), dtype=float)
    return TestFunction1D(fn, phi.lo / m, phi.hi / m,
                          family=f"dilated[{phi.family}, m={m:g}]",
                          l2_norm_cache=phi.l2_norm_cache)


@dataclass(frozen=True)
class SpinorFunction:
    """Two-component spinor test function on one half-line.

    Components are stored as positive-half-line profiles.  For side "bob"
    the physical function is comp_j(x) on [lo, hi]; for side "alice" it is
    comp_j(-x), supported on [-hi, -lo].
    """

    comp1: TestFunction1D
    comp2: TestFunction1D
    side: str

    def __post_init__(self):
        if self.side not in ("alice", "bob"):
            raise ValueError(f"side must be alice or bob, got {self.side!r}")
        if (self.comp1.lo, self.comp1.hi) != (self.comp2.lo, self.comp2.hi):
            raise ValueError("spinor components must share one support interval")

    @property
    def support(self):
        if self.side == "alice":
            return (-self.comp1.hi, -self.comp1.lo)
        return (self.comp1.lo, self.comp1.hi)

    def eval1(self, x):
        x = np.asarray(x, dtype=float)
        return self.comp1(-x) if self.side == "alice" else self.comp1(x)

    def eval2(self, x):
        x = np.asarray(x, dtype=float)
        return self.comp2(-x) if self.side == "alice" else self.comp2(x)


@dataclass(frozen=True)
class BellQuadruple:
    """Alice pair (f, f') and Bob pair (g, g') satisfying the symmetry ansatz."""

    f: SpinorFunction
    f_prime: SpinorFunction
    g: SpinorFunction
    g_prime: SpinorFunction
    c: float
    profile: TestFunction1D


def assemble_quadruple(phi_normalized, c=TSIRELSON_C):
    """Build the eight spinor components from one normalized profile.

    Bob:    g  = (phi, -c phi)/sqrt(1+c^2),   g' = (c phi, phi)/sqrt(1+c^2)
    Alice:  f  = (-phi(-x), c phi(-x))/sqrt(1+c^2),
            f' = (-c phi(-x), -phi(-x))/sqrt(1+c^2)
    """
    if c < 0.0:
        raise ValueError(f"mixing constant must be >= 0, got {c!r}")
    if not phi_normalized.lo > 0.0:
        raise ValueError("profile support must be bounded away from 0")
    s = 1.0 / math.sqrt(1.0 + c * c)
    g = SpinorFunction(scale(phi_normalized, s), scale(phi_normalized, -c * s), "bob")
    g_prime = SpinorFunction(scale(phi_normalized, c * s), scale(phi_normalized, s), "bob")
    f = SpinorFunction(scale(phi_normalized, -s), scale(phi_normalized, c * s), "alice")
    f_prime = SpinorFunction(scale(phi_normalized, -c * s), scale(phi_normalized, -s), "alice")
    return BellQuadruple(f, f_prime, g, g_prime, c, phi_normalized)


def ansatz_max_deviation(q, n=201):
    """Largest pointwise violation of the symmetry relations on a sample grid.

    Checks f2' = f1, f1' = -f2, g2' = g1, g1' = -g2, f2 = -c f1, g2 = -c g1
    and f1(x) = -g1(-x) on n points spanning both supports.
    """
    lo, hi = q.g.support
    xb = np.linspace(lo, hi, n)          # Bob side
    xa = -xb                              # Alice side (mirrored grid)
    d = 0.0
    d = max(d, float(np.max(np.abs(q.f_prime.eval2(xa) - q.f.eval1(xa)))))
    d = max(d, float(np.max(np.abs(q.f_prime.eval1(xa) + q.f.eval2(xa)))))
    d = max(d, float(np.max(np.abs(q.g_prime.eval2(xb) - q.g.eval1(xb)))))
    d = max(d, float(np.max(np.abs(q.g_prime.eval1(xb) + q.g.eval2(xb)))))
    d = max(d, float(np.max(np.abs(q.f.eval2(xa) + q.c * q.f.eval1(xa)))))
    d = max(d, float(np.max(np.abs(q.g.eval2(xb) + q.c * q.g.eval1(xb)))))
    d = max(d, float(np.max(np.abs(q.f.eval1(xa) + q.g.eval1(-xa)))))
    return d
