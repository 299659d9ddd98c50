"""Momentum-space pairings with temporal mollification, and their limits.

The spacetime pairing of two temporally mollified spatial spinor functions
splits into a local piece I1 and a nonlocal piece I2:

  I1 = int dk/2pi  bhat(eta w_k)^2            (u1^(-k) v1^(k) + u2^(-k) v2^(k))
  I2 = int dk/2pi  bhat(eta w_k)^2 (k / w_k)  (u1^(-k) v1^(k) - u2^(-k) v2^(k))

with w_k = sqrt(k^2 + m^2) and bhat the transform of the even bump mollifier.
As eta -> 0, I1 tends to the local L2 pairing and I2 to the configuration
space kernel pairing (Bessel kernel m K1(m(y-x)) for m > 0, 1/(y-x) in the
massless limit).

Fourier transforms are direct quadrature against exp(ikx) on the compact
supports: panel widths are capped so Gauss nodes resolve the oscillation at
each k, and for large k the x-range is truncated once k*x exceeds a phase
budget, which perturbs the transform only at the 1e-3 relative level in a
region whose contribution is already superpolynomially damped.  No FFT, so
the k grid is arbitrary and there is no periodization error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bell import TSIRELSON_BOUND, bell_correlator
from .forms import KernelForm
from .quadrature import QuadratureSpec, _leggauss, _nodes_weights
from .specfun import bessel_k0
from .testfn import (assemble_quadruple, build_phi_tilde, damp_exponential,
                     dilate, normalize)

# phase budget for x-truncation of large-k transforms: keeping k*X >= 3e5
# bounds the induced relative error of the transform near 1e-3 in the
# superpolynomially damped tail region
_PHASE_BUDGET = 3.0e5
# oscillation cap: a 16-node Gauss panel resolves about five periods
_PANEL_PHASE = 30.0
_FEATURE_WAVENUMBERS = 25.0
_FINE_BAND_PHASE = 120.0

_bump_norm_cache: Optional[float] = None


def _bump_raw(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ti * ti))
    return out


_BUMP_PANELS = 80


def _bump_norm():
    # same base grid as bump_hat so that bump_hat(0) is exactly 1
    global _bump_norm_cache
    if _bump_norm_cache is None:
        t, w = _nodes_weights(-1.0, 1.0, _BUMP_PANELS, 16, "uniform")
        _bump_norm_cache = float(np.sum(w * _bump_raw(t)))
    return _bump_norm_cache


def bump_value(t):
    """The fixed even C-infinity bump on (-1, 1), normalized to integral 1."""
    return _bump_raw(t) / _bump_norm()


def bump_hat(w):
    """Cosine transform of the unit bump: bhat(w) = int bump(t) cos(wt) dt."""
    w = np.asarray(w, dtype=float)
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    wmax = float(np.max(np.abs(w))) if w.size else 0.0
    panels = max(_BUMP_PANELS, int(math.ceil(2.0 * wmax / _PANEL_PHASE)) + 8)
    t, wt = _nodes_weights(-1.0, 1.0, panels, 16, "uniform")
    vals = bump_value(t)
    out = np.cos(np.outer(w, t)) @ (wt * vals)
    return float(out[0]) if scalar else out.reshape(np.shape(w))


@dataclass(frozen=True)
class Mollifier:
    """Temporal mollifier beta_eta(t) = bump(t/eta)/eta."""

    eta: float

    def __post_init__(self):
        if not self.eta > 0.0:
            raise ValueError(f"mollifier width must be positive, got {self.eta!r}")

    def value(self, t):
        t = np.asarray(t, dtype=float)
        return bump_value(t / self.eta) / self.eta

    def hat(self, omega):
        """Transform of beta_eta at omega; equals bump_hat(eta * omega)."""
        return bump_hat(self.eta * np.asarray(omega, dtype=float))


def mollifier_hat(eta, omega):
    """bhat_eta(omega): real, even, bounded by 1, equal to 1 at omega = 0."""
    return Mollifier(eta).hat(omega)


def omega_k(k, m):
    return np.hypot(np.asarray(k, dtype=float), m)


def _osc_panels(lo, hi, k_res, base_panels):
    """Panel edges on [lo, hi]: geometric baseline, subdivided so each panel
    spans at most ~5 oscillation periods of exp(i k_res x)."""
    cap = _PANEL_PHASE / max(k_res, 1e-300)
    edges = [lo]
    base = np.geomspace(lo, hi, base_panels + 1) if lo > 0 else \
        np.linspace(lo, hi, base_panels + 1)
    for right in base[1:]:
        left = edges[-1]
        width = right - left
        if width > cap:
            pieces = int(math.ceil(width / cap))
            edges.extend(np.linspace(left, right, pieces + 1)[1:])
        else:
            edges.append(right)
    return np.asarray(edges)


def _gl_on_edges(edges, order):
    x, w = _leggauss(order)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def spatial_ft(u, k, spec=QuadratureSpec()):
    """Fourier transform int u(x) exp(ikx) dx for compactly supported u.

    k may be a scalar or array; the x grid resolves the fastest requested
    oscillation.  Conjugate symmetry holds for real u: ft(-k) = conj(ft(k)).
    """
    karr = np.asarray(k, dtype=float)
    scalar = karr.ndim == 0
    karr = np.atleast_1d(karr)
    kmax = float(np.max(np.abs(karr))) if karr.size else 0.0
    edges = _osc_panels(u.lo, u.hi, kmax, max(spec.panels, 16))
    x, w = _gl_on_edges(edges, spec.nodes_per_panel)
    vals = w * np.asarray(u(x), dtype=float)
    out = np.exp(1j * np.outer(karr, x)) @ vals
    return complex(out[0]) if scalar else out.reshape(np.shape(k))


@dataclass
class OnShellTransform:
    """k grid, weights, and cached component transforms for one pairing family."""

    mass: float
    k_nodes: np.ndarray
    k_weights: np.ndarray
    k_max: float
    panel_slices: list          # (slice into k arrays, x_nodes, x_weights)
    diagnostics: dict = field(default_factory=dict)
    _cache: dict = field(default_factory=dict)

    def omega(self, k):
        return omega_k(k, self.mass)

    def _root_ft(self, root):
        key = id(root)
        if key not in self._cache:
            out = np.empty(self.k_nodes.size, dtype=complex)
            for sl, x, w in self.panel_slices:
                vals = w * np.asarray(root(x), dtype=float)
                out[sl] = np.exp(1j * np.outer(self.k_nodes[sl], x)) @ vals
            self._cache[key] = out
        return self._cache[key]

    def component_ft(self, comp, mirrored):
        """Transform of the physical component (profile or its mirror image)."""
        root, factor = comp.base if comp.base is not None else (comp, 1.0)
        ft = factor * self._root_ft(root)
        return np.conj(ft) if mirrored else ft


def momentum_grid(profile_lo, profile_hi, m, spec=QuadratureSpec()):
    """Build the symmetric k grid and per-panel x grids for one support."""
    if not profile_hi > profile_lo > 0.0:
        raise ValueError("momentum grid expects a positive support interval")
    x_abs = profile_hi
    span = profile_hi - profile_lo
    feature = profile_lo
    k_fine = _FINE_BAND_PHASE / x_abs
    k_max = max(_FEATURE_WAVENUMBERS / feature, 4.0 * k_fine, 60.0 / span)
    # positive-k panel edges: fine band resolving exp(ik x_max), then a
    # geometric band out to k_max; an extra geometric run resolves the
    # k/omega transition when the mass sits below the fine band
    edges = list(np.linspace(0.0, k_fine, max(4, int(_FINE_BAND_PHASE / _PANEL_PHASE)) + 1))
    if 0.0 < m and m / 30.0 < k_fine:
        ins = np.geomspace(max(m / 100.0, k_fine * 1e-8), min(30.0 * m, k_fine), 24)
        edges = sorted(set(edges) | set(ins.tolist()))
    k = edges[-1]
    while k < k_max:
        k = min(k * 1.3, k_max)
        edges.append(k)
    edges = np.asarray(edges)

    order = spec.nodes_per_panel
    k_pos, w_pos = _gl_on_edges(edges, order)
    k_nodes = np.concatenate([-k_pos[::-1], k_pos])
    k_weights = np.concatenate([w_pos[::-1], w_pos])

    n = k_pos.size
    panel_slices = []
    base_panels = max(spec.panels, int(4 * math.log(profile_hi / profile_lo) + 8))
    for p in range(edges.size - 1):
        k_hi = edges[p + 1]
        x_cut = min(profile_hi, max(_PHASE_BUDGET / max(k_hi, 1e-300), 8.0 * profile_lo))
        x_edges = _osc_panels(profile_lo, x_cut, k_hi, base_panels)
        x, w = _gl_on_edges(x_edges, order)
        sl_pos = slice(n + p * order, n + (p + 1) * order)
        sl_neg = slice(n - (p + 1) * order, n - p * order)
        panel_slices.append((sl_pos, x, w))
        panel_slices.append((sl_neg, x, w))
    diag = {
        "k_max": float(k_max),
        "k_nodes": int(k_nodes.size),
        "x_nodes_total": int(sum(x.size for _, x, _ in panel_slices)),
    }
    return OnShellTransform(m, k_nodes, k_weights, float(k_max), panel_slices, diag)


def _pair_supports(u, v):
    sup = {(u.comp1.lo, u.comp1.hi), (u.comp2.lo, u.comp2.hi),
           (v.comp1.lo, v.comp1.hi), (v.comp2.lo, v.comp2.hi)}
    if len(sup) != 1:
        raise ValueError("momentum pairing expects all components on one profile support")
    return sup.pop()


def _hat_products(grid, u, v):
    u1 = grid.component_ft(u.comp1, u.side == "alice")
    u2 = grid.component_ft(u.comp2, u.side == "alice")
    v1 = grid.component_ft(v.comp1, v.side == "alice")
    v2 = grid.component_ft(v.comp2, v.side == "alice")
    # u_j^(-k) = conj(u_j^(k)) for real components
    return np.conj(u1) * v1, np.conj(u2) * v2


def pairing_I1(u, v, eta, m, spec=QuadratureSpec(), grid=None):
    """Local momentum term; converges to int (u1 v1 + u2 v2) dx as eta -> 0."""
    if grid is None:
        lo, hi = _pair_supports(u, v)
        grid = momentum_grid(lo, hi, m, spec)
    p1, p2 = _hat_products(grid, u, v)
    bh2 = bump_hat(eta * grid.omega(grid.k_nodes)) ** 2
    val = np.sum(grid.k_weights * bh2 * (p1 + p2)) / (2.0 * math.pi)
    return float(val.real)


def pairing_I2(u, v, eta, m, spec=QuadratureSpec(), grid=None):
    """Nonlocal momentum term: returns the real coefficient of i.

    Vanishes identically for u = v (even integrand against the odd k/omega).
    For spacelike separated pairs it converges, as eta -> 0, to the
    configuration-space kernel pairing.
    """
    if grid is None:
        lo, hi = _pair_supports(u, v)
        grid = momentum_grid(lo, hi, m, spec)
    p1, p2 = _hat_products(grid, u, v)
    k = grid.k_nodes
    ratio = np.where(k == 0.0, 0.0, k / grid.omega(k)) if m > 0 else np.sign(k)
    bh2 = bump_hat(eta * grid.omega(k)) ** 2
    val = np.sum(grid.k_weights * bh2 * ratio * (p1 - p2)) / (2.0 * math.pi)
    return float(val.imag)


@dataclass(frozen=True)
class MomentumReport:
    """CHSH data where each pairing is I1 + I2 of mollified functions."""

    eta: float
    mass: float
    pairings: tuple          # complex <f|g>, <f'|g>, <f|g'>, <f'|g'>
    norms: tuple             # mollified norms of f, f', g, g'
    chsh_abs: float          # |sum| of norm-normalized pairings
    residual: float          # largest off-convention part (Im I1, Re I2)


def momentum_correlator(q, eta, m, spec=QuadratureSpec(), grid=None):
    """All four momentum-route pairings of a quadruple at mollifier width eta.

    Pairings are normalized by the mollified norms sqrt(I1(a,a)) so the
    CHSH combination refers to unit observables.
    """
    if grid is None:
        lo, hi = _pair_supports(q.f, q.g)
        grid = momentum_grid(lo, hi, m, spec)
    k = grid.k_nodes
    bh2 = bump_hat(eta * grid.omega(k)) ** 2
    ratio = np.where(k == 0.0, 0.0, k / grid.omega(k)) if m > 0 else np.sign(k)
    wloc = grid.k_weights * bh2 / (2.0 * math.pi)
    wnon = wloc * ratio

    def pairing(a, b):
        p1, p2 = _hat_products(grid, a, b)
        i1 = np.sum(wloc * (p1 + p2))
        i2 = np.sum(wnon * (p1 - p2))
        return complex(i1 + i2), max(abs(i1.imag), abs(i2.real))

    combos = [(q.f, q.g), (q.f_prime, q.g), (q.f, q.g_prime), (q.f_prime, q.g_prime)]
    vals, residual = [], 0.0
    for a, b in combos:
        p, r = pairing(a, b)
        vals.append(p)
        residual = max(residual, r)
    norms = []
    for s in (q.f, q.f_prime, q.g, q.g_prime):
        n2, r = pairing(s, s)
        norms.append(math.sqrt(max(n2.real, 0.0)))
        residual = max(residual, r)
    nf, nfp, ng, ngp = norms
    combo = (vals[0] / (nf * ng) + vals[1] / (nfp * ng)
             + vals[2] / (nf * ngp) - vals[3] / (nfp * ngp))
    return MomentumReport(eta, m, tuple(vals), tuple(norms), abs(combo), residual)


def fourier_bessel_identity_check(k, m, spec=QuadratureSpec()):
    """Deviation |Ghat(k) * omega_k - 1| for G(x) = K0(m|x|)/pi.

    Ghat(k) = (2/pi) int_0^inf K0(m x) cos(kx) dx, truncated where
    K0(m x) < 1e-18.  The logarithmic singularity at 0 is handled in log
    coordinates on an inner interval where cos(kx) is still smooth.
    """
    if not m > 0.0:
        raise ValueError(f"fourier_bessel_identity_check needs m > 0, got {m!r}")
    k = float(k)
    x_max = 45.0 / m
    x_inner = min(0.01 / max(abs(k), 1.0), 0.01 / m)
    # inner piece in s = log x: integrand x K0(mx) cos(kx), smooth and small
    s_lo = math.log(x_inner) - 42.0
    s_edges = np.linspace(s_lo, math.log(x_inner), 40 + 1)
    s, ws = _gl_on_edges(s_edges, spec.nodes_per_panel)
    xs = np.exp(s)
    inner = float(np.sum(ws * xs * bessel_k0(m * xs) * np.cos(k * xs)))
    # outer piece with oscillation-capped geometric panels
    x_edges = _osc_panels(x_inner, x_max, abs(k), max(40, spec.panels))
    x, wx = _gl_on_edges(x_edges, spec.nodes_per_panel)
    outer = float(np.sum(wx * bessel_k0(m * x) * np.cos(k * x)))
    ghat = (2.0 / math.pi) * (inner + outer)
    return abs(ghat * float(omega_k(k, m)) - 1.0)


@dataclass(frozen=True)
class ScheduleResult:
    success: bool
    delta: float
    eps: Optional[float]
    eta: Optional[float]
    chsh_spatial: Optional[float]
    chsh_momentum: Optional[float]
    best_gap: float
    history: list


DEFAULT_EPS_LADDER = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)


def eta_eps_schedule_check(delta, spec=QuadratureSpec(), mass=0.0,
                           eps_list=DEFAULT_EPS_LADDER,
                           eta_divisors=(4, 8, 16, 32), agreement_tol=5e-3,
                           c=None):
    """Find (eps, eta) whose momentum-route CHSH exceeds 2*sqrt(2) - delta.

    Walks eps down the ladder until the spatial CHSH clears the target with
    a small safety margin, then shrinks eta below eps/2 until the mollified
    momentum pairings clear it too and sit within agreement_tol of the
    spatial value.  Returns the witness and the search history; on failure
    reports the best achieved gap.
    """
    # delta < 2*sqrt(2) - 2 keeps the target above the classical bound 2;
    # larger deltas are accepted for coarse smoke runs
    if not 0.0 < delta < TSIRELSON_BOUND:
        raise ValueError(f"delta must lie in (0, 2*sqrt(2)), got {delta!r}")
    target = TSIRELSON_BOUND - delta
    margin = min(0.01, delta / 20.0)
    history = []
    best = -math.inf
    witness_eps = None
    quad = None
    for eps in eps_list:
        nspec = QuadratureSpec(48, spec.nodes_per_panel)
        if mass > 0.0:
            phi = dilate(normalize(damp_exponential(build_phi_tilde(eps)), nspec), mass)
        else:
            phi = normalize(build_phi_tilde(eps), nspec)
        q = assemble_quadruple(phi) if c is None else assemble_quadruple(phi, c)
        kern = KernelForm.hankel(mass) if mass > 0.0 else KernelForm.carleman()
        rep = bell_correlator(q, kern, spec, eps=eps)
        history.append({"stage": "spatial", "eps": eps, "chsh": rep.chsh_abs})
        best = max(best, rep.chsh_abs - target)
        if rep.chsh_abs > target + margin:
            witness_eps = eps
            chsh_spatial = rep.chsh_abs
            quad = q
            break
    if witness_eps is None:
        return ScheduleResult(False, delta, None, None, None, None, best, history)
    lo, hi = _pair_supports(quad.f, quad.g)
    grid = momentum_grid(lo, hi, mass, spec)
    for div in eta_divisors:
        eta = witness_eps / div
        mrep = momentum_correlator(quad, eta, mass, spec, grid=grid)
        history.append({"stage": "momentum", "eps": witness_eps, "eta": eta,
                        "chsh": mrep.chsh_abs})
        best = max(best, mrep.chsh_abs - target)
        if mrep.chsh_abs > target and abs(mrep.chsh_abs - chsh_spatial) <= agreement_tol:
            return ScheduleResult(True, delta, witness_eps, eta, chsh_spatial,
                                  mrep.chsh_abs, mrep.chsh_abs - target, history)
    return ScheduleResult(False, delta, witness_eps, None, chsh_spatial,
                          history[-1]["chsh"], best, history)
