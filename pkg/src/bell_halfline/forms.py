"""Carleman and Hankel quadratic forms, each computable by independent routes.

The direct route is tensor quadrature of the kernel against the function.
Two alternative routes exist as independent cross-checks and are exposed on
an equal footing:

  * log-autocorrelation: after x = e^s the Carleman form becomes the cosh
    kernel integrated against the autocorrelation of e^{s/2} phi(e^s);
  * Laplace representation: the Hankel form equals
    int_0^inf m cosh(t) * (int e^{-m cosh(t) x} phi(x) dx)^2 dt,
    manifestly nonnegative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import (QuadratureSpec, _leggauss, _nodes_weights,
                         integrate_1d, integrate_2d_kernel)
from .specfun import bessel_k1, cosh_kernel
from .testfn import TestFunction1D, l2_norm


@dataclass(frozen=True)
class KernelForm:
    """Pairing kernel: Carleman 1/(x+y) or massive Hankel m*K1(m*(x+y))."""

    kind: str
    mass: float = 0.0

    def __post_init__(self):
        if self.kind not in ("carleman", "hankel"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "hankel" and not self.mass > 0.0:
            raise ValueError("hankel kernel needs mass > 0")

    @classmethod
    def carleman(cls):
        return cls("carleman")

    @classmethod
    def hankel(cls, mass):
        return cls("hankel", mass)

    def half_line_kernel(self, s):
        """Kernel value as a function of the sum coordinate s = x + y > 0."""
        s = np.asarray(s, dtype=float)
        if self.kind == "carleman":
            return 1.0 / s
        return self.mass * bessel_k1(self.mass * s)


@dataclass(frozen=True)
class FormValue:
    value: float
    route: str
    error_estimate: float


def _require_half_line(phi):
    if phi.lo < 0.0:
        raise ValueError("quadratic form needs support inside [0, inf)")


def carleman_form(phi, spec=QuadratureSpec()):
    """<phi, C phi> with C the 1/(x+y) integral operator, direct route."""
    _require_half_line(phi)
    res = integrate_2d_kernel(lambda x, y: 1.0 / (x + y), phi, phi, spec)
    return FormValue(res.value, "direct", res.error_estimate)


def log_profile(phi):
    """The log-coordinate profile psi(s) = e^{s/2} phi(e^s), norm-preserving."""
    if not phi.lo > 0.0:
        raise ValueError("log coordinates need support inside (0, inf)")
    def fn(s, p=phi):
        s = np.asarray(s, dtype=float)
        x = np.exp(s)
        return np.exp(s / 2.0) * np.asarray(p(x), dtype=float)
    return TestFunction1D(fn, math.log(phi.lo), math.log(phi.hi),
                          family=f"log[{phi.family}]")


def _h_autocorr_value(psi, r_panels, order, inner_panels):
    # int h(r) W(r) dr with W evaluated on Gauss nodes of uniform r panels
    L = psi.hi - psi.lo
    r_nodes, r_weights = _nodes_weights(-L, L, r_panels, order, "uniform")
    t_nodes, t_weights = _nodes_weights(psi.lo, psi.hi, inner_panels, order, "uniform")
    base = np.asarray(psi(t_nodes), dtype=float)
    shifted = np.asarray(psi(t_nodes[None, :] + r_nodes[:, None]), dtype=float)
    W = shifted @ (t_weights * base)
    return float(np.sum(r_weights * cosh_kernel(r_nodes) * W)), r_nodes.size * t_nodes.size


def carleman_form_log(phi, spec=QuadratureSpec()):
    """Same functional via the cosh kernel against the log-space autocorrelation."""
    psi = log_profile(phi)
    L = psi.hi - psi.lo
    # r panels capped at width 0.4 so the cosh kernel is resolved everywhere
    r_panels = max(2 * spec.panels, int(math.ceil(2.0 * L / 0.4)))
    inner = max(spec.panels, int(math.ceil(L / 0.4)))
    coarse, n1 = _h_autocorr_value(psi, r_panels, spec.nodes_per_panel, inner)
    fine, n2 = _h_autocorr_value(psi, 2 * r_panels, spec.nodes_per_panel, 2 * inner)
    return FormValue(fine, "log_autocorr", abs(fine - coarse))


def hankel_form(phi, m, spec=QuadratureSpec()):
    """<phi, K_m phi> with kernel m K1(m(x+y)), direct route."""
    _require_half_line(phi)
    if not m > 0.0:
        raise ValueError(f"hankel_form needs m > 0, got {m!r}")
    res = integrate_2d_kernel(lambda x, y: m * bessel_k1(m * (x + y)), phi, phi, spec)
    return FormValue(res.value, "direct", res.error_estimate)


def _laplace_grid_value(phi, m, theta_panels, order, x_panels):
    # substitute t = m cosh(theta) in the Laplace representation; the
    # 1/sqrt(t^2 - m^2) endpoint singularity cancels exactly
    theta_max = math.acosh(1.0 + 45.0 / (m * max(phi.lo, 1e-300)))
    th, wth = _nodes_weights(0.0, theta_max, theta_panels, order, "uniform")
    x, wx = _nodes_weights(phi.lo, phi.hi, x_panels, order, "auto")
    fx = np.asarray(phi(x), dtype=float)
    t = m * np.cosh(th)
    lap = np.exp(-np.outer(t, x)) @ (wx * fx)
    val = float(np.sum(wth * m * np.cosh(th) * lap * lap))
    return val, th.size * x.size


def hankel_form_laplace(phi, m, spec=QuadratureSpec()):
    """Hankel form through its Laplace-transform representation (>= 0)."""
    _require_half_line(phi)
    if not m > 0.0:
        raise ValueError(f"hankel_form_laplace needs m > 0, got {m!r}")
    if not phi.lo > 0.0:
        raise ValueError("laplace route needs support bounded away from 0")
    coarse, n1 = _laplace_grid_value(phi, m, spec.panels, spec.nodes_per_panel,
                                     2 * spec.panels)
    fine, n2 = _laplace_grid_value(phi, m, 2 * spec.panels, spec.nodes_per_panel,
                                   4 * spec.panels)
    return FormValue(fine, "laplace", abs(fine - coarse))


def weighted_carleman_bound(phi_tilde, beta, spec=QuadratureSpec()):
    """Exponentially weighted Carleman integral I_beta over the damped norm.

    I_beta = (1/N) iint exp(-beta(x+y))/(x+y) phi~(x) phi~(y) dx dy with
    N = ||exp(-x) phi~||^2.  I_2 <= <Phi, K Phi> <= I_1 for the m=1 Hankel
    form of the damped, normalized profile.
    """
    if beta not in (1, 2):
        raise ValueError(f"beta must be 1 or 2, got {beta!r}")
    _require_half_line(phi_tilde)
    norm = integrate_1d(
        lambda x: np.exp(-2.0 * x) * np.asarray(phi_tilde(x), dtype=float) ** 2,
        phi_tilde.lo, phi_tilde.hi, spec)
    num = integrate_2d_kernel(
        lambda x, y: np.exp(-beta * (x + y)) / (x + y), phi_tilde, phi_tilde, spec)
    return num.value / norm.value


def rayleigh_quotient(phi, kernel, spec=QuadratureSpec()):
    """Form value divided by the squared L2 norm; bounded by pi."""
    n = phi.l2_norm_cache if phi.l2_norm_cache is not None else l2_norm(phi, spec)
    if not n > 0.0:
        raise ValueError("rayleigh_quotient needs a nonzero function")
    if kernel.kind == "carleman":
        fv = carleman_form(phi, spec)
    else:
        fv = hankel_form(phi, kernel.mass, spec)
    return fv.value / (n * n)
