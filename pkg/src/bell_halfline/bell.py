"""Spatial Bell pairings and the CHSH correlator for spinor quadruples.

Every pairing between an Alice function a (negative half-line) and a Bob
function b (positive half-line) is i/pi times a real double integral.  With
Alice components stored as mirrored profiles A_j(x) = a_j(-x), the x -> -x
change of variables turns the kernel argument y - x into x + y, so all four
pairings are half-line integrals against the Carleman or Hankel kernel.

Pairings store the real coefficient of i; |.| of that coefficient is what
enters the CHSH combination.  The four pairings of one correlator are always
computed as four separate double integrals (sharing only the kernel matrix,
which is identical because the supports coincide), so the symmetry collapse
of the ansatz is a checkable output, never an assumption.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .forms import KernelForm, carleman_form, hankel_form
from .quadrature import QuadratureSpec, integrate_1d, integrate_2d_kernel_pairs
from .testfn import BellQuadruple, SpinorFunction

TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class PairingValue:
    """A pairing i * imag; `imag` is the stored real coefficient."""

    imag: float
    kernel: KernelForm
    error_estimate: float = 0.0

    @property
    def value(self):
        return 1j * self.imag


@dataclass(frozen=True)
class CorrelatorReport:
    p_fg: PairingValue
    p_fpg: PairingValue
    p_fgp: PairingValue
    p_fpgp: PairingValue
    chsh_abs: float
    four_p_fg: float
    norms: tuple
    c: float
    mass: float
    eps: Optional[float] = None

    @property
    def pairings(self):
        return (self.p_fg, self.p_fpg, self.p_fgp, self.p_fpgp)


def _check_sides(a, b):
    if a.side != "alice" or b.side != "bob":
        raise ValueError("spatial_pairing expects (alice, bob) in that order")
    gap = a.comp1.lo + b.comp1.lo
    if not gap > 0.0:
        raise ValueError(f"supports overlap: separation {gap!r} <= 0")


def spatial_pairing(a, b, kernel, spec=QuadratureSpec()):
    """Pairing <a|b> = (i/pi) iint K(y-x) (a1(x)b1(y) - a2(x)b2(y)) dx dy.

    a lives on the negative, b on the positive half-line; the mirrored form
    evaluates K(x+y) against the stored positive-side profiles.
    """
    _check_sides(a, b)
    kfun = lambda x, y: kernel.half_line_kernel(x + y)
    res = integrate_2d_kernel_pairs(
        kfun, [(a.comp1, b.comp1), (a.comp2, b.comp2)], spec)
    imag = (res[0].value - res[1].value) / math.pi
    err = (res[0].error_estimate + res[1].error_estimate) / math.pi
    return PairingValue(imag, kernel, err)


def local_norm(s, spec=QuadratureSpec()):
    """<s|s> = integral of comp1^2 + comp2^2 over the half-line."""
    def f(x, s=s):
        return np.asarray(s.comp1(x), dtype=float) ** 2 \
            + np.asarray(s.comp2(x), dtype=float) ** 2
    return integrate_1d(f, s.comp1.lo, s.comp1.hi, spec).value


def bell_correlator(q, kernel, spec=QuadratureSpec(), eps=None):
    """All four pairings, their CHSH combination, and the collapse value.

    chsh_abs = |<f|g> + <f'|g> + <f|g'> - <f'|g'>|; the report also carries
    4*|<f|g>| so the ansatz collapse can be checked externally.
    """
    for a in (q.f, q.f_prime):
        for b in (q.g, q.g_prime):
            _check_sides(a, b)
    kfun = lambda x, y: kernel.half_line_kernel(x + y)
    combos = [(q.f, q.g), (q.f_prime, q.g), (q.f, q.g_prime), (q.f_prime, q.g_prime)]
    pairs = []
    for a, b in combos:
        pairs.append((a.comp1, b.comp1))
        pairs.append((a.comp2, b.comp2))
    res = integrate_2d_kernel_pairs(kfun, pairs, spec)
    pv = []
    for i in range(4):
        imag = (res[2 * i].value - res[2 * i + 1].value) / math.pi
        err = (res[2 * i].error_estimate + res[2 * i + 1].error_estimate) / math.pi
        pv.append(PairingValue(imag, kernel, err))
    chsh = abs(pv[0].imag + pv[1].imag + pv[2].imag - pv[3].imag)
    norms = tuple(local_norm(s, spec) for s in (q.f, q.f_prime, q.g, q.g_prime))
    mass = kernel.mass if kernel.kind == "hankel" else 0.0
    return CorrelatorReport(pv[0], pv[1], pv[2], pv[3], chsh,
                            4.0 * abs(pv[0].imag), norms, q.c, mass, eps)


def limiting_value_general_c(c):
    """Closed-form CHSH limit 2(1+2c-c^2)/(1+c^2) as the form saturates pi."""
    if c < 0.0:
        raise ValueError(f"mixing constant must be >= 0, got {c!r}")
    return 2.0 * (1.0 + 2.0 * c - c * c) / (1.0 + c * c)


@dataclass(frozen=True)
class IdentityReport:
    """Deviations from the pairing identities implied by the ansatz."""

    deviations: dict
    max_deviation: float
    report: CorrelatorReport


def correlator_identity_check(q, kernel, spec=QuadratureSpec()):
    """Check the pairing identities appropriate to the quadruple's c.

    For every c: <f'|g> = <f|g'> and <f|g> = -<f'|g'>.  For c = sqrt(2)-1
    additionally all four collapse: <f|g> = <f'|g> = <f|g'> = -<f'|g'>.
    The quadratic-form identities pi*<f|g> = -(1-c^2)/(1+c^2) Q and
    pi*<f'|g> = -2c/(1+c^2) Q are reported as well.
    """
    rep = bell_correlator(q, kernel, spec)
    c = q.c
    p1, p2, p3, p4 = (p.imag for p in rep.pairings)
    dev = {
        "fpg_vs_fgp": abs(p2 - p3),
        "fg_vs_minus_fpgp": abs(p1 + p4),
    }
    if kernel.kind == "carleman":
        qc = carleman_form(q.profile, spec).value
    else:
        qc = hankel_form(q.profile, kernel.mass, spec).value
    s2 = 1.0 / (1.0 + c * c)
    dev["pi_fg_vs_form"] = abs(math.pi * p1 + (1.0 - c * c) * s2 * qc)
    dev["pi_fpg_vs_form"] = abs(math.pi * p2 + 2.0 * c * s2 * qc)
    if abs(c - (math.sqrt(2.0) - 1.0)) < 1e-12:
        dev["fg_vs_fpg"] = abs(p1 - p2)
        dev["fg_vs_fgp"] = abs(p1 - p3)
    return IdentityReport(dev, max(dev.values()), rep)
