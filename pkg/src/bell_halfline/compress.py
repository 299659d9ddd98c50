"""Galerkin compressions of the Carleman operator in nested Haar-type bases.

The basis covering [0, 2^K] is organised in dyadic regions: annuli
[2^i, 2^(i+1)] for i = -J .. K-1 plus the leftover [0, 2^-J].  Each region
carries a standard Haar system of depth J (one normalized indicator plus
2^J - 1 indicator-difference wavelets), so N = (J+K+1) * 2^J.  Spans are
nested along J -> J+1 and K -> K+1, which makes the top eigenvalue
nondecreasing under refinement; as both grow the span exhausts L2([0, inf))
and lambda_max climbs to the operator norm pi.

Matrix entries are exact closed forms built from F(s) = s log s, so the only
error separating lambda_max from pi is projection error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_DENSE_DIM = 4600


@dataclass(frozen=True)
class DyadicBasis:
    """Piecewise-constant orthonormal family on [0, 2^K]."""

    levels: int          # Haar depth J within each region
    span_exponent: int   # domain [0, 2^K]
    elements: list       # (breakpoints, coefficients) per element

    @property
    def dim(self):
        return len(self.elements)


@dataclass(frozen=True)
class CompressionResult:
    matrix: np.ndarray
    spectrum: np.ndarray
    lambda_max: float
    basis: DyadicBasis


def _region_haar(a, b, depth):
    """Haar system on [a, b]: scaling element plus wavelets to level depth-1."""
    length = b - a
    elems = [(np.array([a, b]), np.array([1.0 / math.sqrt(length)]))]
    for lev in range(depth):
        w = length / 2.0 ** lev
        v = 1.0 / math.sqrt(w)
        for n in range(2 ** lev):
            s = a + n * w
            elems.append((np.array([s, s + w / 2.0, s + w]), np.array([v, -v])))
    return elems


def build_dyadic_basis(J, K):
    if J < 0 or K < 0:
        raise ValueError("need J >= 0 and K >= 0")
    n = (J + K + 1) * 2 ** J
    if n > MAX_DENSE_DIM:
        raise MemoryError(f"dense dimension {n} exceeds {MAX_DENSE_DIM}")
    elems = _region_haar(0.0, 2.0 ** (-J), J)
    for i in range(-J, K):
        elems += _region_haar(2.0 ** i, 2.0 ** (i + 1), J)
    return DyadicBasis(J, K, elems)


def carleman_entry_piecewise_constant(interval1, interval2):
    """iint over [a,b] x [c,d] of 1/(x+y): F(b+d)-F(a+d)-F(b+c)+F(a+c), F(s)=s log s.

    Evaluated through an algebraically identical log1p arrangement so that
    small rectangles far from the origin keep full relative accuracy.
    """
    a, b = interval1
    c, d = interval2
    if not (0.0 <= a < b and 0.0 <= c < d):
        if b == a or d == c:
            return 0.0
        raise ValueError("intervals must satisfy 0 <= lo < hi")
    return float(_rect(np.float64(a), np.float64(b), np.float64(c), np.float64(d)))


def _F(s):
    s = np.asarray(s, dtype=float)
    return np.where(s > 0.0, s * np.log(np.where(s > 0.0, s, 1.0)), 0.0)


def _rect(a, b, c, d):
    # b log((b+d)/(b+c)) - a log((a+d)/(a+c)) + d log((b+d)/(a+d)) - c log((b+c)/(a+c))
    # == F(b+d) - F(a+d) - F(b+c) + F(a+c); the ratio form avoids the
    # catastrophic cancellation of the plain F differences when the panel
    # widths are tiny compared to the corner sum a + c.
    safe = a + c > 0.0
    ac = np.where(safe, a + c, 1.0)
    ad, bc = a + d, b + c
    stable = (b * np.log1p((d - c) / bc) - a * np.log1p((d - c) / ac)
              + d * np.log1p((b - a) / ad) - c * np.log1p((b - a) / ac))
    plain = _F(b + d) - _F(ad) - _F(bc) + _F(a + c)
    return np.where(safe, stable, plain)


def _piece_arrays(basis):
    # pad every element to exactly two constant pieces (second may carry 0)
    n = basis.dim
    lo = np.zeros((n, 2))
    hi = np.zeros((n, 2))
    cf = np.zeros((n, 2))
    for i, (bp, co) in enumerate(basis.elements):
        for p in range(len(co)):
            lo[i, p], hi[i, p], cf[i, p] = bp[p], bp[p + 1], co[p]
        if len(co) == 1:
            lo[i, 1], hi[i, 1], cf[i, 1] = bp[0], bp[1], 0.0
    return lo, hi, cf


def gram_matrix(basis):
    """Exact overlaps int e_i e_j dx; identity for a valid basis."""
    lo, hi, cf = _piece_arrays(basis)
    g = np.zeros((basis.dim, basis.dim))
    for a in range(2):
        for b in range(2):
            left = np.maximum(lo[:, a][:, None], lo[:, b][None, :])
            right = np.minimum(hi[:, a][:, None], hi[:, b][None, :])
            overlap = np.maximum(right - left, 0.0)
            g += (cf[:, a][:, None] * cf[:, b][None, :]) * overlap
    return g


def assemble_matrix(basis, block=1024):
    """Dense symmetric matrix of <e_i, C e_j> from closed-form entries.

    Only the upper triangle is evaluated; the kernel is symmetric in (x, y).
    """
    lo, hi, cf = _piece_arrays(basis)
    n = basis.dim
    A = np.zeros((n, n))
    for start in range(0, n, block):
        stop = min(start + block, n)
        acc = np.zeros((stop - start, n - start))
        for a in range(2):
            la, ha, ca = lo[start:stop, a], hi[start:stop, a], cf[start:stop, a]
            for b in range(2):
                lb, hb, cb = lo[start:, b], hi[start:, b], cf[start:, b]
                rect = _rect(la[:, None], ha[:, None], lb[None, :], hb[None, :])
                acc += (ca[:, None] * cb[None, :]) * rect
        A[start:stop, start:] = acc
    upper = np.triu(A)
    return upper + np.triu(A, 1).T


def symmetric_eigensolve(matrix):
    """Full sorted spectrum of a dense symmetric matrix.

    Rejects non-symmetric input; eigenvalues come back ascending with
    residuals ||A v - lambda v|| at the LAPACK level.
    """
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("need a square matrix")
    scale = float(np.max(np.abs(A))) or 1.0
    if float(np.max(np.abs(A - A.T))) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric within 1e-12")
    return np.linalg.eigvalsh(A)


def build_compression(J, K):
    """Assemble the (J, K) compression and its spectrum."""
    basis = build_dyadic_basis(J, K)
    A = assemble_matrix(basis)
    spectrum = symmetric_eigensolve(A)
    return CompressionResult(A, spectrum, float(spectrum[-1]), basis)


@dataclass(frozen=True)
class EdgeGapRow:
    J: int
    K: int
    dim: int
    lambda_max: float
    pi_gap: float


def edge_gap_sweep(params):
    """Table of (J, K, N, lambda_max, pi - lambda_max) for given (J, K) pairs."""
    rows = []
    for J, K in params:
        res = build_compression(J, K)
        rows.append(EdgeGapRow(J, K, res.basis.dim, res.lambda_max,
                               math.pi - res.lambda_max))
    return rows
