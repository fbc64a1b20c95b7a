"""Max-norm windows on the unit cube and exact monomial integrals over them.

A window is the max-norm ball of radius h around a point x, intersected with
[0,1]^q. The integral of any shifted monomial over that box factorizes per
axis, which gives the LP objective vector in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSpec, MultiIndex


@dataclass(frozen=True)
class Window:
    """Axis-aligned box around ``center`` clipped to the unit cube."""

    center: np.ndarray
    bandwidth: float
    lower: np.ndarray
    upper: np.ndarray

    @property
    def q(self) -> int:
        return self.center.shape[0]

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))


def clip_window(x, h: float) -> Window:
    """Window of half-edge h around x, clipped to [0,1]^q.

    Raises ValueError if x lies outside the unit cube or h <= 0. A bandwidth
    h >= 1 yields the whole cube.
    """
    xv = np.asarray(x, dtype=float)
    if xv.ndim == 0:
        xv = xv.reshape(1)
    if h <= 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    if np.any(xv < 0) or np.any(xv > 1):
        raise ValueError(f"window center {xv.tolist()} outside the unit cube")
    lower = np.maximum(xv - h, 0.0)
    upper = np.minimum(xv + h, 1.0)
    lower.setflags(write=False)
    upper.setflags(write=False)
    xv.setflags(write=False)
    return Window(center=xv, bandwidth=float(h), lower=lower, upper=upper)


def contains(w: Window, t) -> bool:
    """True iff t is within max-norm distance h of the center and inside the cube."""
    tv = np.asarray(t, dtype=float)
    if tv.ndim == 0:
        tv = tv.reshape(1)
    if tv.shape[0] != w.q:
        raise ValueError(f"point has dimension {tv.shape[0]}, expected {w.q}")
    if np.any(tv < 0) or np.any(tv > 1):
        return False
    return bool(np.max(np.abs(tv - w.center)) <= w.bandwidth)


def contains_mask(w: Window, points: np.ndarray) -> np.ndarray:
    """Vectorized membership test for an (n, q) array of cube points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != w.q:
        raise ValueError(f"points have dimension {pts.shape[1]}, expected {w.q}")
    return np.max(np.abs(pts - w.center[None, :]), axis=1) <= w.bandwidth


def _axis_integrals(w: Window, max_degree: int) -> np.ndarray:
    """Per-axis antiderivative differences, shape (q, max_degree + 1).

    Entry (r, d) is the integral of (t - x_r)**d over [lower_r, upper_r].
    Offsets on unclipped axes are exactly +-h, so odd-degree entries of a
    symmetric window cancel to exactly zero.
    """
    hi = np.where(w.upper < 1.0, w.bandwidth, 1.0 - w.center)
    lo = np.where(w.lower > 0.0, -w.bandwidth, -w.center)
    d1 = np.arange(1, max_degree + 2)
    # power of the nonpositive lower offset via its magnitude, sign analytic:
    # identical magnitudes then cancel bit-exactly on symmetric axes
    parity = np.where(d1 % 2 == 0, 1.0, -1.0)
    lo_pow = parity * (-lo)[:, None] ** d1
    return (hi[:, None] ** d1 - lo_pow) / d1


def monomial_integral(w: Window, j: MultiIndex) -> float:
    """Exact integral of (t - x)**j over the clipped window."""
    if j.q != w.q:
        raise ValueError(f"multi-index has dimension {j.q}, expected {w.q}")
    table = _axis_integrals(w, max(j.exponents))
    return float(np.prod([table[r, e] for r, e in enumerate(j.exponents)]))


def objective_vector(w: Window, basis: BasisSpec) -> np.ndarray:
    """Integrals of all basis monomials over the window, in basis order.

    Entry 0 is the window volume and is strictly positive.
    """
    if basis.q != w.q:
        raise ValueError(f"basis has dimension {basis.q}, expected {w.q}")
    table = _axis_integrals(w, basis.max_degree)
    exps = basis.exponent_matrix
    v = np.ones(len(basis))
    for r in range(basis.q):
        v *= table[r, exps[:, r]]
    return v
