"""Univariate NURBS basis and curve evaluation with derivatives up to third order.

Only open (clamped) knot vectors are supported.  Span lookup uses half-open
intervals with the final span closed; comparisons are exact (no tolerance),
since evaluation points are generated from quadrature rules inside spans.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

__all__ = [
    "KnotVector",
    "NurbsCurve",
    "find_span",
    "bspline_basis_derivatives",
    "basis_derivatives",
    "curve_derivatives",
    "insert_knot",
    "refine_uniform",
    "elevate_degree",
    "make_line",
    "make_circular_arc",
]

MAX_DERIV_ORDER = 3


class SplineDomainError(ValueError):
    """Evaluation outside the knot vector domain, or unsupported order."""


@dataclass(frozen=True)
class KnotVector:
    """Open (clamped) knot vector of a given polynomial degree."""

    values: np.ndarray
    degree: int

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        p = self.degree
        if p < 1:
            raise ValueError("degree must be >= 1")
        if vals.ndim != 1 or len(vals) < 2 * (p + 1):
            raise ValueError("knot vector too short for degree")
        if np.any(np.diff(vals) < 0.0):
            raise ValueError("knot values must be nondecreasing")
        if not (np.all(vals[: p + 1] == vals[0]) and np.all(vals[-p - 1 :] == vals[-1])):
            raise ValueError("knot vector must be open/clamped (end knots repeated p+1 times)")
        if vals[0] == vals[-1]:
            raise ValueError("knot vector has no nonempty span")

    @property
    def n_basis(self) -> int:
        return len(self.values) - self.degree - 1

    def spans(self) -> np.ndarray:
        """Indices i of the nonempty spans [u_i, u_{i+1})."""
        vals = self.values
        return np.nonzero(vals[1:] > vals[:-1])[0]

    def breakpoints(self) -> np.ndarray:
        return np.unique(self.values)


@dataclass(frozen=True)
class NurbsCurve:
    """Weighted control polygon over an open knot vector."""

    knots: KnotVector
    points: np.ndarray   # (n, 3)
    weights: np.ndarray  # (n,)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        if pts.shape != (self.knots.n_basis, 3):
            raise ValueError(
                f"expected {self.knots.n_basis} control points of dimension 3, got {pts.shape}"
            )
        if w.shape != (pts.shape[0],):
            raise ValueError("one weight per control point required")
        if np.any(w <= 0.0):
            raise ValueError("weights must be positive")

    @property
    def degree(self) -> int:
        return self.knots.degree

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    def diameter(self) -> float:
        lo = self.points.min(axis=0)
        hi = self.points.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    def with_points(self, points: np.ndarray) -> "NurbsCurve":
        return NurbsCurve(self.knots, points, self.weights)


def find_span(knots: KnotVector, u: float) -> int:
    """Index i with knot[i] <= u < knot[i+1]; the right domain end maps to the last span."""
    vals = knots.values
    p = knots.degree
    if u < vals[0] or u > vals[-1]:
        raise SplineDomainError(f"parameter {u} outside [{vals[0]}, {vals[-1]}]")
    n = knots.n_basis
    if u == vals[-1]:
        # last nonempty span
        i = n - 1
        while vals[i] == vals[i + 1]:
            i -= 1
        return i
    lo, hi = p, n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if u < vals[mid]:
            hi = mid
        else:
            lo = mid
    return lo


def bspline_basis_derivatives(knots: KnotVector, u: float, order: int) -> tuple[int, np.ndarray]:
    """Nonrational basis functions and derivatives (Cox-de Boor recursion).

    Returns (span, D) where D[m, j] is the m-th derivative of basis function
    span-p+j at u, for m = 0..order and j = 0..p.
    """
    if order > MAX_DERIV_ORDER:
        raise SplineDomainError(f"derivative order {order} > {MAX_DERIV_ORDER} unsupported")
    p = knots.degree
    vals = knots.values
    span = find_span(knots, u)

    # triangular table of all lower-degree functions, ndu[j][r] per Piegl-Tiller A2.3
    ndu = np.zeros((p + 1, p + 1))
    left = np.zeros(p + 1)
    right = np.zeros(p + 1)
    ndu[0, 0] = 1.0
    for j in range(1, p + 1):
        left[j] = u - vals[span + 1 - j]
        right[j] = vals[span + j] - u
        saved = 0.0
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved

    D = np.zeros((order + 1, p + 1))
    D[0, :] = ndu[:, p]
    a = np.zeros((2, p + 1))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[0, 0] = 1.0
        for k in range(1, order + 1):
            d = 0.0
            rk, pk = r - k, p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d += a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d += a[s2, k] * ndu[r, pk]
            D[k, r] = d
            s1, s2 = s2, s1
    r = p
    for k in range(1, order + 1):
        D[k, :] *= r
        r *= p - k
    return span, D


def basis_derivatives(curve: NurbsCurve, u: float, order: int = MAX_DERIV_ORDER):
    """Rational basis R_I and derivatives d^m R_I/du^m for the p+1 active functions.

    Returns (first_index, R) with R[m, j] for m = 0..order; the active control
    points are first_index..first_index+p.  Rational derivatives come from the
    quotient rule applied per function to f_I = w_I N_I over W = sum w_J N_J.
    """
    p = curve.degree
    span, D = bspline_basis_derivatives(curve.knots, u, order)
    first = span - p
    w_act = curve.weights[first : first + p + 1]
    F = D * w_act[None, :]          # (order+1, p+1): derivatives of w_I N_I
    W = F.sum(axis=1)               # derivatives of the weight function
    R = np.zeros_like(F)
    for m in range(order + 1):
        acc = F[m].copy()
        for i in range(1, m + 1):
            acc -= comb(m, i) * W[i] * R[m - i]
        R[m] = acc / W[0]
    return first, R


def curve_derivatives(curve: NurbsCurve, u: float, order: int = MAX_DERIV_ORDER) -> np.ndarray:
    """Position and parametric derivatives r, r,1 ... up to `order` as stacked rows."""
    first, R = basis_derivatives(curve, u, order)
    pts = curve.points[first : first + curve.degree + 1]
    return R @ pts


def insert_knot(curve: NurbsCurve, u: float) -> NurbsCurve:
    """Boehm single knot insertion (geometry preserving)."""
    p = curve.degree
    vals = curve.knots.values
    if u <= vals[0] or u >= vals[-1]:
        raise SplineDomainError("knot to insert must be interior")
    k = find_span(curve.knots, u)
    hw = np.concatenate([curve.points * curve.weights[:, None], curve.weights[:, None]], axis=1)
    n = curve.n_points
    new = np.zeros((n + 1, 4))
    new[: k - p + 1] = hw[: k - p + 1]
    new[k + 1 :] = hw[k:]
    for i in range(k - p + 1, k + 1):
        alpha = (u - vals[i]) / (vals[i + p] - vals[i])
        new[i] = alpha * hw[i] + (1.0 - alpha) * hw[i - 1]
    knots = KnotVector(np.insert(vals, k + 1, u), p)
    return NurbsCurve(knots, new[:, :3] / new[:, 3:4], new[:, 3])


def refine_uniform(curve: NurbsCurve, n_elements: int) -> NurbsCurve:
    """Insert single-multiplicity knots at i/n_elements, preserving C^{p-1} continuity."""
    if n_elements < 1:
        raise ValueError("n_elements must be >= 1")
    u0, u1 = curve.knots.values[0], curve.knots.values[-1]
    out = curve
    for i in range(1, n_elements):
        u = u0 + (u1 - u0) * i / n_elements
        if np.any(out.knots.values == u):
            continue
        out = insert_knot(out, u)
    return out


def elevate_degree(curve: NurbsCurve, p_new: int) -> NurbsCurve:
    """Exact degree elevation (Piegl-Tiller A5.9), geometry preserving."""
    t = p_new - curve.degree
    if t < 0:
        raise ValueError("p_new must be >= current degree")
    if t == 0:
        return curve
    p = curve.degree
    U = curve.knots.values
    hw = np.concatenate([curve.points * curve.weights[:, None], curve.weights[:, None]], axis=1)
    n = curve.n_points - 1
    m = n + p + 1
    ph = p + t
    ph2 = ph // 2

    # coefficients for degree elevating the Bezier segments
    bezalfs = np.zeros((ph + 1, p + 1))
    bezalfs[0, 0] = 1.0
    bezalfs[ph, p] = 1.0
    for i in range(1, ph2 + 1):
        inv = 1.0 / comb(ph, i)
        mpi = min(p, i)
        for j in range(max(0, i - t), mpi + 1):
            bezalfs[i, j] = inv * comb(p, j) * comb(t, i - j)
    for i in range(ph2 + 1, ph):
        mpi = min(p, i)
        for j in range(max(0, i - t), mpi + 1):
            bezalfs[i, j] = bezalfs[ph - i, p - j]

    n_spans = len(curve.knots.spans())
    Qw = np.zeros(((n + 1) + n_spans * t + t, 4))
    Uh = np.zeros(m + 1 + t + n_spans * t + 1)
    bpts = np.zeros((p + 1, 4))
    ebpts = np.zeros((ph + 1, 4))
    nextbpts = np.zeros((p - 1, 4)) if p > 1 else np.zeros((0, 4))
    alfs = np.zeros(max(p - 1, 1))

    mh = ph
    kind = ph + 1
    r = -1
    a = p
    b = p + 1
    cind = 1
    ua = U[0]
    Qw[0] = hw[0]
    Uh[: ph + 1] = ua
    bpts[:] = hw[: p + 1]

    while b < m:
        i = b
        while b < m and U[b] == U[b + 1]:
            b += 1
        mul = b - i + 1
        mh += mul + t
        ub = U[b]
        oldr = r
        r = p - mul
        lbz = (oldr + 2) // 2 if oldr > 0 else 1
        rbz = ph - (r + 1) // 2 if r > 0 else ph
        if r > 0:
            numer = ub - ua
            for k in range(p, mul, -1):
                alfs[k - mul - 1] = numer / (U[a + k] - ua)
            for j in range(1, r + 1):
                save = r - j
                s = mul + j
                for k in range(p, s - 1, -1):
                    bpts[k] = alfs[k - s] * bpts[k] + (1.0 - alfs[k - s]) * bpts[k - 1]
                nextbpts[save] = bpts[p]
        for i2 in range(lbz, ph + 1):
            ebpts[i2] = 0.0
            for j in range(max(0, i2 - t), min(p, i2) + 1):
                ebpts[i2] += bezalfs[i2, j] * bpts[j]
        if oldr > 1:
            first = kind - 2
            last = kind
            den = ub - ua
            bet = (ub - Uh[kind - 1]) / den
            for tr in range(1, oldr):
                i2 = first
                j = last
                kj = j - kind + 1
                while j - i2 > tr:
                    if i2 < cind:
                        alf = (ub - Uh[i2]) / (ua - Uh[i2])
                        Qw[i2] = alf * Qw[i2] + (1.0 - alf) * Qw[i2 - 1]
                    if j >= lbz:
                        if j - tr <= kind - ph + oldr:
                            gam = (ub - Uh[j - tr]) / den
                            ebpts[kj] = gam * ebpts[kj] + (1.0 - gam) * ebpts[kj + 1]
                        else:
                            ebpts[kj] = bet * ebpts[kj] + (1.0 - bet) * ebpts[kj + 1]
                    i2 += 1
                    j -= 1
                    kj -= 1
                first -= 1
                last += 1
        if a != p:
            for _ in range(ph - oldr):
                Uh[kind] = ua
                kind += 1
        for j in range(lbz, rbz + 1):
            Qw[cind] = ebpts[j]
            cind += 1
        if b < m:
            bpts[: r] = nextbpts[: r]
            bpts[r : p + 1] = hw[b - p + r : b + 1]
            a = b
            b += 1
            ua = ub
        else:
            Uh[kind : kind + ph + 1] = ub
            kind += ph + 1

    nh = mh - ph - 1
    Qw = Qw[: nh + 1]
    Uh = Uh[: mh + 1 + 1][: nh + ph + 2]
    knots = KnotVector(Uh, ph)
    return NurbsCurve(knots, Qw[:, :3] / Qw[:, 3:4], Qw[:, 3])


def make_line(start, end, degree: int = 2) -> NurbsCurve:
    """Single-span Bezier segment of the straight line from start to end."""
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    n = degree + 1
    pts = np.array([start + (end - start) * i / degree for i in range(n)])
    knots = KnotVector(np.concatenate([np.zeros(n), np.ones(n)]), degree)
    return NurbsCurve(knots, pts, np.ones(n))


def make_circular_arc(center, start_dir, sweep_dir, radius: float, angle: float) -> NurbsCurve:
    """Exact rational quadratic arc of opening `angle` (< pi).

    start_dir points from center to the arc start; sweep_dir is orthogonal to
    it in the arc plane and gives the sweep sense.
    """
    if not 0.0 < angle < np.pi:
        raise ValueError("single-segment arc requires 0 < angle < pi")
    c = np.asarray(center, dtype=float)
    e1 = np.asarray(start_dir, dtype=float)
    e1 = e1 / np.linalg.norm(e1)
    e2 = np.asarray(sweep_dir, dtype=float)
    e2 = e2 - (e2 @ e1) * e1
    e2 = e2 / np.linalg.norm(e2)
    p0 = c + radius * e1
    p2 = c + radius * (np.cos(angle) * e1 + np.sin(angle) * e2)
    # intersection of the end tangents
    w1 = np.cos(angle / 2.0)
    pm = c + (radius / w1) * (np.cos(angle / 2.0) * e1 + np.sin(angle / 2.0) * e2)
    knots = KnotVector(np.array([0.0, 0.0, 0.0, 1.0, 1.0, 1.0]), 2)
    return NurbsCurve(knots, np.array([p0, pm, p2]), np.array([1.0, w1, 1.0]))
