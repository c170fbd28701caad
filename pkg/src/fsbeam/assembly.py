"""Isogeometric discretization, quadrature cache and global assembly.

One NURBS patch per model; elements are the nonempty knot spans, integrated
with p+1 Gauss points each.  Global DOFs are 4 per control point (3
translations + 1 rotational) or 3 for the twist-free formulation, with
constraint multipliers appended after linear reduction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from fsbeam.constitutive import (
    ConstitutiveModel,
    Material,
    ReferenceStrains,
    internal_forces,
    reference_strains,
    tangent_constitutive,
)
from fsbeam.geometry import CrossSection, FrameBatch, frame_batch
from fsbeam.kinematics import Configuration, SrCache, UpdateMethod, sr_transport_with_derivative
from fsbeam.operators import assemble_G, fsr_rate_rows, rows_to_H, sr_rate_rows
from fsbeam.splines import NurbsCurve, basis_derivatives

__all__ = ["TwistProfile", "Discretization", "AxisState", "DofMap", "TangentSystem"]


@dataclass(frozen=True)
class TwistProfile:
    """Material pre-twist of the reference configuration, theta_ref(xi)."""

    kind: str = "constant"   # "constant" or "linear"
    coef: float = 0.0

    def value(self, xi):
        xi = np.asarray(xi, dtype=float)
        return self.coef * xi if self.kind == "linear" else np.full_like(xi, self.coef)

    def deriv(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.full_like(xi, self.coef) if self.kind == "linear" else np.zeros_like(xi)


@dataclass
class PointBasis:
    """Basis values and derivatives of the active functions at one xi."""

    xi: float
    first: int          # first active control point
    R: np.ndarray       # (4, p+1): value and derivatives 1..3


@dataclass(frozen=True)
class AxisState:
    """Current kinematic fields at the quadrature points of one configuration."""

    derivs: np.ndarray          # (m, 4, 3)
    g: np.ndarray
    sqrt_g: np.ndarray
    theta: np.ndarray           # total material angle (FSR family) or None-like zeros
    theta_1: np.ndarray
    Kt2: np.ndarray
    Kt3: np.ndarray
    K1: np.ndarray
    fs: FrameBatch | None       # FS frames (FSR family; None for SR)
    g2: np.ndarray | None = None  # SR triads
    g3: np.ndarray | None = None
    g2_1: np.ndarray | None = None


class DofMap:
    """Linear reduction q_full = T q_red with fixed and coupled DOFs.

    Constraint-multiplier DOFs are appended after the reduced set; the
    unknown vector of the solver is [q_red, lambda].
    """

    def __init__(self, ncp: int, dofs_per_point: int, fixed: set[int],
                 couplings: dict[int, list[tuple[int, float]]], n_lambda: int):
        self.ncp = ncp
        self.nd = dofs_per_point
        self.nfull = ncp * dofs_per_point
        self.n_lambda = n_lambda
        free = [d for d in range(self.nfull) if d not in fixed and d not in couplings]
        self.nred = len(free)
        T = np.zeros((self.nfull, self.nred))
        col = {d: j for j, d in enumerate(free)}
        for d in free:
            T[d, col[d]] = 1.0
        for slave, terms in couplings.items():
            for master, coef in terms:
                if master in couplings:
                    raise ValueError("chained couplings not supported")
                if master in fixed:
                    continue
                T[slave, col[master]] += coef
        self.T = T
        self.fixed = fixed
        self.couplings = couplings

    @property
    def n_unknowns(self) -> int:
        return self.nred + self.n_lambda

    def dof_index(self, cp: int, comp: int) -> int:
        return cp * self.nd + comp

    def expand(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Reduced unknowns -> (full DOF vector, multipliers)."""
        return self.T @ x[: self.nred], x[self.nred :]

    def reduce_vector(self, r_full: np.ndarray, r_lambda: np.ndarray) -> np.ndarray:
        return np.concatenate([self.T.T @ r_full, r_lambda])


@dataclass
class TangentSystem:
    K: np.ndarray          # (n_unknowns, n_unknowns) reduced tangent
    residual: np.ndarray   # (n_unknowns,)
    dof_map: DofMap
    K_M_full: np.ndarray | None = None
    K_G_full: np.ndarray | None = None


class Discretization:
    """Reference mesh data: connectivity, quadrature, basis cache, frames."""

    def __init__(self, curve: NurbsCurve, section: CrossSection, material: Material,
                 formulation: UpdateMethod = UpdateMethod.FSR,
                 model: ConstitutiveModel = ConstitutiveModel.DC,
                 theta_ref: TwistProfile = TwistProfile(),
                 kappa_min: float | None = None):
        self.curve = curve
        self.section = section
        self.material = material
        self.formulation = formulation
        self.model = model
        self.theta_ref = theta_ref
        self.kappa_min = 1e-12 / curve.diameter() if kappa_min is None else kappa_min

        p = curve.degree
        self.p = p
        self.ncp = curve.n_points
        self.nd = formulation.dofs_per_point
        spans = curve.knots.spans()
        self.n_el = len(spans)
        self.conn = np.array([[s - p + j for j in range(p + 1)] for s in spans])
        self.ngp = p + 1
        xg, wg = np.polynomial.legendre.leggauss(self.ngp)
        vals = curve.knots.values
        xis, wts, elem = [], [], []
        for e, s in enumerate(spans):
            a, b = vals[s], vals[s + 1]
            xis.append(0.5 * (a + b) + 0.5 * (b - a) * xg)
            wts.append(0.5 * (b - a) * wg)
            elem.append(np.full(self.ngp, e))
        self.xi_g = np.concatenate(xis)
        self.w_g = np.concatenate(wts)
        self.elem_of_gp = np.concatenate(elem)
        self.m = self.xi_g.shape[0]

        # basis cache at gauss points: (m, 4, p+1) and active first index
        self.basis = np.zeros((self.m, 4, p + 1))
        self.first = np.zeros(self.m, dtype=int)
        for i, xi in enumerate(self.xi_g):
            first, R = basis_derivatives(curve, float(xi), 3)
            self.basis[i] = R
            self.first[i] = first
        # active CP indices per gauss point coincide with conn of its element
        assert np.all(self.first == self.conn[self.elem_of_gp, 0])

        # static B matrices (m, 11, nd*(p+1))
        self.B = self._build_B(self.basis)
        self.B_G = self.B[:, :10, :]

        # reference frames with pre-twist
        th = self.theta_ref.value(self.xi_g)
        th1 = self.theta_ref.deriv(self.xi_g)
        derivs = self.curve_derivatives_all(np.zeros((self.ncp, 3)))
        self.ref = frame_batch(derivs, th, th1, self.kappa_min)
        self.sqrt_g_ref = self.ref.sqrt_g
        self.wgt = self.w_g * self.sqrt_g_ref  # quadrature weight incl. ref metric

    # -- basis plumbing -----------------------------------------------------

    def _build_B(self, basis: np.ndarray) -> np.ndarray:
        m = basis.shape[0]
        nd, p = self.nd, self.p
        B = np.zeros((m, 11, nd * (p + 1)))
        for j in range(p + 1):
            c = nd * j
            for k in range(3):  # derivative order 1..3 -> slots
                B[:, 3 * k : 3 * k + 3, c : c + 3] = (
                    basis[:, k + 1, j, None, None] * np.eye(3)
                )
            if nd == 4:
                B[:, 9, c + 3] = basis[:, 0, j]
                B[:, 10, c + 3] = basis[:, 1, j]
        return B

    def point_basis(self, xi: float) -> PointBasis:
        first, R = basis_derivatives(self.curve, float(xi), 3)
        return PointBasis(xi=float(xi), first=first, R=R)

    def point_B(self, pb: PointBasis) -> tuple[np.ndarray, np.ndarray]:
        """Static B at a single point plus global column indices."""
        nd, p = self.nd, self.p
        B = np.zeros((1, 11, nd * (p + 1)))
        for j in range(p + 1):
            c = nd * j
            for k in range(3):
                B[0, 3 * k : 3 * k + 3, c : c + 3] = pb.R[k + 1, j] * np.eye(3)
            if nd == 4:
                B[0, 9, c + 3] = pb.R[0, j]
                B[0, 10, c + 3] = pb.R[1, j]
        cps = np.arange(pb.first, pb.first + p + 1)
        cols = (cps[:, None] * nd + np.arange(nd)[None, :]).ravel()
        return B, cols

    # -- kinematic evaluation ------------------------------------------------

    def curve_derivatives_all(self, u: np.ndarray) -> np.ndarray:
        """Derivatives r..r,111 at all gauss points for displaced control points."""
        pts = (self.curve.points + u)[self.conn[self.elem_of_gp]]  # (m, p+1, 3)
        return np.einsum("mkj,mji->mki", self.basis, pts)

    def theta_field(self, theta: np.ndarray):
        th_cp = theta[self.conn[self.elem_of_gp]]  # (m, p+1)
        th0 = self.theta_ref.value(self.xi_g) + np.einsum("mj,mj->m", self.basis[:, 0], th_cp)
        th1 = self.theta_ref.deriv(self.xi_g) + np.einsum("mj,mj->m", self.basis[:, 1], th_cp)
        return th0, th1

    def axis_state(self, config: Configuration) -> AxisState:
        derivs = self.curve_derivatives_all(config.u)
        if self.formulation is UpdateMethod.SR:
            g1 = derivs[:, 1]
            g = np.einsum("mi,mi->m", g1, g1)
            sqrt_g = np.sqrt(g)
            t = g1 / sqrt_g[:, None]
            Gam = np.einsum("mi,mi->m", derivs[:, 2], g1) / g
            t_1 = (derivs[:, 2] - Gam[:, None] * g1) / sqrt_g[:, None]
            cache = config.sr_cache
            dw_cp = (config.theta - cache.theta)[self.conn[self.elem_of_gp]]
            dw = np.einsum("mj,mj->m", self.basis[:, 0], dw_cp)
            dw1 = np.einsum("mj,mj->m", self.basis[:, 1], dw_cp)
            g2, g3, g2_1 = sr_transport_with_derivative(cache, t, t_1, dw, dw1)
            Kt2 = -np.einsum("mi,mi->m", derivs[:, 2], g3)
            Kt3 = np.einsum("mi,mi->m", derivs[:, 2], g2)
            K1 = np.einsum("mi,mi->m", g2_1, g3)
            th0, th1 = self.theta_field(config.theta)
            return AxisState(derivs, g, sqrt_g, th0, th1, Kt2, Kt3, K1,
                             fs=None, g2=g2, g3=g3, g2_1=g2_1)
        if self.formulation is UpdateMethod.FSR_TF:
            th0 = self.theta_ref.value(self.xi_g)
            th1 = self.theta_ref.deriv(self.xi_g)
        else:
            th0, th1 = self.theta_field(config.theta)
        fs = frame_batch(derivs, th0, th1, self.kappa_min)
        return AxisState(derivs, fs.g, fs.sqrt_g, th0, th1, fs.Kt2, fs.Kt3, fs.K1, fs=fs)

    def strains(self, state: AxisState) -> ReferenceStrains:
        return reference_strains(self.ref, state)

    def initial_sr_cache(self) -> SrCache:
        f = self.ref
        t_1 = (f.Ktilde / f.sqrt_g)[:, None] * f.n
        # d/dxi of g2_ref = -(Kt3/g) g1 + K1 g3
        g2_1 = -(f.Kt3 / f.g)[:, None] * f.g1 + f.K1[:, None] * f.g3
        return SrCache(t=f.t.copy(), t_1=t_1, g2=f.g2.copy(), g2_1=g2_1,
                       theta=np.zeros(self.ncp))

    def refresh_sr_cache(self, config: Configuration) -> SrCache:
        state = self.axis_state(config)
        g1 = state.derivs[:, 1]
        Gam = np.einsum("mi,mi->m", state.derivs[:, 2], g1) / state.g
        t = g1 / state.sqrt_g[:, None]
        t_1 = (state.derivs[:, 2] - Gam[:, None] * g1) / state.sqrt_g[:, None]
        return SrCache(t=t, t_1=t_1, g2=state.g2.copy(), g2_1=state.g2_1.copy(),
                       theta=config.theta.copy())

    # -- element/global operators ---------------------------------------------

    def rate_rows(self, state: AxisState):
        if self.formulation is UpdateMethod.SR:
            return sr_rate_rows(state.derivs, state.g2, state.g3)
        return fsr_rate_rows(state.derivs, state.theta)

    def assemble_internal(self, config: Configuration):
        """Material/geometric stiffness and internal force vector (full DOFs)."""
        state = self.axis_state(config)
        strains = self.strains(state)
        f, _ = internal_forces(strains, self.section, self.material, self.ref, self.model)
        DM = tangent_constitutive(strains, self.section, self.material, self.ref)
        rows = self.rate_rows(state)
        H = rows_to_H(rows)
        G = assemble_G(rows, f)

        BL = np.einsum("mij,mjk->mik", H, self.B)
        w = self.wgt
        KMg = np.einsum("m,mia,mij,mjb->mab", w, BL, DM, BL, optimize=True)
        KGg = np.einsum("m,mia,mij,mjb->mab", w, self.B_G, G, self.B_G, optimize=True)
        Fg = np.einsum("m,mia,mi->ma", w, BL, f)

        ne = self.nd * (self.p + 1)
        KM = np.zeros((self.nfull, self.nfull))
        KG = np.zeros((self.nfull, self.nfull))
        F = np.zeros(self.nfull)
        KMe = KMg.reshape(self.n_el, self.ngp, ne, ne).sum(axis=1)
        KGe = KGg.reshape(self.n_el, self.ngp, ne, ne).sum(axis=1)
        Fe = Fg.reshape(self.n_el, self.ngp, ne).sum(axis=1)
        for e in range(self.n_el):
            ix = self.element_dofs(e)
            KM[np.ix_(ix, ix)] += KMe[e]
            KG[np.ix_(ix, ix)] += KGe[e]
            F[ix] += Fe[e]
        return KM, KG, F, state, strains

    def element_dofs(self, e: int) -> np.ndarray:
        cps = self.conn[e]
        return (cps[:, None] * self.nd + np.arange(self.nd)[None, :]).ravel()

    @property
    def nfull(self) -> int:
        return self.ncp * self.nd

    # -- single-point evaluation (loads, constraints, probes) -----------------

    def point_state(self, config: Configuration, pb: PointBasis) -> AxisState:
        pts = (self.curve.points + config.u)[pb.first : pb.first + self.p + 1]
        derivs = (pb.R @ pts)[None]
        th_cp = config.theta[pb.first : pb.first + self.p + 1]
        if self.formulation is UpdateMethod.SR:
            g1 = derivs[:, 1]
            g = np.einsum("mi,mi->m", g1, g1)
            sqrt_g = np.sqrt(g)
            t = g1 / sqrt_g[:, None]
            Gam = np.einsum("mi,mi->m", derivs[:, 2], g1) / g
            t_1 = (derivs[:, 2] - Gam[:, None] * g1) / sqrt_g[:, None]
            # point probes transport straight from the reference state with the
            # full accumulated twist; adequate for recorded output only
            pc = self._point_sr_cache(pb)
            dw = float(pb.R[0] @ config.theta[pb.first : pb.first + self.p + 1])
            dw1 = float(pb.R[1] @ config.theta[pb.first : pb.first + self.p + 1])
            g2, g3, g2_1 = sr_transport_with_derivative(pc, t, t_1, np.array([dw]), np.array([dw1]))
            Kt2 = -np.einsum("mi,mi->m", derivs[:, 2], g3)
            Kt3 = np.einsum("mi,mi->m", derivs[:, 2], g2)
            K1 = np.einsum("mi,mi->m", g2_1, g3)
            th0 = np.array([self.theta_ref.value(pb.xi) + pb.R[0] @ th_cp])
            th1 = np.array([self.theta_ref.deriv(pb.xi) + pb.R[1] @ th_cp])
            return AxisState(derivs, g, sqrt_g, th0, th1, Kt2, Kt3, K1,
                             fs=None, g2=g2, g3=g3, g2_1=g2_1)
        if self.formulation is UpdateMethod.FSR_TF:
            th0 = np.array([self.theta_ref.value(pb.xi)])
            th1 = np.array([self.theta_ref.deriv(pb.xi)])
        else:
            th0 = np.array([self.theta_ref.value(pb.xi) + pb.R[0] @ th_cp])
            th1 = np.array([self.theta_ref.deriv(pb.xi) + pb.R[1] @ th_cp])
        fs = frame_batch(derivs, th0, th1, self.kappa_min)
        return AxisState(derivs, fs.g, fs.sqrt_g, th0, th1, fs.Kt2, fs.Kt3, fs.K1, fs=fs)

    def _point_sr_cache(self, pb: PointBasis) -> SrCache:
        """Reference-state stand-in cache for SR point probes (the true cache
        lives at gauss points only and is not interpolated)."""
        f = self.reference_point_frame(pb)
        t_1 = (f.Ktilde / f.sqrt_g)[:, None] * f.n
        g2_1 = -(f.Kt3 / f.g)[:, None] * f.g1 + f.K1[:, None] * f.g3
        return SrCache(t=f.t, t_1=t_1, g2=f.g2, g2_1=g2_1, theta=np.zeros(self.ncp))

    def reference_point_frame(self, pb: PointBasis):
        derivs = (pb.R @ self.curve.points[pb.first : pb.first + self.p + 1])[None]
        th = np.array([self.theta_ref.value(pb.xi)])
        th1 = np.array([self.theta_ref.deriv(pb.xi)])
        return frame_batch(derivs, th, th1, self.kappa_min)
