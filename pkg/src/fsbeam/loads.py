"""Kinematic constraints and external loads.

Clamps are linear multipoint constraints on control-point DOFs (position
fixing plus tangent-direction coupling of the two end control points).  The
twist of a section is constrained through a Lagrange multiplier, since the
Frenet-Serret part of the twist is a nonlinear function of the displacements.
Concentrated moments enter through the virtual power of the angular velocity
and carry a configuration-dependent tangent contribution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from fsbeam.kinematics import (
    Configuration,
    TwistState,
    UpdateMethod,
    fs_twist,
    smallest_rotation,
)
from fsbeam.operators import assemble_G, moment_rate_row, rows_to_H, twist_rate_row

__all__ = [
    "FixDofs",
    "TangentClamp",
    "TangentComponentClamp",
    "TwistConstraint",
    "PointForce",
    "PointMoment",
    "load_scale",
    "StepTooLargeError",
]


class StepTooLargeError(RuntimeError):
    """Per-increment FS twist jump exceeded the unwrap guard (pi/2)."""


# ---------------------------------------------------------------------------
# linear constraints


@dataclass(frozen=True)
class FixDofs:
    """Fix DOF components of one control point (by index, or 'first'/'last')."""

    cp: int | str
    comps: tuple[int, ...]  # 0..2 translations, 3 rotational DOF

    def resolve_cp(self, ncp: int) -> int:
        if self.cp == "first":
            return 0
        if self.cp == "last":
            return ncp - 1
        return int(self.cp)


@dataclass(frozen=True)
class TangentClamp:
    """Keep the end tangent direction fixed (couples the two end control points)."""

    end: int  # 0 or 1


@dataclass(frozen=True)
class TangentComponentClamp:
    """Symmetry variant: one component of the end control leg stays constant."""

    end: int
    comp: int


def linear_constraint_tables(constraints, curve, nd: int):
    """Fixed-DOF set and slave couplings for the DOF map."""
    ncp = curve.n_points
    fixed: set[int] = set()
    couplings: dict[int, list[tuple[int, float]]] = {}

    def dof(cp, comp):
        return cp * nd + comp

    for c in constraints:
        if isinstance(c, FixDofs):
            cp = c.resolve_cp(ncp)
            for comp in c.comps:
                if comp >= nd:
                    raise ValueError("rotational DOF not present in this formulation")
                fixed.add(dof(cp, comp))
        elif isinstance(c, TangentClamp):
            end_cp = 0 if c.end == 0 else ncp - 1
            nbr = 1 if c.end == 0 else ncp - 2
            e = curve.points[nbr] - curve.points[end_cp]
            e = e / np.linalg.norm(e)
            j = int(np.argmax(np.abs(e)))
            for k in range(3):
                if k == j:
                    continue
                r = e[k] / e[j]
                couplings[dof(nbr, k)] = [
                    (dof(end_cp, k), 1.0),
                    (dof(nbr, j), r),
                    (dof(end_cp, j), -r),
                ]
        elif isinstance(c, TangentComponentClamp):
            end_cp = 0 if c.end == 0 else ncp - 1
            nbr = 1 if c.end == 0 else ncp - 2
            couplings[dof(nbr, c.comp)] = [(dof(end_cp, c.comp), 1.0)]
        else:
            raise TypeError(f"unknown linear constraint {c!r}")
    return fixed, couplings


# ---------------------------------------------------------------------------
# twist constraint (Lagrange multiplier)


@dataclass(frozen=True)
class TwistConstraint:
    """Constrain the total section twist at an end to target*LPF."""

    end: int = 0
    target: float = 0.0

    @property
    def xi(self) -> float:
        return 0.0 if self.end == 0 else 1.0


class TwistConstraintOp:
    """Runtime machinery of one twist constraint on a given discretization."""

    def __init__(self, spec: TwistConstraint, disc):
        self.spec = spec
        self.disc = disc
        self.pb = disc.point_basis(spec.xi)
        self.Bp, self.cols = disc.point_B(self.pb)
        ref = disc.reference_point_frame(self.pb)
        self.initial_state = TwistState(
            omega_acc=0.0, t=ref.t[0].copy(), n=ref.n[0].copy(), b=ref.b[0].copy()
        )

    def _fs_delta(self, state, ts: TwistState) -> float:
        """FS twist relative to the last converged section frame, unwrap-guarded."""
        n_sr, b_sr = smallest_rotation((ts.n, ts.b), ts.t, state.fs.t[0])
        dw = float(fs_twist(state.fs.n[0], n_sr, b_sr))
        if abs(dw) > np.pi / 2:
            raise StepTooLargeError(
                f"FS twist jumped by {dw:.3f} rad within one increment"
            )
        return dw

    def value(self, config: Configuration, lpf: float, ts: TwistState) -> float:
        disc = self.disc
        target = lpf * self.spec.target
        if disc.formulation is UpdateMethod.SR:
            th = float(self.pb.R[0] @ config.theta[self.pb.first : self.pb.first + disc.p + 1])
            return th - target
        state = disc.point_state(config, self.pb)
        w = ts.omega_acc + self._fs_delta(state, ts)
        if disc.formulation is UpdateMethod.FSR:
            w += float(self.pb.R[0] @ config.theta[self.pb.first : self.pb.first + disc.p + 1])
        return w - target

    def row_and_kernel(self, config: Configuration):
        """Constraint rate row (full DOFs) and its linearization kernel."""
        disc = self.disc
        if disc.formulation is UpdateMethod.SR:
            rows = twist_rate_row(None, np.zeros(1), True)
        else:
            state = disc.point_state(config, self.pb)
            rows = twist_rate_row(state.derivs, state.theta,
                                  disc.formulation is UpdateMethod.FSR)
        H = rows_to_H(rows)
        row = np.zeros(disc.nfull)
        row[self.cols] = (H[0, 0] @ self.Bp[0])
        G = assemble_G(rows, np.ones((1, 1)))
        K = np.zeros((disc.nfull, disc.nfull))
        K[np.ix_(self.cols, self.cols)] = self.Bp[0, :10].T @ G[0] @ self.Bp[0, :10]
        return row, K

    def committed_state(self, config: Configuration, ts: TwistState) -> TwistState:
        disc = self.disc
        if disc.formulation is UpdateMethod.SR:
            return ts
        state = disc.point_state(config, self.pb)
        dw = self._fs_delta(state, ts)
        return TwistState(
            omega_acc=ts.omega_acc + dw,
            t=state.fs.t[0].copy(), n=state.fs.n[0].copy(), b=state.fs.b[0].copy(),
        )


# ---------------------------------------------------------------------------
# loads


def load_scale(schedule: tuple[float, float] | None, lpf: float) -> float:
    """Load factor: proportional (schedule None) or ramped over a window and held."""
    if schedule is None:
        return float(lpf)
    t0, t1 = schedule
    if t1 <= t0:
        raise ValueError("schedule window must have t1 > t0")
    return float(np.clip((lpf - t0) / (t1 - t0), 0.0, 1.0))


@dataclass(frozen=True)
class PointForce:
    xi: float
    vec: tuple[float, float, float]
    schedule: tuple[float, float] | None = None


@dataclass(frozen=True)
class PointMoment:
    """Concentrated moment, constant in the global frame (follower-linearized)."""

    xi: float
    vec: tuple[float, float, float]
    schedule: tuple[float, float] | None = None
    follower_tangent: bool = True


class PointForceOp:
    def __init__(self, spec: PointForce, disc):
        self.spec = spec
        pb = disc.point_basis(spec.xi)
        self.q = np.zeros(disc.nfull)
        for j in range(disc.p + 1):
            cp = pb.first + j
            self.q[cp * disc.nd : cp * disc.nd + 3] = pb.R[0, j] * np.asarray(spec.vec)

    def force(self, config, lpf):
        return load_scale(self.spec.schedule, lpf) * self.q

    def tangent(self, config, lpf, nfull):
        return None


class PointMomentOp:
    def __init__(self, spec: PointMoment, disc):
        self.spec = spec
        self.disc = disc
        self.pb = disc.point_basis(spec.xi)
        self.Bp, self.cols = disc.point_B(self.pb)

    def _rows(self, config):
        disc = self.disc
        state = disc.point_state(config, self.pb)
        fs_part = disc.formulation is not UpdateMethod.SR
        with_dof = disc.formulation.has_twist_dof
        return moment_rate_row(np.asarray(self.spec.vec, dtype=float), state.derivs,
                               state.theta, fs_part, with_dof)

    def force(self, config, lpf):
        rows = self._rows(config)
        H = rows_to_H(rows)
        q = np.zeros(self.disc.nfull)
        q[self.cols] = load_scale(self.spec.schedule, lpf) * (H[0, 0] @ self.Bp[0])
        return q

    def tangent(self, config, lpf, nfull):
        """dQ/dq of the moment contribution (full DOF layout)."""
        if not self.spec.follower_tangent:
            return None
        rows = self._rows(config)
        G = assemble_G(rows, np.ones((1, 1)))
        K_local = self.Bp[0, :10].T @ G[0] @ self.Bp[0, :10]
        K = np.zeros((nfull, nfull))
        K[np.ix_(self.cols, self.cols)] = load_scale(self.spec.schedule, lpf) * K_local.T
        return K


def make_load_ops(loads, disc):
    ops = []
    for ld in loads:
        if isinstance(ld, PointForce):
            ops.append(PointForceOp(ld, disc))
        elif isinstance(ld, PointMoment):
            ops.append(PointMomentOp(ld, disc))
        else:
            raise TypeError(f"unknown load {ld!r}")
    return ops
