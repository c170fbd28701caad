"""Beam system: discretization + constraints + loads, residual and tangent."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from fsbeam.assembly import Discretization, DofMap, TangentSystem
from fsbeam.constitutive import (
    SectionForces,
    internal_forces,
    reference_strains,
    section_forces_physical,
    tangent_constitutive,
)
from fsbeam.kinematics import Configuration, UpdateMethod
from fsbeam.loads import TwistConstraintOp, linear_constraint_tables, make_load_ops

__all__ = ["BeamSystem"]


class BeamSystem:
    """Assembled nonlinear problem over one beam patch."""

    def __init__(self, disc: Discretization, linear_constraints=(), twist_constraints=(),
                 loads=()):
        self.disc = disc
        fixed, couplings = linear_constraint_tables(linear_constraints, disc.curve, disc.nd)
        self.twist_ops = [TwistConstraintOp(tc, disc) for tc in twist_constraints]
        self.dof_map = DofMap(disc.ncp, disc.nd, fixed, couplings, len(self.twist_ops))
        self.load_ops = make_load_ops(loads, disc)

    # -- state ---------------------------------------------------------------

    def initial_configuration(self) -> Configuration:
        cfg = Configuration.zero(self.disc.ncp, len(self.twist_ops))
        if self.disc.formulation is UpdateMethod.SR:
            cfg = replace(cfg, sr_cache=self.disc.initial_sr_cache())
        return replace(cfg, twist_states=tuple(op.initial_state for op in self.twist_ops))

    def apply_increment(self, config: Configuration, dx: np.ndarray) -> Configuration:
        dq_full, dlam = self.dof_map.expand(dx)
        blocks = dq_full.reshape(self.disc.ncp, self.disc.nd)
        du = blocks[:, :3]
        dth = blocks[:, 3] if self.disc.nd == 4 else np.zeros(self.disc.ncp)
        return config.displaced(du, dth, dlam)

    def commit(self, config: Configuration) -> Configuration:
        """Refresh converged-state caches (SR triads, accumulated FS twists)."""
        out = config
        if self.disc.formulation is UpdateMethod.SR:
            out = replace(out, sr_cache=self.disc.refresh_sr_cache(out))
        states = tuple(
            op.committed_state(out, ts) for op, ts in zip(self.twist_ops, out.twist_states)
        )
        return replace(out, twist_states=states)

    # -- loads ----------------------------------------------------------------

    def external_load(self, config: Configuration, lpf: float) -> np.ndarray:
        Q = np.zeros(self.disc.nfull)
        for op in self.load_ops:
            Q += op.force(config, lpf)
        return Q

    # -- residual and tangent ---------------------------------------------------

    def residual(self, config: Configuration, lpf: float) -> np.ndarray:
        return self.tangent_system(config, lpf, want_tangent=False).residual

    def tangent_system(self, config: Configuration, lpf: float,
                       want_tangent: bool = True) -> TangentSystem:
        disc = self.disc
        dm = self.dof_map
        KM, KG, F, _, _ = disc.assemble_internal(config)
        Q = self.external_load(config, lpf)
        R_full = Q - F
        K_full = KM + KG if want_tangent else None

        rows, cvals = [], []
        for i, op in enumerate(self.twist_ops):
            ts = config.twist_states[i]
            row, K_loc = op.row_and_kernel(config)
            rows.append(row)
            cvals.append(op.value(config, lpf, ts))
            R_full -= config.lam[i] * row
            if want_tangent:
                K_full += config.lam[i] * K_loc.T

        if want_tangent:
            for op in self.load_ops:
                dQ = op.tangent(config, lpf, disc.nfull)
                if dQ is not None:
                    K_full -= dQ

        n = dm.n_unknowns
        residual = np.zeros(n)
        residual[: dm.nred] = dm.T.T @ R_full
        residual[dm.nred :] = -np.asarray(cvals)
        K = None
        if want_tangent:
            K = np.zeros((n, n))
            K[: dm.nred, : dm.nred] = dm.T.T @ K_full @ dm.T
            for i, row in enumerate(rows):
                r = row @ dm.T
                K[: dm.nred, dm.nred + i] = r
                K[dm.nred + i, : dm.nred] = r
        return TangentSystem(K=K, residual=residual, dof_map=dm)

    # -- reporting -----------------------------------------------------------

    def strain_energy(self, config: Configuration) -> float:
        """1/2 int e^T DM e sqrt(g) dxi with the symmetric tangent law."""
        disc = self.disc
        state = disc.axis_state(config)
        strains = disc.strains(state)
        DM = tangent_constitutive(strains, disc.section, disc.material, disc.ref)
        e = strains.as_vector()
        dens = np.einsum("mi,mij,mj->m", e, DM, e)
        return 0.5 * float(np.sum(disc.wgt * dens))

    def probe_state(self, config: Configuration, xi: float):
        disc = self.disc
        pb = disc.point_basis(xi)
        ref = disc.reference_point_frame(pb)
        state = disc.point_state(config, pb)
        strains = reference_strains(ref, state)
        return pb, ref, state, strains

    def probe_section_forces(self, config: Configuration, xi: float) -> SectionForces:
        _, ref, state, strains = self.probe_state(config, xi)
        f, _ = internal_forces(strains, self.disc.section, self.disc.material, ref,
                               self.disc.model)
        S = section_forces_physical(strains, self.disc.section, self.disc.material,
                                    ref.g, state.g, ref)
        return SectionForces(
            Ntilde=float(f[0, 0]), M1tilde=float(f[0, 1]),
            M2tilde=float(f[0, 2]), M3tilde=float(f[0, 3]),
            Nphys=float(S[0, 0]), M1=float(S[0, 1]), M2=float(S[0, 2]), M3=float(S[0, 3]),
        )

    def probe_displacement(self, config: Configuration, xi: float) -> np.ndarray:
        pb = self.disc.point_basis(xi)
        pts = self.disc.curve.points[pb.first : pb.first + self.disc.p + 1]
        cur = (self.disc.curve.points + config.u)[pb.first : pb.first + self.disc.p + 1]
        return pb.R[0] @ (cur - pts)

    def position(self, config: Configuration, xi: float) -> np.ndarray:
        pb = self.disc.point_basis(xi)
        cur = (self.disc.curve.points + config.u)[pb.first : pb.first + self.disc.p + 1]
        return pb.R[0] @ cur
