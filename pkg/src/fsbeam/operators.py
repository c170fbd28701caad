"""Discrete strain-rate operators and geometric-stiffness kernels.

Slot layout of the basis-function matrix B (rows, per axis point):

    0:3   v,1      3:6   v,11     6:9   v,111     9   w     10   w'

where w is the rotational velocity (independent twist rate for the
Frenet-Serret update, total twist rate for the smallest-rotation update).
H maps the 11 slots to the four reference strain rates, e = H B q'.  The
geometric kernel G pairs the first ten slots and is contracted with the
energetic section forces; it is obtained by exact linearization of the
rate-operator coefficients (jet arithmetic), so the tangent matches the
finite-difference derivative of the internal forces at machine precision.
"""

from __future__ import annotations

import numpy as np

from fsbeam.jets import SJet, VJet, const_scalar, scalar_slot, seed_vector_slot

__all__ = ["RateRows", "fsr_rate_rows", "sr_rate_rows", "rows_to_H", "assemble_G",
           "twist_rate_row", "moment_rate_row"]

NSLOTS = 11
NGSLOTS = 10


class RateRows:
    """Coefficient jets of one or more rate equations over the velocity slots.

    vec[i][s] is the vector coefficient (VJet) of vector slot s in equation i,
    rot[i] the scalar coefficient (SJet) of the rotational velocity, rotp[i]
    a constant coefficient of its parametric derivative.
    """

    def __init__(self, vec, rot, rotp):
        self.vec = vec
        self.rot = rot
        self.rotp = rotp

    @property
    def n_rows(self):
        return len(self.vec)


def _fs_jets(derivs: np.ndarray, theta: np.ndarray):
    """Frenet-Serret quantity jets at m points from current curve derivatives."""
    g1 = seed_vector_slot(derivs[:, 1], 0)
    r11 = seed_vector_slot(derivs[:, 2], 1)
    r111 = seed_vector_slot(derivs[:, 3], 2)
    th = scalar_slot(theta)
    g = g1.dot(g1)
    sqrt_g = g.sqrt()
    Gam = r11.dot(g1) / g
    c = g1.cross(r11)
    Kt = c.norm2().sqrt() / sqrt_g
    n = (r11 - Gam * g1) / Kt
    b = c / (sqrt_g * Kt)
    return dict(g1=g1, r11=r11, r111=r111, th=th, g=g, sqrt_g=sqrt_g,
                Gam=Gam, Kt=Kt, n=n, b=b)


def fsr_rate_rows(derivs: np.ndarray, theta: np.ndarray) -> RateRows:
    """Rows of the Frenet-Serret rotation formulation (twist-free shares them)."""
    J = _fs_jets(derivs, theta)
    g1, r111, th = J["g1"], J["r111"], J["th"]
    g, Kt, Gam, n, b = J["g"], J["Kt"], J["Gam"], J["n"], J["b"]
    G1 = r111.dot(g1)
    G2 = r111.dot(n)
    G3 = r111.dot(b)
    Kt2inv = (Kt * Kt).reciprocal()
    T1 = (Gam * G3 * Kt2inv) * n + (Gam * G2 * Kt2inv - G1 / (g * Kt)) * b
    T2 = (G3 * n + G2 * b) * Kt2inv
    T3 = b / Kt
    st, ct = th.sin(), th.cos()
    Kt2, Kt3 = Kt * st, Kt * ct
    m = derivs.shape[0]
    one = np.ones(m)
    vec = [
        [g1, None, None],
        [T1, -T2, T3],
        [-(Gam * st) * n, st * n, None],
        [-(Gam * ct) * n, ct * n, None],
    ]
    rot = [None, None, Kt3, -Kt2]
    rotp = [np.zeros(m), one, np.zeros(m), np.zeros(m)]
    return RateRows(vec, rot, rotp)


def sr_rate_rows(derivs: np.ndarray, g2_val: np.ndarray, g3_val: np.ndarray) -> RateRows:
    """Rows of the smallest-rotation formulation (total twist rate as DOF).

    The material base vectors are seeded with the rigid-section kinematics
    dg_alpha = -(1/g)(g_alpha . v,1) g1 + w x g_alpha-part.
    """
    m = derivs.shape[0]
    g1 = seed_vector_slot(derivs[:, 1], 0)
    r11 = seed_vector_slot(derivs[:, 2], 1)
    g = g1.dot(g1)
    Gam = r11.dot(g1) / g
    ginv = 1.0 / g.v

    def seeded_material(val, other, sign):
        A = np.zeros((m, 3, 3, 3))
        A[:, 0] = -ginv[:, None, None] * np.einsum("mi,mj->mij", derivs[:, 1], val)
        at = sign * other
        return VJet(val.copy(), A, at.copy())

    g2 = seeded_material(g2_val, g3_val, +1.0)
    g3 = seeded_material(g3_val, g2_val, -1.0)
    Kt2 = -r11.dot(g3)
    Kt3 = r11.dot(g2)
    K2, K3 = Kt2 / g, Kt3 / g
    one = np.ones(m)
    vec = [
        [g1, None, None],
        [K2 * g2 + K3 * g3, None, None],
        [Gam * g3, -1.0 * g3, None],
        [-(Gam) * g2, g2, None],
    ]
    rot = [None, None, Kt3, -Kt2]
    rotp = [np.zeros(m), one, np.zeros(m), np.zeros(m)]
    return RateRows(vec, rot, rotp)


def rows_to_H(rows: RateRows) -> np.ndarray:
    """Values of the rate operator, (m, n_rows, 11)."""
    m = rows.rotp[0].shape[0]
    H = np.zeros((m, rows.n_rows, NSLOTS))
    for i in range(rows.n_rows):
        for s, C in enumerate(rows.vec[i]):
            if C is not None:
                H[:, i, 3 * s : 3 * s + 3] = C.v
        if rows.rot[i] is not None:
            H[:, i, 9] = rows.rot[i].v
        H[:, i, 10] = rows.rotp[i]
    return H


def assemble_G(rows: RateRows, weights: np.ndarray) -> np.ndarray:
    """Geometric kernel (m, 10, 10): sum_i weights[:, i] * linearization of row i."""
    m = weights.shape[0]
    G = np.zeros((m, NGSLOTS, NGSLOTS))
    for i in range(rows.n_rows):
        w = weights[:, i]
        for s, C in enumerate(rows.vec[i]):
            if C is None:
                continue
            for k in range(3):
                blk = C.A[:, k]
                if not blk.any():
                    continue
                G[:, 3 * k : 3 * k + 3, 3 * s : 3 * s + 3] += (
                    w[:, None, None] * np.swapaxes(blk, 1, 2)
                )
            if C.at.any():
                G[:, 9, 3 * s : 3 * s + 3] += w[:, None] * C.at
        Cr = rows.rot[i]
        if Cr is not None:
            for k in range(3):
                if Cr.a[:, k].any():
                    G[:, 3 * k : 3 * k + 3, 9] += w[:, None] * Cr.a[:, k]
            if Cr.at.any():
                G[:, 9, 9] += w * Cr.at
    return G


def twist_rate_row(derivs: np.ndarray, theta: np.ndarray, with_dof: bool) -> RateRows:
    """Rate of the total twist at a section: FS part plus the twist DOF.

    For the smallest-rotation formulation the DOF itself carries the total
    twist, so the row reduces to the w slot (pass derivs=None).
    """
    if derivs is None:
        m = theta.shape[0]
        vec = [[None, None, None]]
        rot = [const_scalar(1.0, m)]
        return RateRows(vec, rot, [np.zeros(m)])
    J = _fs_jets(derivs, theta)
    Kt, Gam, b = J["Kt"], J["Gam"], J["b"]
    m = derivs.shape[0]
    Ktinv = Kt.reciprocal()
    vec = [[(-1.0 * Gam * Ktinv) * b, Ktinv * b, None]]
    rot = [const_scalar(1.0 if with_dof else 0.0, m)]
    return RateRows(vec, rot, [np.zeros(m)])


def moment_rate_row(m_vec: np.ndarray, derivs: np.ndarray, theta: np.ndarray,
                    fs_part: bool, with_dof: bool) -> RateRows:
    """Virtual-power row of a concentrated moment, m . delta(omega-dot vector).

    fs_part selects the Frenet-Serret decomposition of the twist velocity
    (FSR family); otherwise the twist rate is the DOF itself (SR).
    """
    J = _fs_jets(derivs, theta)
    g1, g, sqrt_g = J["g1"], J["g"], J["sqrt_g"]
    Kt, Gam, b, n, th = J["Kt"], J["Gam"], J["b"], J["n"], J["th"]
    mm = derivs.shape[0]
    mj = VJet(np.broadcast_to(np.asarray(m_vec, dtype=float), (mm, 3)).copy())
    t = g1 / sqrt_g
    mt = mj.dot(t)
    Cv1 = mj.cross(t) / sqrt_g
    Cv2 = None
    if fs_part:
        Ktinv = Kt.reciprocal()
        Cv1 = Cv1 + (-1.0 * mt * Gam * Ktinv) * b
        Cv2 = (mt * Ktinv) * b
    rot = [mt if with_dof else None]
    return RateRows([[Cv1, Cv2, None]], rot, [np.zeros(mm)])
