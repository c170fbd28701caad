"""Reference strains, equidistant strains and the constitutive relations.

Strains are stored in tensorial/parametric form; physical values (e.g.
eps_(11) = eps11/g11) appear only at reporting boundaries.  Three
constitutive models relate internal (energetic) section forces to the
reference strains:

* DC - coupled strong-curvature model,
* D0 - decoupled model (coupling coefficients zeroed),
* D1 - small-curvature model that suppresses axial strain under bending.

The symmetric tangent law feeds the material stiffness; the section-force
law (physical stress resultant and couples) feeds reporting and the
brute-force verification against direct section integration.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Material",
    "ConstitutiveModel",
    "ReferenceStrains",
    "SectionForces",
    "reference_strains",
    "equidistant_strain",
    "internal_force_matrix",
    "internal_forces",
    "tangent_constitutive",
    "section_force_matrix",
    "section_forces_physical",
]


@dataclass(frozen=True)
class Material:
    E: float
    nu: float = 0.0

    def __post_init__(self):
        if self.E <= 0.0:
            raise ValueError("E must be positive")
        if not -1.0 < self.nu < 0.5:
            raise ValueError("nu must lie in (-1, 0.5)")

    @property
    def mu(self) -> float:
        return self.E / (2.0 * (1.0 + self.nu))


class ConstitutiveModel(Enum):
    DC = "dc"
    D0 = "d0"
    D1 = "d1"


@dataclass(frozen=True)
class ReferenceStrains:
    """Axis strains at m points; kappa in the parametric convective measure,
    chi in the arc-length convective measure."""

    eps11: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    k3: np.ndarray
    chi2: np.ndarray
    chi3: np.ndarray

    def as_vector(self) -> np.ndarray:
        return np.stack([self.eps11, self.k1, self.k2, self.k3], axis=-1)


@dataclass(frozen=True)
class SectionForces:
    """Energetic conjugates (tilde) and physical resultant/couples."""

    Ntilde: float
    M1tilde: float
    M2tilde: float
    M3tilde: float
    Nphys: float
    M1: float
    M2: float
    M3: float


def reference_strains(frame_ref, frame_cur) -> ReferenceStrains:
    """Strains of the current configuration relative to the reference one."""
    eps11 = 0.5 * (frame_cur.g - frame_ref.g)
    k1 = frame_cur.K1 - frame_ref.K1
    k2 = frame_cur.Kt2 - frame_ref.Kt2
    k3 = frame_cur.Kt3 - frame_ref.Kt3
    chi2 = frame_cur.Kt2 / frame_cur.g - frame_ref.Kt2 / frame_ref.g
    chi3 = frame_cur.Kt3 / frame_cur.g - frame_ref.Kt3 / frame_ref.g
    return ReferenceStrains(np.asarray(eps11), np.asarray(k1), np.asarray(k2),
                            np.asarray(k3), np.asarray(chi2), np.asarray(chi3))


def equidistant_strain(strains: ReferenceStrains, frame_ref, eta: float, zeta: float):
    """Axial and shear strain of the equidistant line through (eta, zeta).

    Returns (eps_bar_11, gamma_bar_12, gamma_bar_13).  Cross-section
    coordinates follow x^2 = zeta, x^3 = -eta.
    """
    K2 = frame_ref.Kt2 / frame_ref.g
    K3 = frame_ref.Kt3 / frame_ref.g
    x = (zeta, -eta)
    Ka = (K2, K3)
    ka = (strains.k2, strains.k3)
    chia = (strains.chi2, strains.chi3)
    xK = x[0] * Ka[0] + x[1] * Ka[1]
    xk = x[0] * ka[0] + x[1] * ka[1]
    g0 = 1.0 + xK
    eps = g0 * ((1.0 - xK) * strains.eps11 + xk)
    for a in range(2):
        for b in range(2):
            eps = eps + x[a] * x[b] * chia[b] * (0.5 * ka[a] - Ka[a] * strains.eps11)
    gam12 = -zeta * strains.k1
    gam13 = eta * strains.k1
    return eps, gam12, gam13


def _coupling(model: ConstitutiveModel, strains: ReferenceStrains, frame_ref):
    """Coupling coefficients (a13, a14, a31, a41) of the internal-force law."""
    K2 = frame_ref.Kt2 / frame_ref.g
    K3 = frame_ref.Kt3 / frame_ref.g
    if model is ConstitutiveModel.DC:
        return (0.5 * strains.chi2 - 2.0 * K2, 0.5 * strains.chi3 - 2.0 * K3,
                strains.chi2 - 2.0 * K2, strains.chi3 - 2.0 * K3)
    if model is ConstitutiveModel.D0:
        z = np.zeros_like(np.asarray(K2))
        return z, z, z, z
    if model is ConstitutiveModel.D1:
        return (-(strains.chi2 + K2), -(strains.chi3 + K3), -K2, -K3)
    raise ValueError(model)


def internal_force_matrix(strains: ReferenceStrains, section, material: Material,
                          frame_ref, model: ConstitutiveModel) -> np.ndarray:
    """Constitutive matrix of the internal-force law, batched (m,4,4)."""
    g = np.atleast_1d(np.asarray(frame_ref.g, dtype=float))
    m = g.shape[0]
    coeffs = [np.broadcast_to(np.asarray(a, dtype=float), (m,))
              for a in _coupling(model, strains, frame_ref)]
    pref = material.E / g**2
    tors = material.mu * g * section.I_t / material.E * pref
    return _build_law(pref, tors, section.A, section.I_zeta, section.I_eta, *coeffs)


def _build_law(pref, tors, A, Iz, Ie, a13, a14, a31, a41) -> np.ndarray:
    m = pref.shape[0]
    D = np.zeros((m, 4, 4))
    D[:, 0, 0] = A
    D[:, 0, 2] = Iz * a13
    D[:, 0, 3] = Ie * a14
    D[:, 2, 0] = Iz * a31
    D[:, 3, 0] = Ie * a41
    D[:, 2, 2] = Iz
    D[:, 3, 3] = Ie
    D *= pref[:, None, None]
    D[:, 1, 1] = tors
    return D


def internal_forces(strains: ReferenceStrains, section, material: Material,
                    frame_ref, model: ConstitutiveModel):
    """Energetic section forces f = (N~, M~1, M~2, M~3) and the law matrix."""
    D = internal_force_matrix(strains, section, material, frame_ref, model)
    f = np.einsum("mij,mj->mi", D, np.atleast_2d(strains.as_vector()))
    return f, D


def tangent_constitutive(strains: ReferenceStrains, section, material: Material,
                         frame_ref) -> np.ndarray:
    """Symmetric tangent law relating stress-rate resultants to strain rates."""
    g = np.atleast_1d(np.asarray(frame_ref.g, dtype=float))
    m = g.shape[0]
    K2 = np.broadcast_to(np.asarray(frame_ref.Kt2 / frame_ref.g, dtype=float), (m,))
    K3 = np.broadcast_to(np.asarray(frame_ref.Kt3 / frame_ref.g, dtype=float), (m,))
    chi2 = np.broadcast_to(np.asarray(strains.chi2, dtype=float), (m,))
    chi3 = np.broadcast_to(np.asarray(strains.chi3, dtype=float), (m,))
    a13 = chi2 - 2.0 * K2
    a14 = chi3 - 2.0 * K3
    pref = material.E / g**2
    tors = material.mu * g * section.I_t / material.E * pref
    return _build_law(pref, tors, section.A, section.I_zeta, section.I_eta,
                      a13, a14, a13, a14)


def section_force_matrix(strains: ReferenceStrains, section, material: Material,
                         g, g_star, frame_ref) -> np.ndarray:
    """Physical section-force law (stress resultant and couples), batched."""
    g = np.atleast_1d(np.asarray(g, dtype=float))
    g_star = np.atleast_1d(np.asarray(g_star, dtype=float))
    m = g.shape[0]
    K2 = np.broadcast_to(np.asarray(frame_ref.Kt2 / frame_ref.g, dtype=float), (m,))
    K3 = np.broadcast_to(np.asarray(frame_ref.Kt3 / frame_ref.g, dtype=float), (m,))
    chi2 = np.broadcast_to(np.asarray(strains.chi2, dtype=float), (m,))
    chi3 = np.broadcast_to(np.asarray(strains.chi3, dtype=float), (m,))
    c13 = 1.5 * chi2 - K2
    c14 = 1.5 * chi3 - K3
    c31 = chi2 - 2.0 * K2
    c41 = chi3 - 2.0 * K3
    pref = material.E / g * np.sqrt(g_star / g)
    tors = material.mu * g * section.I_t / (material.E * np.sqrt(g_star)) * pref
    return _build_law(pref, tors, section.A, section.I_zeta, section.I_eta,
                      c13, c14, c31, c41)


def section_forces_physical(strains: ReferenceStrains, section, material: Material,
                            g, g_star, frame_ref) -> np.ndarray:
    """Physical N, M1, M2, M3 from the section-force law, batched (m,4)."""
    D = section_force_matrix(strains, section, material, g, g_star, frame_ref)
    return np.einsum("mij,mj->mi", D, np.atleast_2d(strains.as_vector()))
