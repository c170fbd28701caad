"""Configuration state and triad-update schemes.

Three update schemes are supported for the cross-section triad:

* FSR  - material triad = current Frenet-Serret triad rotated in-plane by the
  total material angle (reference pre-twist + accumulated independent twist
  DOFs).  Objective and path-independent by construction.
* FSR_TF - twist-free reduction of FSR: the independent twist DOF is dropped,
  the triad follows the FS frame rotated by the reference pre-twist only.
* SR - smallest-rotation transport of the previously converged triad to the
  current tangent, followed by an in-plane rotation with the interpolated
  increment of the total-twist DOF.  Path-dependent (incremental update).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

__all__ = [
    "UpdateMethod",
    "Configuration",
    "DegenerateRotationError",
    "smallest_rotation_matrix",
    "smallest_rotation",
    "rotation_about_axis",
    "fs_twist",
    "update_configuration",
]

ANTIPODAL_EPS = 1e-9


class UpdateMethod(Enum):
    FSR = "fsr"
    FSR_TF = "fsrtf"
    SR = "sr"

    @property
    def has_twist_dof(self) -> bool:
        return self is not UpdateMethod.FSR_TF

    @property
    def dofs_per_point(self) -> int:
        return 4 if self.has_twist_dof else 3


class DegenerateRotationError(ArithmeticError):
    """Tangents (anti)parallel beyond the representable range of the SR map."""


def smallest_rotation_matrix(t_old: np.ndarray, t_new: np.ndarray) -> np.ndarray:
    """Rotation with minimal angle mapping unit t_old onto unit t_new.

    Batched: inputs (..., 3), output (..., 3, 3).
    """
    t_old = np.asarray(t_old, dtype=float)
    t_new = np.asarray(t_new, dtype=float)
    c = np.einsum("...i,...i->...", t_old, t_new)
    if np.any(c < -1.0 + ANTIPODAL_EPS):
        raise DegenerateRotationError("tangents nearly antipodal, smallest rotation undefined")
    w = np.cross(t_old, t_new)
    W = np.zeros(t_old.shape[:-1] + (3, 3))
    W[..., 0, 1], W[..., 0, 2] = -w[..., 2], w[..., 1]
    W[..., 1, 0], W[..., 1, 2] = w[..., 2], -w[..., 0]
    W[..., 2, 0], W[..., 2, 1] = -w[..., 1], w[..., 0]
    eye = np.broadcast_to(np.eye(3), W.shape)
    return eye + W + np.einsum("...ij,...jk->...ik", W, W) / (1.0 + c)[..., None, None]


def smallest_rotation(triad, t_old: np.ndarray, t_new: np.ndarray):
    """Apply the smallest rotation t_old -> t_new to a sequence of vectors."""
    R = smallest_rotation_matrix(t_old, t_new)
    return tuple(R @ np.asarray(v, dtype=float) for v in triad)


def rotation_about_axis(axis: np.ndarray, angle) -> np.ndarray:
    """Rodrigues rotation about a unit axis; batched over leading dims."""
    axis = np.asarray(axis, dtype=float)
    angle = np.asarray(angle, dtype=float)
    c, s = np.cos(angle), np.sin(angle)
    W = np.zeros(axis.shape[:-1] + (3, 3))
    W[..., 0, 1], W[..., 0, 2] = -axis[..., 2], axis[..., 1]
    W[..., 1, 0], W[..., 1, 2] = axis[..., 2], -axis[..., 0]
    W[..., 2, 0], W[..., 2, 1] = -axis[..., 1], axis[..., 0]
    eye = np.broadcast_to(np.eye(3), W.shape)
    outer = axis[..., :, None] * axis[..., None, :]
    return c[..., None, None] * eye + s[..., None, None] * W + (1.0 - c)[..., None, None] * outer


def fs_twist(n_star: np.ndarray, n_sr: np.ndarray, b_sr: np.ndarray) -> float:
    """Signed twist of the FS frame: angle from the SR-transported normal to n*."""
    cosw = np.clip(np.einsum("...i,...i->...", n_star, n_sr), -1.0, 1.0)
    sgn = np.sign(np.einsum("...i,...i->...", n_star, b_sr))
    sgn = np.where(sgn == 0.0, 1.0, sgn)
    return sgn * np.arccos(cosw)


@dataclass(frozen=True)
class SrCache:
    """Converged-state fields backing the incremental smallest-rotation update."""

    t: np.ndarray      # (m,3) tangent at gauss points
    t_1: np.ndarray    # (m,3) parametric derivative of the tangent
    g2: np.ndarray     # (m,3)
    g2_1: np.ndarray   # (m,3)
    theta: np.ndarray  # (ncp,) twist DOFs at the converged state


@dataclass(frozen=True)
class TwistState:
    """Accumulated FS twist at one constrained section (unwrap bookkeeping)."""

    omega_acc: float
    t: np.ndarray
    n: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class Configuration:
    """Control-point displacements, accumulated twists and multipliers."""

    u: np.ndarray          # (ncp, 3)
    theta: np.ndarray      # (ncp,)
    lam: np.ndarray        # (n_constraints,)
    sr_cache: SrCache | None = None
    twist_states: tuple = field(default_factory=tuple)

    @staticmethod
    def zero(ncp: int, n_constraints: int = 0) -> "Configuration":
        return Configuration(np.zeros((ncp, 3)), np.zeros(ncp), np.zeros(n_constraints))

    def displaced(self, du: np.ndarray, dtheta: np.ndarray, dlam: np.ndarray) -> "Configuration":
        return replace(self, u=self.u + du, theta=self.theta + dtheta, lam=self.lam + dlam)


def update_configuration(config: Configuration, dq: np.ndarray,
                         method: UpdateMethod) -> Configuration:
    """Apply full-layout DOF increments (4 or 3 per point, multipliers appended)."""
    ncp = config.u.shape[0]
    nd = method.dofs_per_point
    dq = np.asarray(dq, dtype=float)
    nlam = config.lam.shape[0]
    if dq.shape != (ncp * nd + nlam,):
        raise ValueError(f"expected {ncp * nd + nlam} increments, got {dq.shape}")
    blocks = dq[: ncp * nd].reshape(ncp, nd)
    du = blocks[:, :3]
    dtheta = blocks[:, 3] if nd == 4 else np.zeros(ncp)
    dlam = dq[ncp * nd :]
    return config.displaced(du, dtheta, dlam)


def sr_transport_with_derivative(cache: SrCache, t: np.ndarray, t_1: np.ndarray,
                                 dw: np.ndarray, dw_1: np.ndarray):
    """Current SR triad and its parametric derivative at the gauss points.

    Composes the smallest rotation from the cached tangent with an in-plane
    rotation by the interpolated twist-DOF increment dw.  Returns
    (g2, g3, g2_1) with g3 = t x g2.
    """
    a, b = cache.t, t
    c = np.einsum("mi,mi->m", a, b)
    if np.any(c < -1.0 + ANTIPODAL_EPS):
        raise DegenerateRotationError("increment rotated a tangent nearly 180 degrees")
    w = np.cross(a, b)
    w_1 = np.cross(cache.t_1, b) + np.cross(a, t_1)
    c_1 = np.einsum("mi,mi->m", cache.t_1, b) + np.einsum("mi,mi->m", a, t_1)

    def skew(v):
        S = np.zeros((v.shape[0], 3, 3))
        S[:, 0, 1], S[:, 0, 2] = -v[:, 2], v[:, 1]
        S[:, 1, 0], S[:, 1, 2] = v[:, 2], -v[:, 0]
        S[:, 2, 0], S[:, 2, 1] = -v[:, 1], v[:, 0]
        return S

    W, W1 = skew(w), skew(w_1)
    inv = 1.0 / (1.0 + c)
    WW = W @ W
    R = np.eye(3)[None] + W + WW * inv[:, None, None]
    R_1 = W1 + (W1 @ W + W @ W1) * inv[:, None, None] - WW * (c_1 * inv * inv)[:, None, None]

    g2s = np.einsum("mij,mj->mi", R, cache.g2)
    g2s_1 = np.einsum("mij,mj->mi", R_1, cache.g2) + np.einsum("mij,mj->mi", R, cache.g2_1)

    # in-plane rotation about the current tangent by dw
    cw, sw = np.cos(dw), np.sin(dw)
    tg2 = np.cross(t, g2s)
    g2 = cw[:, None] * g2s + sw[:, None] * tg2
    # d/dxi of cw*g2s + sw*(t x g2s)
    tg2_1 = np.cross(t_1, g2s) + np.cross(t, g2s_1)
    g2_1 = (
        (-sw * dw_1)[:, None] * g2s
        + cw[:, None] * g2s_1
        + (cw * dw_1)[:, None] * tg2
        + sw[:, None] * tg2_1
    )
    g3 = np.cross(t, g2)
    return g2, g3, g2_1
