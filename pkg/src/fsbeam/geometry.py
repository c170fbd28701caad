"""Differential geometry of the beam axis and cross-section constants.

All axis quantities follow the convective-coordinate conventions used
throughout the package: parametric coordinate xi, metric g = g1.g1,
curvature Ktilde = K*g measured with respect to xi, material triad
(g2, g3) obtained by in-plane rotation of the Frenet-Serret normal and
binormal by the total material angle theta.  Cross-section coordinates
obey x^2 = zeta, x^3 = -eta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "IllDefinedFrameError",
    "AxisFrame",
    "FrameBatch",
    "CrossSection",
    "EquidistantMetric",
    "christoffel",
    "frame_batch",
    "frame_at",
    "equidistant_metric",
    "rectangle_section",
    "circle_section",
]


class IllDefinedFrameError(ArithmeticError):
    """Curvature below threshold: Frenet-Serret frame not usable here."""


class GeometryError(ValueError):
    """Inadmissible geometric input (e.g. equidistant point beyond the curvature center)."""


@dataclass(frozen=True)
class FrameBatch:
    """Axis frames at m points, struct-of-arrays layout."""

    g1: np.ndarray        # (m,3) tangent base vector r,1
    r11: np.ndarray       # (m,3)
    r111: np.ndarray      # (m,3)
    g: np.ndarray         # (m,) metric g11
    sqrt_g: np.ndarray
    Gamma: np.ndarray     # (m,) Christoffel symbol of the second kind
    Ktilde: np.ndarray    # (m,) curvature wrt parametric coordinate, K*g
    K: np.ndarray         # (m,) curvature
    tau: np.ndarray       # (m,) torsion of the FS frame
    tau_tilde: np.ndarray  # (m,) sqrt(g)*tau
    t: np.ndarray         # (m,3) unit tangent
    n: np.ndarray         # (m,3) unit normal
    b: np.ndarray         # (m,3) unit binormal
    theta: np.ndarray     # (m,) material angle from the FS normal
    theta_1: np.ndarray   # (m,) d theta / d xi
    g2: np.ndarray        # (m,3)
    g3: np.ndarray        # (m,3)
    K1: np.ndarray        # (m,) torsion of the material basis (covariant, parametric)
    Kt2: np.ndarray       # (m,) Ktilde_2
    Kt3: np.ndarray       # (m,) Ktilde_3
    G1: np.ndarray        # (m,) r,111 . g1
    G2: np.ndarray        # (m,) r,111 . n
    G3: np.ndarray        # (m,) r,111 . b

    def __len__(self):
        return self.g.shape[0]

    def point(self, i: int) -> "AxisFrame":
        kw = {f: getattr(self, f)[i] for f in self.__dataclass_fields__}
        return AxisFrame(**kw)


@dataclass(frozen=True)
class AxisFrame(FrameBatch):
    """All per-point geometry of one configuration at a single axis point."""


@dataclass(frozen=True)
class CrossSection:
    """Solid cross section aligned with the material axes (eta, zeta)."""

    shape: str            # "rectangle" or "circle"
    dims: tuple           # (b, h) or (d,)
    A: float
    I_zeta: float         # integral of zeta^2 dA
    I_eta: float          # integral of eta^2 dA
    I_t: float            # torsional constant

    def max_dim(self) -> float:
        return max(self.dims)


@dataclass(frozen=True)
class EquidistantMetric:
    g0: float      # shifter 1 + zeta*K2 - eta*K3
    gbar11: float  # g0^2 * g11
    gbar: float    # determinant of the simplified equidistant metric


def christoffel(g1: np.ndarray, g1_1: np.ndarray) -> float:
    """Gamma^1_11 = (g1,1 . g1)/g; zero for arc-length parameterization."""
    g1 = np.asarray(g1, dtype=float)
    g = g1 @ g1
    if g <= 0.0:
        raise GeometryError("degenerate tangent")
    return float(np.asarray(g1_1, dtype=float) @ g1 / g)


def frame_batch(derivs: np.ndarray, theta: np.ndarray, theta_1: np.ndarray,
                kappa_min: float = 0.0) -> FrameBatch:
    """Frames at m points from stacked curve derivatives.

    derivs has shape (m, 4, 3): rows r, r,1, r,11, r,111.  theta is the total
    material angle from the FS normal, theta_1 its parametric derivative.
    Raises IllDefinedFrameError when the curvature K falls below kappa_min
    anywhere in the batch (straight segment or inflection point).
    """
    derivs = np.asarray(derivs, dtype=float)
    if derivs.ndim == 2:
        derivs = derivs[None]
    m = derivs.shape[0]
    theta = np.broadcast_to(np.asarray(theta, dtype=float), (m,)).copy()
    theta_1 = np.broadcast_to(np.asarray(theta_1, dtype=float), (m,)).copy()

    g1 = derivs[:, 1]
    r11 = derivs[:, 2]
    r111 = derivs[:, 3]
    g = np.einsum("mi,mi->m", g1, g1)
    if np.any(g <= 0.0):
        raise GeometryError("degenerate tangent in batch")
    sqrt_g = np.sqrt(g)
    Gamma = np.einsum("mi,mi->m", r11, g1) / g
    c = np.cross(g1, r11)
    cnorm = np.linalg.norm(c, axis=1)
    Ktilde = cnorm / sqrt_g
    K = Ktilde / g
    if np.any(K < kappa_min) or np.any(cnorm == 0.0):
        raise IllDefinedFrameError(
            f"curvature {K.min():.3e} below threshold {kappa_min:.3e}; "
            "Frenet-Serret frame undefined (straight segment or inflection)"
        )
    t = g1 / sqrt_g[:, None]
    n = (r11 - Gamma[:, None] * g1) / Ktilde[:, None]
    b = c / (sqrt_g * Ktilde)[:, None]
    tau = np.einsum("mi,mi->m", c, r111) / cnorm**2
    tau_tilde = sqrt_g * tau
    st, ct = np.sin(theta), np.cos(theta)
    g2 = ct[:, None] * n + st[:, None] * b
    g3 = -st[:, None] * n + ct[:, None] * b
    K1 = tau_tilde + theta_1
    Kt2 = Ktilde * st
    Kt3 = Ktilde * ct
    G1 = np.einsum("mi,mi->m", r111, g1)
    G2 = np.einsum("mi,mi->m", r111, n)
    G3 = np.einsum("mi,mi->m", r111, b)
    return FrameBatch(
        g1=g1, r11=r11, r111=r111, g=g, sqrt_g=sqrt_g, Gamma=Gamma,
        Ktilde=Ktilde, K=K, tau=tau, tau_tilde=tau_tilde, t=t, n=n, b=b,
        theta=theta, theta_1=theta_1, g2=g2, g3=g3, K1=K1, Kt2=Kt2, Kt3=Kt3,
        G1=G1, G2=G2, G3=G3,
    )


def frame_at(derivs: np.ndarray, theta: float = 0.0, theta_1: float = 0.0,
             kappa_min: float = 0.0) -> AxisFrame:
    """Single-point frame from curve derivatives r..r,111 (shape (4,3))."""
    batch = frame_batch(np.asarray(derivs, dtype=float)[None], [theta], [theta_1], kappa_min)
    return batch.point(0)


def equidistant_metric(frame, eta: float, zeta: float) -> EquidistantMetric:
    """Shifter and simplified metric of the equidistant line through (eta, zeta)."""
    K2 = float(frame.Kt2 / frame.g)
    K3 = float(frame.Kt3 / frame.g)
    g0 = 1.0 + zeta * K2 - eta * K3
    if g0 <= 0.0:
        raise GeometryError(f"equidistant point beyond curvature center (g0 = {g0:.3e})")
    gbar11 = g0 * g0 * float(frame.g)
    return EquidistantMetric(g0=g0, gbar11=gbar11, gbar=gbar11)


def rectangle_section(b: float, h: float) -> CrossSection:
    """Rectangle of width b along eta and height h along zeta.

    The torsional constant uses the single-term Saint-Venant approximation
    I_t = a c^3 [1/3 - 0.21 (c/a)(1 - c^4/(12 a^4))] with a = max, c = min side.
    """
    if b <= 0.0 or h <= 0.0:
        raise ValueError("rectangle sides must be positive")
    a, c = max(b, h), min(b, h)
    It = a * c**3 * (1.0 / 3.0 - 0.21 * (c / a) * (1.0 - c**4 / (12.0 * a**4)))
    return CrossSection(
        shape="rectangle", dims=(b, h), A=b * h,
        I_zeta=b * h**3 / 12.0, I_eta=b**3 * h / 12.0, I_t=It,
    )


def circle_section(d: float) -> CrossSection:
    if d <= 0.0:
        raise ValueError("diameter must be positive")
    I = np.pi * d**4 / 64.0
    return CrossSection(shape="circle", dims=(d,), A=np.pi * d**2 / 4.0,
                        I_zeta=I, I_eta=I, I_t=2.0 * I)


def section_constants(shape: str, *dims: float) -> CrossSection:
    if shape == "rectangle":
        return rectangle_section(*dims)
    if shape == "circle":
        return circle_section(*dims)
    raise ValueError(f"unknown section shape {shape!r}")
