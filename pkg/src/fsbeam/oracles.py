"""Closed-form equilibrium oracles for the pure-bending and helix benchmarks.

Both reduce the section-force law of an arc-length-parameterized member
(g = 1) under end-moment loading to small algebraic systems:

* in-plane pure bending: N = 0 and M = M_ext with kappa = chi (2 eps + 1),
* spatial pure bending (helix): N(0) = M_2(0) = 0 and M_3(0) = M3_ext.

They are independent of the finite element path and serve as acceptance
references for the axial strain and curvature of the converged solutions.
"""

from __future__ import annotations

import numpy as np

__all__ = ["pure_bending_oracle", "helix_oracle"]


class OracleError(RuntimeError):
    pass


def _eps_of_chi(chi: float, A: float, I: float) -> float:
    """Exact elimination of the axial equation: A e + 1.5 I chi^2 (2e+1) = 0."""
    return -1.5 * I * chi * chi / (A + 3.0 * I * chi * chi)


def pure_bending_oracle(M_ext: float, L: float, section, material,
                        tol: float = 1e-14, max_iter: int = 60):
    """Reference strains of an in-plane beam under pure bending.

    Solves N = 0, M = M_ext for (eps11, chi) with kappa = chi (2 eps11 + 1);
    damped two-variable Newton with a bisection fallback on the reduced
    scalar equation.  Returns (eps11, kappa, chi).
    """
    A, I, E = section.A, section.I_zeta, material.E
    if M_ext == 0.0:
        return 0.0, 0.0, 0.0

    def residual(x):
        eps, chi = x
        kap = chi * (2.0 * eps + 1.0)
        pref = E * np.sqrt(1.0 + 2.0 * eps)
        return np.array([
            pref * (A * eps + 1.5 * I * chi * kap),
            pref * I * (chi * eps + kap) - M_ext,
        ])

    def jacobian(x):
        eps, chi = x
        s = np.sqrt(1.0 + 2.0 * eps)
        J = np.empty((2, 2))
        J[0, 0] = E * (A * eps + 1.5 * I * chi ** 2 * (2 * eps + 1)) / s \
            + E * s * (A + 3.0 * I * chi ** 2)
        J[0, 1] = E * s * 3.0 * I * chi * (2.0 * eps + 1.0)
        J[1, 0] = E * I * chi * (3.0 * eps + 1.0) / s + E * s * I * 3.0 * chi
        J[1, 1] = E * s * I * (3.0 * eps + 1.0)
        return J

    x = np.array([0.0, M_ext / (E * I)])
    r = residual(x)
    scale = max(abs(M_ext), E * A * 1e-16)
    for _ in range(max_iter):
        if np.linalg.norm(r) < tol * scale:
            eps, chi = x
            return float(eps), float(chi * (2 * eps + 1)), float(chi)
        dx = np.linalg.solve(jacobian(x), -r)
        step = 1.0
        for _ in range(40):
            xn = x + step * dx
            if 1.0 + 2.0 * xn[0] > 0.0:
                rn = residual(xn)
                if np.linalg.norm(rn) < np.linalg.norm(r):
                    x, r = xn, rn
                    break
            step *= 0.5
        else:
            x = _bisection_fallback(M_ext, A, I, E)
            r = residual(x)
    eps, chi = x
    if np.linalg.norm(residual(x)) > 1e-8 * scale:
        raise OracleError("pure-bending oracle did not converge")
    return float(eps), float(chi * (2 * eps + 1)), float(chi)


def _bisection_fallback(M_ext, A, I, E):
    def g(chi):
        eps = _eps_of_chi(chi, A, I)
        return E * I * np.sqrt(1.0 + 2.0 * eps) * chi * (3.0 * eps + 1.0) - M_ext

    chi0 = M_ext / (E * I)
    lo, hi = 0.0, 2.0 * chi0 if chi0 > 0 else 2.0 * chi0
    if chi0 < 0:
        lo, hi = hi, 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(lo) * g(mid) <= 0.0:
            hi = mid
        else:
            lo = mid
    chi = 0.5 * (lo + hi)
    return np.array([_eps_of_chi(chi, A, I), chi])


def helix_oracle(M3_ext: float, section, material, tol: float = 1e-14,
                 max_iter: int = 100) -> float:
    """Axial strain of the spatial pure-bending state (clamped-end conditions
    N = M_2 = 0, M_3 = M3_ext).  M_2 = 0 forces chi_2 = 0; the remaining
    system reduces to a scalar equation in eps11, solved by Newton."""
    A, I, E = section.A, section.I_eta, material.E
    if M3_ext == 0.0:
        return 0.0

    def chi3(eps):
        return M3_ext / (E * I * (3.0 * eps + 1.0) * np.sqrt(1.0 + 2.0 * eps))

    def h(eps):
        c = chi3(eps)
        return A * eps + 1.5 * I * c * c * (2.0 * eps + 1.0)

    eps = 0.0
    for _ in range(max_iter):
        r = h(eps)
        if abs(r) < tol * A:
            return float(eps)
        d = 1e-9 * max(1.0, abs(eps))
        dr = (h(eps + d) - h(eps - d)) / (2.0 * d)
        step = -r / dr
        while 1.0 + 2.0 * (eps + step) <= 0.0:
            step *= 0.5
        eps += step
    raise OracleError("helix oracle did not converge")
