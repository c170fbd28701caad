"""Forward-mode linearization of frame quantities in the generalized velocities.

A jet carries a value together with its exact first-order dependence on the
velocity slots w = (v,1  v,11  v,111  omega_dot) at an axis point, batched
over m points.  Building the strain-rate coefficient operators in jet
arithmetic yields both the discrete rate operator (values) and the geometric
stiffness kernels (linear parts) without transcribing the lengthy closed-form
increment expressions; the finite-difference suite gates the result.

The fourth slot is the rotational velocity relevant to the formulation at
hand: the independent twist rate for the Frenet-Serret update, the total
twist rate for the smallest-rotation update.
"""

from __future__ import annotations

import numpy as np

__all__ = ["SJet", "VJet", "seed_vector_slot", "const_vector", "const_scalar", "scalar_slot"]

NSLOT = 3  # vector slots: v,1  v,11  v,111


def _skew(v: np.ndarray) -> np.ndarray:
    m = v.shape[0]
    S = np.zeros((m, 3, 3))
    S[:, 0, 1] = -v[:, 2]
    S[:, 0, 2] = v[:, 1]
    S[:, 1, 0] = v[:, 2]
    S[:, 1, 2] = -v[:, 0]
    S[:, 2, 0] = -v[:, 1]
    S[:, 2, 1] = v[:, 0]
    return S


class SJet:
    """Scalar jet: value (m,), gradient a (m, NSLOT, 3), twist gradient at (m,)."""

    __slots__ = ("v", "a", "at")

    def __init__(self, v, a=None, at=None):
        self.v = np.asarray(v, dtype=float)
        m = self.v.shape[0]
        self.a = np.zeros((m, NSLOT, 3)) if a is None else a
        self.at = np.zeros(m) if at is None else at

    def __add__(self, other):
        if isinstance(other, SJet):
            return SJet(self.v + other.v, self.a + other.a, self.at + other.at)
        return SJet(self.v + other, self.a.copy(), self.at.copy())

    __radd__ = __add__

    def __neg__(self):
        return SJet(-self.v, -self.a, -self.at)

    def __sub__(self, other):
        return self + (-other if isinstance(other, SJet) else -np.asarray(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, SJet):
            return SJet(
                self.v * other.v,
                self.a * other.v[:, None, None] + other.a * self.v[:, None, None],
                self.at * other.v + other.at * self.v,
            )
        if isinstance(other, VJet):
            return other * self
        c = np.asarray(other, dtype=float)
        return SJet(self.v * c, self.a * np.reshape(c, (-1, 1, 1)) if np.ndim(c) else self.a * c,
                    self.at * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, SJet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def reciprocal(self):
        inv = 1.0 / self.v
        f = -inv * inv
        return SJet(inv, self.a * f[:, None, None], self.at * f)

    def sqrt(self):
        r = np.sqrt(self.v)
        f = 0.5 / r
        return SJet(r, self.a * f[:, None, None], self.at * f)

    def sin(self):
        f = np.cos(self.v)
        return SJet(np.sin(self.v), self.a * f[:, None, None], self.at * f)

    def cos(self):
        f = -np.sin(self.v)
        return SJet(np.cos(self.v), self.a * f[:, None, None], self.at * f)


class VJet:
    """Vector jet: value (m,3), gradient A (m, NSLOT, 3, 3), twist gradient at (m,3).

    A[p, k, i, j] is the derivative of component i with respect to component j
    of vector slot k.
    """

    __slots__ = ("v", "A", "at")

    def __init__(self, v, A=None, at=None):
        self.v = np.asarray(v, dtype=float)
        m = self.v.shape[0]
        self.A = np.zeros((m, NSLOT, 3, 3)) if A is None else A
        self.at = np.zeros((m, 3)) if at is None else at

    def __add__(self, other):
        if isinstance(other, VJet):
            return VJet(self.v + other.v, self.A + other.A, self.at + other.at)
        return VJet(self.v + np.asarray(other), self.A.copy(), self.at.copy())

    __radd__ = __add__

    def __neg__(self):
        return VJet(-self.v, -self.A, -self.at)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, s):
        if isinstance(s, SJet):
            A = self.A * s.v[:, None, None, None] + np.einsum("mi,mkj->mkij", self.v, s.a)
            at = self.at * s.v[:, None] + self.v * s.at[:, None]
            return VJet(self.v * s.v[:, None], A, at)
        c = np.asarray(s, dtype=float)
        if c.ndim:
            return VJet(self.v * c[:, None], self.A * c[:, None, None, None], self.at * c[:, None])
        return VJet(self.v * c, self.A * c, self.at * c)

    __rmul__ = __mul__

    def __truediv__(self, s):
        if isinstance(s, SJet):
            return self * s.reciprocal()
        return self * (1.0 / np.asarray(s, dtype=float))

    def dot(self, other: "VJet") -> SJet:
        v = np.einsum("mi,mi->m", self.v, other.v)
        a = np.einsum("mkij,mi->mkj", self.A, other.v) + np.einsum("mkij,mi->mkj", other.A, self.v)
        at = np.einsum("mi,mi->m", self.at, other.v) + np.einsum("mi,mi->m", self.v, other.at)
        return SJet(v, a, at)

    def cross(self, other: "VJet") -> "VJet":
        v = np.cross(self.v, other.v)
        Su, Sw = _skew(self.v), _skew(other.v)
        A = np.einsum("mil,mklj->mkij", Su, other.A) - np.einsum("mil,mklj->mkij", Sw, self.A)
        at = np.cross(self.v, other.at) - np.cross(other.v, self.at)
        return VJet(v, A, at)

    def norm2(self) -> SJet:
        return self.dot(self)


def seed_vector_slot(value: np.ndarray, slot: int) -> VJet:
    """Vector quantity that IS velocity slot `slot` (identity gradient)."""
    value = np.asarray(value, dtype=float)
    m = value.shape[0]
    A = np.zeros((m, NSLOT, 3, 3))
    A[:, slot] = np.eye(3)
    return VJet(value, A)


def scalar_slot(value: np.ndarray) -> SJet:
    """Scalar quantity whose rate is the twist slot (e.g. the material angle)."""
    value = np.asarray(value, dtype=float)
    return SJet(value, at=np.ones(value.shape[0]))


def const_vector(value: np.ndarray, m: int | None = None) -> VJet:
    value = np.asarray(value, dtype=float)
    if value.ndim == 1:
        value = np.broadcast_to(value, (m, 3)).copy()
    return VJet(value)


def const_scalar(value, m: int) -> SJet:
    return SJet(np.broadcast_to(np.asarray(value, dtype=float), (m,)).copy())
