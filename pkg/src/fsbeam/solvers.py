"""Newton-Raphson load control and cylindrical arc-length continuation.

Both solvers share the convergence norms (relative displacement and force
norms, tolerance 1e-4 by default) and automatic incrementation: the next
load increment scales with n_d/n_c for Newton and sqrt(n_d/n_c) for the
arc-length predictor, where n_d is the desired and n_c the consumed number
of iterations.  Failed increments are retried with bisection (bounded).

Norm conventions (the formulation leaves them open, so they are fixed here):
the displacement norm is |dx| / |accumulated increment|; the force norm
scales the residual by the largest external-load magnitude seen on the path,
falling back to the internal-force magnitude for load-free (driven) problems
and to the absolute residual when both vanish.  A first correction that
already equilibrates the residual ends the increment (linear regime counts
one iteration).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from fsbeam.geometry import IllDefinedFrameError
from fsbeam.kinematics import DegenerateRotationError
from fsbeam.loads import StepTooLargeError

__all__ = ["SolverConfig", "PathRecord", "EquilibriumPath", "SolverError",
           "NonConvergenceError", "convergence_norms", "newton_run", "arclength_run"]

RECOVERABLE = (IllDefinedFrameError, DegenerateRotationError, StepTooLargeError,
               np.linalg.LinAlgError)


class SolverError(RuntimeError):
    pass


class NonConvergenceError(SolverError):
    pass


@dataclass
class SolverConfig:
    method: str = "newton"          # "newton" or "arclength"
    tol: float = 1e-4
    n_d: int = 6                    # desired iterations per increment
    first_lpf: float = 0.01
    max_iter: int = 25
    max_increments: int = 2000
    lpf_max: float = 1.0
    max_bisections: int = 5
    fixed_increments: int | None = None   # equal LPF steps when set (Newton)
    max_growth: float = 4.0               # cap on per-increment step growth
    stop: Callable | None = None          # stop(record) -> bool ends the run early
    probes: Callable | None = None        # probes(system, config, lpf) -> dict


@dataclass
class PathRecord:
    lpf: float
    iterations: int
    config: object
    probes: dict = field(default_factory=dict)


@dataclass
class EquilibriumPath:
    records: list[PathRecord] = field(default_factory=list)
    converged: bool = True
    message: str = ""

    @property
    def final(self) -> PathRecord:
        return self.records[-1]

    def lpfs(self) -> np.ndarray:
        return np.array([r.lpf for r in self.records])

    def probe_array(self, key: str) -> np.ndarray:
        return np.array([r.probes[key] for r in self.records])

    def total_iterations(self) -> int:
        return sum(r.iterations for r in self.records)


def convergence_norms(dx: np.ndarray, dq_acc: np.ndarray, residual: np.ndarray,
                      q_ref: float) -> tuple[float, float]:
    """Relative displacement and force norms with absolute fallbacks."""
    den_d = np.linalg.norm(dq_acc)
    disp = np.linalg.norm(dx) / den_d if den_d > 0.0 else np.linalg.norm(dx)
    force = np.linalg.norm(residual)
    if q_ref > 0.0:
        force = force / q_ref
    return float(disp), float(force)


class _ForceScale:
    """Running force-norm denominator: max load magnitude over the path."""

    def __init__(self):
        self.q_max = 0.0

    def update(self, system, config, lpf):
        q = np.linalg.norm(system.external_load(config, lpf))
        self.q_max = max(self.q_max, q)

    def denom(self, system, config) -> float:
        if self.q_max > 0.0:
            return self.q_max
        f = np.linalg.norm(system.tangent_system(config, 0.0, want_tangent=False).residual)
        return f if f > 0.0 else 0.0


def _record(system, config, lpf, n_c, cfgrec: SolverConfig) -> PathRecord:
    probes = cfgrec.probes(system, config, lpf) if cfgrec.probes else {}
    return PathRecord(lpf=lpf, iterations=n_c, config=config, probes=probes)


def _iterate(system, config, lpf, sc: SolverConfig, scale: _ForceScale):
    """Newton iterations at fixed LPF.  Returns (converged config, n_c, dq_acc)."""
    cfg = config
    dq_acc = np.zeros(system.dof_map.n_unknowns)
    ts = system.tangent_system(cfg, lpf)
    disp_last = np.inf
    n_c = 0
    while True:
        den = scale.denom(system, cfg)
        fnorm = np.linalg.norm(ts.residual) / den if den > 0 else np.linalg.norm(ts.residual)
        if n_c > 0 and fnorm < sc.tol and disp_last < sc.tol:
            return cfg, n_c, dq_acc
        if n_c >= sc.max_iter:
            raise NonConvergenceError(f"no convergence in {sc.max_iter} iterations at LPF={lpf}")
        dx = np.linalg.solve(ts.K, ts.residual)
        cfg = system.apply_increment(cfg, dx)
        dq_acc += dx
        n_c += 1
        ts = system.tangent_system(cfg, lpf)
        disp_last, _ = convergence_norms(dx, dq_acc, ts.residual, 1.0)
        if n_c == 1:
            den = scale.denom(system, cfg)
            fnew = np.linalg.norm(ts.residual) / den if den > 0 else np.linalg.norm(ts.residual)
            if fnew < sc.tol:
                disp_last = 0.0  # first correction already equilibrated the residual


def newton_run(system, sc: SolverConfig) -> EquilibriumPath:
    path = EquilibriumPath()
    cfg = system.commit(system.initial_configuration())
    lpf = 0.0
    scale = _ForceScale()
    if sc.fixed_increments:
        dlpf_nom = sc.lpf_max / sc.fixed_increments
    else:
        dlpf_nom = sc.first_lpf
    dlpf = dlpf_nom
    for _ in range(sc.max_increments):
        if lpf >= sc.lpf_max - 1e-12:
            break
        dlpf = min(dlpf, sc.lpf_max - lpf)
        target = lpf + dlpf
        scale.update(system, cfg, target)
        for attempt in range(sc.max_bisections + 1):
            try:
                new_cfg, n_c, _ = _iterate(system, cfg, target, sc, scale)
                break
            except (NonConvergenceError, *RECOVERABLE) as exc:
                if attempt == sc.max_bisections:
                    path.converged = False
                    path.message = f"increment to LPF={target} failed: {exc}"
                    return path
                dlpf *= 0.5
                target = lpf + dlpf
        cfg = system.commit(new_cfg)
        lpf = target
        rec = _record(system, cfg, lpf, n_c, sc)
        path.records.append(rec)
        if sc.stop and sc.stop(rec):
            break
        if sc.fixed_increments:
            dlpf = dlpf_nom
        else:
            dlpf = min(dlpf * sc.n_d / max(n_c, 1), dlpf * sc.max_growth)
    return path


def _lpf_gradient(system, cfg, lpf):
    """d residual / d LPF (loads and constraint targets are linear in LPF)."""
    r1 = system.tangent_system(cfg, lpf + 1.0, want_tangent=False).residual
    r0 = system.tangent_system(cfg, lpf, want_tangent=False).residual
    return r1 - r0


def arclength_run(system, sc: SolverConfig) -> EquilibriumPath:
    """Cylindrical (translation-DOF) arc-length continuation, Crisfield roots."""
    path = EquilibriumPath()
    cfg = system.commit(system.initial_configuration())
    lpf = 0.0
    scale = _ForceScale()

    mask = np.zeros(system.dof_map.n_unknowns)
    nd = system.disc.nd
    trans = np.array([d % nd < 3 for d in range(system.dof_map.nfull)])
    # reduced translation weights: columns of T restricted to translation rows
    mask[: system.dof_map.nred] = np.sqrt((system.dof_map.T[trans] ** 2).sum(axis=0))

    def mnorm2(v):
        return float(((mask * v) ** 2).sum())

    # first increment under load control
    target = min(sc.first_lpf, sc.lpf_max)
    scale.update(system, cfg, target)
    new_cfg, n_c, dq_prev = _iterate(system, cfg, target, sc, scale)
    cfg = system.commit(new_cfg)
    lpf = target
    dlpf_prev = lpf
    path.records.append(_record(system, cfg, lpf, n_c, sc))
    dl = np.sqrt(mnorm2(dq_prev)) or sc.first_lpf

    for _ in range(sc.max_increments):
        if abs(lpf) >= sc.lpf_max or (sc.stop and path.records and sc.stop(path.records[-1])):
            break
        done = False
        for attempt in range(sc.max_bisections + 1):
            try:
                new_cfg, new_lpf, n_c, dq_new = _arc_increment(
                    system, cfg, lpf, dl, dq_prev, dlpf_prev, mask, sc, scale)
                done = True
                break
            except (NonConvergenceError, *RECOVERABLE):
                dl *= 0.5
        if not done:
            path.converged = False
            path.message = f"arc-length increment failed after {sc.max_bisections} cuts"
            return path
        dq_prev = dq_new
        dlpf_prev = new_lpf - lpf
        cfg = system.commit(new_cfg)
        lpf = new_lpf
        rec = _record(system, cfg, lpf, n_c, sc)
        path.records.append(rec)
        if sc.stop and sc.stop(rec):
            break
        dl *= min(np.sqrt(sc.n_d / max(n_c, 1)), sc.max_growth)
    return path


def _arc_increment(system, cfg0, lpf0, dl, dq_prev, dlpf_prev, mask, sc, scale):
    def mdot(a, b):
        return float((mask * a) @ (mask * b))

    ts = system.tangent_system(cfg0, lpf0)
    qhat = _lpf_gradient(system, cfg0, lpf0)
    dq_t = np.linalg.solve(ts.K, qhat)
    denom = np.sqrt(mdot(dq_t, dq_t))
    if denom == 0.0:
        raise NonConvergenceError("zero load direction")
    dlam = dl / denom
    direction = mdot(dq_t, dq_prev)
    if direction < 0.0 or (direction == 0.0 and dlpf_prev < 0.0):
        dlam = -dlam
    dq = dlam * dq_t
    cfg = system.apply_increment(cfg0, dq)
    lam = dlam

    n_c = 1
    while True:
        lpf = lpf0 + lam
        scale.update(system, cfg, lpf)
        ts = system.tangent_system(cfg, lpf)
        den = scale.denom(system, cfg)
        fnorm = np.linalg.norm(ts.residual) / den if den > 0 else np.linalg.norm(ts.residual)
        dnorm = np.linalg.norm(dq) if n_c == 1 else np.linalg.norm(dx_last)
        dden = np.linalg.norm(dq)
        disp = dnorm / dden if dden > 0 else dnorm
        if n_c > 1 and fnorm < sc.tol and disp < sc.tol:
            return cfg, lpf, n_c, dq
        if n_c >= sc.max_iter:
            raise NonConvergenceError("arc-length correctors did not converge")
        dq_r = np.linalg.solve(ts.K, ts.residual)
        qhat = _lpf_gradient(system, cfg, lpf)
        dq_t = np.linalg.solve(ts.K, qhat)
        a1 = mdot(dq_t, dq_t)
        a2 = 2.0 * mdot(dq + dq_r, dq_t)
        a3 = mdot(dq + dq_r, dq + dq_r) - dl * dl
        if a1 == 0.0:
            dl2 = -a3 / a2
            roots = [dl2]
        else:
            disc = a2 * a2 - 4.0 * a1 * a3
            if disc < 0.0:
                raise NonConvergenceError("complex arc-length roots")
            sq = np.sqrt(disc)
            roots = [(-a2 + sq) / (2 * a1), (-a2 - sq) / (2 * a1)]
        best, best_cos = None, -np.inf
        for r in roots:
            cand = dq + dq_r + r * dq_t
            cc = mdot(cand, dq_prev)
            nn = np.sqrt(mdot(cand, cand))
            cosv = cc / nn if nn > 0 else -np.inf
            if len(roots) == 1 or cosv > best_cos:
                best, best_cos = r, cosv
        dx_last = dq_r + best * dq_t
        dq = dq + dx_last
        lam += best
        cfg = system.apply_increment(cfg, dx_last)
        n_c += 1
