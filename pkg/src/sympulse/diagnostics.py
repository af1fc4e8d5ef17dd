"""Numerical instruments: symplectic defect, drifts and convergence order."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .geometry_core import PhasePoint, canonical_symplectic_matrix
from .integrator import DEFAULT_NEWTON, Method, NewtonConfig, integrate

PROBE_NEWTON = NewtonConfig(tol=1e-13)


def flow_jacobian_fd(step_fn: Callable[[PhasePoint], PhasePoint], z: PhasePoint,
                     eps: float | None = None) -> np.ndarray:
    """Central-difference Jacobian of a phase-space map at ``z``.

    The default step is ``1e-6 * max(1, ||z||_inf)``.
    """
    x0 = z.as_array()
    if eps is None:
        eps = 1e-6 * max(1.0, float(np.max(np.abs(x0))))
    dim = x0.size
    jac = np.empty((dim, dim))
    for i in range(dim):
        xp = x0.copy()
        xm = x0.copy()
        xp[i] += eps
        xm[i] -= eps
        fp = step_fn(PhasePoint.from_array(xp)).as_array()
        fm = step_fn(PhasePoint.from_array(xm)).as_array()
        jac[:, i] = (fp - fm) / (2 * eps)
    return jac


def symplectic_defect(jac) -> float:
    """``||jac^T Omega jac - Omega||_inf`` (max-abs entry)."""
    jac = np.asarray(jac, dtype=float)
    if jac.ndim != 2 or jac.shape[0] != jac.shape[1] or jac.shape[0] % 2:
        raise ValueError(f"expected a square matrix of even size, got {jac.shape}")
    omega = canonical_symplectic_matrix(jac.shape[0] // 2)
    return float(np.max(np.abs(jac.T @ omega @ jac - omega)))


def energy_drift(traj, H) -> tuple[float, np.ndarray]:
    """Series ``H(z_k) - H(z_0)`` and its largest magnitude."""
    states = traj.states if hasattr(traj, "states") else traj
    if len(states) == 0:
        raise ValueError("empty trajectory")
    values = np.array([H(s) for s in states])
    series = values - values[0]
    return float(np.max(np.abs(series))), series


@dataclass(frozen=True)
class OrderEstimate:
    step_sizes: tuple[float, ...]
    errors: tuple[float, ...]
    slope: float
    r_squared: float


def fit_order(step_sizes: Sequence[float], errors: Sequence[float]) -> OrderEstimate:
    """Least-squares slope of ``log(error)`` against ``log(h)``."""
    hs = np.asarray(step_sizes, dtype=float)
    es = np.asarray(errors, dtype=float)
    if hs.size < 3 or hs.size != es.size:
        raise ValueError("need at least three (h, error) pairs")
    if np.any(np.diff(hs) >= 0):
        raise ValueError("step sizes must be strictly decreasing")
    lx, ly = np.log(hs), np.log(es)
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return OrderEstimate(tuple(hs), tuple(es), float(slope), float(r2))


def _n_steps(t_final: float, h: float) -> int:
    k = round(t_final / h)
    if k < 1 or abs(k * h - t_final) > 1e-9 * max(1.0, t_final):
        raise ValueError(f"step size {h} does not divide t_final={t_final}")
    return k


def convergence_order(problem, method: Method, h_list: Sequence[float], t_final: float,
                      reference: Callable[[float], PhasePoint] | None = None,
                      initial: PhasePoint | None = None,
                      config: NewtonConfig = DEFAULT_NEWTON) -> OrderEstimate:
    """Empirical order from the final-time error at each step size.

    Args:
        problem: Object with ``hamiltonian`` and ``initial`` (see
            :mod:`sympulse.problems`); ``problem.exact`` is used as the
            reference when available and ``reference`` is not given.
        method: Stepping method.
        h_list: At least three step sizes, each dividing ``t_final``.
        t_final: Final time.
        reference: Exact solution ``t -> PhasePoint``. When neither this nor
            an analytic solution exists, a run at ``min(h_list) / 32`` is used.

    Raises:
        StepFailure: if any run fails; ``step_index`` locates it.
    """
    hs = sorted((float(h) for h in h_list), reverse=True)
    if len(hs) < 3:
        raise ValueError("need at least three step sizes")
    start = problem.initial if initial is None else initial
    H = problem.hamiltonian
    if reference is None and getattr(problem, "exact", None) is not None:
        def reference(t):
            return problem.exact(start, t)
    if reference is not None:
        target = reference(t_final).as_array()
    else:
        h_ref = hs[-1] / 32
        ref = integrate(method, H, h_ref, _n_steps(t_final, h_ref), start, config=config)
        if ref.error is not None:
            raise ref.error
        target = ref.states[-1].as_array()
    errors = []
    for h in hs:
        traj = integrate(method, H, h, _n_steps(t_final, h), start, config=config)
        if traj.error is not None:
            raise traj.error
        errors.append(float(np.max(np.abs(traj.states[-1].as_array() - target))))
    return fit_order(hs, errors)
