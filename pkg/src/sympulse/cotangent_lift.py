"""Cotangent lift of a discretization map and the implicit step equations.

The lift ``T*R_d`` sends a covector ``(p_x, p_v)`` at ``(x, v)`` to the pair
of covectors ``(eta1, eta2)`` at ``(y1, y2) = R_d(x, v)`` defined by
``J^T (eta1; eta2) = (p_x; p_v)`` where ``J`` is the Jacobian of ``R_d``.

A discrete step from ``(q_k, p_k)`` to ``(q_{k+1}, p_{k+1})`` is accepted
when ``(q_k, -p_k; q_{k+1}, p_{k+1})`` lies in the image under
``T*R_d o iota_TQ`` of the scaled differential ``h dH``. The image is
parametrised by the phase point ``(q, p)`` at which ``dH`` is taken, which
is the unknown solved for by Newton's method.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .discretization import DiscretizationMap
from .errors import SingularJacobianError
from .geometry_core import (
    CotangentOfCotangent,
    CotangentOfTangent,
    PhasePoint,
    ProductCovector,
    TangentPoint,
    fd_jacobian,
    iota_TQ,
)

PIVOT_RTOL = 1e-12


class HamiltonianSystem:
    """Hamiltonian ``H(q, p)`` on T*R^n.

    Args:
        n: Configuration dimension.
        energy: ``(q, p) -> float``.
        grad: ``(q, p) -> (H_q, H_p)``. Central differences when omitted.
        hessian: ``(q, p) -> 2n x 2n`` Hessian ordered ``(q, p)``. Optional;
            enables the analytic Newton Jacobian for theta maps.
    """

    def __init__(self, n: int, energy: Callable, grad: Callable | None = None,
                 hessian: Callable | None = None, name: str = "H"):
        self.n = n
        self.name = name
        self._energy = energy
        self._grad = grad
        self._hessian = hessian

    def __repr__(self):
        return f"HamiltonianSystem({self.name!r}, n={self.n})"

    def eval(self, state: PhasePoint) -> float:
        return float(self._energy(state.q, state.p))

    __call__ = eval

    def grad(self, state: PhasePoint) -> tuple[np.ndarray, np.ndarray]:
        n = self.n
        if self._grad is not None:
            hq, hp = self._grad(state.q, state.p)
            return np.asarray(hq, dtype=float).reshape(n), np.asarray(hp, dtype=float).reshape(n)
        g = fd_jacobian(lambda z: np.array([self._energy(z[:n], z[n:])]),
                        state.as_array())[0]
        return g[:n], g[n:]

    @property
    def has_hessian(self) -> bool:
        return self._hessian is not None and self._grad is not None

    def hessian(self, state: PhasePoint) -> np.ndarray:
        if self._hessian is not None:
            return np.asarray(self._hessian(state.q, state.p), dtype=float)
        n = self.n
        return fd_jacobian(lambda z: np.concatenate(self.grad(PhasePoint(z[:n], z[n:]))),
                           state.as_array())

    def vector_field(self, state: PhasePoint) -> np.ndarray:
        hq, hp = self.grad(state)
        return np.concatenate([hp, -hq])


class LagrangianSystem:
    """Lagrangian ``L(x, v)`` on TR^n.

    Args:
        n: Configuration dimension.
        lagrangian: ``(x, v) -> float``.
        grad: ``(x, v) -> (L_x, L_v)``. Central differences when omitted.
        hessian_vv: ``(x, v) -> d^2L/dv^2``. Central differences when omitted.
    """

    def __init__(self, n: int, lagrangian: Callable, grad: Callable | None = None,
                 hessian_vv: Callable | None = None, name: str = "L"):
        self.n = n
        self.name = name
        self._lagrangian = lagrangian
        self._grad = grad
        self._hessian_vv = hessian_vv

    def eval(self, pt: TangentPoint) -> float:
        return float(self._lagrangian(pt.x, pt.v))

    __call__ = eval

    def grad(self, pt: TangentPoint) -> tuple[np.ndarray, np.ndarray]:
        n = self.n
        if self._grad is not None:
            lx, lv = self._grad(pt.x, pt.v)
            return np.asarray(lx, dtype=float).reshape(n), np.asarray(lv, dtype=float).reshape(n)
        g = fd_jacobian(lambda z: np.array([self._lagrangian(z[:n], z[n:])]),
                        pt.as_array())[0]
        return g[:n], g[n:]

    def hessian_vv(self, pt: TangentPoint) -> np.ndarray:
        if self._hessian_vv is not None:
            return np.atleast_2d(np.asarray(self._hessian_vv(pt.x, pt.v), dtype=float))
        return fd_jacobian(lambda v: self.grad(TangentPoint(pt.x, v))[1], pt.v)

    def legendre_velocity(self, x, p, tol: float = 1e-13, max_iter: int = 50) -> np.ndarray:
        """Velocity ``v`` with ``L_v(x, v) = p`` (Newton on the fibre derivative)."""
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        v = p.copy()
        for _ in range(max_iter):
            pt = TangentPoint(x, v)
            r = self.grad(pt)[1] - p
            if np.max(np.abs(r)) <= tol * max(1.0, np.max(np.abs(p))):
                return v
            v = v - _solve_checked(self.hessian_vv(pt), r, "d2L/dv2")
        return v


def _solve_checked(mat: np.ndarray, rhs: np.ndarray, what: str) -> np.ndarray:
    """Dense LU solve that rejects tiny pivots."""
    scale = np.linalg.norm(mat, np.inf)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(mat, check_finite=False)
    if scale == 0 or np.min(np.abs(np.diag(lu))) < PIVOT_RTOL * scale:
        raise SingularJacobianError(f"{what} is singular")
    return scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)


def lift_covector(jac: np.ndarray, p_x, p_v) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``jac^T (eta1; eta2) = (p_x; p_v)``."""
    n = jac.shape[0] // 2
    eta = _solve_checked(jac.T, np.concatenate([p_x, p_v]), "discretization map Jacobian")
    return eta[:n], eta[n:]


def cotangent_lift_point(R: DiscretizationMap, z: CotangentOfTangent) -> ProductCovector:
    """Image of ``(x, v, p_x, p_v)`` under the cotangent lift of ``R``."""
    if z.n != R.n:
        raise ValueError(f"dimension mismatch: map n={R.n}, point n={z.n}")
    y1, y2 = R.eval(z.x, z.v)
    eta1, eta2 = lift_covector(R.jacobian(z.x, z.v), z.p_x, z.p_v)
    return ProductCovector(y1, eta1, y2, eta2)


def hamiltonian_generator(H: HamiltonianSystem, h: float,
                          state: PhasePoint) -> CotangentOfTangent:
    """The point ``iota_TQ(h dH(q, p)) = (q, h H_p, -h H_q, p)`` of T*TQ."""
    hq, hp = H.grad(state)
    return iota_TQ(CotangentOfCotangent(state.q, state.p, h * hq, h * hp))


@dataclass(frozen=True)
class StepScheme:
    """Residual and readout for one implicit step.

    Attributes:
        residual: ``z -> 2n`` vector, zero at the accepted internal point.
        readout: ``z -> PhasePoint`` giving the new state.
        anchor: The state being stepped from.
        seed: Initial guess for the internal unknown.
        jacobian: Optional analytic Jacobian of ``residual``.
    """

    residual: Callable[[np.ndarray], np.ndarray]
    readout: Callable[[np.ndarray], PhasePoint]
    anchor: PhasePoint
    seed: np.ndarray
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None

    @property
    def dim(self) -> int:
        return self.seed.size


def build_hamiltonian_step(R: DiscretizationMap, H: HamiltonianSystem, h: float,
                           anchor: PhasePoint) -> StepScheme:
    """Step equations over the unknown ``(q, p)``.

    ``residual = (R1(q, h H_p) - q_k ; eta1 + p_k)`` and
    ``readout = (R2(q, h H_p), eta2)``.
    """
    if R.n != H.n or anchor.n != R.n:
        raise ValueError(f"dimension mismatch: map n={R.n}, H n={H.n}, anchor n={anchor.n}")
    n = R.n
    h = float(h)
    qk, pk = anchor.q, anchor.p

    def lifted(z):
        pt = PhasePoint(z[:n], z[n:])
        return cotangent_lift_point(R, hamiltonian_generator(H, h, pt))

    def residual(z):
        c = lifted(z)
        return np.concatenate([c.q_a - qk, c.mu_a + pk])

    def readout(z):
        c = lifted(z)
        return PhasePoint(c.q_b, c.mu_b)

    jac = None
    if R.theta is not None and H.has_hessian:
        theta = R.theta
        eye = np.eye(n)

        def jac(z):
            hess = H.hessian(PhasePoint(z[:n], z[n:]))
            hqq, hqp = hess[:n, :n], hess[:n, n:]
            hpq, hpp = hess[n:, :n], hess[n:, n:]
            return np.block([
                [eye - theta * h * hpq, -theta * h * hpp],
                [-(1.0 - theta) * h * hqq, -eye - (1.0 - theta) * h * hqp],
            ])

    return StepScheme(residual, readout, anchor, anchor.as_array().copy(), jac)


def build_lagrangian_step(R: DiscretizationMap, L: LagrangianSystem, h: float,
                          anchor: PhasePoint) -> StepScheme:
    """Step equations over the unknown ``(q, v)`` built from ``h dL``.

    The map is rescaled to ``R_h(x, u) = R(x, h u)`` and the covector
    ``(h L_x, h L_v)`` is lifted through it; with this scaling the momenta
    read out are the physical momenta and the scheme matches the
    Hamiltonian one under the Legendre transform.
    """
    if R.n != L.n or anchor.n != R.n:
        raise ValueError(f"dimension mismatch: map n={R.n}, L n={L.n}, anchor n={anchor.n}")
    n = R.n
    h = float(h)
    qk, pk = anchor.q, anchor.p
    v0 = L.legendre_velocity(qk, pk)
    hvv = L.hessian_vv(TangentPoint(qk, v0))
    if np.linalg.cond(hvv) > 1.0 / PIVOT_RTOL:
        raise SingularJacobianError("Lagrangian is not hyperregular at the anchor")

    def lifted(z):
        x, u = z[:n], z[n:]
        pt = TangentPoint(x, u)
        lx, lv = L.grad(pt)
        y1, y2 = R.eval(x, h * u)
        jac = R.jacobian(x, h * u).copy()
        jac[:, n:] *= h
        eta1, eta2 = lift_covector(jac, h * lx, h * lv)
        return y1, eta1, y2, eta2

    def residual(z):
        y1, eta1, _, _ = lifted(z)
        return np.concatenate([y1 - qk, eta1 + pk])

    def readout(z):
        _, _, y2, eta2 = lifted(z)
        return PhasePoint(y2, eta2)

    return StepScheme(residual, readout, anchor, np.concatenate([qk, v0]))
