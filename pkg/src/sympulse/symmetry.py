"""Linear group actions on R^n, their lifts and momentum maps.

A matrix M acts on configurations by ``q -> M q``. Its cotangent lift acts on
phase space by ``(q, p) -> (M q, M^{-T} p)`` and the momentum map for a Lie
algebra element ``m`` is ``J_m(q, p) = <p, m q>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry_core import PhasePoint

MAX_CONDITION = 1e8


@dataclass(frozen=True)
class AlgebraElement:
    """Element ``m`` of the Lie algebra of a matrix group."""

    m: np.ndarray

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.m, dtype=float))
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"algebra element must be square, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("algebra element has non-finite entries")
        object.__setattr__(self, "m", m)

    @property
    def n(self) -> int:
        return self.m.shape[0]


def so2_generator() -> AlgebraElement:
    """Generator of planar rotations, [[0, -1], [1, 0]]."""
    return AlgebraElement(np.array([[0.0, -1.0], [1.0, 0.0]]))


def random_rotation(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed rotation in SO(n) from the QR factorization of a Gaussian."""
    if n == 1:
        return np.eye(1)
    qmat, rmat = np.linalg.qr(rng.standard_normal((n, n)))
    qmat = qmat * np.sign(np.diag(rmat))
    if np.linalg.det(qmat) < 0:
        qmat[:, 0] = -qmat[:, 0]
    return qmat


def random_gl_near_identity(n: int, rng: np.random.Generator,
                            spread: float = 0.5) -> np.ndarray:
    """Matrix I + spread * Gaussian, resampled until well conditioned."""
    while True:
        mat = np.eye(n) + spread * rng.standard_normal((n, n))
        if np.linalg.cond(mat) < MAX_CONDITION:
            return mat


@dataclass(frozen=True)
class LinearGroupAction:
    """Left action of a matrix group on R^n by matrix multiplication.

    Args:
        n: Dimension of the configuration space.
        sampler: Draws a group element (invertible n x n matrix) from a
            random generator.
        description: Human readable label.
    """

    n: int
    sampler: Callable[[np.random.Generator], np.ndarray]
    description: str = ""

    def sample_group_element(self, rng: np.random.Generator) -> np.ndarray:
        mat = np.asarray(self.sampler(rng), dtype=float)
        if mat.shape != (self.n, self.n):
            raise ValueError(f"sampler returned shape {mat.shape}, expected {(self.n, self.n)}")
        if np.linalg.cond(mat) >= MAX_CONDITION:
            raise ValueError("sampled group element is numerically singular")
        return mat


def rotation_action(n: int) -> LinearGroupAction:
    return LinearGroupAction(n, lambda rng: random_rotation(n, rng), f"SO({n}) rotations")


def general_linear_action(n: int, mix_rotations: bool = True) -> LinearGroupAction:
    """GL(n) samples: alternately rotations and perturbations of the identity."""

    def sampler(rng):
        if mix_rotations and rng.random() < 0.5:
            return random_rotation(n, rng)
        return random_gl_near_identity(n, rng)

    return LinearGroupAction(n, sampler, f"GL({n}) near identity")


def cotangent_lift_action(M, state: PhasePoint) -> PhasePoint:
    """Cotangent-lifted action ``(q, p) -> (M q, M^{-T} p)``."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape != (state.n, state.n):
        raise ValueError(f"dimension mismatch: M {M.shape}, state n={state.n}")
    if np.linalg.cond(M) >= MAX_CONDITION:
        raise ValueError("group element is singular")
    return PhasePoint(M @ state.q, np.linalg.solve(M.T, state.p))


def infinitesimal_generator(m: AlgebraElement, q) -> np.ndarray:
    """Generator of the linear action: ``xi_Q(q) = m q``."""
    q = np.asarray(q, dtype=float)
    if q.shape != (m.n,):
        raise ValueError(f"dimension mismatch: m is {m.n}x{m.n}, q has shape {q.shape}")
    return m.m @ q


def momentum(m: AlgebraElement, state: PhasePoint) -> float:
    """Momentum map component ``J_m(q, p) = <p, m q>``."""
    return float(state.p @ infinitesimal_generator(m, state.q))


def momentum_drift(traj, m: AlgebraElement) -> tuple[float, np.ndarray]:
    """Series ``J_m(z_k) - J_m(z_0)`` along a trajectory and its max magnitude."""
    states = traj.states if hasattr(traj, "states") else traj
    if len(states) == 0:
        raise ValueError("empty trajectory")
    values = np.array([momentum(m, s) for s in states])
    series = values - values[0]
    return float(np.max(np.abs(series))), series


@dataclass(frozen=True)
class InvarianceReport:
    max_defect: float
    samples: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_defect <= self.tol


def hamiltonian_invariance_check(H, m: AlgebraElement, samples: int = 100,
                                 tol: float = 1e-8, rng=None,
                                 sampler=None) -> InvarianceReport:
    """Largest ``|<dH(q, p), (m q, -m^T p)>|`` over sampled states.

    Args:
        H: Hamiltonian with a ``grad`` method returning ``(H_q, H_p)``.
        m: Lie algebra element.
        samples: Number of sampled states.
        tol: Pass threshold.
        rng: Seed or numpy Generator.
        sampler: Optional ``rng -> PhasePoint`` used instead of Gaussian states.
    """
    rng = np.random.default_rng(rng)
    n = m.n
    worst = 0.0
    for _ in range(samples):
        if sampler is not None:
            state = sampler(rng)
        else:
            state = PhasePoint(rng.standard_normal(n), rng.standard_normal(n))
        hq, hp = H.grad(state)
        val = abs(float(hq @ (m.m @ state.q) - hp @ (m.m.T @ state.p)))
        worst = max(worst, val)
    return InvarianceReport(worst, samples, tol)
