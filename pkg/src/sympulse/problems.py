"""Benchmark problem registry."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cotangent_lift import HamiltonianSystem, LagrangianSystem
from .errors import ProblemNotFound
from .geometry_core import PhasePoint
from .symmetry import (
    AlgebraElement,
    LinearGroupAction,
    hamiltonian_invariance_check,
    rotation_action,
    so2_generator,
)

REGISTRATION_TOL = 1e-8


@dataclass(frozen=True)
class Problem:
    """Hamiltonian benchmark with optional Lagrangian and symmetry.

    ``sample_state`` draws states from a region where the default step sizes
    behave (e.g. away from the Kepler singularity). ``exact`` is the flow
    ``(initial, t) -> state`` when known in closed form.
    """

    name: str
    n: int
    hamiltonian: HamiltonianSystem
    initial: PhasePoint
    sample_state: Callable[[np.random.Generator], PhasePoint]
    lagrangian: LagrangianSystem | None = None
    symmetry: tuple[LinearGroupAction, AlgebraElement] | None = None
    exact: Callable[[PhasePoint, float], PhasePoint] | None = None

    @property
    def has_analytic_solution(self) -> bool:
        return self.exact is not None


def _separable(name, n, potential, dpotential, d2potential):
    """H = |p|^2/2 + V(q) and L = |v|^2/2 - V(q), analytic derivatives."""

    def energy(q, p):
        return 0.5 * float(p @ p) + potential(q)

    def grad(q, p):
        return dpotential(q), p.copy()

    def hessian(q, p):
        z = np.zeros((n, n))
        return np.block([[d2potential(q), z], [z, np.eye(n)]])

    H = HamiltonianSystem(n, energy, grad, hessian, name=name)
    L = LagrangianSystem(
        n,
        lambda x, v: 0.5 * float(v @ v) - potential(x),
        lambda x, v: (-dpotential(x), v.copy()),
        lambda x, v: np.eye(n),
        name=name,
    )
    return H, L


def oscillator() -> Problem:
    H, L = _separable(
        "oscillator", 1,
        lambda q: 0.5 * float(q @ q),
        lambda q: q.copy(),
        lambda q: np.eye(1),
    )

    def exact(z0: PhasePoint, t: float) -> PhasePoint:
        c, s = np.cos(t), np.sin(t)
        return PhasePoint(c * z0.q + s * z0.p, -s * z0.q + c * z0.p)

    return Problem(
        "oscillator", 1, H, PhasePoint([1.0], [0.0]),
        lambda rng: PhasePoint(rng.uniform(-2, 2, 1), rng.uniform(-2, 2, 1)),
        lagrangian=L, exact=exact,
    )


def _kepler_potential(q):
    return -1.0 / float(np.linalg.norm(q))


def _kepler_force(q):
    r = float(np.linalg.norm(q))
    return q / r**3


def _kepler_hess(q):
    r = float(np.linalg.norm(q))
    return np.eye(2) / r**3 - 3.0 * np.outer(q, q) / r**5


def _kepler_sample(rng: np.random.Generator) -> PhasePoint:
    r = rng.uniform(0.7, 1.5)
    phi = rng.uniform(0, 2 * np.pi)
    q = r * np.array([np.cos(phi), np.sin(phi)])
    # speeds below escape velocity sqrt(2/r)
    speed = rng.uniform(0.5, 0.9) * np.sqrt(2.0 / r)
    psi = rng.uniform(0, 2 * np.pi)
    return PhasePoint(q, speed * np.array([np.cos(psi), np.sin(psi)]))


def kepler2d() -> Problem:
    H, L = _separable("kepler2d", 2, _kepler_potential, _kepler_force, _kepler_hess)
    # eccentricity 0.5 orbit started at pericentre
    e = 0.5
    initial = PhasePoint([1.0 - e, 0.0], [0.0, np.sqrt((1.0 + e) / (1.0 - e))])
    return Problem(
        "kepler2d", 2, H, initial, _kepler_sample,
        lagrangian=L, symmetry=(rotation_action(2), so2_generator()),
    )


def pendulum() -> Problem:
    H, L = _separable(
        "pendulum", 1,
        lambda q: -float(np.cos(q[0])),
        lambda q: np.sin(q),
        lambda q: np.diag(np.cos(q)),
    )
    return Problem(
        "pendulum", 1, H, PhasePoint([1.0], [0.0]),
        lambda rng: PhasePoint(rng.uniform(-3, 3, 1), rng.uniform(-2, 2, 1)),
        lagrangian=L,
    )


def double_well() -> Problem:
    H, L = _separable(
        "double_well", 1,
        lambda q: 0.25 * float((q[0] ** 2 - 1.0) ** 2),
        lambda q: q * (q**2 - 1.0),
        lambda q: np.diag(3.0 * q**2 - 1.0),
    )
    return Problem(
        "double_well", 1, H, PhasePoint([0.5], [0.5]),
        lambda rng: PhasePoint(rng.uniform(-1.5, 1.5, 1), rng.uniform(-1, 1, 1)),
        lagrangian=L,
    )


_FACTORIES = {
    "oscillator": oscillator,
    "kepler2d": kepler2d,
    "pendulum": pendulum,
    "double_well": double_well,
}


def _validated(problem: Problem) -> Problem:
    if problem.symmetry is not None:
        _, m = problem.symmetry
        report = hamiltonian_invariance_check(
            problem.hamiltonian, m, samples=50, tol=REGISTRATION_TOL, rng=0,
            sampler=problem.sample_state,
        )
        if not report.passed:
            raise ValueError(
                f"{problem.name}: declared symmetry is not a symmetry of H "
                f"(defect {report.max_defect:.3e})"
            )
    return problem


def registry() -> list[Problem]:
    return [_validated(f()) for f in _FACTORIES.values()]


def get_problem(name: str) -> Problem:
    try:
        factory = _FACTORIES[name]
    except KeyError:
        raise ProblemNotFound(name, list(_FACTORIES)) from None
    return _validated(factory())
