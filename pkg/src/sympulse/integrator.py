"""Newton solution of the implicit step equations, trajectories and composition."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .cotangent_lift import HamiltonianSystem, StepScheme, build_hamiltonian_step
from .discretization import DiscretizationMap, adjoint_map
from .errors import MaxIterExceeded, SingularJacobian, SingularJacobianError, StepFailure
from .geometry_core import PhasePoint


@dataclass(frozen=True)
class NewtonConfig:
    """Settings for :func:`newton_solve`.

    ``damping`` is the maximum number of step halvings in the backtracking
    line search (0 disables it).
    """

    tol: float = 1e-12
    max_iter: int = 50
    fd_eps: float = 1e-7
    damping: int = 8

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")

    def with_tol(self, tol: float) -> "NewtonConfig":
        return replace(self, tol=tol)


DEFAULT_NEWTON = NewtonConfig()


@dataclass(frozen=True)
class NewtonResult:
    z: np.ndarray
    iterations: int
    residual_norm: float


def _residual_jacobian(scheme: StepScheme, z: np.ndarray, r0: np.ndarray,
                       eps: float) -> np.ndarray:
    if scheme.jacobian is not None:
        return scheme.jacobian(z)
    jac = np.empty((r0.size, z.size))
    for i in range(z.size):
        step = eps * max(1.0, abs(z[i]))
        zp = z.copy()
        zm = z.copy()
        zp[i] += step
        zm[i] -= step
        jac[:, i] = (scheme.residual(zp) - scheme.residual(zm)) / (2 * step)
    return jac


def _safe_residual(scheme: StepScheme, z: np.ndarray):
    try:
        r = scheme.residual(z)
    except (SingularJacobianError, ValueError, FloatingPointError):
        return None
    if not np.all(np.isfinite(r)):
        return None
    return r


def newton_solve(scheme: StepScheme, guess=None,
                 config: NewtonConfig = DEFAULT_NEWTON) -> NewtonResult:
    """Solve ``scheme.residual(z) = 0`` by damped Newton iteration.

    Raises:
        MaxIterExceeded: Tolerance not reached; carries the best iterate.
        SingularJacobian: The residual Jacobian (or a map Jacobian inside the
            residual) could not be factorised.
    """
    z = np.array(scheme.seed if guess is None else guess, dtype=float)
    try:
        r = scheme.residual(z)
    except SingularJacobianError as exc:
        raise SingularJacobian(str(exc)) from exc
    norm = float(np.max(np.abs(r))) if np.all(np.isfinite(r)) else np.inf
    best, best_norm = z.copy(), norm
    it = 0
    while norm > config.tol:
        if it >= config.max_iter or not np.isfinite(norm):
            raise MaxIterExceeded(best, best_norm, it)
        it += 1
        try:
            jac = _residual_jacobian(scheme, z, r, config.fd_eps)
        except SingularJacobianError as exc:
            raise SingularJacobian(str(exc)) from exc
        if not np.all(np.isfinite(jac)):
            raise MaxIterExceeded(best, best_norm, it)
        try:
            dz = np.linalg.solve(jac, r)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian("residual Jacobian is singular") from exc
        lam = 1.0
        for _ in range(config.damping + 1):
            trial = z - lam * dz
            r_trial = _safe_residual(scheme, trial)
            if r_trial is not None:
                n_trial = float(np.max(np.abs(r_trial)))
                if n_trial < norm or config.damping == 0:
                    break
            lam *= 0.5
        if r_trial is None:
            raise MaxIterExceeded(best, best_norm, it)
        z, r, norm = trial, r_trial, n_trial
        if norm < best_norm:
            best, best_norm = z.copy(), norm
    return NewtonResult(z, it, norm)


def solve_step(R: DiscretizationMap, H: HamiltonianSystem, h: float, state: PhasePoint,
               config: NewtonConfig = DEFAULT_NEWTON) -> tuple[PhasePoint, int]:
    """One step of the integrator together with its Newton iteration count."""
    scheme = build_hamiltonian_step(R, H, h, state)
    result = newton_solve(scheme, config=config)
    return scheme.readout(result.z), result.iterations


def step(R: DiscretizationMap, H: HamiltonianSystem, h: float, state: PhasePoint,
         config: NewtonConfig = DEFAULT_NEWTON) -> PhasePoint:
    """Advance ``state`` by one step of size ``h`` (negative ``h`` allowed)."""
    return solve_step(R, H, h, state, config)[0]


def adjoint_step(R: DiscretizationMap, H: HamiltonianSystem, h: float, state: PhasePoint,
                 config: NewtonConfig = DEFAULT_NEWTON) -> PhasePoint:
    """Step built from the adjoint discretization map of ``R``."""
    return step(adjoint_map(R), H, h, state, config)


@dataclass(frozen=True)
class CompositionScheme:
    """Substep fractions ``gammas`` summing to one.

    ``adjoint`` optionally flags stages that use the adjoint map.
    """

    gammas: tuple[float, ...]
    declared_order: int = 1
    adjoint: tuple[bool, ...] | None = None

    def __post_init__(self):
        gammas = tuple(float(g) for g in self.gammas)
        object.__setattr__(self, "gammas", gammas)
        if not gammas:
            raise ValueError("composition needs at least one stage")
        if abs(sum(gammas) - 1.0) > 1e-14:
            raise ValueError(f"gammas must sum to 1, got {sum(gammas)!r}")
        if self.adjoint is not None:
            flags = tuple(bool(a) for a in self.adjoint)
            if len(flags) != len(gammas):
                raise ValueError("adjoint flags must match the number of stages")
            object.__setattr__(self, "adjoint", flags)

    @property
    def stages(self) -> int:
        return len(self.gammas)


def triple_jump(p: int) -> CompositionScheme:
    """Symmetric three-stage composition for a base method of order ``p``.

    ``gamma_1 = gamma_3 = 1 / (2 - 2^(1/(p+1)))`` and ``gamma_2 = 1 - 2 gamma_1``.
    The gammas always sum to one. Their ``p+1``-th powers sum to zero only
    for even ``p``; then a symmetric order-``p`` base method becomes order
    ``p + 2``. For odd ``p`` no order gain is declared.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    g1 = 1.0 / (2.0 - 2.0 ** (1.0 / (p + 1)))
    g2 = 1.0 - 2.0 * g1
    order = p + 2 if p % 2 == 0 else p
    return CompositionScheme((g1, g2, g1), declared_order=order)


def solve_composed_step(R: DiscretizationMap, H: HamiltonianSystem, h: float,
                        scheme: CompositionScheme, state: PhasePoint,
                        config: NewtonConfig = DEFAULT_NEWTON) -> tuple[PhasePoint, int]:
    flags = scheme.adjoint or (False,) * scheme.stages
    R_adj = adjoint_map(R) if any(flags) else None
    iters = 0
    for i, (gamma, adj) in enumerate(zip(scheme.gammas, flags)):
        try:
            state, k = solve_step(R_adj if adj else R, H, gamma * h, state, config)
        except (MaxIterExceeded, SingularJacobian) as exc:
            raise StepFailure(exc, substep=i) from exc
        iters += k
    return state, iters


def composed_step(R: DiscretizationMap, H: HamiltonianSystem, h: float,
                  scheme: CompositionScheme, state: PhasePoint,
                  config: NewtonConfig = DEFAULT_NEWTON) -> PhasePoint:
    """Apply the stages ``gamma_i h`` in order."""
    return solve_composed_step(R, H, h, scheme, state, config)[0]


@dataclass(frozen=True)
class Method:
    """A discretization map plus optional composition, ready to step."""

    R: DiscretizationMap
    scheme: CompositionScheme | None = None

    @property
    def name(self) -> str:
        if self.scheme is None:
            return self.R.name
        gam = ",".join(f"{g:.6g}" for g in self.scheme.gammas)
        return f"{self.R.name}[{gam}]"

    def solve(self, H, h, state, config=DEFAULT_NEWTON) -> tuple[PhasePoint, int]:
        if self.scheme is None:
            try:
                return solve_step(self.R, H, h, state, config)
            except (MaxIterExceeded, SingularJacobian) as exc:
                raise StepFailure(exc) from exc
        return solve_composed_step(self.R, H, h, self.scheme, state, config)

    def step(self, H, h, state, config=DEFAULT_NEWTON) -> PhasePoint:
        return self.solve(H, h, state, config)[0]


@dataclass
class Trajectory:
    """Sampled states with solver statistics.

    ``error`` is set when integration stopped early; the stored states are
    the ones computed before the failure.
    """

    times: list[float] = field(default_factory=list)
    states: list[PhasePoint] = field(default_factory=list)
    newton_iters: list[int] = field(default_factory=list)
    energy_err: np.ndarray | None = None
    momentum_err: np.ndarray | None = None
    error: StepFailure | None = None

    def __len__(self):
        return len(self.states)

    @property
    def completed(self) -> bool:
        return self.error is None

    def as_array(self) -> np.ndarray:
        return np.array([s.as_array() for s in self.states])


def integrate(R: DiscretizationMap | Method, H: HamiltonianSystem, h: float, steps: int,
              initial: PhasePoint, scheme: CompositionScheme | None = None,
              config: NewtonConfig = DEFAULT_NEWTON) -> Trajectory:
    """Integrate ``steps`` steps of size ``h`` from ``initial``.

    On a failed step the partial trajectory is returned with ``error`` set.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    method = R if isinstance(R, Method) else Method(R, scheme)
    traj = Trajectory([0.0], [initial], [0])
    state = initial
    for k in range(steps):
        try:
            state, iters = method.solve(H, h, state, config)
        except StepFailure as exc:
            exc.step_index = k
            traj.error = exc
            break
        traj.times.append((k + 1) * h)
        traj.states.append(state)
        traj.newton_iters.append(iters)
    return traj
