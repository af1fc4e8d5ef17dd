"""Exception types shared across the package."""

from __future__ import annotations

import numpy as np


class SympulseError(Exception):
    """Base class for all package errors."""


class SingularJacobianError(SympulseError):
    """A Jacobian that must be inverted is numerically singular.

    For a discretization map this usually means the evaluation point has
    left the neighbourhood of the zero section on which the map is a local
    diffeomorphism.
    """


class NewtonError(SympulseError):
    """Base class for failures of the implicit step solver."""


class MaxIterExceeded(NewtonError):
    """Newton iteration did not reach the residual tolerance.

    Attributes:
        best: Iterate with the smallest residual norm seen.
        residual_norm: Infinity norm of the residual at ``best``.
        iterations: Number of iterations performed.
    """

    def __init__(self, best: np.ndarray, residual_norm: float, iterations: int):
        self.best = np.array(best, dtype=float)
        self.residual_norm = float(residual_norm)
        self.iterations = int(iterations)
        super().__init__(
            f"Newton failed after {iterations} iterations "
            f"(best residual {residual_norm:.3e})"
        )


class SingularJacobian(NewtonError, SingularJacobianError):
    """Newton residual Jacobian (or a Jacobian inside the residual) is singular."""


class StepFailure(SympulseError):
    """An integration step failed.

    Attributes:
        step_index: Index of the failing step within the trajectory (or None).
        substep: Index of the failing composition stage (or None).
        cause: The underlying solver exception.
    """

    def __init__(self, cause: Exception, step_index: int | None = None,
                 substep: int | None = None):
        self.cause = cause
        self.step_index = step_index
        self.substep = substep
        super().__init__(cause)

    def __str__(self) -> str:
        where = []
        if self.step_index is not None:
            where.append(f"step {self.step_index}")
        if self.substep is not None:
            where.append(f"substep {self.substep}")
        loc = ", ".join(where) if where else "step"
        return f"{loc} failed: {self.cause}"


class ProblemNotFound(SympulseError, KeyError):
    """Lookup of an unknown benchmark problem or map name."""

    def __init__(self, name: str, known: list[str]):
        self.name = name
        self.known = list(known)
        super().__init__(f"unknown name {name!r}; known: {', '.join(self.known)}")

    def __str__(self) -> str:
        return self.args[0]
