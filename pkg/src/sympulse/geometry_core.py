"""Chart-level bundle coordinates over Q = R^n.

Points of the iterated bundles TQ, T*Q, T*TQ, T*T*Q and T*(Q x Q) are
represented by small frozen dataclasses of equal-length float vectors. The
module also provides the canonical antisymplectomorphism between T*T*Q and
T*TQ, the tangent and cotangent complete lifts of a vector field, and the
pairing identity that links them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, fields
from typing import Callable

import numpy as np


def _as_vector(value, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


class _Bundle:
    """Mixin that coerces all fields to 1-D float arrays of equal length."""

    def __post_init__(self):
        size = None
        for f in fields(self):
            arr = _as_vector(getattr(self, f.name), f.name)
            object.__setattr__(self, f.name, arr)
            if size is None:
                size = arr.size
            elif arr.size != size:
                raise ValueError(
                    f"dimension mismatch in {type(self).__name__}: "
                    f"{f.name} has length {arr.size}, expected {size}"
                )
        if size == 0:
            raise ValueError(f"{type(self).__name__} needs n >= 1")

    @property
    def n(self) -> int:
        return getattr(self, fields(self)[0].name).size

    def as_array(self) -> np.ndarray:
        return np.concatenate([getattr(self, f.name) for f in fields(self)])

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f.name), getattr(other, f.name))
            for f in fields(self)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class PhasePoint(_Bundle):
    """Point (q, p) of T*Q."""

    q: np.ndarray
    p: np.ndarray

    @classmethod
    def from_array(cls, z) -> "PhasePoint":
        z = np.asarray(z, dtype=float)
        n = z.size // 2
        return cls(z[:n], z[n:])


@dataclass(frozen=True, eq=False)
class TangentPoint(_Bundle):
    """Point (x, v) of TQ."""

    x: np.ndarray
    v: np.ndarray


@dataclass(frozen=True, eq=False)
class CotangentOfTangent(_Bundle):
    """Point (x, v, p_x, p_v) of T*TQ."""

    x: np.ndarray
    v: np.ndarray
    p_x: np.ndarray
    p_v: np.ndarray

    @property
    def base(self) -> TangentPoint:
        return TangentPoint(self.x, self.v)


@dataclass(frozen=True, eq=False)
class CotangentOfCotangent(_Bundle):
    """Point (q, p, mu_q, mu_p) of T*T*Q."""

    q: np.ndarray
    p: np.ndarray
    mu_q: np.ndarray
    mu_p: np.ndarray

    @property
    def base(self) -> PhasePoint:
        return PhasePoint(self.q, self.p)


@dataclass(frozen=True, eq=False)
class ProductCovector(_Bundle):
    """Point of T*(Q x Q): covector ``mu_a`` at ``q_a`` and ``mu_b`` at ``q_b``."""

    q_a: np.ndarray
    mu_a: np.ndarray
    q_b: np.ndarray
    mu_b: np.ndarray


def fd_jacobian(fn: Callable[[np.ndarray], np.ndarray], x: np.ndarray,
                rel_step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of ``fn`` at ``x``.

    The step for coordinate i is ``rel_step * max(1, |x_i|)``.
    """
    x = np.asarray(x, dtype=float)
    f0 = np.atleast_1d(np.asarray(fn(x), dtype=float))
    jac = np.empty((f0.size, x.size))
    for i in range(x.size):
        eps = rel_step * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += eps
        xm[i] -= eps
        jac[:, i] = (np.asarray(fn(xp), dtype=float) - np.asarray(fn(xm), dtype=float)) / (2 * eps)
    return jac


@dataclass(frozen=True)
class VectorField:
    """Vector field X on R^n with optional analytic Jacobian.

    Args:
        n: Dimension of the configuration space.
        fn: Map q -> X(q).
        jacobian_fn: Map q -> DX(q) (n x n). Central differences are used
            when omitted.
    """

    n: int
    fn: Callable[[np.ndarray], np.ndarray]
    jacobian_fn: Callable[[np.ndarray], np.ndarray] | None = None

    def __call__(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        self._check(q)
        return np.asarray(self.fn(q), dtype=float).reshape(self.n)

    def jacobian(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        self._check(q)
        if self.jacobian_fn is not None:
            return np.asarray(self.jacobian_fn(q), dtype=float).reshape(self.n, self.n)
        return fd_jacobian(self.__call__, q)

    def _check(self, q: np.ndarray) -> None:
        if q.shape != (self.n,):
            raise ValueError(f"dimension mismatch: expected ({self.n},), got {q.shape}")

    @classmethod
    def linear(cls, a) -> "VectorField":
        a = np.atleast_2d(np.asarray(a, dtype=float))
        return cls(a.shape[0], lambda q: a @ q, lambda q: a)

    @classmethod
    def constant(cls, c) -> "VectorField":
        c = _as_vector(c, "c")
        n = c.size
        return cls(n, lambda q: c.copy(), lambda q: np.zeros((n, n)))


def random_polynomial_field(n: int, rng: np.random.Generator, degree: int = 3,
                            scale: float = 1.0) -> VectorField:
    """Random polynomial vector field with analytic Jacobian.

    Each component is a dense polynomial of total degree <= ``degree`` with
    standard normal coefficients times ``scale``.
    """
    exps = [
        e for e in itertools.product(range(degree + 1), repeat=n)
        if sum(e) <= degree
    ]
    exps = np.array(exps, dtype=int)
    coef = scale * rng.standard_normal((n, len(exps)))

    def monomials(q):
        return np.prod(q[None, :] ** exps, axis=1)

    def fn(q):
        return coef @ monomials(q)

    def jac(q):
        out = np.empty((n, n))
        for j in range(n):
            dexp = exps.copy()
            factor = dexp[:, j].astype(float)
            dexp[:, j] = np.maximum(dexp[:, j] - 1, 0)
            dmono = factor * np.prod(q[None, :] ** dexp, axis=1)
            out[:, j] = coef @ dmono
        return out

    return VectorField(n, fn, jac)


def iota_TQ(w: CotangentOfCotangent) -> CotangentOfTangent:
    """Canonical antisymplectomorphism T*T*Q -> T*TQ.

    ``(q, p, mu_q, mu_p) -> (q, mu_p, -mu_q, p)``.
    """
    return CotangentOfTangent(w.q, w.mu_p, -w.mu_q, w.p)


def iota_TQ_inverse(z: CotangentOfTangent) -> CotangentOfCotangent:
    """Inverse of :func:`iota_TQ`: ``(x, v, p_x, p_v) -> (x, p_v, -p_x, v)``."""
    return CotangentOfCotangent(z.x, z.p_v, -z.p_x, z.v)


def complete_lift_TQ(field: VectorField, pt: TangentPoint) -> tuple[np.ndarray, np.ndarray]:
    """Tangent lift X^C(x, v) = (X(x), DX(x) v)."""
    if pt.n != field.n:
        raise ValueError(f"dimension mismatch: field n={field.n}, point n={pt.n}")
    return field(pt.x), field.jacobian(pt.x) @ pt.v


def complete_lift_TstarQ(field: VectorField, pt: PhasePoint) -> tuple[np.ndarray, np.ndarray]:
    """Cotangent lift X^{C*}(q, p) = (X(q), -DX(q)^T p).

    This is the Hamiltonian vector field of the momentum function
    ``(q, p) -> <p, X(q)>``.
    """
    if pt.n != field.n:
        raise ValueError(f"dimension mismatch: field n={field.n}, point n={pt.n}")
    return field(pt.q), -field.jacobian(pt.q).T @ pt.p


def pairing_sides(field: VectorField, w: CotangentOfCotangent) -> tuple[float, float]:
    """Both sides of the pairing identity between the two complete lifts.

    Returns ``(lhs, rhs)`` with ``lhs = <iota(w), X^C(base of iota(w))>`` and
    ``rhs = -<w, X^{C*}(base of w)>``. Each side uses only its own lift.
    """
    z = iota_TQ(w)
    lift_t = complete_lift_TQ(field, z.base)
    lhs = float(z.p_x @ lift_t[0] + z.p_v @ lift_t[1])
    lift_c = complete_lift_TstarQ(field, w.base)
    rhs = -float(w.mu_q @ lift_c[0] + w.mu_p @ lift_c[1])
    return lhs, rhs


def verify_pairing_identity(field: VectorField, w: CotangentOfCotangent) -> float:
    """Absolute residual ``|lhs - rhs|`` of :func:`pairing_sides`."""
    lhs, rhs = pairing_sides(field, w)
    return abs(lhs - rhs)


def canonical_symplectic_matrix(n: int) -> np.ndarray:
    """Matrix [[0, I], [-I, 0]] of the canonical form on T*R^n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])
