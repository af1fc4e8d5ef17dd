"""Discretization maps R_d: TQ -> Q x Q and their defining checks.

A discretization map sends a tangent vector ``(x, v)`` to a pair of points
``(y1, y2)``. It must send the zero section to the diagonal,
``R_d(x, 0) = (x, x)``, and the fibre derivatives at ``v = 0`` must satisfy
``dR2/dv - dR1/dv = I``. The Jacobian is stored as the block matrix
``[[A, B], [C, D]]`` with ``A = dR1/dx``, ``B = dR1/dv``, ``C = dR2/dx``,
``D = dR2/dv``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry_core import fd_jacobian
from .symmetry import LinearGroupAction, random_rotation

EvalFn = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]
JacFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class DiscretizationMap:
    """Discretization map on the chart R^n.

    Args:
        n: Dimension of Q.
        name: Label used in reports and CSV metadata.
        fn: ``(x, v) -> (y1, y2)``.
        jacobian_fn: ``(x, v) -> 2n x 2n`` block Jacobian. Central
            differences are used when omitted.
        theta: Set for members of the theta family; enables analytic fast
            paths in the integrator.
        sample_base: Optional ``rng -> x`` drawing admissible base points,
            used by the axiom and symmetry checks (defaults to Gaussian).
    """

    n: int
    name: str
    fn: EvalFn
    jacobian_fn: JacFn | None = None
    theta: float | None = None
    sample_base: Callable[[np.random.Generator], np.ndarray] | None = None

    def eval(self, x, v) -> tuple[np.ndarray, np.ndarray]:
        x, v = self._coerce(x, v)
        y1, y2 = self.fn(x, v)
        return np.asarray(y1, dtype=float), np.asarray(y2, dtype=float)

    __call__ = eval

    def jacobian(self, x, v) -> np.ndarray:
        x, v = self._coerce(x, v)
        if self.jacobian_fn is not None:
            return np.asarray(self.jacobian_fn(x, v), dtype=float)
        n = self.n

        def flat(z):
            y1, y2 = self.fn(z[:n], z[n:])
            return np.concatenate([y1, y2])

        return fd_jacobian(flat, np.concatenate([x, v]))

    @property
    def has_analytic_jacobian(self) -> bool:
        return self.jacobian_fn is not None

    def draw_base(self, rng: np.random.Generator) -> np.ndarray:
        if self.sample_base is not None:
            return np.asarray(self.sample_base(rng), dtype=float)
        return rng.standard_normal(self.n)

    def _coerce(self, x, v):
        x = np.asarray(x, dtype=float).reshape(-1)
        v = np.asarray(v, dtype=float).reshape(-1)
        if x.size != self.n or v.size != self.n:
            raise ValueError(
                f"dimension mismatch: map n={self.n}, got x{x.shape} v{v.shape}"
            )
        return x, v


def theta_map(theta: float, n: int) -> DiscretizationMap:
    """Theta family ``(x, v) -> (x - theta v, x + (1 - theta) v)``.

    ``theta = 0`` is explicit Euler, ``theta = 1/2`` the midpoint rule.
    """
    theta = float(theta)
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    eye = np.eye(n)
    jac = np.block([[eye, -theta * eye], [eye, (1.0 - theta) * eye]])
    jac.setflags(write=False)

    def fn(x, v):
        return x - theta * v, x + (1.0 - theta) * v

    if theta == 0.5:
        name = "midpoint"
    elif theta == 0.0:
        name = "euler"
    else:
        name = f"theta={theta:g}"
    return DiscretizationMap(n, name, fn, lambda x, v: jac, theta=theta)


def midpoint_map(n: int) -> DiscretizationMap:
    return theta_map(0.5, n)


def adjoint_map(R: DiscretizationMap) -> DiscretizationMap:
    """Adjoint map ``R*(x, v) = swap(R(x, -v))``.

    Its Jacobian is obtained by the chain rule: negate the v-columns of the
    Jacobian of R at ``(x, -v)`` and swap the two block rows.
    """
    n = R.n

    def fn(x, v):
        y1, y2 = R.fn(x, -v)
        return y2, y1

    def jac(x, v):
        j = R.jacobian(x, -v)
        out = np.empty_like(j)
        out[:n, :n] = j[n:, :n]
        out[:n, n:] = -j[n:, n:]
        out[n:, :n] = j[:n, :n]
        out[n:, n:] = -j[:n, n:]
        return out

    theta = None if R.theta is None else 1.0 - R.theta
    name = R.name[:-len("*")] if R.name.endswith("*") else R.name + "*"
    return DiscretizationMap(n, name, fn, jac, theta=theta, sample_base=R.sample_base)


def custom_map(n: int, eval_fn: EvalFn, jacobian_fn: JacFn | None = None,
               name: str = "custom", sample_base=None) -> DiscretizationMap:
    """Wrap a user-supplied map; axioms are not checked here (see :func:`check_axioms`)."""
    return DiscretizationMap(n, name, eval_fn, jacobian_fn, sample_base=sample_base)


def square_perturbed_map(n: int) -> DiscretizationMap:
    """``(x, v) -> (x, x + v + v*v)`` with the square taken componentwise.

    Satisfies both axioms but does not commute with rotations, so it is
    not symmetry preserving.
    """
    eye = np.eye(n)
    zero = np.zeros((n, n))

    def jac(x, v):
        return np.block([[eye, zero], [eye, eye + 2.0 * np.diag(v)]])

    return DiscretizationMap(n, "square", lambda x, v: (x.copy(), x + v + v * v), jac)


def rigged_map(n: int) -> DiscretizationMap:
    """``(x, v) -> (x, x + 2v)``: violates fibre rigidity by exactly 1."""
    eye = np.eye(n)
    jac = np.block([[eye, np.zeros((n, n))], [eye, 2.0 * eye]])
    return DiscretizationMap(n, "rigged", lambda x, v: (x.copy(), x + 2.0 * v),
                             lambda x, v: jac)


@dataclass(frozen=True)
class AxiomReport:
    zero_section_defect: float
    rigidity_defect: float
    samples: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.zero_section_defect <= self.tol and self.rigidity_defect <= self.tol


def check_axioms(R: DiscretizationMap, sample_count: int = 100, tol: float = 1e-10,
                 rng=None) -> AxiomReport:
    """Measure the two discretization-map axioms at sampled base points.

    ``zero_section_defect`` is the largest ``||R(x, 0) - (x, x)||_inf`` and
    ``rigidity_defect`` the largest ``||(D - B)(x, 0) - I||_inf``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    rng = np.random.default_rng(rng)
    n = R.n
    zero = np.zeros(n)
    eye = np.eye(n)
    zdef = 0.0
    rdef = 0.0
    for _ in range(sample_count):
        x = R.draw_base(rng)
        y1, y2 = R.eval(x, zero)
        zdef = max(zdef, float(np.max(np.abs(np.concatenate([y1 - x, y2 - x])))))
        j = R.jacobian(x, zero)
        fibre = j[n:, n:] - j[:n, n:]
        rdef = max(rdef, float(np.max(np.abs(fibre - eye))))
    return AxiomReport(zdef, rdef, sample_count, tol)


@dataclass(frozen=True)
class SymmetryReport:
    max_defect: float
    samples: int
    tol: float
    description: str = ""

    @property
    def passed(self) -> bool:
        return self.max_defect <= self.tol


def check_symmetry_preservation(R: DiscretizationMap, action: LinearGroupAction,
                                sample_count: int = 100, tol: float = 1e-10,
                                rng=None, v_scale: float = 1.0) -> SymmetryReport:
    """Largest ``||R(Mx, Mv) - (M y1, M y2)||_inf`` over sampled ``(M, x, v)``."""
    if action.n != R.n:
        raise ValueError(f"dimension mismatch: action n={action.n}, map n={R.n}")
    rng = np.random.default_rng(rng)
    worst = 0.0
    for _ in range(sample_count):
        M = action.sample_group_element(rng)
        x = R.draw_base(rng)
        v = v_scale * rng.standard_normal(R.n)
        y1, y2 = R.eval(x, v)
        z1, z2 = R.eval(M @ x, M @ v)
        worst = max(worst, float(np.max(np.abs(np.concatenate([z1 - M @ y1, z2 - M @ y2])))))
    return SymmetryReport(worst, sample_count, tol, action.description)


# ---------------------------------------------------------------------------
# Matrix groups

def hat_so3(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    return np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])


def matrix_exp_so3(omega_hat) -> np.ndarray:
    """Rodrigues formula for the exponential of a 3 x 3 skew matrix."""
    omega_hat = np.asarray(omega_hat, dtype=float)
    if omega_hat.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got {omega_hat.shape}")
    if np.max(np.abs(omega_hat + omega_hat.T)) > 1e-12:
        raise ValueError("input is not skew-symmetric")
    w = np.array([omega_hat[2, 1], omega_hat[0, 2], omega_hat[1, 0]])
    theta = float(np.linalg.norm(w))
    K = omega_hat
    if theta < 1e-8:
        # series to second order; error O(theta^4)
        a = 1.0 - theta**2 / 6.0
        b = 0.5 - theta**2 / 24.0
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / theta**2
    return np.eye(3) + a * K + b * (K @ K)


def matrix_exp(a, terms: int = 12) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a truncated Taylor series.

    The matrix is scaled by ``2^-s`` so that its norm is below 0.5, the
    series is summed to ``terms`` terms and the result squared ``s`` times.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    norm = np.linalg.norm(a, 1)
    s = 0
    if norm > 0.5:
        s = int(np.ceil(np.log2(norm / 0.5)))
    scaled = a / 2.0**s
    out = np.eye(a.shape[0])
    term = np.eye(a.shape[0])
    for k in range(1, terms + 1):
        term = term @ scaled / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def _exp_auto(a: np.ndarray) -> np.ndarray:
    if a.shape == (3, 3) and np.max(np.abs(a + a.T)) <= 1e-12:
        return matrix_exp_so3(a)
    return matrix_exp(a)


@dataclass(frozen=True)
class MatrixGroupMidpointMap:
    """Midpoint discretization map on a matrix Lie group.

    ``(g, v_g) -> (g exp(-1/2 g^{-1} v_g), g exp(1/2 g^{-1} v_g))``. For
    SO(3) tangent vectors ``g^{-1} v_g`` is skew and the Rodrigues formula
    is used; otherwise the generic series exponential.
    """

    k: int = 3

    def eval_group(self, g, v_g) -> tuple[np.ndarray, np.ndarray]:
        g = np.asarray(g, dtype=float)
        v_g = np.asarray(v_g, dtype=float)
        xi = np.linalg.solve(g, v_g)
        return g @ _exp_auto(-0.5 * xi), g @ _exp_auto(0.5 * xi)

    def as_discretization_map(self) -> DiscretizationMap:
        """Flattened chart version on R^{k*k} with a finite-difference Jacobian.

        Base points are sampled from SO(k) so the checks run on the group.
        """
        k = self.k

        def fn(x, v):
            y1, y2 = self.eval_group(x.reshape(k, k), v.reshape(k, k))
            return y1.ravel(), y2.ravel()

        return DiscretizationMap(
            k * k, f"so{k}-midpoint", fn,
            sample_base=lambda rng: random_rotation(k, rng).ravel(),
        )


def orthogonality_defect(g) -> float:
    g = np.asarray(g, dtype=float)
    return float(np.max(np.abs(g.T @ g - np.eye(g.shape[0]))))
