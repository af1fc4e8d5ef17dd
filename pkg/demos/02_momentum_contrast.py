"""Angular momentum on the Kepler problem: equivariant map versus a broken one.

The midpoint map commutes with rotations, so the integrator it induces keeps
q x p fixed up to round-off. The "square" map adds a componentwise v*v term
that rotations do not respect; its axioms still hold but momentum wanders.
"""

from sympulse import check_symmetry_preservation, get_problem, integrate, midpoint_map
from sympulse.discretization import square_perturbed_map
from sympulse.symmetry import momentum_drift

prob = get_problem("kepler2d")
action, generator = prob.symmetry

for R in (midpoint_map(2), square_perturbed_map(2)):
    report = check_symmetry_preservation(R, action, rng=0)
    traj = integrate(R, prob.hamiltonian, 0.01, 1000, prob.initial)
    drift, _ = momentum_drift(traj, generator)
    print(f"{R.name:>9}: equivariance defect {report.max_defect:.2e}, "
          f"momentum drift over 1000 steps {drift:.2e}")
