"""A discretization map on SO(3) built from the matrix exponential.

Both outputs are rotations, and the map satisfies the two defining
conditions, which we check numerically on the flattened 3x3 chart.
"""

import numpy as np

from sympulse import MatrixGroupMidpointMap, check_axioms
from sympulse.discretization import hat_so3, orthogonality_defect
from sympulse.symmetry import random_rotation

rng = np.random.default_rng(4)
G = MatrixGroupMidpointMap()

g = random_rotation(3, rng)
xi = hat_so3(rng.standard_normal(3))
y1, y2 = G.eval_group(g, g @ xi)
print("orthogonality defects:", orthogonality_defect(y1), orthogonality_defect(y2))
print("det:", np.linalg.det(y1), np.linalg.det(y2))

report = check_axioms(G.as_discretization_map(), sample_count=20, tol=1e-8, rng=rng)
print("axioms (finite-difference Jacobian):", report)
