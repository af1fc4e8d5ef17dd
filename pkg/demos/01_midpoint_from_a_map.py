"""Recover the implicit midpoint rule from the midpoint discretization map.

The step equations are assembled by lifting the Hamiltonian covector through
the map and solved by Newton. For the harmonic oscillator the result has a
closed form (the Cayley transform of the flow matrix), so we can compare.
"""

import numpy as np

from sympulse import get_problem, midpoint_map, step

prob = get_problem("oscillator")
R = midpoint_map(1)
h = 0.1

z1 = step(R, prob.hamiltonian, h, prob.initial)
A = np.array([[0.0, 1.0], [-1.0, 0.0]])
cayley = np.linalg.solve(np.eye(2) - h / 2 * A, np.eye(2) + h / 2 * A)

print("map step   :", z1.as_array())
print("Cayley     :", cayley @ prob.initial.as_array())
print("difference :", np.max(np.abs(z1.as_array() - cayley @ prob.initial.as_array())))
