"""The same step, reached from the Lagrangian.

For a hyperregular Lagrangian the discrete Euler-Lagrange step built from
the midpoint map and the Hamiltonian step agree after the Legendre map.
"""

import numpy as np

from sympulse import build_hamiltonian_step, build_lagrangian_step, get_problem, midpoint_map, newton_solve

for name in ("pendulum", "double_well"):
    prob = get_problem(name)
    R = midpoint_map(prob.n)
    z = prob.initial
    h = 0.1
    sh = build_hamiltonian_step(R, prob.hamiltonian, h, z)
    sl = build_lagrangian_step(R, prob.lagrangian, h, z)
    a = sh.readout(newton_solve(sh).z).as_array()
    b = sl.readout(newton_solve(sl).z).as_array()
    print(f"{name:<12} Hamiltonian {a}  Lagrangian {b}  gap {np.max(np.abs(a - b)):.1e}")
