"""Measured convergence orders, including a triple-jump composition.

Errors are taken at t = 1 against the exact oscillator flow and the slope of
log(error) against log(h) is fitted by least squares.
"""

from sympulse import Method, get_problem, midpoint_map, theta_map, triple_jump
from sympulse.diagnostics import convergence_order

prob = get_problem("oscillator")
hs = [0.2, 0.1, 0.05, 0.025]

for label, method in [
    ("theta=0 (symplectic Euler)", Method(theta_map(0.0, 1))),
    ("midpoint", Method(midpoint_map(1))),
    ("midpoint, triple jump", Method(midpoint_map(1), triple_jump(2))),
]:
    est = convergence_order(prob, method, hs, 1.0)
    print(f"{label:<28} slope {est.slope:6.3f}   r^2 {est.r_squared:.5f}")
