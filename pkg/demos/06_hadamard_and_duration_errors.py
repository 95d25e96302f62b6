"""
Hadamard gates and duration errors
===================================

A Hadamard is Rz(pi/2) Rx(pi/2) Rz(pi/2) up to a phase, and the Z rotations
are free (virtual), so a robust Rx(pi/2) gives a robust H with the same
fidelity everywhere.  Duration errors need no separate treatment: they move
the error point along a line in the (eps, delta) plane.
"""

import numpy as np

from cpgates import catalog
from cpgates.su2 import ErrorPoint, compose, duration_error_map, gate_fidelity, hadamard_wrap, target_gate

h4 = catalog.get_sequence("H4")
for e, d in ((0.0, 0.0), (0.1, 0.0), (0.0, 0.1)):
    U = compose(h4, (e, d))
    f_rx = gate_fidelity(U, target_gate("RX90"))
    f_h = gate_fidelity(hadamard_wrap(U.matrix), target_gate("H"))
    print(f"({e}, {d}): F(U, Rx90) = {f_rx:.8f}   F(wrap(U), H) = {f_h:.8f}")

# a 20% longer pulse train with no other error behaves like eps = 0.2
x9a = catalog.get_sequence("X9a")
for eta in np.linspace(-0.2, 0.2, 5):
    e = duration_error_map(ErrorPoint(0.0, 0.0), eta)
    print(f"eta = {eta:+.2f} -> eps = {e.epsilon:+.2f}: infidelity {1 - gate_fidelity(compose(x9a, e), target_gate('X')):.2e}")
