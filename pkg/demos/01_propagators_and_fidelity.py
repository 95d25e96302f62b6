"""
Propagators, composition and gate fidelity
===========================================

A single resonant pi pulse is an X gate (up to the global phase -i), but it
degrades quickly when the Rabi frequency is off.  Composite sequences trade
extra pulses for robustness.
"""

import math

import numpy as np

from cpgates import catalog
from cpgates.su2 import ErrorPoint, Pulse, compose, gate_fidelity, pulse_propagator, target_gate

X = target_gate("X")

# one pi pulse at the nominal point: a = 0, b = -i
U = pulse_propagator(Pulse(omega=1, tau=1, phase=0))
print("pi pulse:", np.round(U.matrix, 12))

# with a 10% Rabi error the infidelity is (2/3) sin^2(eps pi / 2)
U = pulse_propagator(Pulse(), ErrorPoint(0.1, 0.0))
print("infidelity at eps=0.1:", 1 - gate_fidelity(U, X), "closed form:", 2 / 3 * math.sin(0.05 * math.pi) ** 2)

# the five-pulse X5a sequence is exact at the origin and far better nearby
x5a = catalog.get_sequence("X5a")
for e in (0.0, 0.05, 0.1):
    single = 1 - gate_fidelity(compose(catalog.get_sequence("PI"), (e, e)), X)
    comp = 1 - gate_fidelity(compose(x5a, (e, e)), X)
    print(f"eps = delta = {e:4.2f}: single {single:.2e}   X5a {comp:.2e}")
