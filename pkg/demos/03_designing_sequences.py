"""
Designing symmetric sequences from derivative conditions
=========================================================

Pick the derivative orders to cancel, then solve for the phases of a
palindromic pi-pulse sequence by multi-start Levenberg-Marquardt.
"""

import math

from cpgates.designer import ConditionSet, DesignProblem, design_symmetric, to_sequence
from cpgates.jets import derivative_norms

# five pulses, all first-order terms: the two known solutions come back
first = ConditionSet(((1, 0), (0, 1), (1, 1)))
for sol in design_symmetric(DesignProblem(5, first), starts=256, seed=0):
    print("N=5:", [round(float(p) / math.pi, 6) for p in sol])

# three pulses, detuning only
for sol in design_symmetric(DesignProblem(3, ConditionSet(((0, 1),))), starts=64, seed=0):
    print("N=3 detuning:", [round(float(p) / math.pi, 6) for p in sol])

# seven pulses with one second-order condition; rank by robust area
seven = ConditionSet(first.orders + ((2, 0),))
sols = design_symmetric(DesignProblem(7, seven), starts=256, seed=0, rank=True)
for sol in sols:
    norms = derivative_norms(to_sequence(sol), seven.orders)
    print("N=7:", [round(float(p) / math.pi, 5) for p in sol], "max |D| = %.1e" % max(norms.values()))
