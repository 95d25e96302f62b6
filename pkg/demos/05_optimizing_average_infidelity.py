"""
Optimizing the average infidelity
==================================

Asymmetric, variable-amplitude sequences come from minimizing the mean
infidelity over an 8 x 8 grid on [-0.15, 0.15]^2 with projected Adam from many
random starts.  The defaults (64 starts, up to 20000 iterations) take a couple
of minutes; this demo uses fewer starts.
"""

from cpgates import catalog
from cpgates.optimizer import OptimizerSpec, objective, optimize, sequence_to_params

spec = OptimizerSpec(n_pulses=5, target="X", starts=8, seed=0)
reference = objective(sequence_to_params(catalog.get_sequence("X5c"), spec), spec)

result = optimize(spec)
print("best objective %.4e (published five-pulse sequence: %.4e)" % (result.objective, reference))
print("amplitudes:", result.amplitudes.round(4))
print("phases/pi: ", (result.phases / 3.141592653589793).round(4))
print("per-start objectives:", result.start_objectives.round(6))
