"""Composite pulse sequences for robust X and Hadamard gates.

The library models a qubit driven by resonant pulses subject to a fractional
Rabi error ``eps`` and a detuning ``delta``, and provides

* exact SU(2) propagators and gate fidelities (:mod:`cpgates.su2`),
* truncated bivariate Taylor jets for derivatives in ``(eps, delta)``
  (:mod:`cpgates.jets`),
* a catalog of published sequences (:mod:`cpgates.catalog`),
* derivative-cancellation design (:mod:`cpgates.designer`),
* average-infidelity optimization (:mod:`cpgates.optimizer`),
* infidelity landscapes and contours (:mod:`cpgates.landscape`).
"""
from .su2 import (CompositeSequence, ErrorPoint, InvalidArgument, Pulse, Unitary, average_infidelity,
                  compose, gate_fidelity, hadamard_wrap, pulse_propagator, target_gate)

__version__ = "0.1.0"

__all__ = [
    "CompositeSequence", "ErrorPoint", "InvalidArgument", "Pulse", "Unitary", "average_infidelity",
    "compose", "gate_fidelity", "hadamard_wrap", "pulse_propagator", "target_gate",
]
