"""
The sequence catalog and derivative cancellation
=================================================

Each analytic sequence is built so that chosen partial derivatives of the
total propagator in (eps, delta) vanish at the nominal point.  The jet engine
computes those derivatives to machine precision.
"""

from cpgates import catalog
from cpgates.designer import refine, to_sequence
from cpgates.verification import derivative_report, five_pulse_brackets, format_report

# what is in the catalog
for name in catalog.names("X")[:8]:
    rec = catalog.get(name)
    print(f"{name:7s} {len(rec.sequence):2d} pulses  {rec.source}")

# X5a cancels every first-order term, including the mixed one
rec = catalog.get("X5a")
print(format_report("X5a", *derivative_report(rec.sequence, 2, rec.claimed_orders)))

# the two printed bracket expressions for the five-pulse first derivatives add
# up to 2, so they cannot vanish together; the sign variant that matches the
# exact derivative does vanish at X5a
phases = rec.sequence.phases
print(five_pulse_brackets(phases[0], phases[1]))

# thirteen-pulse phases are printed to four decimals; polishing them onto the
# exact solution moves each phase by less than the rounding
rec = catalog.get("X13a")
half = rec.sequence.phases[:7]
exact, residual = refine(half, rec.claimed_orders)
print("X13a as printed:")
print(format_report("X13a", *derivative_report(rec.sequence, 3, rec.claimed_orders)))
print("X13a refined (residual %.1e):" % residual)
print(format_report("X13a*", *derivative_report(to_sequence(exact), 3, rec.claimed_orders)))
