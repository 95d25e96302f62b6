"""
Infidelity landscapes and contours
===================================

Sample the infidelity over an (eps, delta) box, extract the iso-infidelity
contours at 1e-4 .. 1e-1 and write them out as CSV, JSON and SVG.
"""

from pathlib import Path

from cpgates import catalog, formats
from cpgates.landscape import FIGURE_LEVELS, contours, eval_grid, robust_fraction
from cpgates.su2 import target_gate

out = Path(__file__).with_name("output")
box = ((-0.5, 0.5), (-0.5, 0.5))
X = target_gate("X")

for name in ("PI", "X5a", "X9a", "X13a"):
    g = eval_grid(catalog.get_sequence(name), X, box, (201, 201))
    c = contours(g, FIGURE_LEVELS)
    formats.write_grid(out / f"{name}.csv", g)
    formats.write_contours(out / f"{name}_contours.json", c)
    formats.write_svg(out / f"{name}.svg", c, box, title=name)
    print(f"{name:5s} fraction below 1e-4: {robust_fraction(g, 1e-4):.4f}")

print("wrote", sorted(p.name for p in out.iterdir()))
