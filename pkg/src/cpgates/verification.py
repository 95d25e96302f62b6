"""Derivative reports and independent finite-difference checks."""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .jets import derivative_norms
from .su2 import CompositeSequence, compose, gate_fidelity, target_gate

CANCEL_TOL = 1e-9


def orders_up_to(max_order: int):
    """All (m, n) with 1 <= m + n <= max_order, sorted by total order then m."""
    return [(m, t - m) for t in range(1, max_order + 1) for m in range(t, -1, -1)]


@dataclass
class DerivativeRow:
    order: tuple
    norm: float
    claimed: bool

    @property
    def vanishes(self) -> bool:
        return self.norm < CANCEL_TOL


def derivative_report(s: CompositeSequence, max_order: int = 2, claimed=()):
    """Nominal infidelity and the Frobenius norm of each ``D_{m,n}`` up to ``max_order``."""
    claimed = {tuple(o) for o in claimed}
    norms = derivative_norms(s, orders_up_to(max_order))
    rows = [DerivativeRow(o, v, o in claimed) for o, v in norms.items()]
    infid = 1.0 - gate_fidelity(compose(s), target_gate(s.target))
    return infid, rows


def format_report(name, infid, rows) -> str:
    lines = [f"sequence {name}: nominal infidelity {infid:.3e}"]
    for r in rows:
        status = "vanishes" if r.vanishes else "nonzero"
        mark = " (claimed)" if r.claimed else ""
        lines.append(f"  D{r.order[0]},{r.order[1]}  |D| = {r.norm:.3e}  {status}{mark}")
    bad = [r for r in rows if r.claimed and not r.vanishes]
    if bad:
        lines.append("  claimed orders NOT cancelled: " + ", ".join(f"D{m},{n}" for (m, n) in (r.order for r in bad)))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# five-pulse derivative formulas
# ---------------------------------------------------------------------------

def five_pulse_brackets(phi1: float, phi2: float) -> dict:
    """The two bracketed factors of the printed five-pulse first-derivative formulas.

    ``D10 U11 = -pi/2 * rabi`` and ``D01 U11 = i * detuning`` as printed; the
    two printed brackets always sum to 2.  ``rabi_consistent`` is the sign
    variant that agrees with the exact derivative.
    """
    c1 = math.cos(phi1)
    c2 = math.cos(2 * phi1 - phi2)
    return {
        "rabi_printed": 1 - 2 * c1 + 2 * c2,
        "detuning_printed": 1 + 2 * c1 - 2 * c2,
        "rabi_consistent": 1 + 2 * c1 + 2 * c2,
    }


# ---------------------------------------------------------------------------
# high-precision finite differences
# ---------------------------------------------------------------------------

def _mp_compose(s: CompositeSequence, eps, delta):
    """Cayley-Klein pair of ``s`` in mpmath arithmetic, straight from the closed form."""
    a, b = mpmath.mpc(1), mpmath.mpc(0)
    pi = mpmath.pi
    for p in s.pulses:
        x = mpmath.mpf(p.omega) * pi * (1 + eps)
        y = pi * delta
        r = mpmath.sqrt(x * x + y * y)
        h = r * mpmath.mpf(p.tau) / 2
        sr = mpmath.sin(h) / r if r != 0 else mpmath.mpf(p.tau) / 2
        ak = mpmath.cos(h) + 1j * y * sr
        bk = -1j * x * sr * mpmath.expjpi(mpmath.mpf(p.phase) / pi)
        a, b = ak * a - bk * mpmath.conj(b), ak * b + bk * mpmath.conj(a)
    return a, b


def _central(s, m, n, step):
    """Tensor-product central difference for d^(m+n)/d eps^m d delta^n at the origin."""
    total_a, total_b = mpmath.mpc(0), mpmath.mpc(0)
    for i in range(m + 1):
        for j in range(n + 1):
            w = (-1) ** (i + j) * math.comb(m, i) * math.comb(n, j)
            a, b = _mp_compose(s, (mpmath.mpf(m) / 2 - i) * step, (mpmath.mpf(n) / 2 - j) * step)
            total_a += w * a
            total_b += w * b
    scale = step ** (m + n)
    return total_a / scale, total_b / scale


def fd_derivative(s: CompositeSequence, m: int, n: int, step: float = 1e-3, dps: int = 50) -> np.ndarray:
    """``D_{m,n}`` by central differences, Richardson-extrapolated once.

    Runs in ``dps`` significant digits so the result is limited by truncation
    only (about ``step**4``).
    """
    with mpmath.workdps(dps):
        h = mpmath.mpf(step)
        a1, b1 = _central(s, m, n, h)
        a2, b2 = _central(s, m, n, h / 2)
        a = (4 * a2 - a1) / 3
        b = (4 * b2 - b1) / 3
        a, b = complex(a), complex(b)
    return np.array([[a, b], [-np.conj(b), np.conj(a)]])
