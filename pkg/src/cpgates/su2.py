"""Exact SU(2) propagators for phased rectangular pulses.

Units: the Rabi amplitude of a pulse is ``omega * pi / T_ref`` and its duration
is ``tau * T_ref``, so a pulse with ``omega = tau = 1`` is a nominal pi pulse.
Errors enter as ``Omega -> Omega (1 + eps)`` and a detuning ``Delta = delta *
pi / T_ref``.  Everything below is dimensionless.

A propagator is stored by its Cayley-Klein pair ``(a, b)``; the matrix is
``[[a, b], [-conj(b), conj(a)]]``.  The pulse-level functions broadcast over
array-valued ``eps``/``delta`` so that landscapes and averaged objectives are a
handful of vectorised numpy operations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
# below this value of r * tau the sin(h)/r ratio is evaluated by its series
SMALL_ARGUMENT = 1e-6


class InvalidArgument(ValueError):
    """Raised for non-finite or out-of-domain inputs."""


def wrap_phase(phi):
    """Wrap phase(s) to ``[0, 2 pi)``."""
    out = np.mod(phi, TWO_PI)
    # np.mod can return exactly 2 pi for tiny negative inputs
    out = np.where(out >= TWO_PI, 0.0, out)
    if np.ndim(out) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class Pulse:
    """One rectangular drive segment.

    ``omega`` is the amplitude in units of ``pi / T_ref``, ``tau`` the duration
    in units of ``T_ref`` and ``phase`` the drive phase in radians.
    """

    omega: float = 1.0
    tau: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        for name in ("omega", "tau", "phase"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidArgument(f"pulse {name} must be finite")
        if self.omega < 0:
            raise InvalidArgument("pulse omega must be >= 0")
        if self.tau <= 0:
            raise InvalidArgument("pulse tau must be > 0")
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "tau", float(self.tau))
        object.__setattr__(self, "phase", wrap_phase(float(self.phase)))

    @property
    def area(self) -> float:
        """Nominal area in units of pi."""
        return self.omega * self.tau


@dataclass(frozen=True)
class ErrorPoint:
    """Fractional Rabi error ``epsilon`` and dimensionless detuning ``delta``."""

    epsilon: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and math.isfinite(self.delta)):
            raise InvalidArgument("error point must be finite")


ORIGIN = ErrorPoint(0.0, 0.0)


@dataclass(frozen=True)
class Unitary:
    """Cayley-Klein pair of an SU(2) matrix."""

    a: complex
    b: complex

    @property
    def matrix(self) -> np.ndarray:
        return ck_matrix(self.a, self.b)

    def __matmul__(self, other: "Unitary") -> "Unitary":
        a, b = ck_product(self.a, self.b, other.a, other.b)
        return Unitary(complex(a), complex(b))


@dataclass(frozen=True)
class CompositeSequence:
    """Ordered pulses; ``pulses[0]`` is applied first."""

    name: str
    pulses: tuple[Pulse, ...]
    target: str = "X"
    symmetric: bool = False

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))
        if not self.pulses:
            raise InvalidArgument("a composite sequence needs at least one pulse")
        if self.symmetric and not _is_palindrome(self.pulses):
            raise InvalidArgument(f"sequence {self.name!r} is flagged symmetric but is not palindromic")

    def __len__(self):
        return len(self.pulses)

    @property
    def omegas(self) -> np.ndarray:
        return np.array([p.omega for p in self.pulses])

    @property
    def taus(self) -> np.ndarray:
        return np.array([p.tau for p in self.pulses])

    @property
    def phases(self) -> np.ndarray:
        return np.array([p.phase for p in self.pulses])

    @property
    def area(self) -> float:
        """Total nominal area in units of pi."""
        return float(sum(p.area for p in self.pulses))

    @classmethod
    def from_phases(cls, name, phases, omega=1.0, tau=1.0, target="X", symmetric=None):
        phases = np.asarray(phases, dtype=float)
        omegas = np.broadcast_to(np.asarray(omega, dtype=float), phases.shape)
        taus = np.broadcast_to(np.asarray(tau, dtype=float), phases.shape)
        pulses = tuple(Pulse(float(w), float(t), float(p)) for w, t, p in zip(omegas, taus, phases))
        if symmetric is None:
            symmetric = len(pulses) > 1 and _is_palindrome(pulses)
        return cls(name, pulses, target, symmetric)


def _is_palindrome(pulses: Sequence[Pulse], tol: float = 1e-12) -> bool:
    n = len(pulses)
    for k in range(n // 2):
        p, q = pulses[k], pulses[n - 1 - k]
        dphi = abs(math.remainder(p.phase - q.phase, TWO_PI))
        if abs(p.omega - q.omega) > tol or abs(p.tau - q.tau) > tol or dphi > tol:
            return False
    return True


# ---------------------------------------------------------------------------
# Cayley-Klein algebra (broadcasting)
# ---------------------------------------------------------------------------

def ck_matrix(a, b) -> np.ndarray:
    """Assemble ``[[a, b], [-b*, a*]]``; leading axes of ``a``/``b`` are kept."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    out = np.empty(np.broadcast(a, b).shape + (2, 2), dtype=complex)
    out[..., 0, 0] = a
    out[..., 0, 1] = b
    out[..., 1, 0] = -np.conj(b)
    out[..., 1, 1] = np.conj(a)
    return out


def ck_product(a2, b2, a1, b1):
    """Cayley-Klein pair of ``U2 @ U1``.

    Only real-linear structure is used, so this is also valid when either
    factor is a parameter derivative of an SU(2) matrix.
    """
    return a2 * a1 - b2 * np.conj(b1), a2 * b1 + b2 * np.conj(a1)


def pulse_ck(omega, tau, phase, eps=0.0, delta=0.0):
    """Cayley-Klein pair of one pulse, broadcasting over all arguments."""
    x = np.asarray(omega, dtype=float) * math.pi * (1.0 + np.asarray(eps, dtype=float))
    y = math.pi * np.asarray(delta, dtype=float)
    tau = np.asarray(tau, dtype=float)
    r = np.hypot(x, y)
    h = 0.5 * r * tau
    sinc = _half_sinc(r, tau)  # sin(h) / r
    a = np.cos(h) + 1j * y * sinc
    b = -1j * x * sinc * np.exp(1j * np.asarray(phase, dtype=float))
    return a, b


def _half_sinc(r, tau):
    """``sin(r tau / 2) / r`` with the removable singularity at r = 0 handled."""
    r, tau = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(tau, dtype=float))
    z = r * tau
    small = np.abs(z) < SMALL_ARGUMENT
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = np.sin(0.5 * z) / r
    # sin(z/2)/r = (tau/2) * (1 - z^2/24 + z^4/1920 - z^6/322560)
    z2 = z * z
    series = 0.5 * tau * (1.0 - z2 / 24.0 + z2 * z2 / 1920.0 - z2 * z2 * z2 / 322560.0)
    out = np.where(small, series, exact)
    if out.ndim == 0:
        return out[()]
    return out


def sequence_ck(omegas, taus, phases, eps=0.0, delta=0.0):
    """Cayley-Klein pair of a pulse train, broadcasting over ``eps``/``delta``.

    The per-pulse parameter arrays carry the pulse index on their LAST axis,
    which lets callers batch many parameter sets at once.
    """
    omegas = np.asarray(omegas, dtype=float)
    taus = np.asarray(taus, dtype=float)
    phases = np.asarray(phases, dtype=float)
    omegas, taus, phases = np.broadcast_arrays(omegas, taus, phases)
    a, b = 1.0 + 0j, 0j
    for k in range(omegas.shape[-1]):
        ak, bk = pulse_ck(omegas[..., k], taus[..., k], phases[..., k], eps, delta)
        a, b = ck_product(ak, bk, a, b)
    return a, b


def _check_point(e: ErrorPoint | tuple) -> ErrorPoint:
    if isinstance(e, ErrorPoint):
        return e
    return ErrorPoint(*e)


def pulse_propagator(p: Pulse, e: ErrorPoint | tuple = ORIGIN) -> Unitary:
    """Exact propagator of one phased rectangular pulse at error point ``e``."""
    e = _check_point(e)
    a, b = pulse_ck(p.omega, p.tau, p.phase, e.epsilon, e.delta)
    return Unitary(complex(a), complex(b))


def compose(s: CompositeSequence, e: ErrorPoint | tuple = ORIGIN) -> Unitary:
    """Total propagator ``U_N ... U_2 U_1`` of a sequence at error point ``e``."""
    e = _check_point(e)
    a, b = sequence_ck(s.omegas, s.taus, s.phases, e.epsilon, e.delta)
    return Unitary(complex(a), complex(b))


# ---------------------------------------------------------------------------
# Targets and fidelity
# ---------------------------------------------------------------------------

_SQRT_HALF = 1.0 / math.sqrt(2.0)
_TARGETS = {
    "X": np.array([[0, -1j], [-1j, 0]]),
    "RX90": _SQRT_HALF * np.array([[1, -1j], [-1j, 1]]),
    "H": _SQRT_HALF * np.array([[1, 1], [1, -1]], dtype=complex),
    "I": np.eye(2, dtype=complex),
}


def target_gate(kind: str) -> np.ndarray:
    """Target matrix for ``X`` (meaning -iX), ``RX90``, ``H`` or ``I``."""
    key = kind.upper()
    if key not in _TARGETS:
        raise InvalidArgument(f"unknown target gate {kind!r}; expected one of {sorted(_TARGETS)}")
    return _TARGETS[key].copy()


def as_matrix(U) -> np.ndarray:
    if isinstance(U, Unitary):
        return U.matrix
    return np.asarray(U, dtype=complex)


def gate_fidelity(U, G) -> float:
    """Average gate fidelity ``(|Tr(U^dag G)|^2 + d) / (d (d + 1))`` for d = 2."""
    U, G = as_matrix(U), as_matrix(G)
    t = np.trace(U.conj().T @ G)
    return float((abs(t) ** 2 + 2.0) / 6.0)


def ck_overlap(a, b, G):
    """``Tr(U^dag G)`` for Cayley-Klein arrays; linear in (a, a*, b, b*)."""
    return np.conj(a) * G[0, 0] - b * G[1, 0] + np.conj(b) * G[0, 1] + a * G[1, 1]


def ck_infidelity(a, b, G):
    """Elementwise ``1 - F`` for arrays of Cayley-Klein pairs."""
    t = ck_overlap(a, b, G)
    return 1.0 - (t.real ** 2 + t.imag ** 2 + 2.0) / 6.0


def _grid_axis(lo, hi, n):
    if n < 1:
        raise InvalidArgument("grid dimensions must be >= 1")
    if n == 1:
        return np.array([0.5 * (lo + hi)])
    if not hi > lo:
        raise InvalidArgument(f"empty range [{lo}, {hi}] with {n} points")
    return np.linspace(lo, hi, n)


def error_grid(box, grid):
    """Uniform ``(eps, delta)`` axes including endpoints.

    ``box`` is ``((eps_lo, eps_hi), (delta_lo, delta_hi))``; a single-point
    axis samples the midpoint.
    """
    (e_lo, e_hi), (d_lo, d_hi) = box
    n_e, n_d = grid
    return _grid_axis(e_lo, e_hi, n_e), _grid_axis(d_lo, d_hi, n_d)


def average_infidelity(s: CompositeSequence, G, box=((-0.15, 0.15), (-0.15, 0.15)), grid=(8, 8)) -> float:
    """Mean of ``1 - F`` over a uniform ``(eps, delta)`` grid."""
    eps, delta = error_grid(box, grid)
    E, D = np.meshgrid(eps, delta, indexing="ij")
    a, b = sequence_ck(s.omegas, s.taus, s.phases, E, D)
    return float(np.mean(ck_infidelity(a, b, as_matrix(G))))


# ---------------------------------------------------------------------------
# Transformations
# ---------------------------------------------------------------------------

def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def hadamard_wrap(U) -> np.ndarray:
    """``e^{i pi/2} Rz(pi/2) U Rz(pi/2)``: maps an Rx(pi/2) realisation onto H."""
    R = rz(0.5 * math.pi)
    return 1j * (R @ as_matrix(U) @ R)


def shift_all_phases(s: CompositeSequence, chi: float) -> CompositeSequence:
    """Add ``chi`` to every pulse phase."""
    pulses = tuple(replace(p, phase=p.phase + chi) for p in s.pulses)
    return replace(s, pulses=pulses)


def negate_phases(s: CompositeSequence) -> CompositeSequence:
    pulses = tuple(replace(p, phase=-p.phase) for p in s.pulses)
    return replace(s, pulses=pulses)


def scale_durations(s: CompositeSequence, factor: float) -> CompositeSequence:
    pulses = tuple(replace(p, tau=p.tau * factor) for p in s.pulses)
    return replace(s, pulses=pulses)


def duration_error_map(e: ErrorPoint | tuple, eta: float) -> ErrorPoint:
    """Fold a fractional duration error ``eta`` into ``(eps, delta)``.

    Only the products ``Omega T`` and ``Delta T`` enter the propagator, so a
    duration error moves the point along the diagonals of the error plane.
    """
    e = _check_point(e)
    return ErrorPoint((1.0 + e.epsilon) * (1.0 + eta) - 1.0, e.delta * (1.0 + eta))
