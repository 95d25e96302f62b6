"""Truncated bivariate Taylor arithmetic in the error variables (eps, delta).

A :class:`Jet2` of order ``K`` holds the coefficients ``c[m, n]`` of
``sum c[m, n] eps**m delta**n`` for ``m + n <= K``; every arithmetic result is
truncated at the same total degree, so the coefficients are exact Taylor
coefficients about the origin.  Mixed partials follow as ``m! n! c[m, n]``.

Coefficient arrays have shape ``(K + 1, K + 1) + batch``.  The trailing batch
axes let one jet carry many independent expansions (for example one per phase
set during a design search) at numpy speed.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .su2 import CompositeSequence, InvalidArgument, Pulse

DEFAULT_ORDER = 6


class SingularJet(ArithmeticError):
    """Division by, or square root of, a jet with an unusable constant term."""


def _mask(K):
    m = np.arange(K + 1)
    return (m[:, None] + m[None, :]) <= K


class Jet2:
    __slots__ = ("c", "K")
    __array_priority__ = 1000  # make ndarray * Jet2 defer to Jet2.__rmul__

    def __init__(self, coeffs, K=None):
        c = np.asarray(coeffs, dtype=complex)
        if K is None:
            K = c.shape[0] - 1
        if c.shape[:2] != (K + 1, K + 1):
            raise InvalidArgument(f"coefficient table must start with shape {(K + 1, K + 1)}")
        mask = _mask(K).reshape((K + 1, K + 1) + (1,) * (c.ndim - 2))
        self.c = np.where(mask, c, 0)
        self.K = K

    # -- construction ------------------------------------------------------
    @classmethod
    def constant(cls, value, K=DEFAULT_ORDER):
        value = np.asarray(value, dtype=complex)
        c = np.zeros((K + 1, K + 1) + value.shape, dtype=complex)
        c[0, 0] = value
        return cls(c, K)

    @classmethod
    def variable(cls, which, K=DEFAULT_ORDER, value=0.0):
        """The jet of ``eps`` or ``delta`` itself, expanded about ``value``."""
        jet = cls.constant(value, K)
        if K >= 1:
            jet.c[(1, 0) if which == "eps" else (0, 1)] = 1.0
        return jet

    def _new(self, c):
        out = Jet2.__new__(Jet2)
        out.c = c
        out.K = self.K
        return out

    # -- access ------------------------------------------------------------
    @property
    def const(self):
        return self.c[0, 0]

    @property
    def batch_shape(self):
        return self.c.shape[2:]

    def coefficient(self, m, n):
        return self.c[m, n]

    def derivative(self, m, n):
        """``d^(m+n) / d eps^m d delta^n`` at the origin."""
        if m < 0 or n < 0 or m + n > self.K:
            raise InvalidArgument(f"derivative order ({m}, {n}) outside jet order {self.K}")
        return math.factorial(m) * math.factorial(n) * self.c[m, n]

    def truncate(self, K):
        """Same expansion at a lower order."""
        if K > self.K:
            raise InvalidArgument("cannot raise the order of a jet")
        return Jet2(self.c[: K + 1, : K + 1], K)

    def __repr__(self):
        return f"Jet2(K={self.K}, const={self.const!r})"

    # -- arithmetic --------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet2):
            if other.K != self.K:
                raise InvalidArgument(f"jet orders differ ({self.K} vs {other.K})")
            return other
        return Jet2.constant(other, self.K)

    def __neg__(self):
        return self._new(-self.c)

    def __add__(self, other):
        if not isinstance(other, Jet2):
            arr = np.asarray(other)
            lifted = np.zeros((self.K + 1, self.K + 1) + arr.shape, dtype=complex)
            lifted[0, 0] = arr
            return self._new(np.add(*_align(self.c, lifted)))
        return self._new(np.add(*_align(self.c, self._coerce(other).c)))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet2):
            return self._new(np.multiply(*_align(self.c, _lift(other))))
        other = self._coerce(other)
        return self._new(_truncated_product(self.c, other.c, self.K))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet2):
            return self._new(np.divide(*_align(self.c, _lift(other))))
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def conj(self):
        # the expansion variables are real
        return self._new(np.conj(self.c))

    conjugate = conj

    # -- series composition --------------------------------------------------
    def _compose(self, derivs):
        """``f(c0 + N)`` from the Taylor coefficients ``derivs[k] = f^(k)(c0)/k!``."""
        nil = self.c.copy()
        nil[0, 0] = 0
        out = np.zeros_like(self.c)
        out[0, 0] = derivs[0]
        power = None
        for k in range(1, self.K + 1):
            power = nil if power is None else _truncated_product(power, nil, self.K)
            out = out + derivs[k] * power
        return self._new(out)

    def reciprocal(self):
        c0 = self.const
        if np.any(c0 == 0):
            raise SingularJet("jet with zero constant term is not invertible")
        inv = 1.0 / c0
        return self._compose([inv * (-inv) ** k for k in range(self.K + 1)])

    def exp(self):
        e = np.exp(self.const)
        return self._compose([e / math.factorial(k) for k in range(self.K + 1)])

    def sin(self):
        s, c = np.sin(self.const), np.cos(self.const)
        cycle = (s, c, -s, -c)
        return self._compose([cycle[k % 4] / math.factorial(k) for k in range(self.K + 1)])

    def cos(self):
        s, c = np.sin(self.const), np.cos(self.const)
        cycle = (c, -s, -c, s)
        return self._compose([cycle[k % 4] / math.factorial(k) for k in range(self.K + 1)])

    def sqrt(self):
        c0 = self.const
        if np.any(np.abs(np.imag(c0)) > 0) or np.any(np.real(c0) <= 0):
            raise SingularJet("sqrt needs a real positive constant term")
        c0 = np.real(c0)
        root = np.sqrt(c0)
        derivs = []
        binom = 1.0
        for k in range(self.K + 1):
            derivs.append(binom * root / c0 ** k)
            binom *= (0.5 - k) / (k + 1)
        return self._compose(derivs)


def _lift(value):
    arr = np.asarray(value)
    return arr.reshape((1, 1) + arr.shape)


def _align(A, B):
    """Pad the batch axes of two coefficient arrays to a common rank."""
    nd = max(A.ndim, B.ndim)
    A = A.reshape(A.shape[:2] + (1,) * (nd - A.ndim) + A.shape[2:])
    B = B.reshape(B.shape[:2] + (1,) * (nd - B.ndim) + B.shape[2:])
    return A, B


def _truncated_product(A, B, K):
    A, B = _align(A, B)
    out = np.zeros(np.broadcast_shapes(A.shape, B.shape), dtype=complex)
    for i in range(K + 1):
        for j in range(K + 1 - i):
            a = A[i, j]
            if not np.any(a):
                continue
            # entries (i+m, j+n) with i+m+j+n <= K; the mask below drops the rest
            out[i:, j:] += a * B[: K + 1 - i, : K + 1 - j]
    mask = _mask(K).reshape((K + 1, K + 1) + (1,) * (out.ndim - 2))
    return np.where(mask, out, 0)


def jet_arith(lhs: Jet2, rhs: Jet2, op: str) -> Jet2:
    """Binary jet arithmetic by operator name (add, sub, mul, div)."""
    ops = {
        "add": lambda p, q: p + q,
        "sub": lambda p, q: p - q,
        "mul": lambda p, q: p * q,
        "div": lambda p, q: p / q,
    }
    if op not in ops:
        raise InvalidArgument(f"unknown jet operation {op!r}")
    return ops[op](lhs, rhs)


def jet_elementary(f: str, x: Jet2) -> Jet2:
    if f not in ("sin", "cos", "sqrt", "exp"):
        raise InvalidArgument(f"unknown elementary function {f!r}")
    return getattr(x, f)()


@dataclass(frozen=True)
class UnitaryJet:
    """Cayley-Klein pair of jets."""

    a: Jet2
    b: Jet2

    @property
    def K(self):
        return self.a.K

    def __matmul__(self, other: "UnitaryJet") -> "UnitaryJet":
        a = self.a * other.a - self.b * other.b.conj()
        b = self.a * other.b + self.b * other.a.conj()
        return UnitaryJet(a, b)

    def constant_matrix(self):
        from .su2 import ck_matrix

        return ck_matrix(self.a.const, self.b.const)

    def derivative(self, m, n):
        """``D_{m,n}`` of the full 2x2 matrix (batch axes first)."""
        da = self.a.derivative(m, n)
        db = self.b.derivative(m, n)
        out = np.empty(np.shape(da) + (2, 2), dtype=complex)
        out[..., 0, 0] = da
        out[..., 0, 1] = db
        out[..., 1, 0] = -np.conj(db)
        out[..., 1, 1] = np.conj(da)
        return out

    def with_phase(self, phase):
        """Same pulse jet with drive phase ``phase`` (``b -> b e^{i phase}``)."""
        return UnitaryJet(self.a, self.b * np.exp(1j * np.asarray(phase)))


def propagator_jet(p: Pulse, K: int = DEFAULT_ORDER) -> UnitaryJet:
    """Taylor jets of the Cayley-Klein pair of one pulse about (0, 0)."""
    if K < 0:
        raise InvalidArgument("jet order must be >= 0")
    eps = Jet2.variable("eps", K)
    delta = Jet2.variable("delta", K)
    y = math.pi * delta
    if p.omega == 0:
        # pure detuning: a = exp(i y tau / 2), b = 0
        a = (0.5j * p.tau * y).exp()
        return UnitaryJet(a, Jet2.constant(0.0, K))
    x = (1.0 + eps) * (p.omega * math.pi)
    r = (x * x + y * y).sqrt()
    h = r * (0.5 * p.tau)
    sin_over_r = h.sin() / r
    a = h.cos() + 1j * y * sin_over_r
    b = -1j * cmath.exp(1j * p.phase) * x * sin_over_r
    return UnitaryJet(a, b)


def sequence_jet(s: CompositeSequence, K: int = DEFAULT_ORDER) -> UnitaryJet:
    """Jet of ``U_N ... U_1``, composed pulse by pulse (pulse 1 rightmost)."""
    cache = {}
    total = None
    for p in s.pulses:
        key = (p.omega, p.tau)
        if key not in cache:
            cache[key] = propagator_jet(Pulse(p.omega, p.tau, 0.0), K)
        pj = cache[key].with_phase(p.phase)
        total = pj if total is None else pj @ total
    return total


def sequence_derivative(s: CompositeSequence, m: int, n: int, K: int | None = None) -> np.ndarray:
    """``D_{m,n}`` of the composite propagator at the nominal point."""
    if K is None:
        K = max(DEFAULT_ORDER, m + n)
    if m < 0 or n < 0 or m + n > K:
        raise InvalidArgument(f"derivative order ({m}, {n}) exceeds jet order {K}")
    return sequence_jet(s, K).derivative(m, n)


def derivative_norms(s: CompositeSequence, orders, K: int | None = None) -> dict:
    """Frobenius norms of ``D_{m,n}`` for every ``(m, n)`` in ``orders``."""
    orders = list(orders)
    if K is None:
        K = max([DEFAULT_ORDER] + [m + n for m, n in orders])
    jet = sequence_jet(s, K)
    return {(m, n): float(np.linalg.norm(jet.derivative(m, n))) for m, n in orders}


def phase_batch_jet(phases, omegas=1.0, taus=1.0, K=2) -> UnitaryJet:
    """Sequence jet for a batch of phase vectors.

    ``phases`` has shape ``batch + (N,)``; amplitudes and durations are shared
    across the batch.  Used by the design search, which evaluates many phase
    sets per step.
    """
    phases = np.asarray(phases, dtype=float)
    N = phases.shape[-1]
    omegas = np.broadcast_to(np.asarray(omegas, dtype=float), (N,))
    taus = np.broadcast_to(np.asarray(taus, dtype=float), (N,))
    cache = {}
    total = None
    for k in range(N):
        key = (float(omegas[k]), float(taus[k]))
        if key not in cache:
            cache[key] = propagator_jet(Pulse(*key, 0.0), K)
        base = cache[key]
        pj = base.with_phase(phases[..., k])
        if total is None:
            # give the phase-independent a-jet the batch shape too
            total = UnitaryJet(base.a * np.ones(phases.shape[:-1]), pj.b)
        else:
            total = pj @ total
    return total
