"""Derivative-cancellation design of symmetric pi-pulse sequences.

A symmetric sequence of ``2k - 1`` nominal pi pulses is described by its
half-phase vector ``(phi_1, ..., phi_k)``; the full train is the palindrome
``phi_1 ... phi_k ... phi_1``.  A design asks for the propagator to equal the
target at the nominal point and for a chosen set of mixed partials ``D_{m,n}``
to vanish there.  The residual is evaluated exactly through the jet engine and
driven to zero by a batched Levenberg-Marquardt search from many random starts.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .jets import phase_batch_jet
from .su2 import TWO_PI, CompositeSequence, InvalidArgument, target_gate, wrap_phase

log = logging.getLogger(__name__)

MERGE_DISTANCE = 1e-5


@dataclass(frozen=True)
class ConditionSet:
    """Derivative orders ``(m, n)`` to annihilate, kept sorted by (m + n, m)."""

    orders: tuple = ()

    def __post_init__(self):
        orders = tuple(sorted({(int(m), int(n)) for m, n in self.orders}, key=lambda o: (o[0] + o[1], o[0])))
        if len(orders) != len(tuple(self.orders)):
            raise InvalidArgument("condition orders must be distinct")
        for m, n in orders:
            if m < 0 or n < 0 or m + n < 1:
                raise InvalidArgument(f"invalid derivative order ({m}, {n})")
        object.__setattr__(self, "orders", orders)

    @property
    def max_order(self) -> int:
        return max((m + n for m, n in self.orders), default=0)

    def __iter__(self):
        return iter(self.orders)

    def __len__(self):
        return len(self.orders)


@dataclass(frozen=True)
class DesignProblem:
    n_pulses: int
    conditions: ConditionSet = field(default_factory=ConditionSet)
    target: str = "X"
    center_constraint: bool | None = None

    def __post_init__(self):
        if self.n_pulses < 1 or self.n_pulses % 2 == 0:
            raise InvalidArgument("n_pulses must be odd")
        if not isinstance(self.conditions, ConditionSet):
            object.__setattr__(self, "conditions", ConditionSet(tuple(self.conditions)))
        if self.center_constraint is None:
            # phi_3 = 2 phi_2 - 2 phi_1 is only derived for five pulses
            object.__setattr__(self, "center_constraint", self.n_pulses == 5)
        if self.center_constraint and self.n_pulses != 5:
            raise InvalidArgument("the center-phase constraint is only defined for five pulses")

    @property
    def k(self) -> int:
        """Number of distinct phases in the palindrome."""
        return (self.n_pulses + 1) // 2

    @property
    def n_free(self) -> int:
        return self.k - 1 if self.center_constraint else self.k


def palindrome(half) -> np.ndarray:
    half = np.asarray(half, dtype=float)
    return np.concatenate([half, half[..., -2::-1]], axis=-1)


def to_sequence(half, name="design", target="X") -> CompositeSequence:
    return CompositeSequence.from_phases(name, palindrome(half), 1.0, 1.0, target, symmetric=True)


def _expand_free(free, prob: DesignProblem):
    """Half-phase vectors from free parameters (applies the center constraint)."""
    if not prob.center_constraint:
        return free
    center = 2.0 * free[..., 1] - 2.0 * free[..., 0]
    return np.concatenate([free, center[..., None]], axis=-1)


def _residual_batch(half, prob: DesignProblem) -> np.ndarray:
    half = np.asarray(half, dtype=float)
    K = prob.conditions.max_order
    jet = phase_batch_jet(palindrome(half), 1.0, 1.0, K=K)
    G = target_gate(prob.target)
    parts = [jet.a.const - G[0, 0], jet.b.const - G[0, 1]]
    for m, n in prob.conditions:
        D = jet.derivative(m, n)
        parts.extend(D[..., i, j] for i in range(2) for j in range(2))
    z = np.stack([np.broadcast_to(p, half.shape[:-1]) for p in parts], axis=-1)
    return np.concatenate([z.real, z.imag], axis=-1)


def design_residual(phases, prob: DesignProblem) -> np.ndarray:
    """Residual vector of a half-phase vector; zero iff it solves the design.

    Layout: real then imaginary parts of ``U(0,0) - G`` (first row) followed by
    every entry of ``D_{m,n} U`` for each condition.
    """
    phases = np.asarray(phases, dtype=float)
    if phases.shape[-1] != prob.k:
        raise InvalidArgument(f"expected {prob.k} phases, got {phases.shape[-1]}")
    return _residual_batch(phases, prob)


def _free_residual(free, prob):
    return _residual_batch(_expand_free(free, prob), prob)


def _jacobian(free, prob, step=1e-6):
    """Central-difference Jacobian, batched: ``(B, R, p)``."""
    B, p = free.shape
    shifts = np.eye(p) * step
    stacked = np.concatenate([free[:, None, :] + shifts, free[:, None, :] - shifts], axis=1)
    r = _free_residual(stacked.reshape(B * 2 * p, p), prob).reshape(B, 2 * p, -1)
    return np.transpose((r[:, :p] - r[:, p:]) / (2 * step), (0, 2, 1))


def levenberg_marquardt(free0, prob, max_iter=500, tol=1e-9, lam0=1e-3, lam_bounds=(1e-8, 1e4)):
    """Batched damped least squares on ``||residual||^2``.

    Every row of ``free0`` is an independent start with its own damping.
    Returns the final parameters and the sup-norm of their residuals.
    """
    x = np.array(free0, dtype=float, copy=True)
    B, p = x.shape
    lam = np.full(B, lam0)
    r = _free_residual(x, prob)
    cost = np.sum(r * r, axis=1)
    active = np.max(np.abs(r), axis=1) >= 1e-3 * tol
    lo, hi = lam_bounds
    eye = np.eye(p)
    for it in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        J = _jacobian(x[idx], prob)
        ri = r[idx]
        JT = np.transpose(J, (0, 2, 1))
        A = JT @ J + lam[idx, None, None] * eye
        g = np.einsum("bpr,br->bp", JT, ri)
        step = np.linalg.solve(A, -g[..., None])[..., 0]
        trial = x[idx] + step
        r_trial = _free_residual(trial, prob)
        cost_trial = np.sum(r_trial * r_trial, axis=1)
        better = cost_trial < cost[idx]
        good = idx[better]
        x[good] = trial[better]
        r[good] = r_trial[better]
        cost[good] = cost_trial[better]
        lam[good] = np.maximum(lam[good] * 0.1, lo)
        bad = idx[~better]
        lam[bad] = np.minimum(lam[bad] * 10.0, hi)
        # a start that is stuck at maximal damping has stalled
        stalled = bad[lam[bad] >= hi]
        tiny = idx[np.max(np.abs(step), axis=1) < 1e-15]
        active[stalled] = False
        active[tiny] = False
        active[idx] &= np.max(np.abs(r[idx]), axis=1) >= 1e-3 * tol
    return x, np.max(np.abs(r), axis=1)


def _circ_dist(u, v):
    d = np.abs(np.remainder(np.asarray(u) - np.asarray(v) + math.pi, TWO_PI) - math.pi)
    return float(np.max(d)) if d.size else 0.0


def canonical(half) -> np.ndarray:
    """Representative of ``{phi, -phi}``: the lexicographically smaller wrap."""
    pos = np.asarray(wrap_phase(np.asarray(half, dtype=float)))
    neg = np.asarray(wrap_phase(-np.asarray(half, dtype=float)))
    key = lambda v: tuple(np.round(v, 9))  # noqa: E731
    return pos if key(pos) <= key(neg) else neg


def same_solution(u, v, distance=MERGE_DISTANCE) -> bool:
    """True when ``u`` equals ``v`` or its mirror ``-v`` (mod 2 pi)."""
    u = np.asarray(u)
    v = np.asarray(v)
    return _circ_dist(u, v) < distance or _circ_dist(u, -v) < distance


def dedupe_solutions(solutions, distance=MERGE_DISTANCE) -> list:
    """Merge mirror-equivalent and nearby solutions.

    ``phi`` and ``-phi`` give mirrored landscapes and are merged;
    ``phi`` and ``phi`` with pi added to one phase stay distinct.
    """
    reps = []
    for sol in solutions:
        c = canonical(sol)
        if not any(same_solution(c, r, distance) for r in reps):
            reps.append(c)
    return sorted(reps, key=lambda v: tuple(np.round(v, 9)))


def design_symmetric(prob: DesignProblem, starts: int = 256, seed: int = 0, tol: float = 1e-9,
                     max_iter: int = 500, rank: bool = False) -> list:
    """Multi-start search for half-phase vectors solving ``prob``.

    Starts are uniform in ``[0, 2 pi)`` from ``numpy.random.default_rng(seed)``.
    Returns the distinct solutions with ``||residual||_inf < tol``, sorted
    canonically, or ranked by robust fraction when ``rank`` is set.
    """
    if starts < 1:
        raise InvalidArgument("starts must be >= 1")
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(0.0, TWO_PI, size=(starts, prob.n_free))
    x, res = levenberg_marquardt(x0, prob, max_iter=max_iter, tol=tol)
    ok = res < tol
    log.info("design n=%d conditions=%s: %d/%d starts converged", prob.n_pulses,
             prob.conditions.orders, int(ok.sum()), starts)
    sols = dedupe_solutions(list(_expand_free(x[ok], prob)))
    if rank:
        sols = rank_solutions(sols, prob.target)
    return sols


def rank_solutions(solutions, target="X", level=1e-4, half_width=0.3, resolution=101):
    """Order solutions by descending robust fraction over a square error box."""
    from .landscape import eval_grid, robust_fraction

    G = target_gate(target)
    box = ((-half_width, half_width), (-half_width, half_width))
    scores = [robust_fraction(eval_grid(to_sequence(s, target=target), G, box, (resolution, resolution)), level)
              for s in solutions]
    order = sorted(range(len(solutions)), key=lambda i: -scores[i])
    return [solutions[i] for i in order]


def refine(half, conditions, target="X", tol=1e-12, max_iter=200):
    """Polish a rounded half-phase vector onto the nearby exact solution.

    Returns the refined phases and the residual sup-norm.
    """
    half = np.asarray(half, dtype=float)
    prob = DesignProblem(2 * half.size - 1, ConditionSet(tuple(conditions)), target, center_constraint=False)
    x, res = levenberg_marquardt(half[None, :], prob, max_iter=max_iter, tol=tol)
    return x[0], float(res[0])
