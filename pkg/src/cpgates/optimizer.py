"""Average-infidelity minimisation by multi-start projected Adam.

The parameter vector holds the free phases followed, when amplitudes are
varied, by the free amplitudes.  For symmetric specs the free parameters are
the first ``ceil(N / 2)`` pulses and are mirrored onto the palindrome.

All starts are advanced together as rows of one array; every operation is
row-wise, so a start's trajectory does not depend on which other starts share
its batch.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .su2 import (TWO_PI, CompositeSequence, InvalidArgument, ck_overlap, ck_product, error_grid,
                  target_gate, wrap_phase)

log = logging.getLogger(__name__)

BETA1 = 0.9
BETA2 = 0.999
ADAM_EPS = 1e-8
PLATEAU_WINDOW = 200
PLATEAU_TOL = 1e-12


@dataclass(frozen=True)
class OptimizerSpec:
    n_pulses: int
    target: str = "X"
    symmetric: bool = False
    vary_amplitudes: bool = True
    amplitude_bounds: tuple = (0.0, 2.0)
    omega: float = 1.0  # fixed amplitude when amplitudes are not varied
    tau: float = 1.0
    box: tuple = ((-0.15, 0.15), (-0.15, 0.15))
    grid: tuple = (8, 8)
    learning_rate: float = 1e-3
    clip_norm: float = 1.0
    starts: int = 64
    max_iters: int = 20000
    seed: int = 0
    area_penalty: float = 0.0

    def __post_init__(self):
        lo, hi = self.amplitude_bounds
        if self.n_pulses < 1:
            raise InvalidArgument("n_pulses must be >= 1")
        if lo < 0 or hi < lo:
            raise InvalidArgument(f"invalid amplitude bounds {self.amplitude_bounds}")
        if min(self.grid) < 1:
            raise InvalidArgument("grid dimensions must be >= 1")
        if self.learning_rate <= 0:
            raise InvalidArgument("learning_rate must be > 0")
        if self.tau <= 0:
            raise InvalidArgument("tau must be > 0")
        if self.starts < 1 or self.max_iters < 0:
            raise InvalidArgument("starts must be >= 1 and max_iters >= 0")
        if self.area_penalty < 0:
            raise InvalidArgument("area_penalty must be >= 0")
        target_gate(self.target)

    @property
    def n_free(self) -> int:
        return (self.n_pulses + 1) // 2 if self.symmetric else self.n_pulses

    @property
    def n_params(self) -> int:
        return self.n_free * (2 if self.vary_amplitudes else 1)

    @property
    def pulse_map(self) -> np.ndarray:
        """Index of the free parameter driving each pulse."""
        n = self.n_pulses
        if not self.symmetric:
            return np.arange(n)
        return np.array([min(k, n - 1 - k) for k in range(n)])


@dataclass
class OptResult:
    params: np.ndarray
    objective: float
    start_objectives: np.ndarray
    trace: np.ndarray
    best_start: int
    iterations: np.ndarray
    spec: OptimizerSpec
    metadata: dict = field(default_factory=dict)

    @property
    def phases(self) -> np.ndarray:
        return self.params[: self.spec.n_free]

    @property
    def amplitudes(self) -> np.ndarray:
        if self.spec.vary_amplitudes:
            return self.params[self.spec.n_free:]
        return np.full(self.spec.n_free, self.spec.omega)

    def sequence(self, name="optimized") -> CompositeSequence:
        return params_to_sequence(self.params, self.spec, name)


def _unpack(params, spec: OptimizerSpec):
    """Per-pulse (omega, phase) arrays with the start axis first."""
    params = np.asarray(params, dtype=float)
    if params.shape[-1] != spec.n_params:
        raise InvalidArgument(f"expected {spec.n_params} parameters, got {params.shape[-1]}")
    idx = spec.pulse_map
    nf = spec.n_free
    phases = params[..., :nf][..., idx]
    if spec.vary_amplitudes:
        omegas = params[..., nf:][..., idx]
    else:
        omegas = np.full(phases.shape, spec.omega)
    return omegas, phases


def params_to_sequence(params, spec: OptimizerSpec, name="optimized") -> CompositeSequence:
    omegas, phases = _unpack(params, spec)
    return CompositeSequence.from_phases(name, phases, omegas, spec.tau, spec.target)


def sequence_to_params(s: CompositeSequence, spec: OptimizerSpec) -> np.ndarray:
    """Inverse of :func:`params_to_sequence` (first occurrence of each free pulse)."""
    if len(s) != spec.n_pulses:
        raise InvalidArgument("sequence length does not match the spec")
    nf = spec.n_free
    out = [s.phases[:nf]]
    if spec.vary_amplitudes:
        out.append(s.omegas[:nf])
    return np.concatenate(out)


def _grid_points(spec):
    eps, delta = error_grid(spec.box, spec.grid)
    E, D = np.meshgrid(eps, delta, indexing="ij")
    return E.ravel(), D.ravel()


def _pulse_terms(omega, phase, tau, eps, delta, need_grad):
    """Cayley-Klein pair of one pulse per (start, grid point) and its parameter derivatives."""
    x = (omega[:, None] * math.pi) * (1.0 + eps[None, :])
    y = math.pi * delta[None, :]
    r = np.hypot(x, y)
    h = 0.5 * tau * r
    sin_h, cos_h = np.sin(h), np.cos(h)
    small = h < 1e-4
    safe_r = np.where(small, 1.0, r)
    s1 = np.where(small, 0.5 * tau * (1 - h * h / 6 + h ** 4 / 120), sin_h / safe_r)
    e = np.exp(1j * phase)[:, None]
    a = cos_h + 1j * y * s1
    b0 = -1j * x * s1
    b = b0 * e
    if not need_grad:
        return a, b, None
    # s3 = (r (tau/2) cos h - sin h) / r^3
    h_safe = np.where(small, 1.0, h)
    s3 = np.where(small, (tau / 2) ** 3 * (-1 / 3 + h * h / 30 - h ** 4 / 840),
                  (tau / 2) ** 3 * (h_safe * cos_h - sin_h) / h_safe ** 3)
    dx = math.pi * (1.0 + eps[None, :])
    da_dw = dx * (-0.5 * tau * x * s1 + 1j * y * x * s3)
    db_dw = dx * (-1j * e * (s1 + x * x * s3))
    db_dphi = 1j * b
    return a, b, (da_dw, db_dw, db_dphi)


def _evaluate(params, spec: OptimizerSpec, need_grad=True):
    """Objective and gradient for a batch of parameter vectors ``(S, P)``."""
    params = np.atleast_2d(np.asarray(params, dtype=float))
    omegas, phases = _unpack(params, spec)
    eps, delta = _grid_points(spec)
    G = target_gate(spec.target)
    N = spec.n_pulses
    terms = [_pulse_terms(omegas[:, k], phases[:, k], spec.tau, eps, delta, need_grad) for k in range(N)]
    # prefixes P_k = U_k ... U_1
    pa = [np.ones_like(terms[0][0])]
    pb = [np.zeros_like(terms[0][1])]
    for a, b, _ in terms:
        na, nb = ck_product(a, b, pa[-1], pb[-1])
        pa.append(na)
        pb.append(nb)
    t = ck_overlap(pa[-1], pb[-1], G)
    infid = 1.0 - (t.real ** 2 + t.imag ** 2 + 2.0) / 6.0
    area = np.sum(omegas, axis=1) * spec.tau
    obj = np.mean(infid, axis=1) + spec.area_penalty * area
    if not need_grad:
        return obj, None

    nf = spec.n_free
    grad = np.zeros_like(params)
    idx = spec.pulse_map
    sa, sb = np.ones_like(t), np.zeros_like(t)  # suffix U_N ... U_{k+1}
    tc = np.conj(t)
    for k in range(N - 1, -1, -1):
        a, b, (da_dw, db_dw, db_dphi) = terms[k]
        # phase derivative: dU_k has da = 0, db = i b
        ga, gb = ck_product(sa, sb, *ck_product(0.0, db_dphi, pa[k], pb[k]))
        dphi = -np.mean(np.real(tc * ck_overlap(ga, gb, G)), axis=1) / 3.0
        grad[:, idx[k]] += dphi
        if spec.vary_amplitudes:
            ga, gb = ck_product(sa, sb, *ck_product(da_dw, db_dw, pa[k], pb[k]))
            dw = -np.mean(np.real(tc * ck_overlap(ga, gb, G)), axis=1) / 3.0
            grad[:, nf + idx[k]] += dw + spec.area_penalty * spec.tau
        sa, sb = ck_product(sa, sb, a, b)
    return obj, grad


def objective(params, spec: OptimizerSpec) -> float:
    """Average infidelity over the spec's grid, plus the optional area penalty."""
    obj, _ = _evaluate(params, spec, need_grad=False)
    return float(obj[0])


def objective_gradient(params, spec: OptimizerSpec) -> np.ndarray:
    _, grad = _evaluate(params, spec)
    return grad[0]


def finite_difference_gradient(params, spec: OptimizerSpec, step=1e-6) -> np.ndarray:
    """Central-difference gradient, for verifying :func:`objective_gradient`."""
    params = np.asarray(params, dtype=float)
    shifts = np.eye(params.size) * step
    obj, _ = _evaluate(np.concatenate([params + shifts, params - shifts]), spec, need_grad=False)
    return (obj[: params.size] - obj[params.size:]) / (2 * step)


def project(params, spec: OptimizerSpec) -> np.ndarray:
    """Wrap phases to ``[0, 2 pi)`` and clamp amplitudes to their bounds."""
    params = np.array(params, dtype=float, copy=True)
    nf = spec.n_free
    params[..., :nf] = wrap_phase(params[..., :nf])
    if spec.vary_amplitudes:
        lo, hi = spec.amplitude_bounds
        params[..., nf:] = np.clip(params[..., nf:], lo, hi)
    return params


def initial_params(spec: OptimizerSpec, index: int) -> np.ndarray:
    """Uniform random start ``index``; its generator is seeded by ``(seed, index)``."""
    rng = np.random.default_rng([spec.seed, index])
    parts = [rng.uniform(0.0, TWO_PI, spec.n_free)]
    if spec.vary_amplitudes:
        lo, hi = spec.amplitude_bounds
        parts.append(rng.uniform(lo, hi, spec.n_free))
    return project(np.concatenate(parts), spec)


def _run_batch(spec: OptimizerSpec, indices):
    theta = np.stack([initial_params(spec, i) for i in indices])
    S = theta.shape[0]
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    best = np.full(S, np.inf)
    best_theta = theta.copy()
    checkpoint = np.full(S, np.inf)
    active = np.ones(S, dtype=bool)
    iterations = np.zeros(S, dtype=int)
    trace = np.full((spec.max_iters + 1, S), np.nan)

    for it in range(spec.max_iters):
        rows = np.flatnonzero(active)
        if rows.size == 0:
            break
        obj, grad = _evaluate(theta[rows], spec)
        improved = obj < best[rows]
        best[rows[improved]] = obj[improved]
        best_theta[rows[improved]] = theta[rows[improved]]
        trace[it, rows] = best[rows]
        iterations[rows] = it + 1

        norm = np.linalg.norm(grad, axis=1, keepdims=True)
        grad = grad * np.minimum(1.0, spec.clip_norm / np.maximum(norm, 1e-300))
        m[rows] = BETA1 * m[rows] + (1 - BETA1) * grad
        v[rows] = BETA2 * v[rows] + (1 - BETA2) * grad * grad
        m_hat = m[rows] / (1 - BETA1 ** (it + 1))
        v_hat = v[rows] / (1 - BETA2 ** (it + 1))
        theta[rows] = project(theta[rows] - spec.learning_rate * m_hat / (np.sqrt(v_hat) + ADAM_EPS), spec)

        if (it + 1) % PLATEAU_WINDOW == 0:
            stalled = checkpoint[rows] - best[rows] < PLATEAU_TOL
            active[rows[stalled]] = False
            checkpoint[rows] = best[rows]

    # the last iterate (or the initial point when max_iters = 0) is a candidate too
    obj, _ = _evaluate(theta, spec, need_grad=False)
    improved = obj < best
    best[improved] = obj[improved]
    best_theta[improved] = theta[improved]
    final_row = np.minimum(iterations, spec.max_iters)
    trace[final_row, np.arange(S)] = best
    return best, best_theta, trace, iterations


def optimize(spec: OptimizerSpec, workers: int | None = None, batch_size: int | None = None) -> OptResult:
    """Multi-start projected Adam on the average infidelity.

    Starts are independent; ``workers``/``batch_size`` only change how they are
    scheduled, not the result.  Ties between starts go to the lower index.
    """
    indices = np.arange(spec.starts)
    if batch_size is None:
        batch_size = spec.starts if not workers or workers <= 1 else max(1, math.ceil(spec.starts / workers))
    batches = [indices[i: i + batch_size] for i in range(0, spec.starts, batch_size)]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda ix: _run_batch(spec, ix), batches))
    else:
        results = [_run_batch(spec, ix) for ix in batches]

    best = np.concatenate([r[0] for r in results])
    best_theta = np.concatenate([r[1] for r in results])
    iterations = np.concatenate([r[3] for r in results])
    winner = int(np.argmin(best))  # argmin returns the first (lowest index) minimum
    b = winner
    for r in results:
        n = r[0].size
        if b < n:
            trace = r[2][:, b]
            break
        b -= n
    trace = _forward_fill(trace[: int(iterations[winner]) + 1])
    params = best_theta[winner]
    value = objective(params, spec)
    log.info("optimize N=%d target=%s: best objective %.6e from start %d", spec.n_pulses, spec.target,
             value, winner)
    meta = {"beta1": BETA1, "beta2": BETA2, "adam_eps": ADAM_EPS, "plateau_window": PLATEAU_WINDOW,
            "plateau_tol": PLATEAU_TOL}
    return OptResult(params, value, best, trace, winner, iterations, spec, meta)


def _forward_fill(trace):
    out = np.array(trace, dtype=float)
    for i in range(1, out.size):
        if np.isnan(out[i]):
            out[i] = out[i - 1]
    return out


def spec_dict(spec: OptimizerSpec) -> dict:
    d = asdict(spec)
    d["box"] = [list(r) for r in spec.box]
    d["grid"] = list(spec.grid)
    d["amplitude_bounds"] = list(spec.amplitude_bounds)
    return d
