"""Independent reference computations used by the tests.

Nothing here imports the package's propagator code: the matrix exponential is
a plain scaling-and-squaring Taylor sum and the Hamiltonian is written out in
Pauli matrices.
"""
import math

import numpy as np

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def expm_taylor(A, terms=30):
    """exp(A) by scaling and squaring with a truncated Taylor series."""
    norm = np.abs(A).sum(axis=1).max()
    s = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0 else 0
    B = A / (2 ** s)
    out = np.eye(A.shape[0], dtype=complex)
    term = np.eye(A.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ B / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def hamiltonian(omega, phase, eps, delta):
    """Drive Hamiltonian in units where T_ref = 1.

    Rabi frequency pi * omega * (1 + eps), detuning pi * delta; the drive phase
    enters as the transverse axis (cos phi, -sin phi) in this sign convention.
    """
    x = math.pi * omega * (1 + eps)
    y = math.pi * delta
    return 0.5 * (x * (math.cos(phase) * SX - math.sin(phase) * SY) - y * SZ)


def pulse_matrix(omega, tau, phase, eps=0.0, delta=0.0):
    return expm_taylor(-1j * tau * hamiltonian(omega, phase, eps, delta))


def sequence_matrix(omegas, taus, phases, eps=0.0, delta=0.0):
    U = I2.copy()
    for w, t, p in zip(omegas, taus, phases):
        U = pulse_matrix(w, t, p, eps, delta) @ U
    return U


def fidelity(U, G):
    return (abs(np.trace(U.conj().T @ G)) ** 2 + 2) / 6


def average_infidelity_loop(omegas, taus, phases, G, box, grid):
    """Direct double loop over the grid with the expm propagator."""
    (e0, e1), (d0, d1) = box
    ne, nd = grid
    es = [0.5 * (e0 + e1)] if ne == 1 else [e0 + (e1 - e0) * i / (ne - 1) for i in range(ne)]
    ds = [0.5 * (d0 + d1)] if nd == 1 else [d0 + (d1 - d0) * j / (nd - 1) for j in range(nd)]
    total = 0.0
    for e in es:
        for d in ds:
            total += 1 - fidelity(sequence_matrix(omegas, taus, phases, e, d), G)
    return total / (len(es) * len(ds))


def random_su2(rng):
    v = rng.normal(size=4)
    v /= np.linalg.norm(v)
    a = complex(v[0], v[1])
    b = complex(v[2], v[3])
    return np.array([[a, b], [-b.conjugate(), a.conjugate()]])


def random_unitary(rng):
    """Haar-ish U(2) matrix: SU(2) times a random global phase."""
    return np.exp(1j * rng.uniform(0, 2 * math.pi)) * random_su2(rng)


def expm_taylor_batch(A, terms=30):
    """Batched version of :func:`expm_taylor` for arrays of shape (n, 2, 2).

    Uses one common scaling exponent (the largest needed), which only costs
    extra squarings.
    """
    norm = np.abs(A).sum(axis=-1).max()
    s = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0 else 0
    B = A / (2 ** s)
    out = np.broadcast_to(np.eye(2, dtype=complex), A.shape).copy()
    term = out.copy()
    for k in range(1, terms):
        term = term @ B / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def hamiltonian_batch(omega, phase, eps, delta):
    x = np.pi * omega * (1 + eps)
    y = np.pi * delta
    H = 0.5 * (x[:, None, None] * (np.cos(phase)[:, None, None] * SX - np.sin(phase)[:, None, None] * SY)
               - y[:, None, None] * SZ)
    return H
