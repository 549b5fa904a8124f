"""
Independent reference implementations used only by the tests.

Everything here is built from definitions with explicit Python loops and
dense matrices, sharing no code with the package kernels.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def idx(m: int, x: int, y: int) -> int:
    return (x % m) * m + (y % m)


def cell_projector(m: int, offset: int) -> np.ndarray:
    """``sum_cells |u><u|`` with ``u`` = 1/2 on the four cell vertices."""
    N = m * m
    P = np.zeros((N, N))
    for ax in range(offset, m + offset, 2):
        for ay in range(offset, m + offset, 2):
            u = np.zeros(N)
            for dx in (0, 1):
                for dy in (0, 1):
                    u[idx(m, ax + dx, ay + dy)] = 0.5
            P += np.outer(u, u)
    return P


def reflection(m: int, offset: int) -> np.ndarray:
    return 2 * cell_projector(m, offset) - np.eye(m * m)


def oracle(m: int, marked=(0, 0)) -> np.ndarray:
    N = m * m
    e = np.zeros(N)
    e[idx(m, *marked)] = 1.0
    return 2 * np.outer(e, e) - np.eye(N)


def step_matrix(m: int, marked=(0, 0)) -> np.ndarray:
    Ue, Uo, Uw = reflection(m, 0), reflection(m, 1), oracle(m, marked)
    return Uo @ Uw @ Ue @ Uw


def u1_matrix(m: int) -> np.ndarray:
    Ue, Uw = reflection(m, 0), oracle(m)
    return Ue @ Uw @ Ue @ Uw


def u2_matrix(m: int) -> np.ndarray:
    return reflection(m, 1) @ reflection(m, 0)


SUBLATTICE = [(0, 0), (0, 1), (1, 0), (1, 1)]


def fourier_vector(m: int, k: int, l: int, branch: int) -> np.ndarray:
    """Staggered plane wave by explicit loops over the sublattice."""
    p, q = SUBLATTICE[branch]
    v = np.zeros(m * m, dtype=complex)
    w = np.exp(2j * np.pi / m)
    for x in range(p, m, 2):
        for y in range(q, m, 2):
            v[idx(m, x, y)] = (2 / m) * w ** (x * k + y * l)
    return v


def reduced_block(m: int, k: int, l: int, U2: np.ndarray | None = None) -> np.ndarray:
    """``R[b', b] = <psi^(b')|U_2|psi^(b)>`` from the dense walk."""
    if U2 is None:
        U2 = u2_matrix(m)
    basis = np.array([fourier_vector(m, k, l, b) for b in range(4)]).T
    return basis.conj().T @ U2 @ basis


def principal_alpha(U: np.ndarray) -> tuple[float, np.ndarray]:
    vals, vecs = np.linalg.eig(U)
    ph = np.angle(vals)
    pos = np.flatnonzero(ph > 1e-8)
    i = pos[np.argmin(ph[pos])]
    return float(ph[i]), vecs[:, i]


def b_minus_cx_loop(m: int) -> float:
    total = 0.0
    for k in range(m // 2):
        for l in range(m // 2):
            if (k, l) == (0, 0):
                continue
            ck, cl = math.cos(2 * math.pi * k / m), math.cos(2 * math.pi * l / m)
            total += 1 / (1 - ck * ck * cl * cl)
    return 2 * total / (m * m)


def b_minus_cx_m6() -> Fraction:
    # cos^2(pi/3) = cos^2(2pi/3) = 1/4; four axis blocks and four interior blocks
    axis = 4 * Fraction(1) / (1 - Fraction(1, 4))
    inner = 4 * Fraction(1) / (1 - Fraction(1, 16))
    return Fraction(2, 36) * (axis + inner)


def simulate_probs(m: int, steps: int, marked=(0, 0)) -> np.ndarray:
    """Success probabilities from repeated dense matrix-vector products."""
    U = step_matrix(m, marked)
    psi = np.full(m * m, 1 / m, dtype=complex)
    out = [abs(psi[idx(m, *marked)]) ** 2]
    for _ in range(steps):
        psi = U @ psi
        out.append(abs(psi[idx(m, *marked)]) ** 2)
    return np.array(out)


def r_squared(x, y) -> float:
    x, y = np.asarray(x, float), np.asarray(y, float)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return float(1 - resid @ resid / np.sum((y - y.mean()) ** 2))
