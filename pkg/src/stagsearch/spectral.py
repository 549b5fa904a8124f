"""
Block diagonalization of the oracle-free walk ``U_2 = U_o U_e``.

The staggered Fourier vectors ``psi_kl^(b)`` (one plane wave per
sublattice ``b`` in ``00, 01, 10, 11``) span 4-dimensional subspaces that
``U_2`` leaves invariant. On each one it acts as a 4x4 unitary with
eigenvalues ``1, 1, exp(+i theta), exp(-i theta)`` where
``cos theta = 2 cos^2(k~) cos^2(l~) - 1`` and ``k~ = 2 pi k / m``.

Everything here assumes the marked vertex is the origin; the torus is
translation invariant so this costs no generality.

Conventions
-----------
Block eigenvectors are stored as rows ``w[b]`` with ``b = 0..3``:
``w[0], w[1]`` for eigenvalue 1, ``w[2]`` for ``exp(i theta)`` and ``w[3]``
for ``exp(-i theta)``. ``w[3]`` is ``w[2]`` with ``epsilon`` negated, which
equals ``w[2]`` reversed. Downstream sums use the conjugate pair
``v_plus = v^(2)``, ``v_minus = conj(v_plus)``; ``v_minus`` lives in block
``(-k, -l)`` and is proportional to that block's ``v^(3)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np
from numpy.typing import NDArray

from .errors import NumericalError
from .grid import GridSpec, StateVector

__all__ = [
    "SUBLATTICES",
    "FourierBlock",
    "BlockTable",
    "Psi1Decomposition",
    "fourier_basis_vector",
    "staggered_fourier",
    "inverse_staggered_fourier",
    "build_reduced",
    "block_eigensystem",
    "overlap_00",
    "block_eigenvector",
    "block_table",
    "iter_blocks",
    "psi1_vector",
    "psi2_vector",
    "psi1_reduced",
    "decompose_psi1",
]

SUBLATTICES = ((0, 0), (0, 1), (1, 0), (1, 1))
_DEGENERATE = 1e-14
_SQ3 = np.sqrt(3.0)
_SQ6 = np.sqrt(6.0)


# ---------------------------------------------------------------------------
# staggered Fourier transform


def fourier_basis_vector(grid: GridSpec, k: int, l: int, branch: int) -> StateVector:
    """Plane wave ``psi_kl^(branch)`` supported on one sublattice.

    Amplitude ``(2/m) * omega^(x k + y l)`` on every vertex ``(x, y)`` with
    ``(x mod 2, y mod 2) = SUBLATTICES[branch]``, ``omega = exp(2 pi i / m)``.
    """
    h = grid.half
    if not (0 <= k < h and 0 <= l < h):
        raise IndexError(f"block ({k}, {l}) outside [0, {h})^2")
    if branch not in range(4):
        raise ValueError(f"branch must be 0..3, got {branch}")
    m = grid.side
    p, q = SUBLATTICES[branch]
    x = np.arange(p, m, 2)[:, None]
    y = np.arange(q, m, 2)[None, :]
    g = np.zeros((m, m), dtype=np.complex128)
    g[p::2, q::2] = (2.0 / m) * np.exp(2j * np.pi * ((x * k + y * l) % m) / m)
    return StateVector(g.reshape(-1), grid)


def _sublattice_phase(m: int, h: int, p: int, q: int) -> NDArray[np.complex128]:
    k = np.arange(h)[:, None]
    l = np.arange(h)[None, :]
    return np.exp(2j * np.pi * ((p * k + q * l) % m) / m)


def staggered_fourier(state: StateVector) -> NDArray[np.complex128]:
    """Coefficients ``<psi_kl^(b)|state>`` as an ``(h, h, 4)`` array."""
    m, h = state.grid.side, state.grid.half
    g = state.as_grid()
    out = np.empty((h, h, 4), dtype=np.complex128)
    for b, (p, q) in enumerate(SUBLATTICES):
        out[:, :, b] = (2.0 / m) * np.conj(_sublattice_phase(m, h, p, q)) * np.fft.fft2(g[p::2, q::2])
    return out


def inverse_staggered_fourier(grid: GridSpec, coeffs: NDArray[np.complex128]) -> StateVector:
    """Full-space vector ``sum_kl sum_b coeffs[k, l, b] psi_kl^(b)``."""
    m, h = grid.side, grid.half
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    if coeffs.shape != (h, h, 4):
        raise ValueError(f"expected coefficient array of shape {(h, h, 4)}, got {coeffs.shape}")
    g = np.empty((m, m), dtype=np.complex128)
    for b, (p, q) in enumerate(SUBLATTICES):
        g[p::2, q::2] = (2.0 / m) * h * h * np.fft.ifft2(coeffs[:, :, b] * _sublattice_phase(m, h, p, q))
    return StateVector(g.reshape(-1), grid)


# ---------------------------------------------------------------------------
# closed forms, vectorized over blocks


def _reduced_matrix(m: int, k, l) -> NDArray[np.complex128]:
    """Reduced 4x4 matrix of ``U_2`` on the ``(k, l)`` block; broadcasts over k, l."""
    k = np.asarray(k)
    l = np.asarray(l)
    kt, lt = 2 * np.pi * k / m, 2 * np.pi * l / m
    ck, sk, cl, sl = np.cos(kt), np.sin(kt), np.cos(lt), np.sin(lt)
    wk = np.exp(2j * np.pi * (k % m) / m)
    wl = np.exp(2j * np.pi * (l % m) / m)
    cc, sc, cs, ss = ck * cl, sk * cl, ck * sl, sk * sl
    R = np.empty(np.broadcast(k, l).shape + (4, 4), dtype=np.complex128)
    R[..., 0, 0] = cc / (wk * wl)
    R[..., 0, 1] = sc / (1j * wk)
    R[..., 0, 2] = cs / (1j * wl)
    R[..., 0, 3] = ss
    R[..., 1, 0] = sc / (1j * wk)
    R[..., 1, 1] = wl * cc / wk
    R[..., 1, 2] = -ss
    R[..., 1, 3] = 1j * wl * cs
    R[..., 2, 0] = cs / (1j * wl)
    R[..., 2, 1] = -ss
    R[..., 2, 2] = wk * cc / wl
    R[..., 2, 3] = 1j * wk * sc
    R[..., 3, 0] = ss
    R[..., 3, 1] = 1j * wl * cs
    R[..., 3, 2] = 1j * wk * sc
    R[..., 3, 3] = wk * wl * cc
    return R


def _pair_radicands(c, s, other_sin):
    """Return ``(c - s, c + s)`` given ``c^2 - s^2 = other_sin^2``.

    The smaller factor is recovered as ``other_sin^2 / (c + |s|)`` to avoid
    cancellation when it vanishes.
    """
    big = c + np.abs(s)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(big > 0, other_sin**2 / np.where(big > 0, big, 1.0), 0.0)
    minus = np.where(s >= 0, small, big)
    plus = np.where(s >= 0, big, small)
    return minus, plus


def _closed_form(m: int, k, l) -> dict:
    """All closed-form block quantities, vectorized over ``k, l``."""
    k = np.asarray(k)
    l = np.asarray(l)
    kt, lt = 2 * np.pi * k / m, 2 * np.pi * l / m
    ck, sk, cl, sl = np.cos(kt), np.sin(kt), np.cos(lt), np.sin(lt)
    cc = ck * cl
    c = np.sqrt(np.maximum(1.0 - cc * cc, 0.0))
    eps = np.where(cc >= 0, 1.0, -1.0)
    theta = 2.0 * np.arctan2(c, np.abs(cc))
    diag = k == l
    origin = (k == 0) & (l == 0)

    c_plus = np.sqrt(np.maximum((1 + cc) * (1 - np.cos(kt - lt)), 0.0))
    c_minus = np.sqrt(np.maximum((1 - cc) * (1 + np.cos(kt - lt)), 0.0))
    generic = ~diag
    if np.any(generic & (np.minimum(c_plus, c_minus) < _DEGENERATE)) or np.any(
        ~origin & (c < _DEGENERATE)
    ):
        raise NumericalError(f"degenerate block normalization at side {m}; is side = 2 (mod 4)?")

    shape = np.broadcast(k, l).shape
    w = np.zeros(shape + (4, 4))
    safe_cp = np.where(generic, c_plus, 1.0)
    safe_cm = np.where(generic, c_minus, 1.0)
    d = np.sin(kt - lt)
    w0_gen = np.stack([d, sl - sk, sl - sk, d], axis=-1) / (2 * safe_cp)[..., None]
    w1_gen = np.stack([-d, sk + sl, -sk - sl, d], axis=-1) / (2 * safe_cm)[..., None]
    nk = np.sqrt(1 + ck * ck)
    w0_diag = np.stack([np.ones_like(ck), -ck, -ck, np.ones_like(ck)], axis=-1) / (np.sqrt(2) * nk)[..., None]
    w1_diag = np.broadcast_to(np.array([0.0, 1.0, -1.0, 0.0]) / np.sqrt(2), shape + (4,))
    w[..., 0, :] = np.where(diag[..., None], w0_diag, w0_gen)
    w[..., 1, :] = np.where(diag[..., None], w1_diag, w1_gen)

    # eigenvalue exp(+i theta); epsilon negation gives exp(-i theta)
    r1, r2 = _pair_radicands(c, eps * sk * cl, sl)
    r3, r4 = _pair_radicands(c, eps * ck * sl, sk)
    s1, s2, s3, s4 = np.sqrt(r1), np.sqrt(r2), np.sqrt(r3), np.sqrt(r4)
    safe_c = np.where(origin, 1.0, c)
    w2_gen = np.stack([-eps * s1 * s3, s1 * s4, s2 * s3, eps * s2 * s4], axis=-1) / (2 * safe_c)[..., None]
    w2_diag = np.stack([ck - eps * nk, np.ones_like(ck), np.ones_like(ck), ck + eps * nk], axis=-1) / (2 * nk)[
        ..., None
    ]
    w[..., 2, :] = np.where(diag[..., None], w2_diag, w2_gen)
    w[..., 3, :] = w[..., 2, ::-1]
    w[origin] = np.eye(4)

    return {
        "k_tilde": kt,
        "l_tilde": lt,
        "theta": np.where(origin, 0.0, theta),
        "epsilon": eps,
        "c": c,
        "c_plus": c_plus,
        "c_minus": c_minus,
        "w": w,
        "origin": origin,
        "diag": diag,
    }


# ---------------------------------------------------------------------------
# single-block API


@dataclass(frozen=True)
class FourierBlock:
    """Reduced action of ``U_2`` on one staggered Fourier block.

    ``eigvecs`` rows are ``w^(0..3)`` once :func:`block_eigensystem` has run;
    ``eigvals`` matches them as ``(1, 1, e^{i theta}, e^{-i theta})``.
    """

    side: int
    k: int
    l: int
    k_tilde: float
    l_tilde: float
    reduced: NDArray[np.complex128] = field(repr=False)
    theta: float
    epsilon: float
    c: float
    c_plus: float
    c_minus: float
    eigvecs: NDArray[np.float64] | None = field(default=None, repr=False)
    eigvals: NDArray[np.complex128] | None = field(default=None, repr=False)
    is_identity: bool = False


def build_reduced(grid: GridSpec, k: int, l: int) -> FourierBlock:
    h = grid.half
    if not (0 <= k < h and 0 <= l < h):
        raise IndexError(f"block ({k}, {l}) outside [0, {h})^2")
    m = grid.side
    kt, lt = 2 * np.pi * k / m, 2 * np.pi * l / m
    cc = np.cos(kt) * np.cos(lt)
    c = float(np.sqrt(max(1.0 - cc * cc, 0.0)))
    return FourierBlock(
        side=m,
        k=k,
        l=l,
        k_tilde=kt,
        l_tilde=lt,
        reduced=_reduced_matrix(m, k, l),
        theta=float(2.0 * np.arctan2(c, abs(cc))),
        epsilon=1.0 if cc >= 0 else -1.0,
        c=c,
        c_plus=float(np.sqrt(max((1 + cc) * (1 - np.cos(kt - lt)), 0.0))),
        c_minus=float(np.sqrt(max((1 - cc) * (1 + np.cos(kt - lt)), 0.0))),
        is_identity=(k, l) == (0, 0),
    )


def block_eigensystem(block: FourierBlock) -> FourierBlock:
    """Populate the closed-form eigenvectors of a block.

    The ``(0, 0)`` block is the identity; it is returned with
    ``is_identity`` set, the standard basis as eigenvectors and all four
    eigenvalues equal to 1.
    """
    if block.is_identity:
        return replace(block, eigvecs=np.eye(4), eigvals=np.ones(4, dtype=np.complex128), theta=0.0)
    cf = _closed_form(block.side, block.k, block.l)
    t = float(cf["theta"])
    vals = np.array([1.0, 1.0, np.exp(1j * t), np.exp(-1j * t)])
    return replace(block, eigvecs=np.array(cf["w"]), eigvals=vals)


def overlap_00(block: FourierBlock, branch: int) -> complex:
    """``<00|v_kl^(branch)>`` for the full-space eigenvector of a block.

    Only the even-even plane wave touches the origin, with amplitude
    ``2/sqrt(N)``, so this is ``(2/m) * w^(branch)[0]``; branches 0 and 1
    use the explicit sine formulas.
    """
    if branch not in range(4):
        raise ValueError(f"branch must be 0..3, got {branch}")
    m = block.side
    if block.is_identity:
        return 2.0 / m if branch == 0 else 0.0
    if branch == 0:
        if block.k == block.l:
            return np.sqrt(2) / (m * np.sqrt(1 + np.cos(block.k_tilde) ** 2))
        return np.sin(block.k_tilde - block.l_tilde) / (block.c_plus * m)
    if branch == 1:
        if block.k == block.l:
            return 0.0
        return np.sin(block.l_tilde - block.k_tilde) / (block.c_minus * m)
    if block.eigvecs is None:
        block = block_eigensystem(block)
    return complex(2.0 / m * block.eigvecs[branch, 0])


def block_eigenvector(grid: GridSpec, block: FourierBlock, branch: int) -> StateVector:
    """Full-space eigenvector ``v_kl^(branch) = sum_b w[branch, b] psi_kl^(b)``."""
    if block.eigvecs is None:
        block = block_eigensystem(block)
    coeffs = np.zeros((grid.half, grid.half, 4), dtype=np.complex128)
    coeffs[block.k, block.l] = block.eigvecs[branch]
    return inverse_staggered_fourier(grid, coeffs)


def iter_blocks(grid: GridSpec) -> Iterator[FourierBlock]:
    """All populated blocks in row-major ``(k, l)`` order."""
    for k in range(grid.half):
        for l in range(grid.half):
            yield block_eigensystem(build_reduced(grid, k, l))


# ---------------------------------------------------------------------------
# all blocks at once


@dataclass(frozen=True)
class BlockTable:
    """Closed-form data for every block of a grid, indexed ``[k, l]``."""

    grid: GridSpec
    theta: NDArray[np.float64]
    epsilon: NDArray[np.float64]
    c: NDArray[np.float64]
    c_plus: NDArray[np.float64]
    c_minus: NDArray[np.float64]
    w: NDArray[np.float64] = field(repr=False)
    origin: NDArray[np.bool_] = field(repr=False)

    @property
    def eigphases(self) -> NDArray[np.float64]:
        """``(h, h, 4)`` eigenphases matching ``w``'s rows."""
        t = self.theta
        return np.stack([np.zeros_like(t), np.zeros_like(t), t, -t], axis=-1)


def block_table(grid: GridSpec) -> BlockTable:
    h = grid.half
    k, l = np.meshgrid(np.arange(h), np.arange(h), indexing="ij")
    cf = _closed_form(grid.side, k, l)
    return BlockTable(
        grid=grid,
        theta=cf["theta"],
        epsilon=cf["epsilon"],
        c=cf["c"],
        c_plus=cf["c_plus"],
        c_minus=cf["c_minus"],
        w=cf["w"],
        origin=cf["origin"],
    )


# ---------------------------------------------------------------------------
# psi_1 and its decomposition


def psi1_vector(grid: GridSpec) -> StateVector:
    """Eigenvector of ``U_1`` for ``exp(2 pi i / 3)``, on the cell at the origin."""
    if grid.marked != (0, 0):
        raise ValueError(f"psi_1 is defined for the marked vertex at the origin, got {grid.marked}")
    a = np.zeros(grid.n_vertices, dtype=np.complex128)
    m = grid.side
    a[[0, 1, m, m + 1]] = np.array([-1j * _SQ3, 1.0, 1.0, 1.0]) / _SQ6
    return StateVector(a, grid)


def psi2_vector(grid: GridSpec) -> StateVector:
    return psi1_vector(grid).conj()


def psi1_reduced(grid: GridSpec, conjugate: bool = False) -> NDArray[np.complex128]:
    """``(h, h, 4)`` array of reduced ``psi_1`` (or ``psi_2``) vectors.

    ``<psi_kl^(b)|psi_1> = (2/m) * psi1_reduced[k, l, b]``.
    """
    m, h = grid.side, grid.half
    k = np.arange(h)[:, None]
    l = np.arange(h)[None, :]
    out = np.empty((h, h, 4), dtype=np.complex128)
    out[..., 0] = (1j if conjugate else -1j) * _SQ3
    out[..., 1] = np.exp(-2j * np.pi * l / m)
    out[..., 2] = np.exp(-2j * np.pi * k / m)
    out[..., 3] = np.exp(-2j * np.pi * ((k + l) % m) / m)
    return out / _SQ6


@dataclass(frozen=True)
class Psi1Decomposition:
    """Coefficients of ``psi_1`` in the eigenbasis of ``U_2``.

    Arrays are ``(h, h)`` indexed by block; entries at ``(0, 0)`` of the
    ``plus``/``minus`` arrays are zero because that block has no
    nontrivial eigenphase. ``coeffs[k, l, b]`` are the coefficients on
    the block's own eigenvectors ``v_kl^(b)``.
    """

    grid: GridSpec
    table: BlockTable = field(repr=False)
    coeffs: NDArray[np.complex128] = field(repr=False)
    coeffs_psi2: NDArray[np.complex128] = field(repr=False)
    a_plus: NDArray[np.complex128] = field(repr=False)
    a_minus: NDArray[np.complex128] = field(repr=False)
    overlap00_plus: NDArray[np.complex128] = field(repr=False)
    a_sq: float = 0.0
    a2_psi2psi1: complex = 0j
    psi1_overlap_00: complex = -1j / np.sqrt(2)
    psi2_overlap_00: complex = 1j / np.sqrt(2)

    @property
    def theta(self) -> NDArray[np.float64]:
        return self.table.theta

    @property
    def nontrivial(self) -> NDArray[np.bool_]:
        return ~self.table.origin

    @property
    def overlap00_minus(self) -> NDArray[np.complex128]:
        return np.conj(self.overlap00_plus)

    def completeness(self) -> float:
        """``|a|^2 + sum(|a_plus|^2 + |a_minus|^2)``; 1 for normalized ``psi_1``."""
        return float(self.a_sq + np.sum(np.abs(self.a_plus) ** 2 + np.abs(self.a_minus) ** 2))


def decompose_psi1(grid: GridSpec) -> Psi1Decomposition:
    grid.require_analytic()
    m = grid.side
    table = block_table(grid)
    w = table.w
    # w is real, so <w|v> is a plain contraction
    a = (2.0 / m) * np.einsum("klbj,klj->klb", w, psi1_reduced(grid))
    b = (2.0 / m) * np.einsum("klbj,klj->klb", w, psi1_reduced(grid, conjugate=True))

    unit = np.zeros(a.shape, dtype=bool)
    unit[..., :2] = True
    unit[0, 0, :] = True
    a_sq = float(np.sum(np.abs(a[unit]) ** 2))
    a2_psi2psi1 = complex(np.sum(np.conj(b[unit]) * a[unit]))

    nontriv = ~table.origin
    a_plus = np.where(nontriv, a[..., 2], 0.0)
    # v_minus = conj(v_plus): <v_minus|psi_1> = conj(<v_plus|psi_2>)
    a_minus = np.where(nontriv, np.conj(b[..., 2]), 0.0)
    overlap00_plus = np.where(nontriv, (2.0 / m) * w[..., 2, 0], 0.0).astype(np.complex128)
    return Psi1Decomposition(
        grid=grid,
        table=table,
        coeffs=a,
        coeffs_psi2=b,
        a_plus=a_plus,
        a_minus=a_minus,
        overlap00_plus=overlap00_plus,
        a_sq=a_sq,
        a2_psi2psi1=a2_psi2psi1,
    )
