"""
Model-free estimators and the small-grid dense oracle.

* :func:`find_t_star` locates the first local maximum of a success
  probability series.
* :func:`estimate_alpha_from_series` reads the principal eigenphase off the
  oscillation of ``Re <w|psi_t>``.
* :func:`dense_unitary` / :func:`dense_spectrum` materialize and
  diagonalize the step operator for small grids.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import LowConfidenceError, NumericalError, SizeCapError
from .grid import GridSpec, StateVector, UNITARITY_TOL
from .walk import step_inplace

__all__ = [
    "DENSE_CAP",
    "ZERO_PHASE_TOL",
    "PeakResult",
    "RunResult",
    "DenseSpectrum",
    "BetaPlaneOverlaps",
    "find_t_star",
    "estimate_alpha_from_series",
    "dense_unitary",
    "dense_spectrum",
    "beta_plane_overlaps",
]

DENSE_CAP = 4096
ZERO_PHASE_TOL = 1e-8
_EIG_RESIDUAL_TOL = 1e-8
_MIN_PEAK_RATIO = 5.0


class PeakResult(NamedTuple):
    t_star: int
    p_star: float
    monotone: bool


def find_t_star(probs: Sequence[float] | NDArray[np.float64]) -> PeakResult:
    """First ``t`` with ``p[t-1] < p[t] >= p[t+1]``.

    If the window has no interior maximum, the (first) argmax is returned
    with ``monotone=True``.
    """
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size < 3:
        raise ValueError(f"need at least 3 samples to locate a peak, got {p.size}")
    rising = p[:-2] < p[1:-1]
    falling = p[1:-1] >= p[2:]
    hits = np.flatnonzero(rising & falling)
    if hits.size:
        t = int(hits[0]) + 1
        return PeakResult(t, float(p[t]), False)
    t = int(np.argmax(p))
    return PeakResult(t, float(p[t]), True)


@dataclass
class RunResult:
    """Success-probability time series of one simulated search."""

    grid: GridSpec
    probs: NDArray[np.float64] = field(repr=False)
    overlaps: NDArray[np.complex128] = field(repr=False)
    t_star: int | None = None
    p_star: float | None = None
    monotone: bool = False
    alpha_emp: float | None = None
    final_state: StateVector | None = field(default=None, repr=False)

    @classmethod
    def from_overlaps(
        cls, grid: GridSpec, overlaps: NDArray[np.complex128], final_state: StateVector | None = None
    ) -> RunResult:
        overlaps = np.asarray(overlaps, dtype=np.complex128)
        probs = np.abs(overlaps) ** 2
        res = cls(grid=grid, probs=probs, overlaps=overlaps, final_state=final_state)
        if probs.size >= 3:
            peak = find_t_star(probs)
            res.t_star, res.p_star, res.monotone = peak.t_star, peak.p_star, peak.monotone
        return res

    @property
    def steps(self) -> int:
        return self.probs.size - 1


def estimate_alpha_from_series(overlaps: ArrayLike) -> float:
    """Dominant angular frequency of ``Re <w|psi_t>``.

    The mean-removed series is Hann-windowed and transformed; the peak bin
    (excluding DC) is refined by a parabola through the log magnitudes of
    its neighbours. Callers should supply at least four periods
    (``T >= 8 * t_pred``).

    Raises
    ------
    LowConfidenceError
        If the series is too short or the peak is not at least five times
        the median spectral magnitude.
    """
    s = np.real(np.asarray(overlaps)).astype(float)
    T = s.size
    if T < 8:
        raise LowConfidenceError(f"series of length {T} is too short for a frequency estimate")
    s = (s - s.mean()) * np.hanning(T)
    mag = np.abs(np.fft.rfft(s))
    band = mag[1:-1]
    k = 1 + int(np.argmax(band))
    peak = mag[k]
    floor = float(np.median(mag[1:]))
    if not peak > _MIN_PEAK_RATIO * floor or peak <= 1e-300:
        raise LowConfidenceError(
            f"no dominant frequency: peak {peak:.3g} vs median {floor:.3g} (ratio < {_MIN_PEAK_RATIO})"
        )
    lo, mid, hi = np.log(np.maximum(mag[k - 1 : k + 2], 1e-300))
    curv = lo - 2 * mid + hi
    delta = 0.5 * (lo - hi) / curv if curv < 0 else 0.0
    return float(2 * np.pi * (k + delta) / T)


def dense_unitary(grid: GridSpec, cap: int = DENSE_CAP) -> NDArray[np.complex128]:
    """Materialize ``U`` column by column: ``U[:, j] = step(e_j)``."""
    N = grid.n_vertices
    if N > cap:
        raise SizeCapError(f"dense oracle capped at N={cap}, grid has N={N}")
    m = grid.side
    stack = np.eye(N, dtype=np.complex128).reshape(m, m, N)
    step_inplace(stack, grid.marked)
    return stack.reshape(N, N)


@dataclass
class DenseSpectrum:
    """Full eigendecomposition of a dense step operator."""

    dimension: int
    eigenvalues: NDArray[np.complex128] = field(repr=False)
    eigenvectors: NDArray[np.complex128] = field(repr=False)
    eigenphases: NDArray[np.float64] = field(repr=False)
    principal_alpha: float
    principal_vector: StateVector = field(repr=False)


def dense_spectrum(
    matrix: NDArray[np.complex128],
    grid: GridSpec | None = None,
    check: bool = True,
    zero_tol: float = ZERO_PHASE_TOL,
) -> DenseSpectrum:
    """Eigendecompose ``matrix`` and pick the smallest phase above ``zero_tol``.

    ``principal_vector`` is returned as given by LAPACK (arbitrary global
    phase).
    """
    N = matrix.shape[0]
    if grid is None:
        side = int(round(np.sqrt(N)))
        grid = GridSpec(side)
    try:
        vals, vecs = np.linalg.eig(matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition of {N}x{N} step operator failed: {exc}") from exc
    phases = np.angle(vals)
    if check:
        res = np.linalg.norm(matrix @ vecs - vecs * vals, axis=0)
        if res.max() > _EIG_RESIDUAL_TOL:
            raise NumericalError(f"eigen-residual {res.max():.3g} exceeds {_EIG_RESIDUAL_TOL}")
        if np.abs(np.abs(vals) - 1).max() > 1e-9:
            raise NumericalError("eigenvalues off the unit circle; matrix is not unitary")
    positive = np.flatnonzero(phases > zero_tol)
    if positive.size == 0:
        raise NumericalError("no eigenvalue with positive phase")
    i = positive[np.argmin(phases[positive])]
    alpha = float(phases[i])
    v = vecs[:, i]
    if check:
        mirror = np.linalg.norm(matrix @ v.conj() - np.exp(-1j * alpha) * v.conj())
        if mirror > _EIG_RESIDUAL_TOL:
            raise NumericalError(f"conjugate of principal vector is not an eigenvector (residual {mirror:.3g})")
    return DenseSpectrum(
        dimension=N,
        eigenvalues=vals,
        eigenvectors=vecs,
        eigenphases=np.sort(phases),
        principal_alpha=alpha,
        principal_vector=StateVector(v, grid),
    )


class BetaPlaneOverlaps(NamedTuple):
    """Overlaps in the plane spanned by ``beta+`` and ``beta-``.

    ``*_raw`` use the eigenvector's gauge as returned by the solver;
    ``claim1_max`` maximizes ``|<psi_0|beta->|`` over the global phase and
    ``p_aligned`` is ``|<w|beta+>|^2`` in that same gauge. ``p_max``
    maximizes the success probability alone.
    """

    claim1_raw: float
    claim1_max: float
    p_raw: float
    p_aligned: float
    p_max: float
    beta_cross: float


def beta_plane_overlaps(spectrum: DenseSpectrum, grid: GridSpec) -> BetaPlaneOverlaps:
    psi = spectrum.principal_vector.amplitudes
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise NumericalError("principal vector is zero")
    real_overlap = np.abs(np.vdot(psi.conj(), psi)) / norm**2
    if real_overlap > 1e-6:
        raise NumericalError(f"principal pair is degenerate: |<psi*|psi>| = {real_overlap:.3g}")
    w = grid.marked_index
    s2 = np.sqrt(2.0)

    def plane(v):
        bp = (v + v.conj()) / (s2 * norm)
        bm = (v - v.conj()) / (s2 * norm)
        return bp, bm

    bp, bm = plane(psi)
    c0 = np.sum(psi) / grid.side  # <psi_0|psi>, psi_0 real
    claim1_raw = abs(np.sum(bm)) / grid.side
    claim1_max = s2 * abs(c0) / norm
    gauge = 1j * abs(c0) / c0 if abs(c0) > 0 else 1.0
    bp_al, _ = plane(gauge * psi)
    return BetaPlaneOverlaps(
        claim1_raw=float(claim1_raw),
        claim1_max=float(claim1_max),
        p_raw=float(abs(bp[w]) ** 2),
        p_aligned=float(abs(bp_al[w]) ** 2),
        p_max=float(2 * abs(psi[w]) ** 2 / norm**2),
        beta_cross=float(abs(np.vdot(bp, bm))),
    )


def check_unitary(matrix: NDArray[np.complex128], tol: float = UNITARITY_TOL) -> float:
    """Max-entry deviation of ``U^dagger U`` from the identity."""
    dev = float(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0])).max())
    if dev > tol:
        raise NumericalError(f"matrix is not unitary: max |U'U - I| = {dev:.3g}")
    return dev
