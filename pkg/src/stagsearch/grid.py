"""
Torus grid geometry and state vectors.

Vertices of an ``m x m`` torus are indexed row-major, ``i = x*m + y``.
A :class:`StateVector` is a flat complex128 array of length ``N = m**2``
tied to the :class:`GridSpec` it lives on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import GridMismatchError, ParityError

__all__ = [
    "UNITARITY_TOL",
    "SUM_IDENTITY_TOL",
    "GridSpec",
    "StateVector",
    "uniform_state",
    "basis_state",
    "inner_product",
]

UNITARITY_TOL = 1e-10
SUM_IDENTITY_TOL = 1e-10


@dataclass(frozen=True)
class GridSpec:
    """Geometry of an ``side x side`` torus with one marked vertex.

    Parameters
    ----------
    side : int
        Vertices per dimension. Must be even (2x2 tessellation).
    marked : tuple of int
        Marked vertex ``(x_w, y_w)``.
    """

    side: int
    marked: tuple[int, int] = (0, 0)

    def __post_init__(self) -> None:
        if isinstance(self.side, bool) or not isinstance(self.side, (int, np.integer)):
            raise TypeError(f"side must be an int, got {type(self.side).__name__}")
        if self.side < 2 or self.side % 2:
            raise ParityError(f"side must be a positive even integer, got {self.side}")
        x, y = self.marked
        if not (0 <= x < self.side and 0 <= y < self.side):
            raise IndexError(f"marked vertex {self.marked} outside {self.side}x{self.side} grid")
        object.__setattr__(self, "side", int(self.side))
        object.__setattr__(self, "marked", (int(x), int(y)))

    @property
    def n_vertices(self) -> int:
        return self.side * self.side

    @property
    def half(self) -> int:
        """Number of 2x2 cells per dimension (also the Fourier block range)."""
        return self.side // 2

    @property
    def analytic_valid(self) -> bool:
        # side/2 odd <=> U2 has no eigenvalue -1
        return self.side % 4 == 2

    @property
    def marked_index(self) -> int:
        return self.index(*self.marked)

    def index(self, x: int, y: int) -> int:
        if not (0 <= x < self.side and 0 <= y < self.side):
            raise IndexError(f"vertex ({x}, {y}) outside {self.side}x{self.side} grid")
        return x * self.side + y

    def require_analytic(self) -> None:
        """Raise unless the closed-form spectral analysis applies to this grid."""
        if not self.analytic_valid or self.side < 6:
            raise ParityError(
                f"analytic predictions need side = 2 (mod 4) and side >= 6, got side={self.side}"
            )
        if self.marked != (0, 0):
            raise ValueError(f"analytic stack fixes the marked vertex at (0, 0), got {self.marked}")


@dataclass
class StateVector:
    """Complex amplitudes over the vertices of ``grid``."""

    amplitudes: NDArray[np.complex128]
    grid: GridSpec = field(repr=False)

    def __post_init__(self) -> None:
        a = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if a.shape[0] != self.grid.n_vertices:
            raise GridMismatchError(
                f"expected {self.grid.n_vertices} amplitudes for side {self.grid.side}, got {a.shape[0]}"
            )
        self.amplitudes = a

    def as_grid(self) -> NDArray[np.complex128]:
        """``(m, m)`` view sharing memory with ``amplitudes``."""
        return self.amplitudes.reshape(self.grid.side, self.grid.side)

    def norm(self) -> float:
        # pairwise summation; BLAS nrm2 drifts by ~1e-14 on large uniform vectors
        a = self.amplitudes
        return float(np.sqrt(np.sum(a.real * a.real) + np.sum(a.imag * a.imag)))

    def copy(self) -> StateVector:
        return StateVector(self.amplitudes.copy(), self.grid)

    def conj(self) -> StateVector:
        return StateVector(self.amplitudes.conj(), self.grid)

    def __getitem__(self, xy: tuple[int, int]) -> complex:
        return complex(self.amplitudes[self.grid.index(*xy)])

    def __len__(self) -> int:
        return self.amplitudes.shape[0]


def uniform_state(grid: GridSpec) -> StateVector:
    """Equal superposition ``(1/sqrt(N)) sum |x, y>``."""
    return StateVector(np.full(grid.n_vertices, 1.0 / grid.side, dtype=np.complex128), grid)


def basis_state(grid: GridSpec, x: int, y: int) -> StateVector:
    a = np.zeros(grid.n_vertices, dtype=np.complex128)
    a[grid.index(x, y)] = 1.0
    return StateVector(a, grid)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    if a.grid.side != b.grid.side:
        raise GridMismatchError(f"states live on different grids: {a.grid.side} vs {b.grid.side}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))
