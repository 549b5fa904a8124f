"""
Coinless walk operators on the torus.

The even tessellation groups vertices into 2x2 cells anchored at
``(2x, 2y)``; the odd tessellation shifts every cell by ``(1, 1)`` with
toroidal wraparound. Reflecting about the span of the cell-uniform vectors
replaces each amplitude by ``S/2 - psi_v`` where ``S`` is its cell sum.

All kernels work in place on an ``(m, m)`` complex array through
basic-slicing views, so one step costs O(N) time and one ``(m/2, m/2)``
scratch buffer. Cell sums are accumulated in the fixed order
``00, 01, 10, 11`` relative to the cell anchor.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterator

import numpy as np
from numpy.typing import NDArray

from .grid import GridSpec, StateVector, uniform_state

if TYPE_CHECKING:
    from .estimation import RunResult

__all__ = [
    "Parity",
    "Tessellation",
    "apply_even_reflection",
    "apply_odd_reflection",
    "apply_oracle",
    "step",
    "apply_u1",
    "apply_u2",
    "apply_step_inverse",
    "even_reflect_inplace",
    "odd_reflect_inplace",
    "oracle_inplace",
    "step_inplace",
    "step_inverse_inplace",
    "run",
]

Array2D = NDArray[np.complex128]


class Parity(enum.Enum):
    EVEN = 0
    ODD = 1


@dataclass(frozen=True)
class Tessellation:
    """Partition of the torus into 2x2 cells."""

    side: int
    parity: Parity

    @property
    def offset(self) -> int:
        return self.parity.value

    def cell_of(self, x: int, y: int) -> tuple[int, int]:
        """Anchor (lower-left vertex) of the cell containing ``(x, y)``."""
        m, o = self.side, self.offset
        return ((x - o) // 2 * 2 + o) % m, ((y - o) // 2 * 2 + o) % m

    def cell_vertices(self, anchor: tuple[int, int]) -> list[tuple[int, int]]:
        """Vertices of a cell in the order 00, 01, 10, 11."""
        m = self.side
        ax, ay = anchor
        return [((ax + dx) % m, (ay + dy) % m) for dx in (0, 1) for dy in (0, 1)]

    def anchors(self) -> Iterator[tuple[int, int]]:
        o = self.offset
        for i in range(self.side // 2):
            for j in range(self.side // 2):
                yield 2 * i + o, 2 * j + o


def _reflect_cells(a00, a01, a10, a11, buf) -> None:
    np.add(a00, a01, out=buf)
    buf += a10
    buf += a11
    buf *= 0.5
    for a in (a00, a01, a10, a11):
        np.subtract(buf, a, out=a)


def _scratch(g: Array2D, shape) -> NDArray[np.complex128]:
    # trailing axes let the kernels act on a stack of states at once
    return np.empty(tuple(shape) + g.shape[2:], dtype=g.dtype)


def even_reflect_inplace(g: Array2D, buf: NDArray[np.complex128] | None = None) -> None:
    """Apply ``U_e = 2 Pi_e - I`` to the ``(m, m)`` array ``g`` in place."""
    h = g.shape[0] // 2
    if buf is None:
        buf = _scratch(g, (h, h))
    _reflect_cells(g[0::2, 0::2], g[0::2, 1::2], g[1::2, 0::2], g[1::2, 1::2], buf[:h, :h])


def odd_reflect_inplace(g: Array2D, buf: NDArray[np.complex128] | None = None) -> None:
    """Apply ``U_o = 2 Pi_o - I`` in place; cells are anchored at odd-odd vertices."""
    m = g.shape[0]
    h = m // 2
    if buf is None:
        buf = _scratch(g, (h, h))
    # cells not touching the seam
    _reflect_cells(
        g[1 : m - 1 : 2, 1 : m - 1 : 2],
        g[1 : m - 1 : 2, 2:m:2],
        g[2:m:2, 1 : m - 1 : 2],
        g[2:m:2, 2:m:2],
        buf[: h - 1, : h - 1],
    )
    # cells anchored on row m-1, wrapping to row 0
    _reflect_cells(
        g[m - 1, 1 : m - 1 : 2], g[m - 1, 2:m:2], g[0, 1 : m - 1 : 2], g[0, 2:m:2], buf[0, : h - 1]
    )
    # cells anchored on column m-1, wrapping to column 0
    _reflect_cells(
        g[1 : m - 1 : 2, m - 1], g[1 : m - 1 : 2, 0], g[2:m:2, m - 1], g[2:m:2, 0], buf[0, : h - 1]
    )
    # corner cell wraps in both directions
    _reflect_cells(
        g[m - 1 : m, m - 1], g[m - 1 : m, 0], g[0:1, m - 1], g[0:1, 0], buf[0, :1]
    )


def oracle_inplace(g: Array2D, marked: tuple[int, int]) -> None:
    """Apply ``U_w = 2|w><w| - I``: negate every amplitude except the marked one."""
    np.negative(g, out=g)
    g[marked] = -g[marked]


def step_inplace(g: Array2D, marked: tuple[int, int], buf=None) -> None:
    """One search step ``U = U_o U_w U_e U_w`` (rightmost factor first)."""
    if buf is None:
        buf = _scratch(g, (g.shape[0] // 2, g.shape[0] // 2))
    oracle_inplace(g, marked)
    even_reflect_inplace(g, buf)
    oracle_inplace(g, marked)
    odd_reflect_inplace(g, buf)


def step_inverse_inplace(g: Array2D, marked: tuple[int, int], buf=None) -> None:
    """``U^-1 = U_w U_e U_w U_o``; every factor is an involution."""
    if buf is None:
        buf = _scratch(g, (g.shape[0] // 2, g.shape[0] // 2))
    odd_reflect_inplace(g, buf)
    oracle_inplace(g, marked)
    even_reflect_inplace(g, buf)
    oracle_inplace(g, marked)


def _apply(state: StateVector, *ops) -> StateVector:
    out = state.copy()
    g = out.as_grid()
    buf = _scratch(g, (state.grid.half, state.grid.half))
    for op in ops:
        if op is oracle_inplace:
            op(g, state.grid.marked)
        else:
            op(g, buf)
    return out


def apply_even_reflection(state: StateVector) -> StateVector:
    return _apply(state, even_reflect_inplace)


def apply_odd_reflection(state: StateVector) -> StateVector:
    return _apply(state, odd_reflect_inplace)


def apply_oracle(state: StateVector) -> StateVector:
    return _apply(state, oracle_inplace)


def step(state: StateVector) -> StateVector:
    """Return ``U |state>`` with ``U = U_o U_w U_e U_w``."""
    return _apply(state, oracle_inplace, even_reflect_inplace, oracle_inplace, odd_reflect_inplace)


def apply_step_inverse(state: StateVector) -> StateVector:
    return _apply(state, odd_reflect_inplace, oracle_inplace, even_reflect_inplace, oracle_inplace)


def apply_u1(state: StateVector) -> StateVector:
    """``U_1 = U_e U_w U_e U_w``; has order three."""
    return _apply(state, oracle_inplace, even_reflect_inplace, oracle_inplace, even_reflect_inplace)


def apply_u2(state: StateVector) -> StateVector:
    """``U_2 = U_o U_e``, the walk without the oracle."""
    return _apply(state, even_reflect_inplace, odd_reflect_inplace)


def run(grid: GridSpec, steps: int, initial: StateVector | None = None) -> RunResult:
    """Evolve from the uniform state and record ``<w|psi_t>`` for ``t = 0..steps``.

    The returned :class:`~stagsearch.estimation.RunResult` carries the
    success probabilities, the complex overlaps and the first local maximum
    of the probability series (when the window has at least 3 samples).
    """
    from .estimation import RunResult

    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    state = (initial if initial is not None else uniform_state(grid)).copy()
    g = state.as_grid()
    buf = _scratch(g, (grid.half, grid.half))
    w = grid.marked
    overlaps = np.empty(steps + 1, dtype=np.complex128)
    overlaps[0] = g[w]
    for t in range(1, steps + 1):
        step_inplace(g, w, buf)
        overlaps[t] = g[w]
    return RunResult.from_overlaps(grid, overlaps, final_state=state)
