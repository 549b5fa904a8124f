"""
Closed-form predictions for the search: eigenphase, step count, norm of the
principal eigenvector, overlaps and success probability.

Every double sum runs exactly over the finite block set
``0 <= k, l < m/2``, ``(k, l) != (0, 0)`` in row-major order. Leading-order
formulas are provided next to an exact solver (:func:`solve_alpha_exact`)
that root-finds the principal eigenphase from the same decomposition
without small-angle expansions.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import bisect

from .errors import NumericalError
from .grid import GridSpec, StateVector
from .spectral import Psi1Decomposition, block_table, decompose_psi1, inverse_staggered_fourier, psi1_reduced

__all__ = [
    "ADJUSTED_GAUGE",
    "AnalyticReport",
    "ExactSolution",
    "compute_B_minus_Cx",
    "B_minus_Cx_from_coefficients",
    "compute_x",
    "compute_alpha",
    "optimal_steps",
    "compute_cos_beta",
    "compute_psi_norm_sq",
    "compute_E_F_sums",
    "E_F_from_coefficients",
    "compute_overlap_00_psi",
    "overlap_00_psi_expanded",
    "predict_success_probability",
    "predict_claim1_overlap",
    "build_psi_vector",
    "alpha_determinant",
    "solve_alpha_exact",
    "exact_solution",
    "analytic_report",
]

_SQ2 = math.sqrt(2.0)
_SQ3 = math.sqrt(3.0)
_SQ6 = math.sqrt(6.0)
_X_LIMIT = complex(np.exp(2j * np.pi / 3))
ADJUSTED_GAUGE = complex(np.exp(-1j * np.pi / 3))


def _angles(grid: GridSpec) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.bool_]]:
    h = grid.half
    k, l = np.meshgrid(np.arange(h), np.arange(h), indexing="ij")
    kt, lt = 2 * np.pi * k / grid.side, 2 * np.pi * l / grid.side
    return kt, lt, (k != 0) | (l != 0)


def compute_B_minus_Cx(grid: GridSpec) -> float:
    """``(2/N) sum_{(k,l) != 0} 1 / (1 - cos^2 k~ cos^2 l~)``."""
    grid.require_analytic()
    kt, lt, mask = _angles(grid)
    denom = 1.0 - np.cos(kt) ** 2 * np.cos(lt) ** 2
    terms = np.where(mask, 1.0 / np.where(mask, denom, 1.0), 0.0)
    return float(2.0 / grid.n_vertices * terms.sum())


def _half_angle_sq(decomp: Psi1Decomposition) -> NDArray[np.float64]:
    # sin^2(theta/2) = c^2 for every block
    return np.where(decomp.nontrivial, decomp.table.c**2, 1.0)


def B_minus_Cx_from_coefficients(decomp: Psi1Decomposition, x: complex) -> tuple[float, complex, complex]:
    """Return ``(B - C x*, B, C)`` summed from the decomposition coefficients."""
    s2 = _half_angle_sq(decomp)
    B = float(np.sum((np.abs(decomp.a_plus) ** 2 + np.abs(decomp.a_minus) ** 2) / (2 * s2)))
    C = complex(np.sum(decomp.a_minus * decomp.a_plus / s2))
    return float(np.real(B - C * np.conj(x))), B, C


def compute_x(decomp: Psi1Decomposition) -> complex:
    """Unit-modulus ``x = |a|^2 / (a*^2 <psi'_1|psi'_2>)``."""
    denom = np.conj(decomp.a2_psi2psi1)
    if abs(denom) < 1e-300:
        raise NumericalError("a^2 <psi'_2|psi'_1> vanishes; x is undefined")
    x = decomp.a_sq / denom
    return complex(x / abs(x))


def compute_alpha(grid: GridSpec) -> float:
    """Leading-order principal eigenphase ``sqrt(8 / (N (B - C x*)))``."""
    return math.sqrt(8.0 / (grid.n_vertices * compute_B_minus_Cx(grid)))


def optimal_steps(report_or_alpha) -> int:
    """``round(pi / (2 alpha))`` with halves rounded up, never below 1."""
    alpha = getattr(report_or_alpha, "alpha", report_or_alpha)
    return max(1, math.floor(math.pi / (2 * alpha) + 0.5))


def compute_cos_beta(alpha: float) -> float:
    return (1.0 + _SQ3 * alpha / 4.0) / _SQ2


def compute_psi_norm_sq(grid: GridSpec, alpha: float) -> float:
    """``<psi|psi> ~ 24 / (N alpha^2)``."""
    return 24.0 / (grid.n_vertices * alpha * alpha)


def compute_E_F_sums(grid: GridSpec) -> tuple[complex, complex, complex]:
    """``(E-, E+, F)`` from their trigonometric double sums."""
    grid.require_analytic()
    N = grid.n_vertices
    kt, lt, mask = _angles(grid)
    ck, sk, cl, sl = np.cos(kt), np.sin(kt), np.cos(lt), np.sin(lt)
    cc = ck * cl
    eps = np.where(cc >= 0, 1.0, -1.0)
    denom = np.where(mask, 1.0 - cc * cc, 1.0)
    e_terms = np.where(mask, 1.0 - eps * np.sin(kt + lt) / np.sqrt(denom), 0.0)
    e_minus = _SQ2 * (_SQ3 - 1j) / N * e_terms.sum()
    ss_terms = np.where(mask, np.sin(2 * kt) * np.sin(2 * lt) / denom, 0.0)
    e_plus = -1j / _SQ3 * e_minus - (1 + 1j * _SQ3) / (N * _SQ6) * ss_terms.sum()
    f_terms = np.where(mask, eps * sk * sl / denom, 0.0)
    f = _SQ2 * (1 + 1j * _SQ3) / N * f_terms.sum()
    return complex(e_minus), complex(e_plus), complex(f)


def E_F_from_coefficients(decomp: Psi1Decomposition, x: complex) -> tuple[complex, complex, complex]:
    """``(E-, E+, F)`` summed directly over eigenvector pairs."""
    ap, am = decomp.a_plus, decomp.a_minus
    op, om = decomp.overlap00_plus, decomp.overlap00_minus
    e_minus = np.sum((ap - np.conj(am) * x) * op + (am - np.conj(ap) * x) * om)
    e_plus = np.sum((ap + np.conj(am) * x) * op + (am + np.conj(ap) * x) * om)
    theta = np.where(decomp.nontrivial, decomp.theta, 1.0)
    cot_half = np.where(decomp.nontrivial, 1.0 / np.tan(theta / 2), 0.0)
    f = np.sum(cot_half * ((ap - np.conj(am) * x) * op - (am - np.conj(ap) * x) * om))
    return complex(e_minus), complex(e_plus), complex(f)


def compute_overlap_00_psi(
    grid: GridSpec,
    alpha: float,
    x: complex | None = None,
    E_minus: complex | None = None,
    E_plus: complex | None = None,
    F: complex | None = None,
) -> complex:
    """Simplified ``<00|psi>``, valid to zeroth order in ``alpha``.

    ``x`` and the sums are accepted for signature symmetry with
    :func:`overlap_00_psi_expanded`; the simplified form already has their
    closed values substituted.
    """
    N = grid.n_vertices
    return complex(-_SQ3 * (1 + 1j * _SQ3) / 4 * (1 + 1 / N) + _SQ3 * (_SQ3 - 1j) / (N * alpha))


def overlap_00_psi_expanded(alpha: float, x: complex, E_minus: complex, E_plus: complex, F: complex) -> complex:
    """``<00|psi>`` before substituting closed forms for ``x``, ``E+-`` and ``F``."""
    xc = np.conj(x)
    return complex(
        5 * _SQ3 * xc / 8
        + _SQ3 / (_SQ2 * alpha) * (1j * xc / _SQ2 - E_minus)
        - 3 / (4 * _SQ2) * E_plus
        - _SQ3 / (2 * _SQ2) * F
    )


def predict_success_probability(overlap_00_psi: complex, psi_norm_sq: float, gauge: complex = 1.0) -> float:
    """``|<w|beta+>|^2 = 2 Re(g <00|psi>)^2 / <psi|psi>`` for the eigenvector ``g psi``.

    ``g = 1`` keeps the eigenvector's natural phase. ``g = exp(-i pi/3)``
    is the gauge in which ``<psi_0|psi>`` is purely imaginary, so that
    ``beta-`` carries the initial state; it gives the larger asymptote
    ``1 / (2 (B - C x*))``.
    """
    return float(2 * np.real(gauge * overlap_00_psi) ** 2 / psi_norm_sq)


def predict_claim1_overlap(grid: GridSpec, alpha: float, psi_norm_sq: float) -> tuple[float, float]:
    """``|<psi_0|beta->|`` for the eigenvector's natural phase and for ``e^{-i pi/3} psi``."""
    c = _SQ3 * (_SQ3 - 1j) / (math.sqrt(grid.n_vertices) * alpha)
    norm = math.sqrt(psi_norm_sq)

    def overlap(z: complex) -> float:
        return float(abs(z - np.conj(z)) / (_SQ2 * norm))

    return overlap(c), overlap(c * ADJUSTED_GAUGE)


def build_psi_vector(
    grid: GridSpec,
    alpha: float,
    beta: float,
    x: complex,
    decomp: Psi1Decomposition | None = None,
) -> StateVector:
    """Assemble the (unnormalized) principal eigenvector from ``U_2``'s eigenbasis.

    Each eigencomponent of ``cos(beta) psi_1 - x sin(beta) psi_2`` with
    eigenphase ``theta`` is scaled by ``(sqrt(3)/2) (cot((alpha - theta)/2) - i)``.
    With the exact ``(alpha, beta, x)`` from :func:`exact_solution` the
    result is an eigenvector of ``U``; with leading-order inputs it is an
    approximation whose residual shrinks as the grid grows.
    """
    if decomp is None:
        decomp = decompose_psi1(grid)
    m = grid.side
    table = decomp.table
    phi_red = math.cos(beta) * psi1_reduced(grid) - x * math.sin(beta) * psi1_reduced(grid, conjugate=True)
    d = np.einsum("klbj,klj->klb", table.w, phi_red)
    half = (alpha - table.eigphases) / 2
    scale = (_SQ3 / 2) * (np.cos(half) / np.sin(half) - 1j)
    coeffs = (2.0 / m) * np.einsum("klb,klbj->klj", scale * d, table.w)
    return inverse_staggered_fourier(grid, coeffs)


def _cot_pair(alpha: float, theta: NDArray[np.float64]) -> NDArray[np.float64]:
    # cot((a - t)/2) + cot((a + t)/2) = 2 sin a / (cos t - cos a)
    return 2 * math.sin(alpha) / (np.cos(theta) - math.cos(alpha))


def _A_terms(decomp: Psi1Decomposition, alpha: float) -> tuple[float, complex]:
    nt = decomp.nontrivial
    pair = np.where(nt, _cot_pair(alpha, np.where(nt, decomp.theta, np.pi)), 0.0)
    cot_a = 1.0 / math.tan(alpha / 2)
    weight = (np.abs(decomp.a_plus) ** 2 + np.abs(decomp.a_minus) ** 2) / 2
    a11 = decomp.a_sq * cot_a + float(np.sum(weight * pair))
    a12 = -decomp.a2_psi2psi1 * cot_a - complex(np.sum(decomp.a_plus * decomp.a_minus * pair))
    return a11, a12


def alpha_determinant(decomp: Psi1Decomposition, alpha: float) -> float:
    """Determinant of the 2x2 system in ``(cos beta, sin beta)``.

    With ``x`` chosen so that ``A12 x*`` is real, the system is
    ``[[sqrt3 A11 - 1, sqrt3 A12 x*], [-sqrt3 A12 x*, -sqrt3 A11 - 1]]``.
    """
    a11, a12 = _A_terms(decomp, alpha)
    return 1.0 - 3.0 * a11 * a11 + 3.0 * abs(a12) ** 2


class ExactSolution(NamedTuple):
    alpha: float
    beta: float
    x: complex
    A11: float
    A12: complex


def solve_alpha_exact(grid: GridSpec, decomp: Psi1Decomposition | None = None, scan_points: int = 1000) -> float:
    return exact_solution(grid, decomp, scan_points).alpha


def exact_solution(grid: GridSpec, decomp: Psi1Decomposition | None = None, scan_points: int = 1000) -> ExactSolution:
    """Smallest root of :func:`alpha_determinant` below ``theta_min = 4 pi / m``.

    The bracket ``(1e-9, theta_min - 1e-9)`` is scanned on ``scan_points``
    points and the first sign change is refined by bisection. ``x`` is
    the unit phase making ``A12 x*`` real, with the sign closest to
    ``exp(2 pi i / 3)``; ``beta`` solves the first row and is reported in
    ``(-pi/2, pi/2]``.
    """
    if decomp is None:
        decomp = decompose_psi1(grid)
    theta_min = 4 * math.pi / grid.side
    lo, hi = 1e-9, theta_min - 1e-9
    grid_pts = np.linspace(lo, hi, scan_points)
    values = np.array([alpha_determinant(decomp, a) for a in grid_pts])
    flips = np.flatnonzero(np.sign(values[:-1]) * np.sign(values[1:]) <= 0)
    if flips.size == 0:
        raise NumericalError(
            f"no root of the eigenphase determinant in (0, {theta_min:.6g}); "
            f"scanned min {values.min():.4g}, max {values.max():.4g}"
        )
    i = int(flips[0])
    alpha = float(bisect(lambda a: alpha_determinant(decomp, a), grid_pts[i], grid_pts[i + 1], xtol=1e-16, rtol=1e-15))

    a11, a12 = _A_terms(decomp, alpha)
    x = a12 / abs(a12)
    if (x * np.conj(_X_LIMIT)).real < 0:
        x = -x
    r = float(np.real(a12 * np.conj(x)))
    beta = math.atan2(1 - _SQ3 * a11, _SQ3 * r)
    if beta > math.pi / 2:
        beta -= math.pi
    elif beta <= -math.pi / 2:
        beta += math.pi
    return ExactSolution(alpha, beta, complex(x), a11, complex(a12))


@dataclass
class AnalyticReport:
    """Predicted search quantities for one grid size."""

    m: int
    N: int
    B_minus_Cx: float
    alpha: float
    t_f: float
    t_f_rounded: int
    cos_beta: float
    x: complex
    psi_norm_sq: float
    overlap_00_psi: complex
    p_pred: float
    p_pred_adjusted: float
    claim1_overlap: float
    claim1_overlap_adjusted: float
    E_minus: complex
    E_plus: complex
    F: complex
    alpha_exact: float | None = None

    def to_record(self) -> dict:
        """Flat dict with complex fields split into ``_re``/``_im``."""
        out = {}
        for key, value in asdict(self).items():
            if isinstance(value, complex):
                out[f"{key}_re"] = value.real
                out[f"{key}_im"] = value.imag
            else:
                out[key] = value
        return out


def analytic_report(grid: GridSpec, exact: bool = True) -> AnalyticReport:
    grid.require_analytic()
    decomp = decompose_psi1(grid)
    x = compute_x(decomp)
    bcx = compute_B_minus_Cx(grid)
    alpha = math.sqrt(8.0 / (grid.n_vertices * bcx))
    e_minus, e_plus, f = compute_E_F_sums(grid)
    norm_sq = compute_psi_norm_sq(grid, alpha)
    ov = compute_overlap_00_psi(grid, alpha, x, e_minus, e_plus, f)
    raw, adjusted = predict_claim1_overlap(grid, alpha, norm_sq)
    return AnalyticReport(
        m=grid.side,
        N=grid.n_vertices,
        B_minus_Cx=bcx,
        alpha=alpha,
        t_f=math.pi / (2 * alpha),
        t_f_rounded=optimal_steps(alpha),
        cos_beta=compute_cos_beta(alpha),
        x=x,
        psi_norm_sq=norm_sq,
        overlap_00_psi=ov,
        p_pred=predict_success_probability(ov, norm_sq),
        p_pred_adjusted=predict_success_probability(ov, norm_sq, ADJUSTED_GAUGE),
        claim1_overlap=raw,
        claim1_overlap_adjusted=adjusted,
        E_minus=e_minus,
        E_plus=e_plus,
        F=f,
        alpha_exact=solve_alpha_exact(grid, decomp) if exact else None,
    )
