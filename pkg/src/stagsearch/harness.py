"""
Scaling sweeps, amplitude-amplification accounting and result files.

Each :class:`ScalingRow` combines, for one grid side, the analytic
prediction, the exact eigenphase, a simulated run of the walk and the
resulting amplification cost. Rows serialize to CSV or JSON with a fixed
schema and 12 significant digits.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import dataclass, fields
from pathlib import Path
from typing import IO, Iterable, NamedTuple, Sequence

import numpy as np

from .analytic import analytic_report
from .errors import BudgetExceededError, LowConfidenceError
from .estimation import estimate_alpha_from_series
from .grid import GridSpec, StateVector, uniform_state
from .walk import _scratch, run, step_inplace, step_inverse_inplace

__all__ = [
    "DEFAULT_SIDES",
    "MIN_WINDOW",
    "STEP_BUDGET",
    "CSV_FIELDS",
    "ScalingRow",
    "AmplificationResult",
    "sweep",
    "sweep_row",
    "amplification_rounds",
    "amplification_estimate",
    "reflect_about_uniform",
    "amplify_simulated",
    "emit",
    "format_rows",
    "read_rows",
]

log = logging.getLogger(__name__)

DEFAULT_SIDES = (6, 10, 14, 22, 30, 46, 62, 94, 126)
MIN_WINDOW = 256
STEP_BUDGET = 10_000_000

CSV_FIELDS = (
    "m",
    "N",
    "alpha_analytic",
    "alpha_exact",
    "alpha_empirical",
    "t_pred",
    "t_star",
    "p_star",
    "p_pred",
    "claim1_overlap",
    "aa_rounds",
    "aa_total_steps",
    "wall_time_ms",
)
_INT_FIELDS = {"m", "N", "t_pred", "t_star", "aa_rounds", "aa_total_steps"}


@dataclass
class ScalingRow:
    """One grid size of a sweep.

    ``p_near_t_pred`` is the best success probability over
    ``t_pred - 1 .. t_pred + 1`` (not part of the file schema). ``error`` is
    set, and the numbers left empty, when the row could not be computed.
    """

    m: int
    N: int
    alpha_analytic: float | None = None
    alpha_exact: float | None = None
    alpha_empirical: float | None = None
    t_pred: int | None = None
    t_star: int | None = None
    p_star: float | None = None
    p_pred: float | None = None
    claim1_overlap: float | None = None
    aa_rounds: int | None = None
    aa_total_steps: int | None = None
    wall_time_ms: float | None = None
    p_near_t_pred: float | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def record(self) -> dict:
        return {name: getattr(self, name) for name in CSV_FIELDS}

    def rounded(self) -> ScalingRow:
        """Copy with every real rounded to 12 significant digits, i.e. the
        values a reader of an emitted file sees."""
        vals = {f.name: getattr(self, f.name) for f in fields(self)}
        vals["p_near_t_pred"] = None
        for name in CSV_FIELDS:
            v = vals[name]
            if v is not None and name not in _INT_FIELDS:
                vals[name] = float(_fmt_real(v))
        return ScalingRow(**vals)


def amplification_rounds(p_star: float) -> int:
    """``ceil((pi/4) / asin(sqrt(p)))``: rounds needed to reach success >= 1/2."""
    if not 0 < p_star <= 1:
        raise ValueError(f"success probability must be in (0, 1], got {p_star}")
    return max(1, math.ceil((math.pi / 4) / math.asin(math.sqrt(p_star)) - 1e-12))


def amplification_estimate(row: ScalingRow) -> tuple[int, int]:
    """``(rounds, total_steps)`` with ``total_steps = 2 t* rounds + t*``.

    Each round is charged one forward and one inverse preparation of
    ``t*`` steps; the extra ``t*`` is the initial preparation.
    """
    if row.p_star is None or row.t_star is None:
        raise ValueError("row has no measured optimum")
    rounds = amplification_rounds(row.p_star)
    return rounds, row.t_star * rounds * 2 + row.t_star


def sweep_row(m: int, max_steps_factor: float = 8.0, timing: bool = True) -> ScalingRow:
    t0 = time.perf_counter()
    grid = GridSpec(m)
    grid.require_analytic()
    report = analytic_report(grid)
    window = max(math.ceil(max_steps_factor * report.t_f), MIN_WINDOW)
    res = run(grid, window)
    try:
        alpha_emp = estimate_alpha_from_series(res.overlaps)
    except LowConfidenceError as exc:
        log.warning("m=%d: %s", m, exc)
        alpha_emp = None
    row = ScalingRow(
        m=m,
        N=grid.n_vertices,
        alpha_analytic=report.alpha,
        alpha_exact=report.alpha_exact,
        alpha_empirical=alpha_emp,
        t_pred=report.t_f_rounded,
        t_star=res.t_star,
        p_star=res.p_star,
        p_pred=report.p_pred,
        claim1_overlap=report.claim1_overlap,
        p_near_t_pred=float(res.probs[max(report.t_f_rounded - 1, 0) : report.t_f_rounded + 2].max()),
    )
    row.aa_rounds, row.aa_total_steps = amplification_estimate(row)
    row.wall_time_ms = (time.perf_counter() - t0) * 1e3 if timing else 0.0
    return row


def sweep(
    sides: Iterable[int] = DEFAULT_SIDES, max_steps_factor: float = 8.0, timing: bool = True
) -> list[ScalingRow]:
    """Run :func:`sweep_row` for each side, sorted by ``m``.

    The walk window is ``max(ceil(factor * t_f), 256)`` steps. A side that
    fails (bad parity, numerical failure) yields a row with ``error`` set
    and the sweep continues. With ``timing=False`` the wall time is
    reported as 0 so that repeated sweeps are byte-identical.
    """
    if max_steps_factor < 4:
        raise ValueError(f"max_steps_factor must be >= 4, got {max_steps_factor}")
    rows = []
    for m in sorted(sides):
        try:
            rows.append(sweep_row(m, max_steps_factor, timing))
        except (ValueError, TypeError, ArithmeticError, RuntimeError) as exc:
            log.error("m=%s: %s", m, exc)
            n = m * m if isinstance(m, int) else 0
            rows.append(ScalingRow(m=m, N=n, error=f"{type(exc).__name__}: {exc}"))
    return rows


def reflect_about_uniform(state: StateVector) -> StateVector:
    """``(2|psi_0><psi_0| - I) |state>``."""
    amp = state.amplitudes
    mean = amp.mean()
    return StateVector(2 * mean - amp, state.grid)


class AmplificationResult(NamedTuple):
    achieved_p: float
    rounds_used: int
    trace: list[float]
    partial: bool


def amplify_simulated(
    grid: GridSpec, t_f: int, max_rounds: int, target: float = 0.5, budget: int = STEP_BUDGET
) -> AmplificationResult:
    """Amplitude amplification with ``A = U^t_f`` simulated step by step.

    Round 1 is the bare preparation ``A|psi_0>``. Every further round
    applies ``A (2|psi_0><psi_0| - I) A^-1`` after flipping the sign of the
    marked amplitude. Iteration stops once the success probability reaches
    ``target``. ``rounds_used`` is the round with the best probability.
    If the next round would push the number of walk steps above ``budget``
    the loop stops and ``partial`` is set.
    """
    if t_f < 1 or max_rounds < 1:
        raise ValueError("t_f and max_rounds must be positive")
    if t_f > budget:
        raise BudgetExceededError(f"a single preparation of {t_f} steps exceeds the budget of {budget}")
    w = grid.marked
    g = uniform_state(grid).amplitudes.reshape(grid.side, grid.side)
    buf = _scratch(g, (grid.half, grid.half))
    for _ in range(t_f):
        step_inplace(g, w, buf)
    used = t_f
    trace = [float(abs(g[w]) ** 2)]
    partial = False
    while trace[-1] < target and len(trace) < max_rounds:
        if used + 2 * t_f > budget:
            partial = True
            break
        g[w] = -g[w]
        for _ in range(t_f):
            step_inverse_inplace(g, w, buf)
        g[...] = 2 * g.mean() - g
        for _ in range(t_f):
            step_inplace(g, w, buf)
        used += 2 * t_f
        trace.append(float(abs(g[w]) ** 2))
    best = int(np.argmax(trace))
    return AmplificationResult(trace[best], best + 1, trace, partial)


def _fmt_real(v: float) -> str:
    return f"{float(v):.12g}"


def _cell(name: str, v) -> str:
    if v is None:
        return ""
    if name in _INT_FIELDS:
        return str(int(v))
    return _fmt_real(v)


def format_rows(rows: Sequence[ScalingRow], fmt: str = "csv") -> str:
    """Serialize successful rows (sorted by ``m``); failed rows are skipped."""
    good = sorted((r for r in rows if r.ok), key=lambda r: r.m)
    if fmt == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for r in good:
            writer.writerow([_cell(n, getattr(r, n)) for n in CSV_FIELDS])
        return out.getvalue()
    if fmt == "json":
        recs = []
        for r in good:
            rec = {}
            for n in CSV_FIELDS:
                v = getattr(r, n)
                rec[n] = None if v is None else (int(v) if n in _INT_FIELDS else float(_fmt_real(v)))
            recs.append(rec)
        return json.dumps(recs, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}; expected 'csv' or 'json'")


def emit(rows: Sequence[ScalingRow], fmt: str = "csv", path: str | Path | IO[str] | None = None) -> str:
    """Write rows to ``path`` (a file path or open text stream) and return the text."""
    text = format_rows(rows, fmt)
    if path is None:
        return text
    if hasattr(path, "write"):
        path.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")
    return text


def _parse(name: str, v):
    if v is None or v == "":
        return None
    return int(v) if name in _INT_FIELDS else float(v)


def read_rows(source: str | Path, fmt: str | None = None) -> list[ScalingRow]:
    """Parse rows back from emitted text or from a file path."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and Path(source).exists()):
        path = Path(source)
        text = path.read_text(encoding="utf-8")
        fmt = fmt or ("json" if path.suffix == ".json" else "csv")
    else:
        text = str(source)
        fmt = fmt or ("json" if text.lstrip().startswith("[") else "csv")
    if fmt == "json":
        recs = json.loads(text)
    else:
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != CSV_FIELDS:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        recs = list(reader)
    return [ScalingRow(**{n: _parse(n, rec[n]) for n in CSV_FIELDS}) for rec in recs]
