"""
Command-line front end.

Subcommands: ``simulate``, ``analytic``, ``spectrum``, ``sweep`` and
``amplify``. Primary output goes to stdout (or ``--out``) as CSV or JSON;
diagnostics go to stderr. Exit codes: 0 success, 1 usage error,
2 numerical failure.

A relative ``--out`` path is resolved against ``$STAGSEARCH_OUT_DIR``
when that variable is set.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .analytic import analytic_report
from .errors import BudgetExceededError, NumericalError, ParityError, SizeCapError
from .estimation import DENSE_CAP, ZERO_PHASE_TOL, dense_spectrum, dense_unitary
from .grid import GridSpec
from .harness import MIN_WINDOW, amplification_rounds, amplify_simulated, emit, sweep
from .spectral import block_eigensystem, iter_blocks, overlap_00
from .walk import run

__all__ = ["OUT_DIR_ENV", "CliConfig", "UsageError", "parse_args", "dispatch", "main"]

OUT_DIR_ENV = "STAGSEARCH_OUT_DIR"
SUBCOMMANDS = ("simulate", "analytic", "spectrum", "sweep", "amplify")
_ANALYTIC_ONLY = {"analytic", "spectrum", "sweep"}

log = logging.getLogger("stagsearch")


class UsageError(Exception):
    """Invalid command line."""


@dataclass
class CliConfig:
    subcommand: str
    side: int | None = None
    sides: list[int] = field(default_factory=list)
    steps: int | str | None = None
    marked: tuple[int, int] = (0, 0)
    format: str = "csv"
    out: Path | None = None
    cap: int = DENSE_CAP
    steps_factor: float = 8.0
    rounds: int = 10
    t_f: int | str = "auto"
    zero_phase_tol: float = ZERO_PHASE_TOL
    timing: bool = True


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2 by default
        raise UsageError(message)


def _int_or_auto(text: str) -> int | str:
    if text == "auto":
        return text
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'auto', got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {value}")
    return value


def _marked(text: str) -> tuple[int, int]:
    try:
        x, y = (int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}") from None
    return x, y


def parse_sides(text: str) -> list[int]:
    """``start:end:step`` (end inclusive) or a comma-separated list."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            start, end = parts[:2]
            stride = parts[2] if len(parts) == 3 else 4
            if stride <= 0:
                raise ValueError
            sides = list(range(start, end + 1, stride))
        else:
            sides = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed side range {text!r}; use start:end:step or a,b,c") from None
    if not sides:
        raise argparse.ArgumentTypeError(f"side range {text!r} is empty")
    return sides


def _build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", type=Path, default=None, help="output file (default: stdout)")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    single = _Parser(add_help=False)
    single.add_argument("--side", type=int, required=True, help="grid side m")
    single.add_argument("--marked", type=_marked, default=(0, 0), help="marked vertex 'x,y'")

    parser = _Parser(prog="stagsearch", description="Staggered quantum-walk search on the torus.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common, single], help="time series of the search")
    p.add_argument("--steps", type=_int_or_auto, required=True, help="number of steps or 'auto' (8 t_pred)")

    sub.add_parser("analytic", parents=[common, single], help="closed-form predictions")

    p = sub.add_parser("spectrum", parents=[common, single], help="Fourier block table and dense alpha")
    p.add_argument("--cap", type=int, default=DENSE_CAP, help="dense oracle size cap on N")
    p.add_argument("--zero-phase-tol", type=float, default=ZERO_PHASE_TOL)

    p = sub.add_parser("sweep", parents=[common], help="scaling sweep")
    p.add_argument("--sides", type=parse_sides, default="6,10,14,22,30,46,62,94,126")
    p.add_argument("--steps-factor", type=float, default=8.0, help="walk window in units of t_pred")
    p.add_argument("--no-timing", action="store_true", help="report wall time as 0 (byte-stable output)")

    p = sub.add_parser("amplify", parents=[common, single], help="simulated amplitude amplification")
    p.add_argument("--rounds", type=int, default=10, help="maximum number of rounds")
    p.add_argument("--t-f", type=_int_or_auto, default="auto", help="preparation length or 'auto' (measured t*)")
    return parser


def _check_side(sub: str, side: int) -> None:
    if side < 2 or side % 2:
        raise UsageError(f"--side must be a positive even integer, got {side}")
    if sub in _ANALYTIC_ONLY and (side % 4 != 2 or side < 6):
        raise UsageError(f"{sub} requires side = 2 (mod 4) and side >= 6, got {side}")


def parse_args(argv: Sequence[str] | None) -> CliConfig:
    """Parse and validate; raises :class:`UsageError` on bad input."""
    ns = _build_parser().parse_args(argv)
    sub = ns.subcommand
    cfg = CliConfig(subcommand=sub, format=ns.format)
    if ns.out is not None:
        base = os.environ.get(OUT_DIR_ENV)
        cfg.out = Path(base) / ns.out if base and not ns.out.is_absolute() else ns.out
    if sub == "sweep":
        sides = ns.sides if isinstance(ns.sides, list) else parse_sides(ns.sides)
        for m in sides:
            if m % 4 != 2 or m < 6:
                raise UsageError(f"sweep requires every side = 2 (mod 4) and >= 6; {m} is not")
        cfg.sides, cfg.steps_factor, cfg.timing = sides, ns.steps_factor, not ns.no_timing
        if cfg.steps_factor < 4:
            raise UsageError("--steps-factor must be >= 4")
        return cfg
    cfg.side, cfg.marked = ns.side, ns.marked
    _check_side(sub, cfg.side)
    if not all(0 <= c < cfg.side for c in cfg.marked):
        raise UsageError(f"--marked {cfg.marked} is outside the {cfg.side}x{cfg.side} grid")
    if sub in ("analytic", "spectrum") and cfg.marked != (0, 0):
        raise UsageError(f"{sub} is derived for the marked vertex at the origin; got {cfg.marked}")
    if sub == "simulate":
        cfg.steps = ns.steps
        if cfg.steps == "auto" and (cfg.side % 4 != 2 or cfg.side < 6):
            raise UsageError("--steps auto needs side = 2 (mod 4) and >= 6; pass an explicit step count")
    elif sub == "spectrum":
        cfg.cap, cfg.zero_phase_tol = ns.cap, ns.zero_phase_tol
    elif sub == "amplify":
        cfg.rounds, cfg.t_f = ns.rounds, ns.t_f
        if cfg.rounds < 1:
            raise UsageError("--rounds must be >= 1")
        if cfg.t_f == "auto" and (cfg.side % 4 != 2 or cfg.side < 6):
            raise UsageError("--t-f auto needs side = 2 (mod 4) and >= 6; pass an explicit step count")
        if cfg.t_f == 0:
            raise UsageError("--t-f must be >= 1")
    return cfg


def _num(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    return f"{float(v):.12g}"


def _jsonable(v):
    if isinstance(v, (bool, int)) or v is None:
        return v
    return float(f"{float(v):.12g}")


def _table(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{k: _jsonable(v) for k, v in r.items()} for r in rows], indent=2) + "\n"
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    if rows:
        writer.writerow(list(rows[0]))
        for r in rows:
            writer.writerow(["" if v is None else _num(v) for v in r.values()])
    return out.getvalue()


def _auto_window(grid: GridSpec) -> int:
    report = analytic_report(grid, exact=False)
    return max(math.ceil(8 * report.t_f), MIN_WINDOW)


def _simulate(cfg: CliConfig) -> str:
    grid = GridSpec(cfg.side, cfg.marked)
    steps = _auto_window(grid) if cfg.steps == "auto" else int(cfg.steps)
    res = run(grid, steps)
    if res.t_star is not None:
        log.info("t* = %d, p* = %.6g", res.t_star, res.p_star)
    rows = [
        {"t": t, "p_t": float(p), "re_overlap": float(z.real), "im_overlap": float(z.imag)}
        for t, (p, z) in enumerate(zip(res.probs, res.overlaps))
    ]
    return _table(rows, cfg.format)


def _analytic(cfg: CliConfig) -> str:
    report = analytic_report(GridSpec(cfg.side))
    rec = report.to_record()
    rec["t_pred"] = report.t_f_rounded
    if cfg.format == "json":
        return json.dumps({k: _jsonable(v) for k, v in rec.items()}, indent=2) + "\n"
    return _table([rec], "csv")


def _spectrum(cfg: CliConfig) -> str:
    grid = GridSpec(cfg.side)
    alpha = None
    if grid.n_vertices <= cfg.cap:
        alpha = dense_spectrum(dense_unitary(grid, cfg.cap), grid, zero_tol=cfg.zero_phase_tol).principal_alpha
    else:
        log.info("N=%d above cap %d; dense alpha omitted", grid.n_vertices, cfg.cap)
    rows = []
    for block in iter_blocks(grid):
        block = block_eigensystem(block)
        rows.append(
            {
                "k": block.k,
                "l": block.l,
                "theta": block.theta,
                "overlap_00_w0": overlap_00(block, 0).real,
                "overlap_00_w1": overlap_00(block, 1).real,
                "identity": block.is_identity,
                "dense_alpha": alpha,
            }
        )
    return _table(rows, cfg.format)


def _sweep(cfg: CliConfig) -> str:
    rows = sweep(cfg.sides, cfg.steps_factor, cfg.timing)
    failed = [r for r in rows if not r.ok]
    for r in failed:
        log.error("m=%d failed: %s", r.m, r.error)
    if failed and len(failed) == len(rows):
        raise NumericalError("every sweep row failed")
    return emit(rows, cfg.format)


def _amplify(cfg: CliConfig) -> str:
    grid = GridSpec(cfg.side, cfg.marked)
    if cfg.t_f == "auto":
        res = run(grid, _auto_window(grid))
        t_f = res.t_star
        log.info("t_f = t* = %d, p* = %.6g, expected rounds %d", t_f, res.p_star, amplification_rounds(res.p_star))
    else:
        t_f = int(cfg.t_f)
    result = amplify_simulated(grid, t_f, cfg.rounds)
    if result.partial:
        log.warning("step budget reached after %d rounds", len(result.trace))
    rows = [{"round": i + 1, "p": p} for i, p in enumerate(result.trace)]
    return _table(rows, cfg.format)


_HANDLERS = {
    "simulate": _simulate,
    "analytic": _analytic,
    "spectrum": _spectrum,
    "sweep": _sweep,
    "amplify": _amplify,
}


def dispatch(cfg: CliConfig) -> int:
    try:
        text = _HANDLERS[cfg.subcommand](cfg)
    except (NumericalError, SizeCapError, BudgetExceededError, ArithmeticError) as exc:
        print(f"stagsearch: numerical failure: {exc}", file=sys.stderr)
        return 2
    except ParityError as exc:
        print(f"stagsearch: {exc}", file=sys.stderr)
        return 1
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        try:
            cfg.out.parent.mkdir(parents=True, exist_ok=True)
            cfg.out.write_text(text, encoding="utf-8")
        except OSError as exc:
            print(f"stagsearch: cannot write {cfg.out}: {exc}", file=sys.stderr)
            return 1
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    verbose = argv is not None and ("-v" in argv or "--verbose" in argv)
    verbose = verbose or (argv is None and ("-v" in sys.argv or "--verbose" in sys.argv))
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(f"stagsearch: error: {exc}", file=sys.stderr)
        return 1
    return dispatch(cfg)


if __name__ == "__main__":
    sys.exit(main())
