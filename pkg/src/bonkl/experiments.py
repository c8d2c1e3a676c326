"""n-sweeps, Monte Carlo studies and figure reproduction, with CSV/SVG output."""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from bonkl import scenarios
from bonkl.bestofn import MAX_N, bon_pmf, epsilon_n_samples, sample_best_of_n
from bonkl.bounds import alternate_estimator, expected_estimator, kl_report, proposed_estimator
from bonkl.errors import ConfigError, ParseError
from bonkl.policy import BasePolicy, read_distribution
from bonkl.svg import SvgStyle, emit_svg

SWEEP_COLUMNS = (
    "n",
    "exact_kl",
    "formula",
    "alt_expected",
    "proposed_expected",
    "gap_upper",
    "gap_lower",
    "gap_lower_simple",
    "thm4_bound",
    "eps_inf",
    "expected_reward",
    "mc_tv",
)
MCVAR_COLUMNS = (
    "n",
    "num_samples",
    "proposed_mean",
    "proposed_std",
    "proposed_expected",
    "proposed_within_5se",
    "alternate_mean",
    "alternate_std",
    "alternate_expected",
    "alternate_within_5se",
)
INT_COLUMNS = {"n", "num_samples", "proposed_within_5se", "alternate_within_5se"}

DEFAULT_GRID_POINTS = 50
FIGURE_MAX_N = {1: 10**3, 2: 10**6, 3: 10**6}
FIGURE2_SIZES = (10, 100, 1000, 10000)


# --- n-grids --------------------------------------------------------------------


def log_grid(start: int, stop: int, points: int) -> tuple[int, ...]:
    """``points`` log-spaced integers from start to stop, rounded and deduplicated."""
    if start < 1 or stop < start or points < 1:
        raise ConfigError(f"bad log grid {start}:{stop}:log{points}")
    if points == 1:
        return (start,)
    raw = np.logspace(math.log10(start), math.log10(stop), points)
    vals = sorted({int(v) for v in np.rint(raw)} | {start, stop})
    return tuple(vals)


_LOG_SPEC = re.compile(r"^(\d+):(\d+):log(\d+)$")
_RANGE_SPEC = re.compile(r"^(\d+):(\d+)$")


def parse_grid(spec: str) -> tuple[int, ...]:
    """Parse ``a:b:logK``, ``a:b`` (every integer) or a comma list."""
    spec = spec.strip()
    m = _LOG_SPEC.match(spec)
    if m:
        grid = log_grid(int(m.group(1)), int(m.group(2)), int(m.group(3)))
    elif (m := _RANGE_SPEC.match(spec)) is not None:
        a, b = int(m.group(1)), int(m.group(2))
        if b < a:
            raise ConfigError(f"empty range {spec!r}")
        grid = tuple(range(a, b + 1))
    else:
        try:
            grid = tuple(int(tok) for tok in spec.split(","))
        except ValueError:
            raise ConfigError(f"cannot parse n-grid {spec!r}") from None
    return validate_grid(grid)


def validate_grid(grid: Sequence[int]) -> tuple[int, ...]:
    grid = tuple(int(v) for v in grid)
    if not grid:
        raise ConfigError("n-grid is empty")
    if grid[0] < 1:
        raise ConfigError("n-grid values must be positive")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("n-grid must be strictly increasing")
    if grid[-1] > MAX_N:
        raise ConfigError(f"n-grid exceeds the maximum n of {MAX_N}")
    return grid


@dataclass(frozen=True)
class SweepConfig:
    n_grid: tuple[int, ...]
    dist: Path | None = None
    builtin: str | None = None
    mc_samples: int = 0
    seed: int = 0
    output: Path | None = None
    svg: Path | None = None
    jitter: float | None = None
    columns: tuple[str, ...] = field(default=("formula", "exact_kl", "alt_expected", "proposed_expected"))

    def __post_init__(self):
        if (self.dist is None) == (self.builtin is None):
            raise ConfigError("exactly one of dist and builtin must be given")
        object.__setattr__(self, "n_grid", validate_grid(self.n_grid))
        if self.mc_samples < 0:
            raise ConfigError("mc_samples must be >= 0")
        if not (0 <= self.seed < 2**64):
            raise ConfigError("seed must be a 64-bit unsigned integer")

    def load(self) -> BasePolicy:
        if self.builtin is not None:
            return scenarios.builtin(self.builtin)
        return read_distribution(self.dist, jitter=self.jitter, seed=self.seed)


# --- CSV ---------------------------------------------------------------------------


def _cell(col: str, v) -> str:
    if v is None:
        return ""
    if col in INT_COLUMNS:
        return str(int(v))
    return "%.17g" % float(v)


def format_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(c, row.get(c)) for c in columns])
    return buf.getvalue()


def parse_csv(text: str) -> tuple[tuple[str, ...], list[dict]]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = tuple(next(reader))
    except StopIteration:
        raise ParseError("empty CSV") from None
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if len(rec) != len(header):
            raise ParseError(f"CSV line {lineno}: expected {len(header)} fields, got {len(rec)}")
        row = {}
        for col, s in zip(header, rec):
            try:
                row[col] = None if s == "" else (int(s) if col in INT_COLUMNS else float(s))
            except ValueError:
                raise ParseError(f"CSV line {lineno}: bad value {s!r} in column {col}") from None
        rows.append(row)
    return header, rows


def _write(path: Path | None, text: str) -> None:
    if path is None:
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# --- sweeps -----------------------------------------------------------------------


def sweep_rows(p: BasePolicy, n_grid: Sequence[int], mc_samples: int = 0, seed: int = 0) -> list[dict]:
    """One row per n; every KlReport is re-checked against the proven inequalities."""
    rows = []
    for n in n_grid:
        rep = kl_report(p, n).check()
        row = {
            "n": rep.n,
            "exact_kl": rep.exact_kl,
            "formula": rep.formula,
            "alt_expected": rep.alt_estimator_expected,
            "proposed_expected": rep.proposed_estimator_expected,
            "gap_upper": rep.gap_upper,
            "gap_lower": rep.gap_lower,
            "gap_lower_simple": rep.gap_lower_simple,
            "thm4_bound": rep.thm4_bound,
            "eps_inf": rep.eps_inf,
            "expected_reward": rep.expected_reward,
            # every n reuses the seed; rows are then comparable draw for draw
            "mc_tv": sample_best_of_n(p, n, mc_samples, seed).tv_distance if mc_samples else None,
        }
        rows.append(row)
    return rows


def run_sweep(cfg: SweepConfig) -> list[dict]:
    p = cfg.load()
    rows = sweep_rows(p, cfg.n_grid, cfg.mc_samples, cfg.seed)
    _write(cfg.output, format_csv(rows, SWEEP_COLUMNS))
    if cfg.svg is not None:
        title = cfg.builtin if cfg.builtin is not None else Path(cfg.dist).name
        _write(cfg.svg, emit_svg(rows, SvgStyle(columns=cfg.columns, title=title)))
    return rows


def mc_variance_rows(p: BasePolicy, n_grid: Sequence[int], mc_samples: int, seed: int) -> list[dict]:
    if mc_samples < 2:
        raise ConfigError("mc-var needs at least 2 Monte Carlo samples")
    rows = []
    for n in n_grid:
        eps = epsilon_n_samples(p, n, mc_samples, seed)
        pi = bon_pmf(p, n)
        row = {"n": n, "num_samples": mc_samples}
        for name, est in (("proposed", proposed_estimator), ("alternate", alternate_estimator)):
            values = np.asarray(est(eps, n), dtype=float)
            # shifting by one sample keeps constant samples at exactly zero spread
            shifted = values - values[0]
            mean = float(values[0] + np.mean(shifted))
            std = float(np.std(shifted, ddof=1))
            expected = expected_estimator(p, n, name, pi=pi)
            slack = 5.0 * std / math.sqrt(mc_samples) + 1e-12 * max(1.0, abs(expected))
            row[f"{name}_mean"] = mean
            row[f"{name}_std"] = std
            row[f"{name}_expected"] = expected
            row[f"{name}_within_5se"] = int(abs(mean - expected) <= slack)
        rows.append(row)
    return rows


def mc_variance_study(cfg: SweepConfig) -> list[dict]:
    """Sample mean and spread of both estimators evaluated at random eps_n."""
    rows = mc_variance_rows(cfg.load(), cfg.n_grid, cfg.mc_samples, cfg.seed)
    _write(cfg.output, format_csv(rows, MCVAR_COLUMNS))
    if cfg.svg is not None:
        style = SvgStyle(columns=("proposed_mean", "proposed_expected", "alternate_mean", "alternate_expected"))
        _write(cfg.svg, emit_svg(rows, style))
    return rows


# --- figures -------------------------------------------------------------------


@dataclass(frozen=True)
class FigureCurve:
    name: str
    rows: list[dict]
    csv_path: Path | None
    svg_path: Path | None


def reproduce(
    name: str,
    max_n: int,
    columns: Sequence[str],
    out_dir: Path | None = None,
    points: int = DEFAULT_GRID_POINTS,
    stem: str | None = None,
) -> FigureCurve:
    """Sweep one built-in scenario over a log grid and write ``<stem>.csv``/``.svg``."""
    p = scenarios.builtin(name)
    rows = sweep_rows(p, log_grid(1, max_n, points))
    stem = stem or re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")
    csv_path = svg_path = None
    if out_dir is not None:
        csv_path = Path(out_dir) / f"{stem}.csv"
        svg_path = Path(out_dir) / f"{stem}.svg"
        _write(csv_path, format_csv(rows, SWEEP_COLUMNS))
        _write(svg_path, emit_svg(rows, SvgStyle(columns=tuple(columns), title=name)))
    return FigureCurve(name=name, rows=rows, csv_path=csv_path, svg_path=svg_path)


def reproduce_figure(figure: int, out_dir: Path | None = None, L: int | None = None) -> list[FigureCurve]:
    if figure == 1:
        cols = ("formula", "exact_kl", "proposed_expected")
        return [reproduce("example1", FIGURE_MAX_N[1], cols, out_dir, stem="fig1_example1")]
    cols = ("formula", "exact_kl", "alt_expected", "proposed_expected")
    if figure == 2:
        sizes = (L,) if L is not None else FIGURE2_SIZES
        return [
            reproduce(f"uniform({size})", FIGURE_MAX_N[2], cols, out_dir, stem=f"fig2_uniform_L{size}")
            for size in sizes
        ]
    if figure == 3:
        return [
            reproduce(name, FIGURE_MAX_N[3], cols, out_dir, stem=f"fig3_{name}")
            for name in ("cherry_left", "cherry_right")
        ]
    raise ConfigError(f"unknown figure {figure!r}; expected 1, 2 or 3")
