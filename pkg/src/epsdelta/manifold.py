"""Grid sampling of the two-parameter continuity function (x, eps) -> delta."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

from .errors import (
    BracketError,
    DomainError,
    HypothesisViolation,
    InvalidBracketError,
    IterationLimitError,
    NoSignChangeError,
)
from .numerics import Interval, RealFunction
from .solver import solve

WINDOW_RADIUS = 1.0

_REASONS = (
    (HypothesisViolation, "zero-derivative"),
    (BracketError, "bracket-failure"),
    (NoSignChangeError, "no-sign-change"),
    (IterationLimitError, "iteration-limit"),
    (DomainError, "domain-error"),
    (InvalidBracketError, "invalid-window"),
)


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    x_count: int
    eps_min: float
    eps_max: float
    eps_count: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError("x_min must be below x_max")
        if not 0 < self.eps_min < self.eps_max:
            raise ValueError("need 0 < eps_min < eps_max")
        if self.x_count < 2 or self.eps_count < 2:
            raise ValueError("grid counts must be at least 2")

    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.x_count)

    def epsilons(self) -> np.ndarray:
        return np.linspace(self.eps_min, self.eps_max, self.eps_count)


@dataclass(frozen=True)
class ManifoldSample:
    x: float
    eps: float
    delta: float  # nan when skipped
    status: str = "ok"  # "ok" or "skipped:<reason>"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def _column(f: RealFunction, x: float, epsilons, omega_sol: float) -> list:
    dom = f.domain
    if x in dom.excluded:
        return [ManifoldSample(x, e, math.nan, "skipped:pole") for e in epsilons]
    if x not in dom:
        return [ManifoldSample(x, e, math.nan, "skipped:outside-domain") for e in epsilons]
    r = min(WINDOW_RADIUS, 0.9 * dom.distance_to_edge(x))
    window = Interval(x - r, x + r)
    out = []
    for e in epsilons:
        try:
            rep = solve(f, x, e, omega_sol, window)
            out.append(ManifoldSample(x, e, rep.delta))
        except Exception as exc:
            reason = next((r for cls, r in _REASONS if isinstance(exc, cls)), None)
            if reason is None:
                raise
            out.append(ManifoldSample(x, e, math.nan, f"skipped:{reason}"))
    return out


def _column_task(args):
    return _column(*args)


def default_workers() -> int:
    env = os.environ.get("EPSDELTA_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def sample_manifold(f: RealFunction, grid: GridSpec, omega_sol: float = 1e-6,
                    workers: int = 1) -> list:
    """Solve at every grid point; x-major order, independent of ``workers``.

    Points where the solver fails are kept as skipped samples with a
    machine-readable reason instead of aborting the sweep.
    """
    xs = [float(x) for x in grid.xs()]
    epsilons = [float(e) for e in grid.epsilons()]
    tasks = [(f, x, epsilons, omega_sol) for x in xs]
    if workers <= 1:
        columns = [_column_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            columns = list(pool.map(_column_task, tasks))
    return [s for col in columns for s in col]


def format_real(v: float) -> str:
    """Shortest repr that round-trips binary64, with a trailing '.0' dropped."""
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def write_csv(samples: Iterable[ManifoldSample], destination: IO[str]) -> None:
    destination.write("x,epsilon,delta,status\n")
    for s in samples:
        delta = format_real(s.delta) if s.ok else ""
        destination.write(f"{format_real(s.x)},{format_real(s.eps)},{delta},{s.status}\n")


def write_json(samples: Iterable[ManifoldSample], destination: IO[str]) -> None:
    # Numbers are emitted as raw literals so they carry the same text as the CSV.
    rows = []
    for s in samples:
        delta = format_real(s.delta) if s.ok else "null"
        rows.append(f'{{"x": {format_real(s.x)}, "epsilon": {format_real(s.eps)}, '
                    f'"delta": {delta}, "status": {json.dumps(s.status)}}}')
    destination.write("[\n" + ",\n".join(rows) + ("\n" if rows else "") + "]\n")
