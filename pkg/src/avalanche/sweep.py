"""Sweep tables and feature location on coupling grids."""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .linalg import ValidationError

BASE_COLUMNS = ("J", "quantity", "q", "d1", "d2", "d3", "value")
DEFAULT_THREADS_ENV = "AVALANCHE_THREADS"


def fmt(x) -> str:
    """12 significant digits; integers and labels pass through."""
    if x is None:
        return ""
    if isinstance(x, (str, bool)):
        return str(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


@dataclass
class SweepTable:
    """Long-format table: one row per (J, quantity, site tuple)."""

    extra_columns: tuple[str, ...] = ()
    rows: list[dict] = field(default_factory=list)

    @property
    def columns(self) -> tuple[str, ...]:
        return BASE_COLUMNS + tuple(self.extra_columns)

    def add(self, J: float, quantity: str, value: float, distances: Sequence[int] = (),
            q: int | None = None, **extra) -> None:
        d = list(distances) + [None] * (3 - len(distances))
        row = {"J": J, "quantity": quantity, "q": q if q is not None else len(distances) + 1,
               "d1": d[0], "d2": d[1], "d3": d[2], "value": value}
        row.update(extra)
        self.rows.append(row)

    def extend(self, other: "SweepTable") -> None:
        self.rows.extend(other.rows)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([fmt(row.get(c)) for c in self.columns])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text

    def series(self, quantity: str, distances: Sequence[int] | None = None,
               q: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """(J, value) arrays for one curve, sorted by J."""
        sel = []
        for row in self.rows:
            if row["quantity"] != quantity:
                continue
            if q is not None and row["q"] != q:
                continue
            if distances is not None:
                d = tuple(x for x in (row["d1"], row["d2"], row["d3"]) if x is not None)
                if d != tuple(distances):
                    continue
            sel.append((row["J"], row["value"]))
        if not sel:
            raise ValidationError(f"no rows for quantity {quantity!r} with distances {distances}")
        sel.sort()
        x, y = zip(*sel)
        return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


def grid(j_min: float, j_max: float, steps: int) -> np.ndarray:
    """``steps`` equally spaced couplings including both ends."""
    if steps < 1:
        raise ValidationError("steps must be positive")
    if j_max < j_min:
        raise ValidationError("j_max must not be below j_min")
    if steps == 1:
        return np.array([float(j_min)])
    return np.round(np.linspace(j_min, j_max, steps), 12)


def _vertex(x: np.ndarray, y: np.ndarray) -> float:
    a, b, _ = np.polyfit(x, y, 2)
    if a == 0:
        return float(x[np.argmax(y)])
    return float(-b / (2 * a))


def locate_maximum(x: Sequence[float], y: Sequence[float]) -> float:
    """Location of the largest value, refined by a parabola through three grid points."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    i = int(np.argmax(y))
    if i == 0 or i == len(x) - 1:
        return float(x[i])
    v = _vertex(x[i - 1:i + 2], y[i - 1:i + 2])
    return float(np.clip(v, x[i - 1], x[i + 1]))


def locate_crossings(x: Sequence[float], y1: Sequence[float], y2: Sequence[float]) -> list[float]:
    """Every J where y1 - y2 changes sign, refined by a quadratic through three points."""
    x = np.asarray(x, dtype=float)
    diff = np.asarray(y1, dtype=float) - np.asarray(y2, dtype=float)
    out = []
    for i in range(len(x) - 1):
        if diff[i] == 0 and (i == 0 or diff[i - 1] != 0):
            if 0 < i:
                out.append(float(x[i]))
            continue
        if diff[i] * diff[i + 1] >= 0:
            continue
        j = i - 1 if i > 0 else i + 2
        if j >= len(x):
            out.append(float(x[i] - diff[i] * (x[i + 1] - x[i]) / (diff[i + 1] - diff[i])))
            continue
        idx = sorted([i, i + 1, j])
        coef = np.polyfit(x[idx], diff[idx], 2)
        roots = [r.real for r in np.roots(coef) if abs(r.imag) < 1e-12 and x[i] <= r.real <= x[i + 1]]
        if roots:
            out.append(float(roots[0]))
        else:
            out.append(float(x[i] - diff[i] * (x[i + 1] - x[i]) / (diff[i + 1] - diff[i])))
    return out


def locate_onset(x: Sequence[float], y: Sequence[float], tol: float = 1e-9) -> float | None:
    """First J with y > tol, extrapolated linearly back to zero within the bracketing step."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    hits = np.flatnonzero(y > tol)
    if hits.size == 0:
        return None
    i = int(hits[0])
    if i == 0:
        return float(x[0])
    if i + 1 < len(x) and y[i + 1] > y[i]:
        slope = (y[i + 1] - y[i]) / (x[i + 1] - x[i])
        return float(np.clip(x[i] - y[i] / slope, x[i - 1], x[i]))
    return float(x[i])


def worker_count(env: str = DEFAULT_THREADS_ENV) -> int:
    raw = os.environ.get(env)
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValidationError(f"{env} must be an integer, got {raw!r}") from None
        return max(1, n)
    return os.cpu_count() or 1


def parallel_map(fn: Callable, items: Iterable, workers: int = 1) -> list:
    """``[fn(i) for i in items]`` in order, optionally across processes."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
