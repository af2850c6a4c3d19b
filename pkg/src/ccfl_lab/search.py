from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQUARE = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass(frozen=True, slots=True)
class SearchResult:
    x: float
    value: float
    evaluations: int


def _better(x: float, fx: float, best_x: float, best_f: float) -> bool:
    # Strictly lower value wins; equal values resolve toward the lower argument.
    return fx < best_f or (fx == best_f and x < best_x)


def golden_section(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-8) -> SearchResult:
    """Minimise a unimodal ``f`` on [lo, hi] until the bracket shrinks to ``tol`` of its width."""
    a, b = min(lo, hi), max(lo, hi)
    fa, fb = f(a), f(b)
    best_x, best_f = (a, fa) if fa <= fb else (b, fb)
    evals = 2
    h = b - a
    if h <= 0:
        return SearchResult(best_x, best_f, evals)

    stop = max(tol, 1e-15) * h
    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc, yd = f(c), f(d)
    evals += 2
    for x, y in ((c, yc), (d, yd)):
        if _better(x, y, best_x, best_f):
            best_x, best_f = x, y

    while h > stop:
        if yc <= yd:
            b, d, yd = d, c, yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
            x, y = c, yc
        else:
            a, c, yc = c, d, yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)
            x, y = d, yd
        evals += 1
        if _better(x, y, best_x, best_f):
            best_x, best_f = x, y

    return SearchResult(best_x, best_f, evals)


def grid_bracket(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    points: int = 32,
    *,
    log: bool = False,
) -> tuple[float, float, SearchResult]:
    """Coarse pre-scan; returns the neighbours of the best grid point and that point."""
    if points < 2:
        raise ValueError("points must be >= 2.")
    xs = np.geomspace(lo, hi, points) if log else np.linspace(lo, hi, points)
    values = np.array([f(float(x)) for x in xs])
    k = int(np.argmin(values))
    a = float(xs[max(k - 1, 0)])
    b = float(xs[min(k + 1, points - 1)])
    return a, b, SearchResult(float(xs[k]), float(values[k]), points)


def minimize_unimodal(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-8,
    *,
    points: int = 32,
    log: bool = False,
) -> SearchResult:
    if not lo < hi:
        value = f(lo)
        return SearchResult(lo, value, 1)
    if log and lo <= 0:
        raise ValueError("log-space search needs lo > 0.")

    a, b, coarse = grid_bracket(f, lo, hi, points, log=log)
    if log:
        fine = golden_section(lambda u: f(math.exp(u)), math.log(a), math.log(b), tol)
        fine = SearchResult(min(max(math.exp(fine.x), lo), hi), fine.value, fine.evaluations)
    else:
        fine = golden_section(f, a, b, tol)

    evals = coarse.evaluations + fine.evaluations
    if _better(fine.x, fine.value, coarse.x, coarse.value):
        return SearchResult(fine.x, fine.value, evals)
    return SearchResult(coarse.x, coarse.value, evals)
