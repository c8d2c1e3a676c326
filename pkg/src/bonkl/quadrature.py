"""Adaptive Simpson quadrature, used as an independent check on closed-form integrals."""

from __future__ import annotations

import math
from typing import Callable


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 60,
    breakpoints: tuple[float, ...] = (),
) -> float:
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    ``breakpoints`` inside ``(a, b)`` split the range up front; each piece gets
    a share of ``tol`` proportional to its length.  Uses the Richardson-corrected
    Simpson estimate on every accepted panel.
    """
    if b < a:
        return -adaptive_simpson(f, b, a, tol, max_depth, breakpoints)
    if a == b:
        return 0.0
    cuts = [a] + sorted(x for x in breakpoints if a < x < b) + [b]
    total = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        share = tol * (hi - lo) / (b - a)
        flo, fmid, fhi = f(lo), f(0.5 * (lo + hi)), f(hi)
        whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)
        total.append(_refine(f, lo, hi, flo, fmid, fhi, whole, share, max_depth))
    return math.fsum(total)


def _refine(f, a, b, fa, fm, fb, whole, tol, depth):
    # explicit stack instead of recursion; depth 60 would be fine either way
    acc = []
    stack = [(a, b, fa, fm, fb, whole, tol, depth)]
    while stack:
        a, b, fa, fm, fb, whole, tol, depth = stack.pop()
        m = 0.5 * (a + b)
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15.0 * tol:
            acc.append(left + right + delta / 15.0)
        else:
            stack.append((a, m, fa, flm, fm, left, 0.5 * tol, depth - 1))
            stack.append((m, b, fm, frm, fb, right, 0.5 * tol, depth - 1))
    return math.fsum(acc)
