"""Derivative-free 1-D search used by the numeric bound oracles."""
from __future__ import annotations

import math

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI2 = (3 - math.sqrt(5)) / 2


def golden_section_min(f, a: float, b: float, tol: float = 1e-12, max_iter: int = 2000):
    """Minimize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``.

    Stops once the bracket is narrower than ``tol`` or stops shrinking in
    floating point.  The endpoints are compared against the interior result,
    so a minimizer sitting on the boundary is returned exactly.
    """
    a, b = min(a, b), max(a, b)
    ends = (a, b)
    c = a + INV_PHI2 * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = a + INV_PHI2 * (b - a)
            if not a < c < d:
                break
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            if not c < d < b:
                break
            fd = f(d)
    x, fx = (c, fc) if fc <= fd else (d, fd)
    fa, fb = f(ends[0]), f(ends[1])
    if fb < fx:
        x, fx = ends[1], fb
    if fa <= fx:
        x, fx = ends[0], fa
    return x, fx


def golden_section_max(f, a: float, b: float, tol: float = 1e-12, max_iter: int = 2000):
    x, fx = golden_section_min(lambda t: -f(t), a, b, tol, max_iter)
    return x, -fx
