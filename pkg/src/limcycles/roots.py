"""Bracketed scalar root finding: bisection warm-up followed by safeguarded secant."""

from __future__ import annotations

import math
from typing import Callable


class RootError(RuntimeError):
    pass


def bisect_secant(
    f: Callable[[float], float],
    a: float,
    b: float,
    fa: float | None = None,
    fb: float | None = None,
    ftol: float = 0.0,
    xtol: float = 0.0,
    n_bisect: int = 4,
    maxiter: int = 200,
) -> float:
    """Root of ``f`` in the bracket ``[a, b]``.

    After ``n_bisect`` bisections the bracket is shrunk with secant steps,
    falling back to bisection whenever the secant point leaves the bracket
    or fails to halve it (Illinois-style safeguard). Stops when
    ``|f| <= ftol`` or the bracket is narrower than ``xtol`` (or at machine
    resolution).
    """
    fa = f(a) if fa is None else fa
    fb = f(b) if fb is None else fb
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if not (math.isfinite(fa) and math.isfinite(fb)) or (fa > 0) == (fb > 0):
        raise RootError(f"no sign change on [{a}, {b}]: f = {fa}, {fb}")

    best, fbest = (a, fa) if abs(fa) < abs(fb) else (b, fb)
    width = abs(b - a)
    for it in range(maxiter):
        if abs(fbest) <= ftol:
            return best
        if abs(b - a) <= max(xtol, 4e-16 * max(abs(a), abs(b))):
            return best
        if it < n_bisect:
            c = 0.5 * (a + b)
        else:
            c = b - fb * (b - a) / (fb - fa)
            lo, hi = min(a, b), max(a, b)
            if not (lo < c < hi) or abs(b - a) > 0.5 * width:
                c = 0.5 * (a + b)
        width = abs(b - a)
        fc = f(c)
        if not math.isfinite(fc):
            raise RootError(f"non-finite value at {c}")
        if abs(fc) < abs(fbest):
            best, fbest = c, fc
        if fc == 0.0:
            return c
        if (fc > 0) == (fa > 0):
            a, fa = c, fc
        else:
            b, fb = c, fc
    return best
