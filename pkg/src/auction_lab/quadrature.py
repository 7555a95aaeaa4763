"""Adaptive Simpson quadrature and golden-section maximisation.

Both routines work on plain Python callables of one float, which keeps them
fast for the scalar integrands used throughout the package.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

from .errors import NumericalFailure

DEFAULT_TOL = 1e-9
DEFAULT_MAX_DEPTH = 60
POWER_PIECES = 16

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _simpson_step(func, a, fa, m, fm, b, fb, coarse, tol, depth):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = func(lm)
    frm = func(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - coarse
    if abs(delta) <= 15.0 * tol or lm in (a, m) or rm in (m, b):
        return left + right + delta / 15.0
    if depth <= 0:
        raise NumericalFailure(
            f"adaptive Simpson did not converge on [{a!r}, {b!r}] "
            f"(error estimate {abs(delta) / 15.0:.3g} > tol {tol:.3g})"
        )
    half = tol / 2.0
    return _simpson_step(func, a, fa, lm, flm, m, fm, left, half, depth - 1) + _simpson_step(
        func, m, fm, rm, frm, b, fb, right, half, depth - 1
    )


def adaptive_simpson(
    func: Callable[[float], float],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> float:
    """Integrate ``func`` over ``[a, b]`` to absolute tolerance ``tol``.

    Intervals are bisected until the Simpson error estimate on each piece
    is below its share of the tolerance; the accepted value carries the
    usual Richardson correction. Raises :class:`NumericalFailure` when a
    piece still fails after ``max_depth`` bisections.
    """
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(func, b, a, tol, max_depth)
    m = 0.5 * (a + b)
    fa, fm, fb = func(a), func(m), func(b)
    if not (math.isfinite(fa) and math.isfinite(fm) and math.isfinite(fb)):
        raise NumericalFailure(f"integrand is not finite on [{a!r}, {b!r}]")
    coarse = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_step(func, a, fa, m, fm, b, fb, coarse, tol, max_depth)


def adaptive_simpson_pieces(
    func: Callable[[float], float],
    points: Sequence[float],
    tol: float = DEFAULT_TOL,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> float:
    """Integrate over ``[points[0], points[-1]]`` piece by piece.

    Each piece gets a share of ``tol`` proportional to its length. Cutting
    at points inside a narrow peak keeps the first Simpson estimates from
    sampling only the flat part and stopping early.
    """
    pts = sorted(set(float(p) for p in points))
    if len(pts) < 2:
        return 0.0
    width = pts[-1] - pts[0]
    return math.fsum(
        adaptive_simpson(func, a, b, tol * (b - a) / width, max_depth) for a, b in zip(pts, pts[1:])
    )


def power_grid(n: int, pieces: int = POWER_PIECES) -> list[float]:
    """Interior cut points ``(j / pieces)^(1/n)`` of ``[0, 1]``.

    They split the law of the largest of ``n`` uniforms into equal masses,
    which is where integrands such as ``F^(n-1)`` and ``w^(n-1)`` put theirs.
    """
    n = max(int(n), 1)
    return [(j / pieces) ** (1.0 / n) for j in range(1, pieces)]


def golden_section_max(
    func: Callable[[float], float],
    a: float,
    b: float,
    xtol: float = 1e-10,
    max_iter: int = 200,
) -> tuple[float, float]:
    """Locate a maximum of a unimodal ``func`` on ``[a, b]``.

    Returns ``(x, func(x))`` for the best point seen, endpoints included, so
    a supremum sitting on the boundary is not lost.
    """
    fa, fb = func(a), func(b)
    best = (a, fa) if fa >= fb else (b, fb)
    lo, hi = a, b
    c = hi - _INV_PHI * (hi - lo)
    d = lo + _INV_PHI * (hi - lo)
    fc, fd = func(c), func(d)
    for _ in range(max_iter):
        if hi - lo <= xtol:
            break
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _INV_PHI * (hi - lo)
            fc = func(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INV_PHI * (hi - lo)
            fd = func(d)
    for x, fx in ((c, fc), (d, fd)):
        if fx > best[1]:
            best = (x, fx)
    return best
