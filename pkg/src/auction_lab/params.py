"""Lock amount and fee coefficient for a valuation distribution.

The lock bound is the supremum over ``s`` of

    G(s) = F(s)^-n * int_0^s F(x)^(n-1) (1 - F(x)) dx.

Writing ``u = F(s)`` and substituting ``x = Q(u * w)`` turns this into
``G = int_0^1 w^(n-1) m(Q(u * w)) dw`` with ``m = (1 - F) / f``: a
weighted average of the Mills ratio over ``[0, u]``, divided by ``n``. The
integrand is bounded and smooth, the ``0/0`` form at the lower support
edge disappears (``G -> m(lower) / n``), and ``n * G <= sup m`` holds by
construction.

:func:`break_even_lock` computes the lock at which a single fake bid has
exactly zero expected gain, directly from that gain's expectation. See the
README for how it relates to :func:`lock_bound_exact`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .distributions import Distribution, OrderStatistics, hazard_ratio_sup
from .errors import ConfigError, DegenerateDistribution, NumericalFailure, UnboundedHazard
from .quadrature import DEFAULT_TOL, adaptive_simpson_pieces, golden_section_max, power_grid

LOCK_GRID = 512
# alpha divides two quadratures; this keeps it within 1e-9 of closed forms
FEE_TOL = 1e-12


@dataclass(frozen=True)
class LockBoundResult:
    L_exact: float
    L_asymptotic: float
    argmax_s: float
    n: int

    def to_dict(self) -> dict:
        return {
            "L_exact": _finite_or_none(self.L_exact),
            "L_asymptotic": _finite_or_none(self.L_asymptotic),
            "argmax_s": self.argmax_s,
            "n": self.n,
        }


@dataclass(frozen=True)
class FeeResult:
    alpha: float
    e_b1: float
    e_b2: float
    gap: float
    n: int

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "e_b1": self.e_b1, "e_b2": self.e_b2, "gap": self.gap, "n": self.n}


@dataclass(frozen=True)
class BreakEvenLock:
    value: float
    argmax_s: float
    n: int


def _finite_or_none(x: float):
    return x if math.isfinite(x) else None


def _check_n(dist: Distribution, n: int) -> None:
    if n < 2:
        raise ConfigError("need at least two bidders")
    if dist.lower < 0.0:
        raise ConfigError("distribution must be supported on non-negative reals")


def _sup_over_quantiles(
    dist: Distribution,
    value_at: Callable[[float], float],
    grid: int,
) -> tuple[float, float]:
    """Maximise ``value_at(u)`` over ``u in [0, 1)``: grid scan, then golden section."""
    values = [value_at(k / grid) for k in range(grid)]
    k = max(range(grid), key=values.__getitem__)
    lo = (k - 1) / grid if k > 0 else 0.0
    hi = (k + 1) / grid
    u_star, v_star = golden_section_max(value_at, lo, min(hi, 1.0 - 1.0 / (4 * grid)), xtol=1e-9)
    if v_star < values[k]:
        u_star, v_star = k / grid, values[k]
    return v_star, u_star


def _window_integral(dist: Distribution, n: int, u: float, h: Callable[[float], float], tol: float):
    """``int_0^1 w^(n-1) h(Q(u w)) dw``."""
    quantile = dist.quantile
    k = n - 1

    def integrand(w):
        if w == 0.0 and k:
            # w^(n-1) beats any Mills-ratio pole at the edge
            return 0.0
        return w**k * h(quantile(u * w))

    try:
        return adaptive_simpson_pieces(integrand, [0.0, *power_grid(n), 1.0], tol=tol)
    except NumericalFailure as exc:
        raise NumericalFailure(f"lock integral at F(s)={u:.6g} for {dist!r}, n={n}: {exc}") from None


def lock_bound_exact(dist: Distribution, n: int, grid: int = LOCK_GRID, tol: float = DEFAULT_TOL) -> LockBoundResult:
    """Smallest lock making every single fake bid unprofitable, in the closed form
    ``max_s F(s)^-n int_0^s F^(n-1) (1 - F)``.

    ``L_exact`` is ``inf`` when the Mills ratio has a pole at the lower
    support edge (the log-normal does), since ``G`` then diverges there.
    """
    _check_n(dist, n)
    mills = dist.mills
    asymptotic = _asymptotic_or_inf(dist, n)
    if not math.isfinite(mills(dist.lower)):
        return LockBoundResult(math.inf, asymptotic, dist.lower, n)

    def G(u):
        return _window_integral(dist, n, u, mills, tol)

    value, u_star = _sup_over_quantiles(dist, G, grid)
    return LockBoundResult(value, asymptotic, dist.quantile(u_star), n)


def _asymptotic_or_inf(dist: Distribution, n: int) -> float:
    A = hazard_ratio_sup(dist)
    return A / n if math.isfinite(A) else math.inf


def lock_bound_asymptotic(dist: Distribution, n: int) -> float:
    """``sup m / n``, the large-n form of :func:`lock_bound_exact`."""
    if n < 1:
        raise ConfigError("n must be >= 1")
    A = hazard_ratio_sup(dist)
    if not math.isfinite(A):
        raise UnboundedHazard(
            f"sup (1 - F(s)) / f(s) is unbounded for {dist!r}; no finite lock satisfies the bound"
        )
    return A / n


def break_even_lock(dist: Distribution, n: int, grid: int = LOCK_GRID, tol: float = DEFAULT_TOL) -> BreakEvenLock:
    """Lock at which the best single fake bid has zero expected gain.

    The gain of a fake bid at ``s`` is ``n (1 - F(s)) int_0^s F^(n-1) dx``
    and its expected cost is ``L * F(s)^n``, so the break-even lock is
    ``sup_s n (1 - u) int_0^1 w^(n-1) / f(Q(u w)) dw`` with ``u = F(s)``.
    """
    _check_n(dist, n)
    pdf = dist.pdf
    if not math.isfinite(dist.mills(dist.lower)):
        return BreakEvenLock(math.inf, dist.lower, n)

    def C(u):
        return n * (1.0 - u) * _window_integral(dist, n, u, lambda x: 1.0 / pdf(x), tol)

    value, u_star = _sup_over_quantiles(dist, C, grid)
    return BreakEvenLock(value, dist.quantile(u_star), n)


def fee_alpha(dist: Distribution, n: int, tol: float = FEE_TOL) -> FeeResult:
    """``alpha = 2 E[B1 - B2] / E[B2]`` for the linear fee ``g(x) = alpha x``."""
    if n < 2:
        raise DegenerateDistribution("E[B2] is zero with fewer than two bidders")
    stats = OrderStatistics(dist, n)
    e_b1 = stats.expected_b1(tol)
    gap = stats.expected_gap(tol)
    e_b2 = e_b1 - gap
    if not e_b2 > 0.0:
        raise DegenerateDistribution(f"E[B2] = {e_b2!r} for {dist!r}, n={n}")
    return FeeResult(2.0 * gap / e_b2, e_b1, e_b2, gap, n)


def repeated_auction_check(b1: float, b2: float, alpha: float) -> bool:
    """True when selling now beats buying the item back and relisting it.

    Honest proceeds ``b2 - alpha b2`` versus ``b1 - 2 alpha b1`` for a seller
    who wins with a fake bid, pays the fee once, and resells at ``b1``.
    """
    if not b1 >= b2 >= 0:
        raise ValueError("need b1 >= b2 >= 0")
    return b2 - alpha * b2 >= b1 - 2.0 * alpha * b1
