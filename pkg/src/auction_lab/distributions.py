"""Valuation distributions, random streams and order-statistic oracles.

Four families are supported: ``Uniform``, ``Exponential``,
``ShiftedExponential`` and ``LogNormal``. Scalar methods use :mod:`math` so
they are cheap inside quadrature loops; sampling is vectorised with numpy.

The quantity that drives the lock and fee calculations is the Mills ratio
``(1 - F(x)) / f(x)``, exposed as :meth:`Distribution.mills`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any, ClassVar

import jsonschema
import numpy as np
from scipy import special

from .errors import ConfigError, NumericalFailure
from .quadrature import DEFAULT_TOL, adaptive_simpson_pieces, golden_section_max, power_grid

HAZARD_CAP = 1e9
HAZARD_GRID = 10_000
TAIL_QUANTILE = 1e-12

_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class Distribution:
    """Common interface of the valuation distributions.

    Subclasses are frozen dataclasses, so instances are hashable and safe
    to share between threads.
    """

    kind: ClassVar[str]
    lower: float
    upper: float

    def pdf(self, x: float) -> float:
        raise NotImplementedError

    def cdf(self, x: float) -> float:
        raise NotImplementedError

    def sf(self, x: float) -> float:
        return 1.0 - self.cdf(x)

    def quantile(self, u: float) -> float:
        raise NotImplementedError

    def isf(self, p: float) -> float:
        """Upper-tail quantile: the x with ``sf(x) == p``, accurate for tiny p."""
        return self.quantile(1.0 - p)

    def quantile_array(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def mills(self, x: float) -> float:
        """``(1 - F(x)) / f(x)``; ``inf`` where the density vanishes."""
        f = self.pdf(x)
        s = self.sf(x)
        if f <= 0.0:
            return math.inf if s > 0.0 else 0.0
        return s / f

    def mean(self) -> float:
        raise NotImplementedError

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """Inverse-CDF draws from ``rng``."""
        return self.quantile_array(rng.random(size))

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, **asdict(self)}


@dataclass(frozen=True)
class Uniform(Distribution):
    a: float = 0.0
    b: float = 1.0

    kind: ClassVar[str] = "uniform"

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        if not (0.0 <= self.a < self.b) or not math.isfinite(self.b):
            raise ConfigError(f"uniform needs 0 <= a < b < inf, got a={self.a}, b={self.b}")

    @property
    def lower(self) -> float:
        return self.a

    @property
    def upper(self) -> float:
        return self.b

    def pdf(self, x):
        return 1.0 / (self.b - self.a) if self.a <= x <= self.b else 0.0

    def cdf(self, x):
        if x <= self.a:
            return 0.0
        if x >= self.b:
            return 1.0
        return (x - self.a) / (self.b - self.a)

    def sf(self, x):
        if x <= self.a:
            return 1.0
        if x >= self.b:
            return 0.0
        return (self.b - x) / (self.b - self.a)

    def mills(self, x):
        if x < self.a or x > self.b:
            return math.inf if x < self.a else 0.0
        return self.b - x

    def quantile(self, u):
        return self.a + u * (self.b - self.a)

    def isf(self, p):
        return self.b - p * (self.b - self.a)

    def quantile_array(self, u):
        return self.a + u * (self.b - self.a)

    def mean(self):
        return 0.5 * (self.a + self.b)


@dataclass(frozen=True)
class ShiftedExponential(Distribution):
    a: float = 0.0
    rate: float = 1.0

    kind: ClassVar[str] = "shifted_exponential"

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "rate", float(self.rate))
        if not (self.a >= 0.0 and self.rate > 0.0):
            raise ConfigError(f"need a >= 0 and rate > 0, got a={self.a}, rate={self.rate}")

    @property
    def lower(self) -> float:
        return self.a

    @property
    def upper(self) -> float:
        return math.inf

    def pdf(self, x):
        if x < self.a:
            return 0.0
        return self.rate * math.exp(-self.rate * (x - self.a))

    def cdf(self, x):
        if x <= self.a:
            return 0.0
        return -math.expm1(-self.rate * (x - self.a))

    def sf(self, x):
        if x <= self.a:
            return 1.0
        return math.exp(-self.rate * (x - self.a))

    def mills(self, x):
        return 1.0 / self.rate if x >= self.a else math.inf

    def quantile(self, u):
        if u >= 1.0:
            return math.inf
        return self.a - math.log1p(-u) / self.rate

    def isf(self, p):
        if p <= 0.0:
            return math.inf
        return self.a - math.log(p) / self.rate

    def quantile_array(self, u):
        return self.a - np.log1p(-u) / self.rate

    def mean(self):
        return self.a + 1.0 / self.rate


@dataclass(frozen=True)
class Exponential(ShiftedExponential):
    """Exponential with the given rate; a shifted exponential at ``a = 0``."""

    kind: ClassVar[str] = "exponential"

    def __init__(self, rate: float = 1.0):
        object.__setattr__(self, "a", 0.0)
        object.__setattr__(self, "rate", float(rate))
        self.__post_init__()

    def __repr__(self):
        return f"Exponential(rate={self.rate!r})"

    def to_dict(self):
        return {"kind": self.kind, "rate": self.rate}


@dataclass(frozen=True)
class LogNormal(Distribution):
    mu: float = 0.0
    sigma: float = 1.0

    kind: ClassVar[str] = "lognormal"

    def __post_init__(self):
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "sigma", float(self.sigma))
        if not self.sigma > 0.0:
            raise ConfigError(f"lognormal needs sigma > 0, got {self.sigma}")

    @property
    def lower(self) -> float:
        return 0.0

    @property
    def upper(self) -> float:
        return math.inf

    def _z(self, x):
        return (math.log(x) - self.mu) / self.sigma

    def pdf(self, x):
        if x <= 0.0:
            return 0.0
        z = self._z(x)
        return math.exp(-0.5 * z * z - _LOG_SQRT_2PI) / (self.sigma * x)

    def cdf(self, x):
        if x <= 0.0:
            return 0.0
        return 0.5 * math.erfc(-self._z(x) / _SQRT2)

    def sf(self, x):
        if x <= 0.0:
            return 1.0
        return 0.5 * math.erfc(self._z(x) / _SQRT2)

    def mills(self, x):
        if x <= 0.0:
            return math.inf
        z = self._z(x)
        log_pdf = -0.5 * z * z - _LOG_SQRT_2PI - math.log(self.sigma * x)
        return math.exp(float(special.log_ndtr(-z)) - log_pdf)

    def quantile(self, u):
        if u <= 0.0:
            return 0.0
        if u >= 1.0:
            return math.inf
        return math.exp(self.mu + self.sigma * float(special.ndtri(u)))

    def isf(self, p):
        if p <= 0.0:
            return math.inf
        return math.exp(self.mu - self.sigma * float(special.ndtri(p)))

    def quantile_array(self, u):
        return np.exp(self.mu + self.sigma * special.ndtri(u))

    def mean(self):
        return math.exp(self.mu + 0.5 * self.sigma**2)


_KINDS: dict[str, type[Distribution]] = {
    "uniform": Uniform,
    "exponential": Exponential,
    "shifted_exponential": ShiftedExponential,
    "lognormal": LogNormal,
}

_NUM = {"type": "number"}
DISTRIBUTION_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"kind": {"const": "uniform"}, "a": _NUM, "b": _NUM},
            "required": ["kind", "a", "b"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"kind": {"const": "exponential"}, "rate": {"type": "number", "exclusiveMinimum": 0}},
            "required": ["kind", "rate"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "kind": {"const": "shifted_exponential"},
                "a": {"type": "number", "minimum": 0},
                "rate": {"type": "number", "exclusiveMinimum": 0},
            },
            "required": ["kind", "a", "rate"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "kind": {"const": "lognormal"},
                "mu": _NUM,
                "sigma": {"type": "number", "exclusiveMinimum": 0},
            },
            "required": ["kind", "mu", "sigma"],
            "additionalProperties": False,
        },
    ]
}


def distribution_from_dict(spec: dict[str, Any]) -> Distribution:
    """Build a distribution from e.g. ``{"kind": "uniform", "a": 0, "b": 1}``."""
    try:
        jsonschema.validate(spec, DISTRIBUTION_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid distribution spec {spec!r}: {exc.message}") from None
    params = {k: float(v) for k, v in spec.items() if k != "kind"}
    return _KINDS[spec["kind"]](**params)


# -- random streams ---------------------------------------------------------


def random_stream(seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based Philox stream keyed on ``(seed, index)``.

    The same pair always yields the same stream, independent of how many
    other streams were created before or on which thread.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


def sample_valuations(dist: Distribution, n: int, seed: int, index: int = 0) -> np.ndarray:
    """Draw ``n`` i.i.d. valuations from the stream ``(seed, index)``."""
    if n < 1:
        raise ConfigError("need at least one bidder")
    return dist.sample(n, random_stream(seed, index))


# -- hazard ratio -------------------------------------------------------------


def _finite_mills(dist: Distribution, x: float) -> float | None:
    if not math.isfinite(x):
        return None
    m = dist.mills(x)
    if math.isnan(m):
        return None
    if math.isinf(m) and dist.pdf(x) == 0.0 and dist.sf(x) > 0.0 and x > dist.lower:
        # density underflow deep in a tail, not a genuine pole
        return None
    return m


def hazard_ratio_argsup(dist: Distribution, cap: float = HAZARD_CAP) -> tuple[float, float]:
    """Return ``(A, s*)`` with ``A = sup (1 - F(s)) / f(s)`` over the support.

    The ratio is scanned on a 10,001-point quantile grid, refined by golden
    section around the grid maximum, and probed along both tails out to
    quantiles of 1e-300. ``A`` is ``inf`` once any value exceeds ``cap``.
    """
    best_u, best_m = 0.0, -math.inf
    for k in range(HAZARD_GRID + 1):
        u = k / HAZARD_GRID
        m = _finite_mills(dist, dist.quantile(u))
        if m is None:
            continue
        if m > cap:
            return math.inf, dist.quantile(u)
        if m > best_m:
            best_u, best_m = u, m

    for e in range(5, 301, 5):
        p = 10.0 ** (-e)
        for x in (dist.quantile(p), dist.isf(p)):
            m = _finite_mills(dist, x)
            if m is not None and m > cap:
                return math.inf, x

    lo = max(0.0, best_u - 1.0 / HAZARD_GRID)
    hi = min(1.0, best_u + 1.0 / HAZARD_GRID)

    def objective(u):
        m = _finite_mills(dist, dist.quantile(u))
        return -math.inf if m is None else m

    u_star, m_star = golden_section_max(objective, lo, hi, xtol=1e-12)
    if m_star < best_m:
        u_star, m_star = best_u, best_m
    return m_star, dist.quantile(u_star)


def hazard_ratio_sup(dist: Distribution, cap: float = HAZARD_CAP) -> float:
    """``sup (1 - F) / f`` over the support, or ``inf`` if unbounded."""
    return hazard_ratio_argsup(dist, cap)[0]


# -- order statistics -----------------------------------------------------------


@dataclass(frozen=True)
class OrderStatistics:
    """Exact laws of the highest (B1) and second-highest (B2) of n draws."""

    dist: Distribution
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if self.dist.lower < 0.0:
            raise ConfigError("order-statistic expectations need non-negative support")

    def cdf_b1(self, x: float) -> float:
        return self.dist.cdf(x) ** self.n

    def cdf_b2(self, x: float) -> float:
        if self.n == 1:
            return 1.0 if x >= 0.0 else 0.0
        F = self.dist.cdf(x)
        return F**self.n + self.n * F ** (self.n - 1) * (1.0 - F)

    def _integrate_tail(self, integrand, tol):
        lower, top = self.dist.lower, self.dist.isf(TAIL_QUANTILE)
        cuts = [x for x in (self.dist.quantile(u) for u in power_grid(self.n)) if lower < x < top]
        try:
            return adaptive_simpson_pieces(integrand, [lower, *cuts, top], tol=tol)
        except NumericalFailure as exc:
            raise NumericalFailure(f"order-statistic integral for {self.dist!r}, n={self.n}: {exc}") from None

    def expected_b1(self, tol: float = DEFAULT_TOL) -> float:
        """``E[B1] = int (1 - F^n)``; below the support the integrand is 1."""
        n, cdf = self.n, self.dist.cdf
        return self.dist.lower + self._integrate_tail(lambda x: 1.0 - cdf(x) ** n, tol)

    def expected_gap(self, tol: float = DEFAULT_TOL) -> float:
        """``E[B1 - B2] = n int F^(n-1) (1 - F)``, integrated directly."""
        n, cdf = self.n, self.dist.cdf
        if n == 1:
            return self.expected_b1(tol)

        def integrand(x):
            F = cdf(x)
            return n * F ** (n - 1) * (1.0 - F)

        return self._integrate_tail(integrand, tol)

    def expected_b2(self, tol: float = DEFAULT_TOL) -> float:
        """``E[B2] = int (1 - F^n - n F^(n-1) (1 - F))``; zero when n is 1."""
        n, cdf = self.n, self.dist.cdf
        if n == 1:
            return 0.0

        def integrand(x):
            F = cdf(x)
            return 1.0 - F**n - n * F ** (n - 1) * (1.0 - F)

        return self.dist.lower + self._integrate_tail(integrand, tol)


def expected_b1(dist: Distribution, n: int, tol: float = DEFAULT_TOL) -> float:
    return OrderStatistics(dist, n).expected_b1(tol)


def expected_b2(dist: Distribution, n: int, tol: float = DEFAULT_TOL) -> float:
    return OrderStatistics(dist, n).expected_b2(tol)
