"""Stable special functions and deterministic summation primitives.

Everything downstream (risk evaluation, simplex integrals, expansions) is
built on the handful of functions in this module, so their contracts are
deliberately narrow: plain floats in, plain floats out, errors raised for
out-of-domain input instead of NaN propagation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.integrate import quad as _quad
from scipy.special import betainc as _betainc
from scipy.special import betaincc as _betaincc
from scipy.special import betaln as _betaln
from scipy.special import gammaln as _gammaln

from .errors import DomainError, IntegrationError

# Largest N for which binomial coefficients are taken exactly over the
# integers before falling back to log-gamma differences.
_EXACT_COMB_LIMIT = 10_000


@dataclass(frozen=True)
class QuadratureSettings:
    """Tolerances for the adaptive quadratures used throughout.

    Defaults are one to two orders tighter than the 1e-10 tolerances the
    verification suites assert at, so integrator noise never decides an
    inequality check.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 60

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")


DEFAULT_QUADRATURE = QuadratureSettings()


@dataclass(frozen=True)
class LogDomainValue:
    """A signed real carried as (log |x|, sign) to avoid overflow.

    sign is 0 exactly when the represented value is zero, in which case the
    stored log magnitude is -inf by convention.
    """

    log_magnitude: float
    sign: int

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise DomainError("sign must be -1, 0 or +1")
        if self.sign == 0 and self.log_magnitude != -math.inf:
            raise DomainError("zero must carry log_magnitude = -inf")

    @classmethod
    def zero(cls) -> "LogDomainValue":
        return cls(-math.inf, 0)

    @classmethod
    def from_real(cls, x: float) -> "LogDomainValue":
        if x == 0.0:
            return cls.zero()
        return cls(math.log(abs(x)), 1 if x > 0 else -1)

    @classmethod
    def from_log(cls, log_magnitude: float, sign: int = 1) -> "LogDomainValue":
        if sign == 0:
            return cls.zero()
        return cls(log_magnitude, sign)

    def __mul__(self, other: "LogDomainValue") -> "LogDomainValue":
        sign = self.sign * other.sign
        if sign == 0:
            return LogDomainValue.zero()
        return LogDomainValue(self.log_magnitude + other.log_magnitude, sign)

    def to_real(self) -> float:
        return self.sign * math.exp(self.log_magnitude)

    def __float__(self) -> float:
        return self.to_real()


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for x > 0."""
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    return float(_gammaln(x))


def log_multivariate_beta(a) -> float:
    """ln B(a_1, ..., a_k) = ln[Gamma(a_1)...Gamma(a_k) / Gamma(sum a_i)].

    Requires k >= 2 and every a_i > 0.
    """
    a = tuple(float(v) for v in a)
    if len(a) < 2:
        raise DomainError("log_multivariate_beta needs at least two parameters")
    if any(v <= 0 for v in a):
        raise DomainError("all parameters must be positive")
    return stable_sum([_gammaln(v) for v in a]) - float(_gammaln(stable_sum(a)))


def log_binomial(N: int, x: int) -> float:
    """ln C(N, x), exact to double rounding for moderate N."""
    if x < 0 or N < 0 or x > N:
        raise DomainError(f"log_binomial requires 0 <= x <= N, got N={N}, x={x}")
    if N <= _EXACT_COMB_LIMIT:
        # math.log handles arbitrarily large ints without overflow
        return math.log(math.comb(N, x))
    return float(_gammaln(N + 1) - _gammaln(x + 1) - _gammaln(N - x + 1))


def log_multinomial(N: int, x) -> float:
    """ln of the multinomial coefficient N! / (x_1! ... x_k!)."""
    x = tuple(int(v) for v in x)
    if any(v < 0 for v in x) or sum(x) != N:
        raise DomainError("counts must be nonnegative and sum to N")
    if N <= _EXACT_COMB_LIMIT:
        num = math.factorial(N)
        for v in x:
            num //= math.factorial(v)
        return math.log(num)
    return float(_gammaln(N + 1)) - stable_sum([_gammaln(v + 1) for v in x])


def _log_beta_integrand_max(alpha: float, beta: float, s: float, t: float) -> float:
    """Max over [s, t] of (alpha-1) ln th + (beta-1) ln(1-th), used for scaling."""

    def logf(th: float) -> float:
        if th <= 0.0:
            return math.inf if alpha < 1 else (0.0 if alpha == 1 else -math.inf)
        if th >= 1.0:
            return math.inf if beta < 1 else (0.0 if beta == 1 else -math.inf)
        return (alpha - 1) * math.log(th) + (beta - 1) * math.log1p(-th)

    candidates = [s, t]
    if alpha + beta != 2.0:
        mode = (alpha - 1) / (alpha + beta - 2)
        if s < mode < t and alpha >= 1 and beta >= 1:
            candidates.append(mode)
    best = max(logf(c) for c in candidates)
    if not math.isfinite(best):
        # endpoint singularity: clamp the scale to an interior value
        mid = 0.5 * (s + t)
        best = logf(mid)
    return best


def log_beta_segment(
    alpha: float,
    beta: float,
    s: float,
    t: float,
    quad: QuadratureSettings = DEFAULT_QUADRATURE,
) -> float:
    """ln of the Beta-density-kernel integral over a subinterval of [0, 1].

    Computes ln of int_s^t th^(alpha-1) (1-th)^(beta-1) dth.  The primary
    route is a difference of regularized incomplete beta values; when that
    difference loses too many significant digits (a thin slice in a region
    of negligible mass) the integral is redone by adaptive quadrature with
    the integrand rescaled by its interior maximum.
    """
    if not (alpha > 0 and beta > 0):
        raise DomainError("shape parameters must be positive")
    if not (0.0 <= s < t <= 1.0):
        raise DomainError(f"need 0 <= s < t <= 1, got s={s!r}, t={t!r}")

    if t == 1.0:
        # upper-tail segment: the complemented function carries full
        # relative precision even when the tail mass is tiny
        diff = 1.0 if s == 0.0 else float(_betaincc(alpha, beta, s))
        if diff > 0.0:
            return float(_betaln(alpha, beta)) + math.log(diff)
    else:
        upper = float(_betainc(alpha, beta, t))
        lower = 0.0 if s == 0.0 else float(_betainc(alpha, beta, s))
        diff = upper - lower
        # cancellation guard: the difference must clear the rounding floor
        # of the larger regularized value, or be redone by quadrature
        if diff > 1e-5 * max(upper, 1e-300):
            return float(_betaln(alpha, beta)) + math.log(diff)

    scale = _log_beta_integrand_max(alpha, beta, s, t)

    def scaled(th: float) -> float:
        return math.exp(
            (alpha - 1) * math.log(th) + (beta - 1) * math.log1p(-th) - scale
        )

    val, err = _quad(
        scaled, s, t, epsabs=quad.abs_tol, epsrel=quad.rel_tol,
        limit=quad.max_subdivisions,
    )
    if val <= 0.0:
        raise IntegrationError(
            f"beta segment integral underflowed on [{s}, {t}]", achieved=err
        )
    if err > max(quad.abs_tol, 100 * quad.rel_tol * abs(val)):
        raise IntegrationError(
            f"beta segment quadrature did not converge on [{s}, {t}]",
            achieved=err / abs(val),
        )
    return scale + math.log(val)


def beta_segment(
    alpha: float,
    beta: float,
    s: float,
    t: float,
    quad: QuadratureSettings = DEFAULT_QUADRATURE,
) -> float:
    """int_s^t th^(alpha-1) (1-th)^(beta-1) dth on the linear scale."""
    return math.exp(log_beta_segment(alpha, beta, s, t, quad))


def stable_sum(terms) -> float:
    """Compensated summation of a float sequence.

    Uses Shewchuk error-free transforms (math.fsum), so the result is the
    correctly rounded sum of the inputs: independent of any internal
    chunking, and reproducible for a fixed input order.
    """
    if hasattr(terms, "tolist"):
        # fsum iterates ndarrays slowly (boxed float64); a C-level tolist
        # conversion first is ~3x faster on the hot paths
        terms = terms.tolist()
    return math.fsum(terms)
