"""Multinomial observation model, Dirichlet priors, and predictive densities.

The model: counts x = (x_1, ..., x_k) from N draws over k categories, with
cell probabilities theta on the simplex.  The quantity predicted is the next
single outcome y (one-hot over the k categories).  Under a Dirichlet prior
with parameters a the predictive mass of category i is (x_i + a_i)/(N + A),
A = sum(a); under the same prior restricted to the truncated simplex
{theta_i >= eps} the predictive picks up a ratio of truncated Dirichlet
integrals.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from . import simplex
from .errors import DomainError
from .numkernel import DEFAULT_QUADRATURE, QuadratureSettings, stable_sum

SQRT6 = math.sqrt(6.0)

#: Concentration of the symmetric Dirichlet prior whose predictive is
#: asymptotically minimax for one-step-ahead prediction.
ALPHA_MINIMAX = 1.0 + 1.0 / SQRT6
ALPHA_JEFFREYS = 0.5
ALPHA_UNIFORM = 1.0

#: Shared default seed for every randomized suite in the package.
DEFAULT_SEED = 0x5EED


@dataclass(frozen=True)
class ModelSpec:
    """Category count k and observed sample size N."""

    k: int
    N: int

    def __post_init__(self):
        if self.k < 2:
            raise DomainError("need at least two categories")
        # N = 0 is allowed: the predictive degenerates to the prior mean,
        # which makes for cheap trivial-case testing
        if self.N < 0:
            raise DomainError("sample size must be nonnegative")

    def to_dict(self) -> dict:
        return {"k": self.k, "N": self.N}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(k=int(d["k"]), N=int(d["N"]))


@dataclass(frozen=True)
class PriorSpec:
    """Dirichlet parameter vector a with its total A = sum(a) cached.

    A appears in every downstream formula, so it is computed once (with
    compensated summation) and reused verbatim everywhere.
    """

    a: tuple
    A: float = None  # type: ignore[assignment]

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        if len(a) < 2:
            raise DomainError("need at least two categories")
        if any(v <= 0 for v in a):
            raise DomainError("Dirichlet parameters must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "A", stable_sum(a))

    @property
    def k(self) -> int:
        return len(self.a)

    @property
    def is_symmetric(self) -> bool:
        return all(v == self.a[0] for v in self.a)

    def permuted(self, perm) -> "PriorSpec":
        return PriorSpec(tuple(self.a[p] for p in perm))

    def to_dict(self) -> dict:
        return {"a": list(self.a)}

    @classmethod
    def from_dict(cls, d: dict) -> "PriorSpec":
        return cls(tuple(d["a"]))


@dataclass(frozen=True)
class SymmetricPrior:
    """Symmetric Dirichlet prior: common concentration alpha over k cells."""

    alpha: float
    k: int

    def __post_init__(self):
        if self.alpha <= 0:
            raise DomainError("concentration must be positive")
        if self.k < 2:
            raise DomainError("need at least two categories")

    @classmethod
    def jeffreys(cls, k: int) -> "SymmetricPrior":
        return cls(ALPHA_JEFFREYS, k)

    @classmethod
    def uniform(cls, k: int) -> "SymmetricPrior":
        return cls(ALPHA_UNIFORM, k)

    @classmethod
    def minimax(cls, k: int) -> "SymmetricPrior":
        return cls(ALPHA_MINIMAX, k)

    def expand(self) -> PriorSpec:
        return PriorSpec((self.alpha,) * self.k)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "k": self.k}

    @classmethod
    def from_dict(cls, d: dict) -> "SymmetricPrior":
        return cls(alpha=float(d["alpha"]), k=int(d["k"]))


@dataclass(frozen=True)
class TruncatedSimplex:
    """The simplex with every coordinate floored at eps (0 < eps < 1/k)."""

    k: int
    eps: float

    def __post_init__(self):
        if self.k < 2:
            raise DomainError("need at least two categories")
        if not (0.0 < self.eps < 1.0 / self.k):
            raise DomainError(f"need 0 < eps < 1/k, got eps={self.eps!r}, k={self.k}")

    def contains(self, theta) -> bool:
        theta = tuple(theta)
        if len(theta) != self.k:
            return False
        return min(theta) >= self.eps

    def to_dict(self) -> dict:
        return {"k": self.k, "eps": self.eps}

    @classmethod
    def from_dict(cls, d: dict) -> "TruncatedSimplex":
        return cls(k=int(d["k"]), eps=float(d["eps"]))


class ScheduleMode(enum.Enum):
    """Validity window of a floor schedule eps_N = c * N^(-r).

    EXPANSION      r < 1      N*eps_N -> inf; the four-order risk expansion
                              holds uniformly with remainder O(N^-5 eps^-4).
    SECOND_ORDER   r < 3/4    N^(3/4)*eps_N -> inf; boundary terms beyond
                              the leading 1/theta powers are o(N^-2).
    MINIMAX        1/alpha-hat < r < 3/4; additionally N^(1/alpha-hat) *
                              eps_N -> 0, so the prior-truncation penalty is
                              o(N^-2) and the minimax bracket collapses.
    """

    EXPANSION = "expansion"
    SECOND_ORDER = "second-order"
    MINIMAX = "minimax"


@dataclass(frozen=True)
class EpsilonSchedule:
    """Coordinate-floor schedule eps_N = c * N^(-r)."""

    c: float = 1.0
    r: float = 0.73
    mode: ScheduleMode = ScheduleMode.MINIMAX

    def __post_init__(self):
        if self.c <= 0:
            raise DomainError("scale c must be positive")
        mode = self.mode
        if isinstance(mode, str):
            mode = ScheduleMode(mode)
            object.__setattr__(self, "mode", mode)
        if mode is ScheduleMode.EXPANSION and not self.r < 1:
            raise DomainError("EXPANSION mode requires r < 1")
        if mode is ScheduleMode.SECOND_ORDER and not self.r < 0.75:
            raise DomainError("SECOND_ORDER mode requires r < 3/4")
        if mode is ScheduleMode.MINIMAX:
            lo = 1.0 / ALPHA_MINIMAX  # ~0.7101
            if not (lo < self.r < 0.75):
                raise DomainError(
                    f"MINIMAX mode requires r in ({lo:.4f}, 0.75), got {self.r!r}"
                )

    def eps(self, N: int) -> float:
        return self.c * float(N) ** (-self.r)

    def truncation(self, N: int, k: int) -> TruncatedSimplex:
        """The floor region at sample size N; raises if eps_N >= 1/k."""
        return TruncatedSimplex(k, self.eps(N))

    def to_dict(self) -> dict:
        return {"c": self.c, "r": self.r, "mode": self.mode.value}

    @classmethod
    def from_dict(cls, d: dict) -> "EpsilonSchedule":
        return cls(c=float(d["c"]), r=float(d["r"]), mode=ScheduleMode(d["mode"]))


@dataclass(frozen=True)
class Observation:
    """Observed count vector; must total the model's N."""

    x: tuple

    def __post_init__(self):
        x = tuple(int(v) for v in self.x)
        if any(v < 0 for v in x):
            raise DomainError("counts must be nonnegative")
        object.__setattr__(self, "x", x)

    @property
    def total(self) -> int:
        return sum(self.x)

    def check_against(self, model: ModelSpec) -> None:
        if len(self.x) != model.k:
            raise DomainError(f"expected {model.k} counts, got {len(self.x)}")
        if self.total != model.N:
            raise DomainError(f"counts sum to {self.total}, expected N={model.N}")


@dataclass(frozen=True)
class OutcomeLabel:
    """The predicted category (0-based index into the k cells)."""

    index: int

    def __post_init__(self):
        if self.index < 0:
            raise DomainError("category index must be nonnegative")

    def check_against(self, model: ModelSpec) -> None:
        if self.index >= model.k:
            raise DomainError(f"category {self.index} out of range for k={model.k}")


def predictive_density(
    prior: PriorSpec, model: ModelSpec, x: Observation, y: OutcomeLabel
) -> float:
    """Posterior predictive mass of category y: (x_i + a_i) / (N + A)."""
    x.check_against(model)
    y.check_against(model)
    if prior.k != model.k:
        raise DomainError("prior and model disagree on k")
    i = y.index
    return (x.x[i] + prior.a[i]) / (model.N + prior.A)


def truncated_predictive_density(
    alpha: SymmetricPrior,
    trunc: TruncatedSimplex,
    model: ModelSpec,
    x: Observation,
    y: OutcomeLabel,
    quad: QuadratureSettings = DEFAULT_QUADRATURE,
) -> float:
    """Predictive mass of category y under the prior restricted to the floor
    region, i.e. the full-prior predictive times the ratio of retained
    Dirichlet mass after adding the predicted count.
    """
    x.check_against(model)
    y.check_against(model)
    if alpha.k != model.k or trunc.k != model.k:
        raise DomainError("prior, truncation and model disagree on k")
    i = y.index
    base = (x.x[i] + alpha.alpha) / (model.N + alpha.k * alpha.alpha)
    post = tuple(v + alpha.alpha for v in x.x)
    bumped = tuple(
        v + 1.0 if j == i else v for j, v in enumerate(post)
    )
    log_ratio = simplex.log_i_trunc(bumped, trunc.eps, quad) - simplex.log_i_trunc(
        post, trunc.eps, quad
    )
    return base * math.exp(log_ratio)


def si_term(prior: PriorSpec, model: ModelSpec, theta_i: float, i: int) -> float:
    """Prior-shift coefficient s_i = (a_i - A theta_i) / ((N + A) theta_i).

    Always > -1; vanishes exactly when theta_i equals the prior mean a_i/A.
    """
    if not 0.0 < theta_i < 1.0:
        raise DomainError("theta_i must lie in (0, 1)")
    if i < 0 or i >= prior.k:
        raise DomainError("category index out of range")
    a_i = prior.a[i]
    return (a_i - prior.A * theta_i) / ((model.N + prior.A) * theta_i)
