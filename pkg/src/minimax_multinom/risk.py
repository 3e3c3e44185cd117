"""Exact Kullback-Leibler prediction risk, sup-risk search, and Bayes risks.

Risks are in nats.  Two independent routes compute the same risk:

  * risk_enumeration sums the defining double expectation over every count
    vector x and every outcome y;
  * risk_coordinatewise uses the separable form

        R(theta) = sum_i [ -theta_i log(1 + s_i)
                           - theta_i E_{Bin(N, theta_i)} log(1 + w_i) ],

    with s_i = (a_i - A theta_i)/((N + A) theta_i) and
    w_i = (x_i - N theta_i)/(N theta_i + a_i), which costs O(N k).

The two must agree to high accuracy; the enumeration route serves as the
oracle for the fast one throughout the test suite.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad as _quad
from scipy.special import gammaln as _gammaln

from ._pool import ordered_map
from .errors import (
    DomainError,
    IntegrationError,
    SizeError,
    StatisticalPrecisionError,
)
from .model import (
    DEFAULT_SEED,
    ModelSpec,
    PriorSpec,
    SymmetricPrior,
    TruncatedSimplex,
)
from .numkernel import (
    DEFAULT_QUADRATURE,
    QuadratureSettings,
    stable_sum,
)
from .simplex import log_i_trunc

#: default cap on the number of count vectors risk_enumeration will visit
ENUMERATION_CAP = 2_000_000

#: caps for predictive densities that need a truncated-integral table per x
TRUNCATED_PREDICTIVE_CAPS = {2: 64, 3: 24}

_TIE_TOL = 1e-13


@dataclass(frozen=True)
class ThetaPoint:
    """A strictly interior point of the probability simplex."""

    theta: tuple

    def __post_init__(self):
        theta = tuple(float(v) for v in self.theta)
        if len(theta) < 2:
            raise DomainError("need at least two coordinates")
        if any(v <= 0.0 for v in theta):
            raise DomainError("theta must be strictly positive")
        if abs(stable_sum(theta) - 1.0) > 1e-14:
            raise DomainError(f"theta must sum to 1, got {stable_sum(theta)!r}")
        object.__setattr__(self, "theta", theta)

    @property
    def k(self) -> int:
        return len(self.theta)

    @classmethod
    def uniform(cls, k: int) -> "ThetaPoint":
        return cls.complete([1.0 / k] * (k - 1))

    @classmethod
    def complete(cls, first_coords) -> "ThetaPoint":
        """Build from the first k-1 coordinates, inferring the last."""
        first = [float(v) for v in first_coords]
        return cls(tuple(first + [1.0 - stable_sum(first)]))

    def permuted(self, perm) -> "ThetaPoint":
        return ThetaPoint(tuple(self.theta[p] for p in perm))


class RiskMethod(enum.Enum):
    ENUMERATION = "enumeration"
    COORDINATEWISE = "coordinatewise"


@dataclass(frozen=True)
class RiskReport:
    exact_risk: float
    per_coordinate: tuple
    theta: ThetaPoint
    method: RiskMethod


@dataclass(frozen=True)
class SupRiskReport:
    sup_value: float
    argmax_theta: ThetaPoint
    search_trace: tuple


class Predictive(enum.Enum):
    FULL = "full"
    TRUNCATED = "truncated"


@dataclass(frozen=True)
class MonteCarloSettings:
    """Draw budget and stream seed for Monte Carlo integration.

    n_draws counts proposals; batches are fixed-size and each owns a
    counter-based stream keyed on (seed, batch index), so estimates do not
    depend on worker scheduling.  If stderr_ceiling is set, estimates whose
    standard error exceeds it raise StatisticalPrecisionError.
    """

    n_draws: int = 200_000
    batch_size: int = 16_384
    seed: int = DEFAULT_SEED
    stderr_ceiling: float | None = None

    def __post_init__(self):
        if self.n_draws < 1 or self.batch_size < 1:
            raise DomainError("draw counts must be positive")


def compositions(N: int, k: int) -> np.ndarray:
    """All count vectors of length k summing to N, lexicographically ordered,
    as an (n, k) integer array."""
    if k == 1:
        return np.array([[N]], dtype=np.int64)
    rows = []
    for first in range(N + 1):
        rest = compositions(N - first, k - 1)
        block = np.empty((rest.shape[0], k), dtype=np.int64)
        block[:, 0] = first
        block[:, 1:] = rest
        rows.append(block)
    return np.vstack(rows)


def _log_multinomial_rows(N: int, comps: np.ndarray) -> np.ndarray:
    return _gammaln(N + 1) - _gammaln(comps + 1.0).sum(axis=1)


def risk_enumeration(
    prior: PriorSpec,
    model: ModelSpec,
    theta: ThetaPoint,
    cap: int = ENUMERATION_CAP,
) -> RiskReport:
    """Risk by full enumeration over count vectors and outcomes.

    Exponential in k; guarded by a composition cap that points callers at
    risk_coordinatewise instead.
    """
    _check_kabc(prior, model, theta)
    n_comp = math.comb(model.N + model.k - 1, model.k - 1)
    if n_comp > cap:
        raise SizeError(
            f"{n_comp} count vectors exceed the cap {cap}; "
            "use risk_coordinatewise"
        )
    comps = compositions(model.N, model.k)
    th = np.asarray(theta.theta)
    a = np.asarray(prior.a)
    logpmf = _log_multinomial_rows(model.N, comps) + comps @ np.log(th)
    pmf = np.exp(logpmf)
    log_na = math.log(model.N + prior.A)
    per = []
    for i in range(model.k):
        # sum_x p(x) * theta_i * log[ theta_i (N+A) / (x_i + a_i) ]
        vals = pmf * th[i] * (math.log(th[i]) + log_na - np.log(comps[:, i] + a[i]))
        per.append(stable_sum(vals))
    total = stable_sum(per)
    if total < -1e-14:
        raise AssertionError(f"risk must be nonnegative, got {total!r}")
    return RiskReport(total, tuple(per), theta, RiskMethod.ENUMERATION)


class CoordinateRiskEvaluator:
    """Vectorized per-coordinate risk contributions for one (prior, model).

    coordinate(i, t) returns h_i(t) = -t log(1+s_i) - t E log(1+w_i) for an
    array of candidate values t of theta_i; the full risk at a point is the
    compensated sum of the k contributions.  Binomial mass terms are
    accumulated in increasing-x order with compensated summation.
    """

    def __init__(self, prior: PriorSpec, model: ModelSpec):
        if prior.k != model.k:
            raise DomainError("prior and model disagree on k")
        self.prior = prior
        self.model = model
        N = model.N
        self._x = np.arange(N + 1, dtype=float)
        self._lg = _gammaln(N + 1) - _gammaln(self._x + 1) - _gammaln(N - self._x + 1)

    def coordinate(self, i: int, t) -> np.ndarray:
        a_i = self.prior.a[i]
        A = self.prior.A
        N = self.model.N
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any((t <= 0) | (t >= 1)):
            raise DomainError("coordinate values must lie in (0, 1)")
        out = np.empty_like(t)
        x, lg = self._x, self._lg
        for j, tj in enumerate(t):
            s = (a_i - A * tj) / ((N + A) * tj)
            logpmf = lg + x * math.log(tj) + (N - x) * math.log1p(-tj)
            w = (x - N * tj) / (N * tj + a_i)
            ew = stable_sum(np.exp(logpmf) * np.log1p(w))
            out[j] = -tj * math.log1p(s) - tj * ew
        return out

    def risk(self, theta: ThetaPoint) -> RiskReport:
        per = tuple(
            float(self.coordinate(i, theta.theta[i])[0]) for i in range(self.model.k)
        )
        total = stable_sum(per)
        if total < -1e-14:
            raise AssertionError(f"risk must be nonnegative, got {total!r}")
        return RiskReport(total, per, theta, RiskMethod.COORDINATEWISE)


def risk_coordinatewise(
    prior: PriorSpec, model: ModelSpec, theta: ThetaPoint
) -> RiskReport:
    """Risk via the separable per-coordinate form; O(N k) time."""
    _check_kabc(prior, model, theta)
    return CoordinateRiskEvaluator(prior, model).risk(theta)


def _check_kabc(prior: PriorSpec, model: ModelSpec, theta: ThetaPoint) -> None:
    if prior.k != model.k or theta.k != model.k:
        raise DomainError("prior, model and theta disagree on k")


# ---------------------------------------------------------------------------
# separable maximization
# ---------------------------------------------------------------------------


def _golden_max(f, lo: float, hi: float, iters: int = 60) -> tuple:
    """Golden-section local maximization of a scalar function on [lo, hi].

    The width tolerance is matched to the flatness of a smooth maximum: at
    width w the value error is O(w^2) times the curvature, so 1e-7 of the
    span leaves value errors far below summation noise.
    """
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    width_tol = 1e-7 * (b - a) + 1e-15
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if b - a < width_tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


@dataclass
class _Candidate:
    value: float
    theta: tuple
    label: str


class SeparableMaximizer:
    """Maximize transform(sum_i h_i(theta_i) + const) over a floored simplex.

    The search combines (a) configurations with j coordinates pinned at the
    floor and the remaining mass split evenly, (b) a one-dimensional
    tabulation-plus-refinement over the shared value of each pinned family,
    and (c) multi-start projected coordinate ascent, exploiting that moving
    mass between two coordinates only changes two terms of the sum.
    """

    def __init__(
        self,
        h,                    # h(i, t_array) -> array of per-coordinate values
        k: int,
        eps: float,
        constant: float = 0.0,
        transform=None,       # applied to the separable sum (e.g. abs)
        symmetric: bool = True,
        seed: int = DEFAULT_SEED,
        ascent_starts: int = 32,
        threads: int | None = 1,
    ):
        if not (0.0 < eps < 1.0 / k):
            raise DomainError("floor must satisfy 0 < eps < 1/k")
        self.h = h
        self.k = k
        self.eps = eps
        self.constant = constant
        self.transform = transform or (lambda v: v)
        self.symmetric = symmetric
        self.seed = seed
        self.ascent_starts = ascent_starts
        self.threads = threads

    # -- plumbing ------------------------------------------------------

    def _objective(self, theta) -> float:
        vals = [float(self.h(i, theta[i])[0]) for i in range(self.k)]
        return self.transform(stable_sum(vals) + self.constant)

    def _normalize(self, theta) -> tuple:
        theta = [max(float(v), self.eps) for v in theta]
        total = stable_sum(theta)
        return tuple(v / total for v in theta)

    def _family_theta(self, subset, u: float) -> tuple:
        j = len(subset)
        free = (1.0 - j * u) / (self.k - j)
        theta = [free] * self.k
        for i in subset:
            theta[i] = u
        return tuple(theta)

    # -- search pieces --------------------------------------------------

    def _subsets(self):
        if self.symmetric:
            for j in range(1, self.k):
                yield tuple(range(j))
        else:
            for j in range(1, self.k):
                yield from itertools.combinations(range(self.k), j)

    def _family_candidates(self, subset, grid_size: int) -> list:
        j = len(subset)
        u_max = (1.0 - (self.k - j) * self.eps) / j
        # log-spaced from the floor, plus the uniform point and the corner
        grid = self.eps * np.exp(
            np.linspace(0.0, math.log(u_max / self.eps), grid_size)
        )
        grid = np.unique(np.concatenate([grid, [self.eps, 1.0 / self.k, u_max]]))
        grid = grid[(grid >= self.eps) & (grid <= u_max)]

        h_pin = self.h
        if self.symmetric:
            pinned = h_pin(0, grid)
            free_vals = (1.0 - j * grid) / (self.k - j)
            free = h_pin(0, free_vals)
            sums = j * pinned + (self.k - j) * free + self.constant
            values = np.array([self.transform(v) for v in sums])
        else:
            free_idx = [i for i in range(self.k) if i not in subset]
            free_vals = (1.0 - j * grid) / (self.k - j)
            sums = self.constant * np.ones_like(grid)
            for i in subset:
                sums = sums + h_pin(i, grid)
            for i in free_idx:
                sums = sums + h_pin(i, free_vals)
            values = np.array([self.transform(v) for v in sums])

        out = []
        best_idx = int(np.argmax(values))
        out.append(
            _Candidate(
                float(values[best_idx]),
                self._family_theta(subset, float(grid[best_idx])),
                f"pin{list(subset)}@grid",
            )
        )

        # local refinement around the best tabulated value
        lo = float(grid[max(0, best_idx - 1)])
        hi = float(grid[min(len(grid) - 1, best_idx + 1)])
        if hi > lo:
            def f(u: float) -> float:
                return self._objective(self._family_theta(subset, u))

            u_star, v_star = _golden_max(f, lo, hi)
            out.append(
                _Candidate(
                    v_star, self._family_theta(subset, u_star),
                    f"pin{list(subset)}@refine",
                )
            )
        return out

    def _ascent(self, start_index: int, sweeps: int = 60) -> _Candidate:
        key = np.array([self.seed & 0xFFFFFFFFFFFFFFFF, 1000 + start_index],
                       dtype=np.uint64)
        rng = np.random.Generator(np.random.Philox(key=key))
        raw = rng.dirichlet(np.ones(self.k))
        theta = tuple(self.eps + (1.0 - self.k * self.eps) * raw)
        value = self._objective(theta)
        for _ in range(sweeps):
            improved = False
            for i in range(self.k):
                for j in range(i + 1, self.k):
                    m = theta[i] + theta[j]
                    if m <= 2 * self.eps:
                        continue
                    others = stable_sum(
                        float(self.h(q, theta[q])[0])
                        for q in range(self.k)
                        if q not in (i, j)
                    ) + self.constant

                    def g(t: float) -> float:
                        return self.transform(
                            others + float(self.h(i, t)[0]) + float(self.h(j, m - t)[0])
                        )

                    lo, hi = self.eps, m - self.eps
                    probe = np.linspace(lo, hi, 33)
                    sums = others + self.h(i, probe) + self.h(j, m - probe)
                    pv = [self.transform(v) for v in sums]
                    b = int(np.argmax(pv))
                    t_star, v_star = _golden_max(
                        g, probe[max(0, b - 1)], probe[min(32, b + 1)]
                    )
                    if v_star > value + 1e-15:
                        lst = list(theta)
                        lst[i], lst[j] = t_star, m - t_star
                        theta = tuple(lst)
                        value = v_star
                        improved = True
            theta = self._normalize(theta)
            value = self._objective(theta)
            if not improved:
                break
        return _Candidate(value, theta, f"ascent[{start_index}]")

    # -- driver ----------------------------------------------------------

    def maximize(self, grid_size: int = 256) -> tuple:
        """Returns (value, ThetaPoint, trace)."""
        if grid_size < 16:
            raise DomainError("grid_size must be at least 16")
        candidates: list[_Candidate] = []

        uniform = tuple([1.0 / self.k] * self.k)
        candidates.append(_Candidate(self._objective(uniform), uniform, "uniform"))

        for j in range(1, self.k):
            subset = tuple(range(j))
            candidates.append(
                _Candidate(
                    self._objective(self._family_theta(subset, self.eps)),
                    self._family_theta(subset, self.eps),
                    f"floor[j={j}]",
                )
            )

        family_results = ordered_map(
            lambda s: self._family_candidates(s, grid_size),
            list(self._subsets()),
            self.threads,
        )
        for res in family_results:
            candidates.extend(res)

        ascent_results = ordered_map(
            self._ascent, range(self.ascent_starts), self.threads
        )
        candidates.extend(ascent_results)

        best = None
        for cand in candidates:
            theta = _round_theta(cand.theta)
            if min(theta) < self.eps - 1e-12:
                continue
            value = cand.value
            if (
                best is None
                or value > best[0] + _TIE_TOL
                or (abs(value - best[0]) <= _TIE_TOL and theta < best[1])
            ):
                best = (value, theta, cand.label)

        assert best is not None
        theta_pt = ThetaPoint(best[1])
        final_value = self._objective(theta_pt.theta)
        trace = tuple((c.label, c.value) for c in candidates)
        return final_value, theta_pt, trace


def _round_theta(theta) -> tuple:
    """Force an exact unit sum by recomputing the largest coordinate."""
    theta = list(float(v) for v in theta)
    imax = max(range(len(theta)), key=lambda i: theta[i])
    rest = stable_sum(v for i, v in enumerate(theta) if i != imax)
    theta[imax] = 1.0 - rest
    return tuple(theta)


def sup_risk(
    prior: PriorSpec,
    model: ModelSpec,
    trunc: TruncatedSimplex,
    grid_size: int = 256,
    seed: int = DEFAULT_SEED,
    ascent_starts: int = 32,
    threads: int | None = 1,
) -> SupRiskReport:
    """Maximize the prediction risk over the floored simplex.

    The risk is separable across coordinates, which the search exploits; the
    returned trace lists every configuration family and ascent start with
    the value it achieved, so a suspect supremum can be diagnosed.
    """
    if prior.k != model.k or trunc.k != model.k:
        raise DomainError("prior, model and truncation disagree on k")
    ev = CoordinateRiskEvaluator(prior, model)
    maximizer = SeparableMaximizer(
        ev.coordinate,
        model.k,
        trunc.eps,
        symmetric=prior.is_symmetric,
        seed=seed,
        ascent_starts=ascent_starts,
        threads=threads,
    )
    value, theta, trace = maximizer.maximize(grid_size)
    return SupRiskReport(value, theta, trace)


# ---------------------------------------------------------------------------
# truncated-predictive machinery and Bayes risks
# ---------------------------------------------------------------------------


def _truncated_caps_check(model: ModelSpec) -> None:
    cap = TRUNCATED_PREDICTIVE_CAPS.get(model.k)
    if cap is None:
        raise SizeError(
            f"truncated-predictive risks support k in "
            f"{sorted(TRUNCATED_PREDICTIVE_CAPS)}, got k={model.k}"
        )
    if model.N > cap:
        raise SizeError(
            f"truncated-predictive risks cap N at {cap} for k={model.k}, "
            f"got N={model.N}"
        )


class TruncatedPredictiveTable:
    """Cached log ratios log[I(x + e_i + alpha) / I(x + alpha)] per count
    vector x, shared by every theta during risk integration.

    Truncated integrals are permutation-symmetric in their parameters, so
    values are memoized on the sorted parameter vector.
    """

    def __init__(
        self,
        alpha: SymmetricPrior,
        trunc: TruncatedSimplex,
        model: ModelSpec,
        quad: QuadratureSettings = DEFAULT_QUADRATURE,
    ):
        if alpha.k != model.k or trunc.k != model.k:
            raise DomainError("prior, truncation and model disagree on k")
        _truncated_caps_check(model)
        self.model = model
        self.alpha = alpha.alpha
        self.eps = trunc.eps
        self.comps = compositions(model.N, model.k)
        self._memo: dict = {}
        n, k = self.comps.shape
        self.log_ratio = np.empty((n, k))
        for r in range(n):
            post = tuple(self.comps[r] + self.alpha)
            base = self._log_i(post)
            for i in range(k):
                bumped = tuple(
                    v + 1.0 if j == i else v for j, v in enumerate(post)
                )
                self.log_ratio[r, i] = self._log_i(bumped) - base

    def _log_i(self, alphas: tuple) -> float:
        key = tuple(sorted(alphas))
        if key not in self._memo:
            self._memo[key] = log_i_trunc(key, self.eps)
        return self._memo[key]

    def correction(self, theta: ThetaPoint) -> float:
        """E_x[ sum_i theta_i log-ratio_i(x) ] at the given theta.

        This is exactly risk(full predictive) - risk(truncated predictive)
        at the point; positive when the truncated predictive is better.
        """
        th = np.asarray(theta.theta)
        logpmf = _log_multinomial_rows(self.model.N, self.comps) + self.comps @ np.log(th)
        pmf = np.exp(logpmf)
        inner = self.log_ratio @ th
        return float(stable_sum(pmf * inner))


def risk_truncated_predictive(
    alpha: SymmetricPrior,
    trunc: TruncatedSimplex,
    model: ModelSpec,
    theta: ThetaPoint,
    table: TruncatedPredictiveTable | None = None,
) -> float:
    """Pointwise risk of the truncated-prior predictive density."""
    if table is None:
        table = TruncatedPredictiveTable(alpha, trunc, model)
    base = risk_coordinatewise(alpha.expand(), model, theta).exact_risk
    return base - table.correction(theta)


def _weight_logdensity_parts(weight: PriorSpec):
    """Unnormalized Dirichlet kernel exponents for the weight prior."""
    return np.asarray(weight.a) - 1.0


def _bayes_quadrature_k2(
    weight: PriorSpec,
    lo: float,
    hi: float,
    risk_fn,
    quad: QuadratureSettings,
) -> float:
    """Weighted average of risk_fn over theta_1 in [lo, hi], k = 2."""
    e1, e2 = _weight_logdensity_parts(weight)

    singular = (e1 < 0 and lo == 0.0) or (e2 < 0 and hi == 1.0)
    if singular:
        # integrate against the algebraic weight (QAWS handles the
        # endpoint singularities of the Dirichlet kernel)
        def against(f):
            val, err = _quad(
                f, 0.0, 1.0, weight="alg", wvar=(e1, e2),
                epsabs=quad.abs_tol, epsrel=quad.rel_tol,
                limit=quad.max_subdivisions,
            )
            return val, err

        num, nerr = against(lambda t: risk_fn(t))
        den, derr = against(lambda t: 1.0)
    else:
        def kernel(t: float) -> float:
            if t <= 0.0 or t >= 1.0:
                return 0.0
            return math.exp(e1 * math.log(t) + e2 * math.log1p(-t))

        num, nerr = _quad(
            lambda t: kernel(t) * risk_fn(t), lo, hi,
            epsabs=quad.abs_tol, epsrel=quad.rel_tol,
            limit=quad.max_subdivisions,
        )
        den, derr = _quad(
            kernel, lo, hi,
            epsabs=quad.abs_tol, epsrel=quad.rel_tol,
            limit=quad.max_subdivisions,
        )
    if den <= 0:
        raise IntegrationError("weight normalizer degenerated", achieved=derr)
    rel = abs(nerr / max(abs(num), 1e-300)) + derr / den
    if rel > 1e3 * quad.rel_tol:
        raise IntegrationError(
            "Bayes-risk quadrature did not converge", achieved=rel
        )
    return num / den


def _bayes_quadrature_k3(
    weight: PriorSpec,
    eps: float,
    risk_fn,
    quad: QuadratureSettings,
) -> float:
    """Weighted average over the floored 3-simplex by nested quadrature.

    eps = 0 integrates over the full simplex (QAWS against the algebraic
    kernel on each level); otherwise plain adaptive quadrature is enough
    because the floored region excludes the singular boundary.
    """
    e = _weight_logdensity_parts(weight)
    _pair_cache: dict = {}

    def inner_pair(t1: float) -> tuple:
        if t1 in _pair_cache:
            return _pair_cache[t1]
        lo2 = eps if eps > 0 else 0.0
        hi2 = 1.0 - t1 - lo2

        def kern2(t2: float) -> float:
            t3 = 1.0 - t1 - t2
            return math.exp(e[1] * math.log(t2) + e[2] * math.log(t3))

        if eps > 0:
            num, _ = _quad(
                lambda t2: kern2(t2) * risk_fn((t1, t2)), lo2, hi2,
                epsabs=quad.abs_tol, epsrel=quad.rel_tol * 10,
                limit=quad.max_subdivisions,
            )
            den, _ = _quad(
                kern2, lo2, hi2,
                epsabs=quad.abs_tol, epsrel=quad.rel_tol * 10,
                limit=quad.max_subdivisions,
            )
        else:
            scale = 1.0 - t1

            def against(f):
                val, _ = _quad(
                    lambda u: f(u * scale),
                    0.0, 1.0, weight="alg", wvar=(e[1], e[2]),
                    epsabs=quad.abs_tol, epsrel=quad.rel_tol * 10,
                    limit=quad.max_subdivisions,
                )
                return val * scale ** (e[1] + e[2] + 1)

            num = against(lambda t2: risk_fn((t1, t2)))
            den = against(lambda t2: 1.0)
        _pair_cache[t1] = (num, den)
        return num, den

    lo1 = eps if eps > 0 else 0.0
    hi1 = 1.0 - 2 * lo1

    def outer(which: int):
        def f(t1: float) -> float:
            pair = inner_pair(t1)
            return math.exp(e[0] * math.log(t1)) * pair[which]

        val, err = _quad(
            f, lo1, hi1,
            epsabs=quad.abs_tol, epsrel=quad.rel_tol * 10,
            limit=quad.max_subdivisions,
        )
        return val, err

    num, nerr = outer(0)
    den, derr = outer(1)
    if den <= 0:
        raise IntegrationError("weight normalizer degenerated", achieved=derr)
    return num / den


def bayes_risk(
    weight,
    model: ModelSpec,
    predictive: Predictive = Predictive.FULL,
    trunc: TruncatedSimplex | None = None,
    quad: QuadratureSettings = DEFAULT_QUADRATURE,
    mc: MonteCarloSettings | None = None,
    mode: str = "auto",
    threads: int | None = 1,
) -> float:
    """Average risk under a prior weight.

    weight is either a PriorSpec (weight over the whole simplex) or a
    SymmetricPrior together with trunc (the same prior renormalized over the
    floored simplex).  predictive selects whose risk is averaged: the
    full-prior predictive or the truncated-prior predictive (which requires
    trunc and enumerates count vectors against a cached integral table).

    mode "quadrature" (k <= 3), "mc", or "auto" (quadrature when available,
    Monte Carlo otherwise).
    """
    predictive = Predictive(predictive)
    if isinstance(weight, SymmetricPrior):
        if trunc is None:
            weight_prior = weight.expand()
            weight_trunc = None
        else:
            if trunc.k != weight.k:
                raise DomainError("weight and truncation disagree on k")
            weight_prior = weight.expand()
            weight_trunc = trunc
    elif isinstance(weight, PriorSpec):
        weight_prior = weight
        weight_trunc = None
    else:
        raise DomainError(f"unsupported weight {weight!r}")
    if weight_prior.k != model.k:
        raise DomainError("weight and model disagree on k")

    if predictive is Predictive.TRUNCATED:
        if trunc is None or not isinstance(weight, SymmetricPrior):
            raise DomainError(
                "the truncated predictive needs a SymmetricPrior weight and "
                "a truncation region"
            )
        table = TruncatedPredictiveTable(weight, trunc, model, quad)
    else:
        table = None

    ev = CoordinateRiskEvaluator(weight_prior, model)

    def risk_at(theta: ThetaPoint) -> float:
        base = ev.risk(theta).exact_risk
        if table is not None:
            base -= table.correction(theta)
        return base

    if mode == "auto":
        mode = "quadrature" if model.k <= 3 and mc is None else "mc"

    if mode == "quadrature":
        if model.k > 3:
            raise DomainError("quadrature mode supports k <= 3")
        # endpoint-singular rules may probe the exact boundary, where the
        # risk extends continuously; nudge into the open simplex
        tiny = 1e-13

        if model.k == 2:
            lo = weight_trunc.eps if weight_trunc else 0.0
            hi = 1.0 - lo

            def f1(t: float) -> float:
                t = min(max(t, tiny), 1.0 - tiny)
                return risk_at(ThetaPoint.complete([t]))

            return _bayes_quadrature_k2(weight_prior, lo, hi, f1, quad)
        eps = weight_trunc.eps if weight_trunc else 0.0

        def f2(t12) -> float:
            t1, t2 = t12
            t1 = min(max(t1, tiny), 1.0 - 2 * tiny)
            t2 = min(max(t2, tiny), 1.0 - t1 - tiny)
            return risk_at(ThetaPoint.complete([t1, t2]))

        return _bayes_quadrature_k3(weight_prior, eps, f2, quad)

    if mode != "mc":
        raise DomainError(f"unknown mode {mode!r}")
    mc = mc or MonteCarloSettings()
    return _bayes_mc(weight_prior, weight_trunc, risk_at, mc, threads)


def _bayes_mc(
    weight_prior: PriorSpec,
    weight_trunc: TruncatedSimplex | None,
    risk_at,
    mc: MonteCarloSettings,
    threads: int | None,
) -> float:
    a = np.asarray(weight_prior.a)
    n_batches = (mc.n_draws + mc.batch_size - 1) // mc.batch_size

    def one_batch(b: int) -> tuple:
        size = min(mc.batch_size, mc.n_draws - b * mc.batch_size)
        key = np.array([mc.seed & 0xFFFFFFFFFFFFFFFF, b], dtype=np.uint64)
        rng = np.random.Generator(np.random.Philox(key=key))
        draws = rng.dirichlet(a, size=size)
        if weight_trunc is not None:
            draws = draws[draws.min(axis=1) >= weight_trunc.eps]
        else:
            draws = draws[draws.min(axis=1) > 0.0]
        vals = [risk_at(ThetaPoint(tuple(row))) for row in draws]
        return stable_sum(vals), stable_sum(v * v for v in vals), len(vals)

    parts = ordered_map(one_batch, range(n_batches), threads)
    total = stable_sum(p[0] for p in parts)
    total_sq = stable_sum(p[1] for p in parts)
    n = sum(p[2] for p in parts)
    if n == 0:
        raise StatisticalPrecisionError("no draws accepted", math.nan, math.inf)
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0)
    stderr = math.sqrt(var / n)
    if mc.stderr_ceiling is not None and stderr > mc.stderr_ceiling:
        raise StatisticalPrecisionError(
            f"standard error {stderr:.3e} above ceiling {mc.stderr_ceiling:.3e}",
            mean, stderr,
        )
    return mean


def truncation_bayes_gap(
    alpha: SymmetricPrior,
    trunc: TruncatedSimplex,
    model: ModelSpec,
    quad: QuadratureSettings = DEFAULT_QUADRATURE,
    mc: MonteCarloSettings | None = None,
    mode: str = "auto",
    threads: int | None = 1,
) -> float:
    """Bayes-risk penalty for predicting with the untruncated prior.

    Under the truncated prior weight, the truncated-prior predictive is the
    Bayes rule, so the gap

        R(weight, full predictive) - R(weight, truncated predictive)

    is nonnegative; it measures how little is lost by ignoring the
    truncation when building the predictive.
    """
    full = bayes_risk(
        alpha, model, Predictive.FULL, trunc, quad, mc, mode, threads
    )
    truncated = bayes_risk(
        alpha, model, Predictive.TRUNCATED, trunc, quad, mc, mode, threads
    )
    return full - truncated
