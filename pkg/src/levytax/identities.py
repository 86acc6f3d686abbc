"""Exit, ruin, creeping, and tax-value laws for the taxed process.

Every law here is an integral of scale-function ratios along the running
supremum, driven by one object: the survival exponent

    E(x, a) = int_x^a W^(q)'(gamma_bar(s)) / W^(q)(gamma_bar(s)) ds,

the cumulative rate at which excursions below the supremum are deep
enough to ruin the taxed surplus. exp(-E(x, a)) is the probability
(q-discounted) that the supremum climbs from x to a before ruin; the
remaining laws integrate against its differential.

Numerically E is computed once per (evaluator, profile, x) as a
cumulative function on an adaptive partition and interpolated by a cubic
Hermite spline with exact slopes, whose error is verified against fresh
half-cell integrals and refined until it sits below a tenth of the
requested tolerance. Two
delicate regimes get special treatment:

* Near a finite a_star the integrand can blow up like 1/(a_star - s).
  The substitution s = a_star - e^{-u} flattens it; unit steps in u are
  accumulated until the contributions either decay below tolerance
  (finite exponent) or demonstrate divergence, at which point the
  survival factor is exactly 0. That dichotomy is the type II creeping
  test, so "tiny" and "zero" must not be confused: divergence is declared
  when the running exponent passes ``divergence_cap`` (e^{-cap}
  underflows anyway) or when the unit contributions stop decaying (the
  catalog integrands either decay exponentially in u or tend to a
  positive constant).
* For infinite a_star, integrals over [x, oo) proceed over geometrically
  growing windows of t = x + S u/(1-u) and stop once two consecutive
  windows are negligible. A window sequence that refuses to decay is the
  signature of a genuinely infinite value (harmonic-or-worse tails are
  the only non-decaying catalog behavior) and is reported as such.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import AccuracyError, DomainError, UnsupportedOperationError
from .models import gaussian_coefficient, levy_density
from .quadrature import QuadratureConfig, adaptive_gk, gk_batch
from .scale import ExpSum, ExpTerm, RationalClosedForm, ScaleEvaluator
from .tax import (
    Constant,
    SqrtExample,
    Table,
    TaxProfile,
    a_star,
    gamma_at,
    gamma_bar,
    gamma_bar_inverse,
    gamma_bar_near_astar,
    gamma_near_astar,
    profile_kinks,
)

__all__ = [
    "QuadratureConfig",
    "TripleLawPoint",
    "TripleLawDensity",
    "Creep2Result",
    "excursion_tail_rate",
    "survival_exponent",
    "two_sided_up",
    "two_sided_down",
    "ruin_integrand_f",
    "ruin_laplace",
    "ruin_probability",
    "creep2_laplace",
    "creep2_test",
    "npv_tax",
    "triple_law_density",
    "creep1_density",
]

_DEFAULT_QUAD = QuadratureConfig()

_R2_STEP = 1.0       # exponent grid step in u = -ln(a_star - s)
_R2_WINDOW = 10.0    # outer-integral window width in u
_U_HARD = 600.0      # hard stop in u; e^{-600} is still a normal double
_IMPROPER_MAX_WINDOWS = 64
_ASTAR_SLACK = 1e-12


@dataclass(frozen=True)
class TripleLawPoint:
    """Evaluation point for the law of (A, U_{T-}, -U_T) at ruin.

    ``theta`` is the value of the tax-adjusted supremum A when ruin
    strikes, ``y`` the surplus just before (the undershoot), ``z`` the
    severity (the overshoot below 0), and ``alpha``/``beta`` the discount
    rates attached to the climb phase and the final excursion.
    """

    theta: float
    y: float
    z: float
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self) -> None:
        if not self.theta > 0:
            raise DomainError(f"theta must be > 0, got {self.theta}")
        if not 0.0 <= self.y <= self.theta:
            raise DomainError(f"need 0 <= y <= theta, got y={self.y}, theta={self.theta}")
        if not self.z > 0:
            raise DomainError(f"z must be > 0, got {self.z}")
        if self.alpha < 0 or self.beta < 0:
            raise DomainError(
                f"discount rates must be >= 0, got alpha={self.alpha}, beta={self.beta}"
            )


class TripleLawDensity(NamedTuple):
    ac: float    # density per unit dtheta dy dz, for y < theta
    atom: float  # density per unit dtheta dz on the line y = theta


class Creep2Result(NamedTuple):
    creeps: bool     # can the surplus hit 0 continuously at its supremum
    exponent: float  # survival exponent at a_star; +inf when it diverges


def _require_heavy(profile: TaxProfile) -> None:
    if isinstance(profile, Constant):
        ok = profile.gamma > 1.0
    elif isinstance(profile, SqrtExample):
        ok = True
    else:
        ok = all(g > 1.0 for _, g in profile.knots)
    if not ok:
        raise UnsupportedOperationError(
            "the ruin-time triple law requires a heavy profile (gamma > 1 everywhere)"
        )


@lru_cache(maxsize=64)
def _ruin_integrand(scale: ScaleEvaluator) -> Callable:
    """Vectorized f(z) = Z^(q)(z) W^(q)'(z)/W^(q)(z) - q W^(q)(z).

    At q = 0 this is just W'/W. For q > 0 the naive product form loses
    the leading e^{2 Phi z} behavior to cancellation, so the numerator
    Z W' - q W^2 is assembled termwise: the diagonal e^{2 theta_i z}
    coefficients cancel exactly and are never generated, leaving

      C sum_i w_i theta_i e^{theta_i z}
        + q sum_{i<j} w_i w_j (theta_i - theta_j)^2/(theta_i theta_j)
            e^{(theta_i + theta_j) z},

    with C = 1 - q sum_i w_i/theta_i, divided by W. Both sums are
    evaluated under a common shift by Phi(q).
    """
    if scale.q == 0.0:
        return scale.dlog_w
    rep = scale.representation
    if not isinstance(rep, RationalClosedForm):
        def direct(zz):
            return scale.z(zz) * scale.dlog_w(zz) - scale.q * scale.w(zz)

        return direct
    rates = rep.exponents
    weights = rep.weights
    # q > 0 rules out poles at 0 and double poles, so powers are all 0
    # and every rate is nonzero.
    lead = 1.0 - scale.q * sum(wi / ri for wi, ri in zip(weights, rates))
    terms: list[ExpTerm] = []
    for wi, ri in zip(weights, rates):
        coef = lead * wi * ri
        if coef != 0.0:
            terms.append(ExpTerm(coef, ri, 0))
    for i in range(len(rates)):
        for j in range(i + 1, len(rates)):
            di = rates[i] - rates[j]
            coef = scale.q * weights[i] * weights[j] * di * di / (rates[i] * rates[j])
            if coef != 0.0:
                terms.append(ExpTerm(coef, rates[i] + rates[j], 0))
    w0, w1 = scale._boundary
    num = ExpSum(tuple(terms), forced=((0, w1 * 1.0 - scale.q * w0 * w0),))
    den = scale._w_sum
    shift = scale.phi_q

    def ratio(zz):
        return num.shifted(zz, shift) / den.shifted(zz, shift)

    return ratio


class _ExponentCache:
    """Cumulative survival exponent machinery for one (scale, profile, x)."""

    def __init__(
        self, scale: ScaleEvaluator, profile: TaxProfile, x: float, quad: QuadratureConfig
    ):
        self.scale = scale
        self.profile = profile
        self.x = float(x)
        self.quad = quad
        self.a_st = a_star(profile, x)
        self.finite = math.isfinite(self.a_st)
        if self.finite:
            span = self.a_st - self.x
            self.s_edge = self.a_st - quad.singular_edge_fraction * span
            self.u0 = -math.log(self.a_st - self.s_edge)
        else:
            self.s_edge = math.inf
            self.u0 = math.nan
        self.kinks = [k for k in profile_kinks(profile) if self.x < k < self.s_edge]
        self._knots = np.array([self.x])
        self._cum = np.array([0.0])
        self._interp = None
        if self.finite:
            self._ugrid = [self.u0]
            self._ucum = [0.0]
            self._uvals: list[float] = []
        self._u_diverged = False
        self._u_total: float | None = None
        self._improper_total: float | None = None

    # the integrand, in both coordinates
    def _rho(self, s: np.ndarray) -> np.ndarray:
        gb = gamma_bar(self.profile, self.x, np.asarray(s, dtype=float))
        return self.scale.dlog_w(gb)

    def _rho_u(self, u: np.ndarray) -> np.ndarray:
        h = np.exp(-np.asarray(u, dtype=float))
        gb = gamma_bar_near_astar(self.profile, self.x, self.a_st, h)
        return self.scale.dlog_w(gb) * h

    # ---- region 1: [x, s_edge] (or [x, oo)) with verified interpolation
    def ensure_region1(self, t_target: float) -> None:
        t_target = min(float(t_target), self.s_edge)
        if t_target <= float(self._knots[-1]):
            return
        last = float(self._knots[-1])
        segments: list[tuple[float, float]] = []
        if self.finite:
            segments.append((last, t_target))
        else:
            step = self.quad.infinity_map_scale
            while last < t_target:
                nxt = min(t_target, self.x + max(step, 2.0 * (last - self.x)))
                if nxt <= last:
                    nxt = t_target
                segments.append((last, nxt))
                last = nxt
        for lo, hi in segments:
            self._append_segment(lo, hi)
        self._refine_interpolant()

    def _append_segment(self, lo: float, hi: float) -> None:
        quad = self.quad
        seeds = [k for k in self.kinks if lo < k < hi]
        seeds += list(np.linspace(lo, hi, 10)[1:-1])
        _, _, cells = adaptive_gk(
            self._rho,
            lo,
            hi,
            quad,
            rel_tol=0.1 * quad.rel_tol,
            abs_tol=0.1 * quad.abs_tol,
            initial_knots=seeds,
        )
        base = float(self._cum[-1])
        self._knots = np.concatenate([self._knots, [c[1] for c in cells]])
        self._cum = np.concatenate(
            [self._cum, base + np.cumsum([c[2] for c in cells])]
        )

    def _refine_interpolant(self) -> None:
        # The interpolation budget is a tenth of the overall tolerance;
        # verify against fresh half-cell integrals and split what fails.
        budget = 0.1 * max(self.quad.abs_tol, self.quad.rel_tol)
        for _ in range(16):
            # Hermite with the exact integrand as slope keeps the error
            # local per cell; derivative-estimating interpolants plateau on
            # strongly graded meshes.
            self._interp = CubicHermiteSpline(self._knots, self._cum, self._rho(self._knots))
            mids = 0.5 * (self._knots[:-1] + self._knots[1:])
            half = gk_batch(self._rho, self._knots[:-1], mids)
            err = np.abs((self._interp(mids) - self._cum[:-1]) - half)
            bad = np.nonzero(err > budget)[0]
            if bad.size == 0:
                return
            self._knots = np.insert(self._knots, bad + 1, mids[bad])
            self._cum = np.insert(self._cum, bad + 1, self._cum[bad] + half[bad])
        raise AccuracyError(
            "survival-exponent interpolant failed to reach its error budget"
        )

    def exponent_at(self, t):
        """E(x, t) for t in region 1; scalar or array."""
        arr = np.asarray(t, dtype=float)
        flat = np.atleast_1d(arr).ravel()
        if flat.size:
            self.ensure_region1(float(flat.max()))
        if self._interp is None:
            out = np.zeros_like(flat)
        else:
            lo, hi = float(self._knots[0]), float(self._knots[-1])
            out = np.maximum(self._interp(np.clip(flat, lo, hi)), 0.0)
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)

    # ---- region 2: the sliver (s_edge, a_star) in u = -ln(a_star - s)
    def edge_exponent(self) -> float:
        self.ensure_region1(self.s_edge)
        return float(self._cum[-1])

    def _extend_region2(self, u_target: float) -> None:
        cap = self.quad.divergence_cap
        u_target = min(u_target, _U_HARD)
        while self._ugrid[-1] < u_target and not self._u_diverged:
            lo = self._ugrid[-1]
            hi = lo + _R2_STEP
            val = float(gk_batch(self._rho_u, np.array([lo]), np.array([hi]))[0])
            self._ugrid.append(hi)
            self._uvals.append(val)
            self._ucum.append(self._ucum[-1] + val)
            if self.edge_exponent() + self._ucum[-1] > cap:
                self._u_diverged = True

    def region2_at(self, u):
        """Exponent accumulated over (s_edge, a_star - e^{-u}]; array-safe."""
        arr = np.asarray(u, dtype=float)
        flat = np.atleast_1d(arr).ravel()
        if flat.size:
            self._extend_region2(float(flat.max()))
        grid = np.array(self._ugrid)
        cum = np.array(self._ucum)
        uc = np.clip(flat, grid[0], grid[-1])
        idx = np.clip(
            np.searchsorted(grid, uc, side="right") - 1, 0, max(len(grid) - 2, 0)
        )
        partial = gk_batch(self._rho_u, grid[idx], uc)
        out = cum[idx] + partial
        out[flat > grid[-1]] = cum[-1]  # past a declared divergence
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)

    def region2_total(self) -> float:
        """Exponent over the whole sliver; +inf when the endpoint test fails."""
        if self._u_total is not None:
            return self._u_total
        small_run = 0
        while not self._u_diverged:
            if self._ugrid[-1] >= _U_HARD:
                raise AccuracyError(
                    "endpoint convergence test undecided at the hard u limit"
                )
            self._extend_region2(self._ugrid[-1] + _R2_STEP)
            if self._u_diverged:
                break
            val = self._uvals[-1]
            tol = 0.1 * max(
                self.quad.abs_tol,
                self.quad.rel_tol * (self.edge_exponent() + self._ucum[-1]),
            )
            if val <= tol:
                small_run += 1
                if small_run >= 2:
                    break
            else:
                small_run = 0
            k = len(self._uvals)
            if k >= 24 and self._uvals[-1] > self.quad.abs_tol and (
                self._uvals[-1] >= 0.5 * self._uvals[-9]
            ):
                # contributions stopped decaying: the integrand has leveled
                # out (1/(a*-s)-type endpoint), so the exponent is infinite
                self._u_diverged = True
        self._u_total = math.inf if self._u_diverged else self._ucum[-1]
        return self._u_total

    # ---- infinite-barrier total
    def improper_total(self) -> float:
        """E(x, oo) for profiles with a_star = inf; +inf when divergent."""
        if self._improper_total is not None:
            return self._improper_total
        step = self.quad.infinity_map_scale
        segs: list[float] = []
        t_lo = self.x
        small_run = 0
        for k in range(_IMPROPER_MAX_WINDOWS):
            t_hi = self.x + step * (2.0 ** (k + 1) - 1.0)
            e_hi = float(self.exponent_at(t_hi))
            seg = e_hi - float(self.exponent_at(t_lo))
            segs.append(seg)
            if e_hi > self.quad.divergence_cap:
                self._improper_total = math.inf
                return self._improper_total
            tol = 0.1 * max(self.quad.abs_tol, self.quad.rel_tol * max(e_hi, 1.0))
            if seg <= tol:
                small_run += 1
                if small_run >= 2:
                    self._improper_total = e_hi
                    return self._improper_total
            else:
                small_run = 0
            if k >= 8 and seg >= 0.9 * segs[-5] and seg > 10.0 * tol:
                # windows over doubling t-ranges refuse to decay: the tail
                # is harmonic or worse, hence not integrable
                self._improper_total = math.inf
                return self._improper_total
            t_lo = t_hi
        raise AccuracyError(
            f"exponent tail undecided after {_IMPROPER_MAX_WINDOWS} windows"
        )


@lru_cache(maxsize=128)
def _cache(
    scale: ScaleEvaluator, profile: TaxProfile, x: float, quad: QuadratureConfig
) -> _ExponentCache:
    return _ExponentCache(scale, profile, x, quad)


def _checked_cache(scale, profile, x, a, quad) -> _ExponentCache:
    if not x > 0:
        raise DomainError(f"starting level must be > 0, got x={x}")
    cache = _cache(scale, profile, float(x), quad)
    if a is not None:
        if a < x - _ASTAR_SLACK * max(1.0, x):
            raise DomainError(f"barrier a={a} below starting level x={x}")
        if a > cache.a_st * (1.0 + _ASTAR_SLACK) + _ASTAR_SLACK:
            raise DomainError(
                f"barrier a={a} exceeds a_star={cache.a_st}; gamma_bar would be "
                "negative there"
            )
    return cache


def excursion_tail_rate(scale: ScaleEvaluator, x: float) -> float:
    """Rate of excursions exceeding height x: W^(q)'(x)/W^(q)(x) - Phi(q)."""
    return scale.dlog_w(x) - scale.phi_q


def survival_exponent(
    scale: ScaleEvaluator,
    profile: TaxProfile,
    x: float,
    a: float,
    quad: QuadratureConfig | None = None,
) -> float:
    """int_x^a W^(q)'(gamma_bar)/W^(q)(gamma_bar) ds, in [0, +inf].

    ``a`` may equal a_star(profile, x) (and must not exceed it); +inf is
    returned exactly when the endpoint integral diverges, which downstream
    turns into a survival factor of exactly 0. ``a = math.inf`` is allowed
    when a_star is infinite.
    """
    quad = quad or _DEFAULT_QUAD
    cache = _checked_cache(scale, profile, x, a, quad)
    if a <= x:
        return 0.0
    if not cache.finite:
        if math.isinf(a):
            return cache.improper_total()
        return float(cache.exponent_at(a))
    if a >= cache.a_st:
        edge = cache.edge_exponent()
        return edge + cache.region2_total()
    if a <= cache.s_edge:
        return float(cache.exponent_at(a))
    return cache.edge_exponent() + float(cache.region2_at(-math.log(cache.a_st - a)))


def two_sided_up(
    scale: ScaleEvaluator,
    profile: TaxProfile,
    x: float,
    a: float,
    quad: QuadratureConfig | None = None,
) -> float:
    """q-discounted chance the supremum climbs from x to a before ruin."""
    return math.exp(-survival_exponent(scale, profile, x, a, quad))


def ruin_integrand_f(scale: ScaleEvaluator, z) -> float:
    """The ruin-rate factor f(z) = Z^(q)(z)W^(q)'(z)/W^(q)(z) - qW^(q)(z)."""
    arr = np.asarray(z, dtype=float)
    if np.any(np.atleast_1d(arr) <= 0):
        raise DomainError(f"ruin_integrand_f requires z > 0, got {z}")
    return _ruin_integrand(scale)(z)


def _region2_outer(
    cache: _ExponentCache,
    u_hi: float,
    weight_h: Callable[[np.ndarray], np.ndarray],
    quad: QuadratureConfig,
) -> tuple[float, float]:
    # Outer integral over the sliver, transformed by s = a_star - e^{-u};
    # weight_h receives h = a_star - s.
    edge = cache.edge_exponent()
    if edge > quad.divergence_cap:
        return 0.0, 0.0

    def integrand(us: np.ndarray) -> np.ndarray:
        e2 = cache.region2_at(us)
        h = np.exp(-us)
        return np.exp(-(edge + e2)) * weight_h(h) * h

    total = 0.0
    err = 0.0
    u_lo = cache.u0
    small_run = 0
    while u_lo < u_hi:
        u_next = min(u_lo + _R2_WINDOW, u_hi, _U_HARD)
        val, e, _ = adaptive_gk(integrand, u_lo, u_next, quad)
        total += val
        err += e
        if abs(val) <= max(quad.abs_tol, quad.rel_tol * abs(total)):
            small_run += 1
            if small_run >= 2:
                break
        else:
            small_run = 0
        if u_next >= _U_HARD:
            break  # survival factor below e^{-600} from here on
        u_lo = u_next
    return total, err


def two_sided_down(
    scale: ScaleEvaluator,
    profile: TaxProfile,
    x: float,
    a: float,
    quad: QuadratureConfig | None = None,
) -> float:
    """q-discounted chance of ruin before the supremum reaches a.

    Outer quadrature of exp(-E(x,t)) f(gamma_bar(t)) over t in [x, a],
    with the endpoint sliver at a finite a_star handled in the
    substituted variable.
    """
    quad = quad or _DEFAULT_QUAD
    cache = _checked_cache(scale, profile, x, a, quad)
    if a <= x:
        return 0.0
    rate = _ruin_integrand(scale)
    total = 0.0
    t_hi = min(a, cache.s_edge)
    if t_hi > x:
        cache.ensure_region1(t_hi)

        def integrand(ts: np.ndarray) -> np.ndarray:
            gb = gamma_bar(profile, x, ts)
            return np.exp(-cache.exponent_at(ts)) * rate(gb)

        seeds = [k for k in cache.kinks if x < k < t_hi]
        val, _, _ = adaptive_gk(integrand, x, t_hi, quad, initial_knots=seeds)
        total += val
    if cache.finite and a > cache.s_edge:
        u_hi = math.inf if a >= cache.a_st else -math.log(cache.a_st - a)

        def weight_h(h: np.ndarray) -> np.ndarray:
            return rate(gamma_bar_near_astar(profile, x, cache.a_st, h))

        val2, _ = _region2_outer(cache, u_hi, weight_h, quad)
        total += val2
    return total


def ruin_laplace(
    scale: ScaleEvaluator,
    profile: TaxProfile,
    x: float,
    quad: QuadratureConfig | None = None,
) -> float:
    """Laplace transform of the ruin time when a_star is infinite."""
    quad = quad or _DEFAULT_QUAD
    cache = _checked_cache(scale, profile, x, None, quad)
    if cache.finite:
        raise DomainError(
            f"a_star={cache.a_st} is finite; use two_sided_down with a = a_star"
        )
    rate = _ruin_integrand(scale)

    def weight(ts: np.ndarray) -> np.ndarray:
        return rate(gamma_bar(profile, x, ts))

    value, _ = _improper_outer(cache, weight, quad, detect_divergence=False)
    return value


def _improper_outer(
    cache: _ExponentCache,
    weight: Callable[[np.ndarray], np.ndarray],
    quad: QuadratureConfig,
    detect_divergence: bool,
) -> tuple[float, float]:
    step = quad.infinity_map_scale
    total = 0.0
    err = 0.0
    segs: list[float] = []
    t_lo = cache.x
    small_run = 0

    def integrand(ts: np.ndarray) -> np.ndarray:
        return np.exp(-cache.exponent_at(ts)) * weight(ts)

    for k in range(_IMPROPER_MAX_WINDOWS):
        t_hi = cache.x + step * (2.0 ** (k + 1) - 1.0)
        cache.ensure_region1(t_hi)
        seeds = [kk for kk in profile_kinks(cache.profile) if t_lo < kk < t_hi]
        val, e, _ = adaptive_gk(integrand, t_lo, t_hi, quad, initial_knots=seeds)
        total += val
        err += e
        segs.append(val)
        if abs(val) <= max(quad.abs_tol, quad.rel_tol * abs(total)):
            small_run += 1
            if small_run >= 2:
                return total, err
        else:
            small_run = 0
        if (
            detect_divergence
            and k >= 8
            and segs[-1] >= 0.9 * segs[-5]
            and segs[-1] > 10.0 * quad.abs_tol
        ):
            # doubling windows with non-decaying contributions: infinite value
            return math.inf, math.inf
        t_lo = t_hi
    raise AccuracyError(
        f"improper integral did not settle after {_IMPROPER_MAX_WINDOWS} windows",
        achieved=err,
    )


def ruin_probability(
    scale: ScaleEvaluator,
    profile: TaxProfile,
    x: float,
    quad: QuadratureConfig | None = None,
) -> float:
    """P_x[ruin ever happens] = 1 - exp(-E(x, inf)); needs q = 0 and a_star = inf."""
    quad = quad or _DEFAULT_QUAD
    if scale.q != 0.0:
        raise DomainError(
            f"ruin_probability is the q=0 law; evaluator has q={scale.q}"
        )
    cache = _checked_cache(scale, profile, x, None, quad)
    if cache.finite:
        raise DomainError(
            f"a_star={cache.a_st} is finite; use two_sided_down with a = a_star"
        )
    return 1.0 - math.exp(-cache.improper_total())


def creep2_laplace(
    scale: ScaleEvaluator,
    profile: TaxProfile,
    x: float,
    quad: QuadratureConfig | None = None,
) -> float:
    """q-discounted mass of ruin happening exactly at the supremum a_star.

    exp(-E(x, a_star)); exactly 0 when the endpoint integral diverges,
    strictly positive when it converges (the type II creeping dichotomy).
    """
    quad = quad or _DEFAULT_QUAD
    cache = _checked_cache(scale, profile, x, None, quad)
    if not cache.finite:
        raise DomainError("a_star is infinite; the supremum never exhausts the surplus")
    return math.exp(-survival_exponent(scale, profile, x, cache.a_st, quad))


def creep2_test(
    scale: ScaleEvaluator,
    profile: TaxProfile,
    x: float,
    quad: QuadratureConfig | None = None,
) -> Creep2Result:
    """Whether type II creeping has positive probability, with the exponent."""
    if scale.q != 0.0:
        raise DomainError(f"creep2_test is the q=0 criterion; evaluator has q={scale.q}")
    quad = quad or _DEFAULT_QUAD
    cache = _checked_cache(scale, profile, x, None, quad)
    if not cache.finite:
        raise DomainError("a_star is infinite; type II creeping is undefined")
    exponent = survival_exponent(scale, profile, x, cache.a_st, quad)
    return Creep2Result(math.isfinite(exponent), exponent)


def npv_tax(
    scale: ScaleEvaluator,
    profile: TaxProfile,
    x: float,
    quad: QuadratureConfig | None = None,
) -> float:
    """Expected discounted tax collected until ruin.

    int_x^{a_star} exp(-E(x,t)) gamma(t) dt; may be +inf (no discounting,
    light tax, positive drift: a tax stream that never ends with positive
    probability).
    """
    quad = quad or _DEFAULT_QUAD
    cache = _checked_cache(scale, profile, x, None, quad)
    if not cache.finite:
        def weight(ts: np.ndarray) -> np.ndarray:
            return gamma_at(profile, ts)

        value, _ = _improper_outer(cache, weight, quad, detect_divergence=True)
        return value
    total = 0.0
    if cache.s_edge > x:
        cache.ensure_region1(cache.s_edge)

        def integrand(ts: np.ndarray) -> np.ndarray:
            return np.exp(-cache.exponent_at(ts)) * gamma_at(profile, ts)

        val, _, _ = adaptive_gk(
            integrand, x, cache.s_edge, quad, initial_knots=list(cache.kinks)
        )
        total += val

    def weight_h(h: np.ndarray) -> np.ndarray:
        return gamma_near_astar(profile, cache.a_st, h)

    val2, _ = _region2_outer(cache, math.inf, weight_h, quad)
    return total + val2


def _tax_adjusted_prefactor(
    scale_alpha: ScaleEvaluator,
    profile: TaxProfile,
    x: float,
    theta: float,
    quad: QuadratureConfig,
) -> float:
    # Density of the tax-adjusted supremum A sitting at theta when the
    # fatal excursion begins: a change of variables v = gamma_bar(s) turns
    # the published exponent over v in (theta, x) into the cached survival
    # exponent up to s_theta = gamma_bar^{-1}(theta).
    s_theta = gamma_bar_inverse(profile, x, theta)
    exponent = survival_exponent(scale_alpha, profile, x, s_theta, quad)
    rate_here = gamma_at(profile, s_theta)
    if math.isinf(rate_here):
        return 0.0
    return math.exp(-exponent) / (rate_here - 1.0)


def triple_law_density(
    scale_alpha: ScaleEvaluator,
    scale_beta: ScaleEvaluator,
    profile: TaxProfile,
    x: float,
    point: TripleLawPoint,
    quad: QuadratureConfig | None = None,
) -> TripleLawDensity:
    """Joint law of (supremum at ruin, undershoot, overshoot) by jump ruin.

    Returns the absolutely continuous density at (theta, y, z) and the
    density in (theta, z) of the atom on the diagonal y = theta (ruin by a
    jump at an instant of new supremum; carries mass only for bounded
    variation). The two evaluators supply the alpha- and beta-discounted
    scale functions; their q's must match the point's rates.
    """
    quad = quad or _DEFAULT_QUAD
    _require_heavy(profile)
    if not 0 < point.theta < x:
        raise DomainError(f"need 0 < theta < x, got theta={point.theta}, x={x}")
    if scale_alpha.q != point.alpha or scale_beta.q != point.beta:
        raise DomainError(
            f"evaluator discount rates (q={scale_alpha.q}, {scale_beta.q}) must "
            f"match the point's (alpha={point.alpha}, beta={point.beta})"
        )
    if scale_alpha.model != scale_beta.model:
        raise DomainError("both evaluators must share one model")
    model = scale_alpha.model
    kappa = _tax_adjusted_prefactor(scale_alpha, profile, x, point.theta, quad)
    w0, wp0 = scale_beta._boundary
    ratio = scale_beta.w_prime(point.theta) / scale_beta.w(point.theta)
    gap = point.theta - point.y
    if gap > 0.0:
        bracket = scale_beta.w_prime(gap) - ratio * scale_beta.w(gap)
    else:
        bracket = wp0 - ratio * w0
    ac = kappa * bracket * levy_density(model, point.y + point.z)
    atom = kappa * w0 * levy_density(model, point.theta + point.z)
    return TripleLawDensity(ac=float(ac), atom=float(atom))


def creep1_density(
    scale_alpha: ScaleEvaluator,
    scale_beta: ScaleEvaluator,
    profile: TaxProfile,
    x: float,
    theta: float,
    quad: QuadratureConfig | None = None,
) -> float:
    """Density in theta of ruin by creeping inside an excursion (type I).

    (sigma^2/2) {W^(beta)'(theta)^2/W^(beta)(theta) - W^(beta)''(theta)}
    times the same tax-adjusted prefactor as the triple law; identically 0
    without a Gaussian part.
    """
    quad = quad or _DEFAULT_QUAD
    _require_heavy(profile)
    if not 0 < theta < x:
        raise DomainError(f"need 0 < theta < x, got theta={theta}, x={x}")
    if scale_alpha.model != scale_beta.model:
        raise DomainError("both evaluators must share one model")
    sigma = gaussian_coefficient(scale_alpha.model)
    if sigma == 0.0:
        return 0.0
    wp = scale_beta.w_prime(theta)
    ww = scale_beta.w(theta)
    wpp = scale_beta.w_second(theta)
    kappa = _tax_adjusted_prefactor(scale_alpha, profile, x, theta, quad)
    return kappa * 0.5 * sigma * sigma * (wp * wp / ww - wpp)
