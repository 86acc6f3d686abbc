"""Tax-rate profiles gamma and their integrated form.

A profile is the rate gamma(s) at which tax is paid while the pre-tax
supremum sits at level s. The integrated form

    gamma_bar(s) = s - int_x^s gamma(y) dy,   s >= x,

is the taxed surplus observed at the moments the pre-tax process attains
a new supremum; it starts at gamma_bar(x) = x and loses mass at rate
gamma - 1. Its first zero crossing

    a_star(x) = inf{s >= x : gamma_bar(s) < 0}

is the supremum level at which the surplus, while at its running maximum,
touches zero. Every variant keeps gamma_bar in closed form (it sits inside
nested integrals and must be cheap and smooth), which makes a_star the
root of a piecewise closed-form function: linear for ``Constant``,
piecewise quadratic with exact roots for ``Table``, and explicitly
solvable for ``SqrtExample``. No root is ever located by iteration except
the ``Table`` branch of ``gamma_bar_inverse``.

Variants:

* ``Constant``: gamma(s) = gamma for all s; any real rate.
* ``Table``: piecewise-linear interpolation through strictly increasing
  knots, clamped to the boundary values outside the knot range.
* ``SqrtExample``: gamma(s) = 1 + (a - s)^(-1/2) / 2 for s <= a and a
  constant rate 2 beyond; the rate blows up at s = a but stays integrable,
  so gamma_bar can reach zero with infinite slope. Started from x_star,
  gamma_bar(s) = sqrt(a - s) exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import DomainError, UnsupportedOperationError

__all__ = [
    "Constant",
    "Table",
    "SqrtExample",
    "TaxProfile",
    "gamma_at",
    "gamma_bar",
    "a_star",
    "x_star",
    "gamma_bar_inverse",
    "gamma_bar_near_astar",
    "gamma_near_astar",
    "profile_kinks",
]

# Continuation rate of SqrtExample past the singularity; any constant > 1
# gives the same identities for starting points at or below x_star.
SQRT_TAIL_RATE = 2.0

_BISECT_TOL = 1e-13


@dataclass(frozen=True)
class Constant:
    """Flat tax rate; the classical untaxed process is gamma = 0."""

    gamma: float


@dataclass(frozen=True)
class Table:
    """Piecewise-linear rate through ``knots`` = ((s_0, g_0), (s_1, g_1), ...).

    Knot abscissae must be strictly increasing and nonnegative; the rate is
    held constant outside the knot range.
    """

    knots: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        knots = tuple((float(s), float(g)) for s, g in self.knots)
        object.__setattr__(self, "knots", knots)
        if not knots:
            raise ValueError("Table needs at least one knot")
        ss = [s for s, _ in knots]
        if any(s < 0 for s in ss):
            raise ValueError(f"knot positions must be >= 0, got {ss}")
        if any(b <= a for a, b in zip(ss, ss[1:])):
            raise ValueError(f"knot positions must be strictly increasing, got {ss}")


@dataclass(frozen=True)
class SqrtExample:
    """Square-root singular rate: 1 + (a - s)^(-1/2)/2 up to s = a."""

    a: float

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise ValueError(f"a must be > 0, got {self.a}")


TaxProfile = Union[Constant, Table, SqrtExample]


@lru_cache(maxsize=128)
def _table_arrays(profile: Table) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Knot positions, rates, and the cumulative integral of gamma from 0
    # to each knot (the stretch below the first knot uses its clamped rate).
    ss = np.array([s for s, _ in profile.knots])
    gs = np.array([g for _, g in profile.knots])
    cum = np.empty_like(ss)
    cum[0] = gs[0] * ss[0]
    if len(ss) > 1:
        cum[1:] = cum[0] + np.cumsum(0.5 * (gs[1:] + gs[:-1]) * np.diff(ss))
    return ss, gs, cum


def _gamma_values(profile: TaxProfile, s: np.ndarray) -> np.ndarray:
    if isinstance(profile, Constant):
        return np.full_like(s, profile.gamma)
    if isinstance(profile, Table):
        ss, gs, _ = _table_arrays(profile)
        return np.interp(s, ss, gs)
    a = profile.a
    out = np.full_like(s, SQRT_TAIL_RATE)
    below = s < a
    with np.errstate(divide="ignore"):
        out[below] = 1.0 + 0.5 / np.sqrt(a - s[below])
    out[s == a] = math.inf
    return out


def _gamma_integral(profile: TaxProfile, s: np.ndarray) -> np.ndarray:
    # int_0^s gamma(y) dy, closed form per variant.
    if isinstance(profile, Constant):
        return profile.gamma * s
    if isinstance(profile, Table):
        ss, gs, cum = _table_arrays(profile)
        idx = np.searchsorted(ss, s, side="right") - 1
        out = np.where(idx < 0, gs[0] * s, 0.0)
        inside = idx >= 0
        if np.any(inside):
            i = idx[inside]
            h = s[inside] - ss[i]
            rate = np.interp(s[inside], ss, gs)
            out = np.array(out)
            out[inside] = cum[i] + 0.5 * (gs[i] + rate) * h
        return out
    a = profile.a
    # d/dy [-(a - y)^(1/2)] = (a - y)^(-1/2) / 2 on y < a
    below = np.minimum(s, a)
    out = below - np.sqrt(np.maximum(a - below, 0.0)) + math.sqrt(a)
    return out + SQRT_TAIL_RATE * np.maximum(s - a, 0.0)


def gamma_at(profile: TaxProfile, s):
    """Pointwise tax rate at supremum level s >= 0; scalar or array.

    For ``SqrtExample`` the rate at exactly s = a is +inf (the singularity
    is one-point and integrable).
    """
    arr = np.asarray(s, dtype=float)
    if np.any(arr < 0):
        raise DomainError(f"gamma_at requires s >= 0, got {s}")
    out = _gamma_values(profile, np.atleast_1d(arr).ravel())
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def gamma_bar(profile: TaxProfile, x: float, s):
    """Integrated profile s - int_x^s gamma(y) dy for s >= x; scalar or array.

    All variants use an exact antiderivative, never quadrature; for
    ``SqrtExample`` started at x = x_star this equals sqrt(a - s) on [x, a].
    """
    if not x > 0:
        raise DomainError(f"gamma_bar requires x > 0, got x={x}")
    arr = np.asarray(s, dtype=float)
    if np.any(arr < x - 1e-12 * max(1.0, x)):
        raise DomainError(f"gamma_bar requires s >= x={x}, got s={s}")
    sv = np.maximum(np.atleast_1d(arr).ravel(), x)
    gx = _gamma_integral(profile, np.full_like(sv, x))
    out = sv - (_gamma_integral(profile, sv) - gx)
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def profile_kinks(profile: TaxProfile) -> tuple[float, ...]:
    """Levels where gamma is not smooth; quadrature seeds cells there."""
    if isinstance(profile, Table):
        return tuple(s for s, _ in profile.knots)
    if isinstance(profile, SqrtExample):
        return (profile.a,)
    return ()


def _sqrt_a_star(profile: SqrtExample, x: float) -> float:
    a = profile.a
    if x >= a:
        # started past the singularity: constant tail rate
        return SQRT_TAIL_RATE * x / (SQRT_TAIL_RATE - 1.0)
    gb_at_a = x - math.sqrt(a - x)  # gamma_bar evaluated at s = a
    if gb_at_a <= 0.0:
        # crossing before the singular point: solve sqrt(a-s) = sqrt(a-x) - x
        return a - (math.sqrt(a - x) - x) ** 2
    return a + gb_at_a / (SQRT_TAIL_RATE - 1.0)


def _table_a_star(profile: Table, x: float) -> float:
    # gamma_bar is piecewise quadratic: walk the segments right of x and
    # take the first exact root. gb' = 1 - gamma, gb'' = -slope.
    ss, gs, _ = _table_arrays(profile)
    bounds = [float(s) for s in ss if s > x]
    left = x
    gb_left = x
    for right in bounds + [math.inf]:
        g_left = float(_gamma_values(profile, np.array([left]))[0])
        if math.isinf(right):
            slope = 0.0
        else:
            g_right = float(_gamma_values(profile, np.array([right]))[0])
            slope = (g_right - g_left) / (right - left)
        width = right - left
        root = _quadratic_first_root(-0.5 * slope, 1.0 - g_left, gb_left, width)
        if root is not None:
            return left + root
        gb_left = gb_left + width * (1.0 - g_left) - 0.5 * slope * width * width
        left = right
        if gb_left <= 0.0:  # numeric slack: crossing at the boundary itself
            return left
    return math.inf


def _quadratic_first_root(a2: float, a1: float, a0: float, width: float) -> float | None:
    # Smallest h in (0, width] with a2 h^2 + a1 h + a0 = 0, given a0 >= 0
    # (the value at h = 0). None if the parabola stays positive.
    if a0 == 0.0:
        return 0.0
    if a2 == 0.0:
        if a1 >= 0.0:
            return None
        h = -a0 / a1
        return h if h <= width else None
    disc = a1 * a1 - 4.0 * a2 * a0
    if disc < 0.0:
        return None
    sq = math.sqrt(disc)
    big = -(a1 + math.copysign(sq, a1)) / 2.0
    candidates = []
    if big != 0.0:
        candidates.append(a0 / big)
    candidates.append(big / a2)
    valid = [h for h in candidates if 0.0 < h <= width]
    return min(valid) if valid else None


def a_star(profile: TaxProfile, x: float) -> float:
    """First level at which gamma_bar turns negative; +inf if it never does.

    Exact per variant: linear root for ``Constant``, per-segment quadratic
    roots for ``Table``, explicit solution for ``SqrtExample``.
    """
    if not x > 0:
        raise DomainError(f"a_star requires x > 0, got {x}")
    if isinstance(profile, Constant):
        if profile.gamma <= 1.0:
            return math.inf
        return profile.gamma * x / (profile.gamma - 1.0)
    if isinstance(profile, SqrtExample):
        return _sqrt_a_star(profile, x)
    return _table_a_star(profile, x)


def x_star(profile: TaxProfile) -> float:
    """Starting point that turns ``SqrtExample`` into gamma_bar(s) = sqrt(a - s).

    The positive root of y = sqrt(a - y), i.e. (sqrt(1 + 4a) - 1)/2; at this
    x the zero of gamma_bar lands exactly on the singular point a.
    """
    if not isinstance(profile, SqrtExample):
        raise UnsupportedOperationError(
            f"x_star is defined for SqrtExample profiles, got {type(profile).__name__}"
        )
    return 0.5 * (math.sqrt(1.0 + 4.0 * profile.a) - 1.0)


def gamma_bar_near_astar(profile: TaxProfile, x: float, a_st: float, h):
    """gamma_bar(a_star - h) for small h >= 0, free of cancellation.

    Direct evaluation of gamma_bar near its root subtracts two O(a_star)
    quantities to produce an O(h) result, which turns to noise once
    h < 1e-16 * a_star; endpoint-substituted quadrature needs values down
    to h ~ e^{-700}. This form integrates gamma - 1 over [a_star - h,
    a_star] in closed form instead, treating gamma_bar(a_star) as exactly
    0. Scalar or array h.
    """
    arr = np.asarray(h, dtype=float)
    hv = np.atleast_1d(arr).ravel()
    if np.any(hv < 0):
        raise DomainError(f"gamma_bar_near_astar requires h >= 0, got {h}")
    if not math.isfinite(a_st):
        raise DomainError("gamma_bar_near_astar requires a finite a_star")
    if isinstance(profile, Constant):
        out = (profile.gamma - 1.0) * hv
    elif isinstance(profile, SqrtExample):
        a = profile.a
        if a_st <= a:
            base = max(a - a_st, 0.0)
            out = np.sqrt(base + hv) - math.sqrt(base)
        else:
            past = a_st - a  # stretch at the constant tail rate (gamma - 1 = 1)
            out = np.where(hv <= past, hv, past + np.sqrt(np.maximum(hv - past, 0.0)))
    else:
        ss, _, _ = _table_arrays(profile)
        idx = int(np.searchsorted(ss, a_st, side="right")) - 1
        seg_lo = float(ss[idx]) if idx >= 0 else 0.0
        slack = a_st - seg_lo
        g_hi = float(_gamma_values(profile, np.array([a_st]))[0])
        g_lo_vals = _gamma_values(profile, np.maximum(a_st - hv, 0.0))
        # trapezoid is exact while [a_st - h, a_st] stays inside one linear
        # segment; fall back to the antiderivative difference beyond, where
        # h is large enough that cancellation is harmless
        trap = 0.5 * hv * ((g_hi - 1.0) + (g_lo_vals - 1.0))
        direct = (
            _gamma_integral(profile, np.full_like(hv, a_st))
            - _gamma_integral(profile, a_st - hv)
        ) - hv
        out = np.where(hv <= slack, trap, direct)
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def gamma_near_astar(profile: TaxProfile, a_st: float, h):
    """gamma(a_star - h) computed from the distance h, not from a_star - h.

    Needed by endpoint-substituted quadrature: for SqrtExample with
    a_star = a the rate behaves like h^{-1/2} and a_st - h rounds back to
    a_st once h < 1e-16 * a_st. Scalar or array h >= 0.
    """
    arr = np.asarray(h, dtype=float)
    hv = np.atleast_1d(arr).ravel()
    if np.any(hv < 0):
        raise DomainError(f"gamma_near_astar requires h >= 0, got {h}")
    if not math.isfinite(a_st):
        raise DomainError("gamma_near_astar requires a finite a_star")
    if isinstance(profile, Constant):
        out = np.full_like(hv, profile.gamma)
    elif isinstance(profile, SqrtExample):
        if a_st <= profile.a:
            dist = (profile.a - a_st) + hv
            with np.errstate(divide="ignore"):
                out = 1.0 + 0.5 / np.sqrt(dist)
        else:
            past = a_st - profile.a
            with np.errstate(divide="ignore", invalid="ignore"):
                out = np.where(
                    hv <= past,
                    SQRT_TAIL_RATE,
                    1.0 + 0.5 / np.sqrt(np.maximum(hv - past, 0.0)),
                )
    else:
        out = _gamma_values(profile, np.maximum(a_st - hv, 0.0))
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def _monotone_direction(profile: TaxProfile, x: float) -> float:
    # +1 if gamma_bar is strictly increasing on [x, inf), -1 if strictly
    # decreasing; anything else is unsupported for inversion.
    if isinstance(profile, Constant):
        rates = [profile.gamma]
    elif isinstance(profile, SqrtExample):
        return -1.0  # gamma > 1 everywhere by construction
    else:
        rates = [g for s, g in profile.knots if s > x]
        rates.append(float(_gamma_values(profile, np.array([x]))[0]))
        rates.append(profile.knots[-1][1])
    if all(g < 1.0 for g in rates):
        return 1.0
    if all(g > 1.0 for g in rates):
        return -1.0
    raise UnsupportedOperationError(
        "gamma_bar is not strictly monotone on [x, inf) for this profile"
    )


def gamma_bar_inverse(profile: TaxProfile, x: float, v: float) -> float:
    """Inverse of s -> gamma_bar(s) on its monotone stretch [x, inf).

    Raises ``UnsupportedOperationError`` when the profile is not strictly
    monotone there and ``DomainError`` when v is outside the range.
    """
    if not x > 0:
        raise DomainError(f"gamma_bar_inverse requires x > 0, got {x}")
    direction = _monotone_direction(profile, x)
    if isinstance(profile, Constant):
        s = (v - profile.gamma * x) / (1.0 - profile.gamma)
        if s < x - 1e-9 * max(1.0, x):
            raise DomainError(f"value {v} outside the range of gamma_bar")
        return max(s, x)
    if direction > 0 and v < x - 1e-12:
        raise DomainError(f"value {v} below gamma_bar(x) = {x}")
    if direction < 0 and v > x + 1e-12:
        raise DomainError(f"value {v} above gamma_bar(x) = {x}")
    if abs(v - x) <= 1e-12:
        return x
    if isinstance(profile, SqrtExample):
        a = profile.a
        gb_at_a = x - math.sqrt(max(a - x, 0.0)) if x < a else x
        if x < a and v >= gb_at_a:
            # still on the square-root stretch: sqrt(a-s) = v - x + sqrt(a-x)
            root = v - x + math.sqrt(a - x)
            return a - root * root
        tail = SQRT_TAIL_RATE - 1.0
        return a + (gb_at_a - v) / tail if x < a else x + (x - v) / tail

    def residual(s: float) -> float:
        return gamma_bar(profile, x, s) - v

    lo, hi = x, max(2.0 * x, x + 1.0)
    for _ in range(200):
        if residual(hi) * residual(lo) <= 0.0:
            return _bisect_root(residual, lo, hi)
        lo, hi = hi, 2.0 * hi
    raise DomainError(f"value {v} outside the range of gamma_bar")


def _bisect_root(f, lo: float, hi: float) -> float:
    # f(lo) and f(hi) bracket a sign change; plain bisection is plenty for
    # the piecewise closed forms this module hands it.
    flo = f(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= _BISECT_TOL * max(1.0, abs(mid)):
            break
        fm = f(mid)
        if (fm > 0.0) == (flo > 0.0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
