"""Catalog of spectrally negative Levy models.

Three closed families, each with a rational Laplace exponent and exactly
simulable paths:

* ``BrownianDrift``: X_t = mu t + sigma B_t, no jumps.
* ``CramerLundberg``: X_t = c t - compound Poisson sum of Exp-distributed
  claims (the classical insurance surplus).
* ``MixedModel``: the Cramer-Lundberg surplus plus an independent Brownian
  component.

The Laplace exponent is psi(theta) = log E[exp(theta X_1)], finite and
strictly convex on [0, inf) for every catalog member. ``phi`` computes its
largest right-inverse, i.e. the largest root of psi(theta) = q.

All operations are pure functions of frozen model values and are safe to
share across threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError

__all__ = [
    "BrownianDrift",
    "CramerLundberg",
    "MixedModel",
    "LevyModel",
    "BoundedVariation",
    "UnboundedVariation",
    "VariationType",
    "variation",
    "laplace_exponent",
    "psi_prime",
    "psi_prime_at_zero",
    "phi",
    "levy_density",
    "levy_measure_tail",
]


@dataclass(frozen=True)
class BrownianDrift:
    """Linear drift plus Brownian motion.

    Parameters
    ----------
    mu : float
        Drift per unit time; any real value.
    sigma : float
        Diffusion coefficient, > 0.
    """

    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class CramerLundberg:
    """Premium income at rate ``c`` minus exponentially distributed claims.

    Parameters
    ----------
    c : float
        Premium rate per unit time, > 0. Spectral negativity together
        with non-monotone paths forces a strictly positive drift.
    lam : float
        Claim arrival intensity, > 0.
    claim_mean_inv : float
        Rate parameter of the Exp claim-size law; the mean claim is its
        reciprocal.
    """

    c: float
    lam: float
    claim_mean_inv: float

    def __post_init__(self) -> None:
        if not self.c > 0:
            raise ValueError(f"premium rate c must be > 0, got {self.c}")
        if not self.lam > 0:
            raise ValueError(f"claim intensity lam must be > 0, got {self.lam}")
        if not self.claim_mean_inv > 0:
            raise ValueError(
                f"claim_mean_inv must be > 0, got {self.claim_mean_inv}"
            )


@dataclass(frozen=True)
class MixedModel:
    """Cramer-Lundberg surplus with an added independent Gaussian part."""

    c: float
    lam: float
    claim_mean_inv: float
    sigma: float

    def __post_init__(self) -> None:
        if not self.c > 0:
            raise ValueError(f"premium rate c must be > 0, got {self.c}")
        if not self.lam > 0:
            raise ValueError(f"claim intensity lam must be > 0, got {self.lam}")
        if not self.claim_mean_inv > 0:
            raise ValueError(
                f"claim_mean_inv must be > 0, got {self.claim_mean_inv}"
            )
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


LevyModel = Union[BrownianDrift, CramerLundberg, MixedModel]


@dataclass(frozen=True)
class BoundedVariation:
    """Bounded-variation paths: X_t = drift * t minus a pure-jump subordinator."""

    drift: float


@dataclass(frozen=True)
class UnboundedVariation:
    """Unbounded-variation paths (a Gaussian component is present)."""


VariationType = Union[BoundedVariation, UnboundedVariation]


def variation(model: LevyModel) -> VariationType:
    """Path-variation class of the model; bounded variation carries its drift."""
    if isinstance(model, CramerLundberg):
        return BoundedVariation(drift=model.c)
    if isinstance(model, (BrownianDrift, MixedModel)):
        return UnboundedVariation()
    raise TypeError(f"not a catalog model: {model!r}")


def gaussian_coefficient(model: LevyModel) -> float:
    """sigma in the Gaussian part of the model; 0 for pure-jump models."""
    if isinstance(model, CramerLundberg):
        return 0.0
    return model.sigma


def laplace_exponent(model: LevyModel, theta: float) -> float:
    """psi(theta) = log E[exp(theta X_1)], defined for theta >= 0.

    Closed forms per variant:

    * BrownianDrift:   mu theta + sigma^2 theta^2 / 2
    * CramerLundberg:  c theta - lam theta / (claim_mean_inv + theta)
    * MixedModel:      sum of both, with the same compensation convention
      as the Cramer-Lundberg part so that psi(0) = 0 exactly.
    """
    if theta < 0:
        raise DomainError(f"laplace_exponent requires theta >= 0, got {theta}")
    if isinstance(model, BrownianDrift):
        return model.mu * theta + 0.5 * model.sigma**2 * theta * theta
    if isinstance(model, CramerLundberg):
        return model.c * theta - model.lam * theta / (model.claim_mean_inv + theta)
    if isinstance(model, MixedModel):
        return (
            model.c * theta
            + 0.5 * model.sigma**2 * theta * theta
            - model.lam * theta / (model.claim_mean_inv + theta)
        )
    raise TypeError(f"not a catalog model: {model!r}")


def psi_prime(model: LevyModel, theta: float) -> float:
    """d psi / d theta on [0, inf); strictly increasing by convexity."""
    if theta < 0:
        raise DomainError(f"psi_prime requires theta >= 0, got {theta}")
    if isinstance(model, BrownianDrift):
        return model.mu + model.sigma**2 * theta
    r = model.claim_mean_inv
    jump = -model.lam * r / (r + theta) ** 2
    if isinstance(model, CramerLundberg):
        return model.c + jump
    return model.c + model.sigma**2 * theta + jump


def psi_prime_at_zero(model: LevyModel) -> float:
    """psi'(0+), the asymptotic drift of X: positive means X drifts to +inf."""
    if isinstance(model, BrownianDrift):
        return model.mu
    return model.c - model.lam / model.claim_mean_inv


def phi(model: LevyModel, q: float) -> float:
    """Largest root of psi(theta) = q, for q >= 0.

    phi(0) = 0 whenever psi'(0+) >= 0; otherwise the strictly positive
    second zero of psi. Solved by a bracketed Newton iteration with a
    bisection fallback; psi is convex and smooth, so the bracket never
    fails for catalog models.
    """
    if q < 0:
        raise DomainError(f"phi requires q >= 0, got {q}")
    drift = psi_prime_at_zero(model)
    if q == 0.0 and drift >= 0.0:
        return 0.0

    if q == 0.0:
        # psi dips below zero before returning to it; bracket from the minimizer.
        lo = _argmin_psi(model)
    else:
        lo = 0.0
    hi = max(1.0, 2.0 * lo)
    while laplace_exponent(model, hi) <= q:
        hi *= 2.0
        if hi > 1e308:
            raise RuntimeError("phi bracket expansion failed")
    return _newton_bisect(
        lambda t: laplace_exponent(model, t) - q,
        lambda t: psi_prime(model, t),
        lo,
        hi,
        f_scale=max(1.0, q),
    )


def _argmin_psi(model: LevyModel) -> float:
    # Positive root of psi' via bisection; psi' is increasing on [0, inf).
    lo, hi = 0.0, 1.0
    while psi_prime(model, hi) <= 0.0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if psi_prime(model, mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return lo


def _newton_bisect(f, fprime, lo: float, hi: float, f_scale: float) -> float:
    # Invariant: f(lo) <= 0 < f(hi). Newton from the high end; convexity
    # keeps the iterates above the root, the bracket catches the rest.
    x = hi
    fx = f(x)
    for _ in range(200):
        if abs(fx) <= 1e-13 * f_scale and (hi - lo) <= 1e-12 * max(1.0, abs(x)):
            break
        d = fprime(x)
        step_ok = d > 0.0
        if step_ok:
            x_new = x - fx / d
            step_ok = lo < x_new < hi
        if not step_ok:
            x_new = 0.5 * (lo + hi)
        x = x_new
        fx = f(x)
        if fx > 0.0:
            hi = x
        else:
            lo = x
    return x


def levy_density(model: LevyModel, z):
    """Density at z > 0 of the Levy measure of -X (claim-size intensity)."""
    arr = np.asarray(z, dtype=float)
    if np.any(np.atleast_1d(arr) <= 0):
        raise DomainError(f"levy_density requires z > 0, got {z}")
    if isinstance(model, BrownianDrift):
        out = np.zeros_like(arr)
    else:
        r = model.claim_mean_inv
        out = model.lam * r * np.exp(-r * arr)
    return float(out) if arr.ndim == 0 else out


def levy_measure_tail(model: LevyModel, z):
    """Mass of (z, inf) under the Levy measure of -X, z > 0."""
    arr = np.asarray(z, dtype=float)
    if np.any(np.atleast_1d(arr) <= 0):
        raise DomainError(f"levy_measure_tail requires z > 0, got {z}")
    if isinstance(model, BrownianDrift):
        out = np.zeros_like(arr)
    else:
        out = model.lam * np.exp(-model.claim_mean_inv * arr)
    return float(out) if arr.ndim == 0 else out
