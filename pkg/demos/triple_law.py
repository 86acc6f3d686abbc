"""Where, how deep, and how far: the joint law of ruin by a claim.

At ruin three quantities matter: the tax-adjusted supremum theta when
the fatal excursion started, the surplus y still left at that moment,
and the depth z the claim finishes below zero. The density has an
absolutely continuous part on y < theta and an atom on y = theta (a
claim arriving at a fresh supremum), plus separate creeping channels.
Everything here is undiscounted (alpha = beta = 0).
"""
import math

import numpy as np
from numpy.polynomial.legendre import leggauss

from levytax.identities import (
    TripleLawPoint,
    creep1_density,
    creep2_laplace,
    triple_law_density,
    two_sided_down,
)
from levytax.models import CramerLundberg, MixedModel, levy_density, levy_measure_tail
from levytax.scale import make_scale
from levytax.tax import Constant, a_star

model = CramerLundberg(c=1.0, lam=0.5, claim_mean_inv=1.0)
sc = make_scale(model, 0.0)
profile = Constant(2.0)
x = 1.0

print("density slices at theta=0.6, z=0.4:")
for y in (0.1, 0.3, 0.5, 0.6):
    pt = TripleLawPoint(theta=0.6, y=y, z=0.4)
    d = triple_law_density(sc, sc, profile, x, pt)
    tag = "  <- diagonal atom density" if y == 0.6 else ""
    print(f"  y={y}: ac={d.ac:.6f} atom={d.atom:.6f}{tag}")

# integrate the channels and watch the mass balance close.
# z goes analytically (the overshoot factor is the Levy tail), y and
# theta on a Gauss grid.
nodes, weights = leggauss(80)


def channel_masses(model, sc):
    ac_total = atom_total = creep1_total = 0.0
    thetas = 0.5 * x * (nodes + 1.0)
    th_w = 0.5 * x * weights
    gaussian = not isinstance(model, CramerLundberg)
    for theta, wt in zip(thetas, th_w):
        ys = 0.5 * theta * (nodes + 1.0)
        y_w = 0.5 * theta * weights
        inner = 0.0
        atom_d = None
        for y, wy in zip(ys, y_w):
            d = triple_law_density(sc, sc, profile, x,
                                   TripleLawPoint(theta=float(theta), y=float(y), z=1.0))
            inner += wy * (d.ac / levy_density(model, y + 1.0)) \
                * levy_measure_tail(model, float(y))
            if atom_d is None:
                atom_d = d.atom / levy_density(model, theta + 1.0)
        ac_total += wt * inner
        atom_total += wt * atom_d * levy_measure_tail(model, float(theta))
        if gaussian:
            creep1_total += wt * creep1_density(sc, sc, profile, x, float(theta))
    return ac_total, atom_total, creep1_total


for name, m in (("claims only", model),
                ("claims + noise", MixedModel(c=1.0, lam=0.5, claim_mean_inv=1.0,
                                              sigma=1.0))):
    s = make_scale(m, 0.0)
    ac, atom, creep1 = channel_masses(m, s)
    creep2 = creep2_laplace(s, profile, x)
    down = two_sided_down(s, profile, x, a_star(profile, x))
    print(f"\n{name}:")
    print(f"  claim inside excursion : {ac:.6f}")
    print(f"  claim at new supremum  : {atom:.6f}")
    print(f"  creep inside excursion : {creep1:.6f}")
    print(f"  creep at the supremum  : {creep2:.6f}")
    print(f"  sum                    : {ac + atom + creep1 + creep2:.6f}")
    print(f"  jump+creep1 vs exit-down: {ac + atom + creep1:.6f} vs {down:.6f}")
