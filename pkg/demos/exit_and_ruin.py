"""How the tax rate moves the two-sided exit split and the ruin probability.

The surplus pays tax at rate gamma(s) whenever it sits at its running
supremum s. Rates above 1 drain the surplus fast enough that the
supremum can never pass a*(x); rates below 1 leave it room to grow
forever.
"""
import math

from levytax.identities import ruin_probability, two_sided_down, two_sided_up
from levytax.models import CramerLundberg
from levytax.scale import make_scale
from levytax.tax import Constant, Table, a_star

model = CramerLundberg(c=1.0, lam=0.5, claim_mean_inv=1.0)
sc = make_scale(model, 0.0)
x, a = 1.0, 1.8

print(f"start x={x}, upper barrier a={a}, no discounting")
print("gamma   P[reach a first]  P[ruin first]   sum       a*(x)")
for g in (0.0, 0.25, 0.5, 0.9, 1.5, 2.0, 4.0):
    profile = Constant(g)
    ast = a_star(profile, x)
    if a >= ast:
        print(f"  {g:<5} barrier sits past a* = {ast:.4f}, skipped")
        continue
    up = two_sided_up(sc, profile, x, a)
    down = two_sided_down(sc, profile, x, a)
    print(f"  {g:<5} {up:<17.8f} {down:<15.8f} {up + down:.8f}  {ast}")

# without an upper barrier: chance of ever being ruined, by tax rate
print("\nruin probability against a light constant rate:")
for g in (0.0, 0.2, 0.5, 0.8):
    p = ruin_probability(sc, Constant(g), x)
    # closed form for constant gamma < 1
    closed = 1.0 - (0.5 * sc.w(x)) ** (1.0 / (1.0 - g))
    print(f"  gamma={g}: {p:.8f}  (closed {closed:.8f})")

# a rate schedule read off a table: taxed harder as the business grows
sched = Table(((1.0, 0.1), (3.0, 0.6), (6.0, 0.9)))
print("\ntable schedule 0.1 -> 0.9 over s in [1, 6]:")
print("  ruin probability:", ruin_probability(sc, sched, x))
print("  vs flat 0.9     :", ruin_probability(sc, Constant(0.9), x))
print("  vs no tax       :", ruin_probability(sc, Constant(0.0), x))
