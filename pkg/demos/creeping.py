"""Type II creeping: ruin at the exact moment the supremum hits a*.

With a heavy tax the surplus-while-at-supremum gamma_bar(s) is ground
down to zero at s = a*. Whether the process can actually die that way,
continuously, depends only on path variation: claims-only processes
(bounded variation) creep with positive probability, anything with a
Brownian part never does. The survival exponent integral
int W'(gamma_bar)/W(gamma_bar) ds converges or blows up accordingly.
"""
import math

from levytax.identities import creep2_test
from levytax.models import BrownianDrift, CramerLundberg, MixedModel
from levytax.scale import make_scale
from levytax.tax import Constant, SqrtExample, a_star, x_star

profile = Constant(2.0)
x = 1.0
print(f"constant gamma=2 from x={x}: a* = {a_star(profile, x)}")
for name, model in (
    ("claims only   ", CramerLundberg(c=1.0, lam=0.5, claim_mean_inv=1.0)),
    ("brownian      ", BrownianDrift(mu=0.0, sigma=math.sqrt(2.0))),
    ("claims + noise", MixedModel(c=1.0, lam=0.5, claim_mean_inv=1.0, sigma=1.0)),
):
    sc = make_scale(model, 0.0)
    r = creep2_test(sc, profile, x)
    prob = math.exp(-r.exponent)
    print(f"  {name} creeps={str(r.creeps):<5} exponent={r.exponent:<12.6f} "
          f"P[creep]={prob:.6f}")

# the marginal case: a rate exploding like 1/sqrt near its own singularity.
# Started exactly at x*, the Brownian exponent integral converges even
# though the paths have unbounded variation, and equals 2 x* on the nose.
sq = SqrtExample(1.0)
xs = x_star(sq)
sc = make_scale(BrownianDrift(mu=0.0, sigma=math.sqrt(2.0)), 0.0)
r = creep2_test(sc, sq, xs)
print(f"\nsqrt profile, started at x* = {xs:.10f}:")
print(f"  creeps={r.creeps}, exponent={r.exponent:.10f}, 2x*={2 * xs:.10f}")
print(f"  P[creep] = {math.exp(-r.exponent):.8f}")

# a touch above x* the singularity lands inside (x, a*) and the verdict flips
r2 = creep2_test(sc, sq, 1.02 * xs)
print(f"  started at 1.02 x*: creeps={r2.creeps}, exponent={r2.exponent}")
