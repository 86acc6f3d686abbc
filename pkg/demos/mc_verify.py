"""Monte Carlo cross-checks of the quadrature identities.

The claims-only kernel is event-driven and exact in distribution; the
Gaussian models use an Euler grid with a continuity correction. Each
line prints the formula value, the estimate, and the z-score; with
20000 paths anything inside 3 standard errors is noise.
"""
import math

from levytax.identities import (
    creep2_laplace,
    npv_tax,
    ruin_probability,
    two_sided_up,
)
from levytax.models import BrownianDrift, CramerLundberg
from levytax.scale import make_scale
from levytax.simulate import (
    McConfig,
    estimate_creep2,
    estimate_exit_up,
    estimate_npv,
    estimate_ruin,
    simulate_path,
)
from levytax.tax import Constant

cl = CramerLundberg(c=1.0, lam=0.5, claim_mean_inv=1.0)
cfg = McConfig(n_paths=20_000, seed=11)


def show(name, est, truth):
    z = (est.value - truth) / est.std_error
    print(f"  {name:<22} formula={truth:.6f} mc={est.value:.6f} "
          f"se={est.std_error:.6f} z={z:+.2f}")


heavy = Constant(2.0)
print("claims-only model, exact kernel, 20000 paths:")
sc0 = make_scale(cl, 0.0)
show("exit-up q=0", estimate_exit_up(cl, heavy, 1.0, 1.5, 0.0, cfg),
     two_sided_up(sc0, heavy, 1.0, 1.5))
sc5 = make_scale(cl, 0.5)
show("exit-up q=0.5", estimate_exit_up(cl, heavy, 1.0, 1.5, 0.5, cfg),
     two_sided_up(sc5, heavy, 1.0, 1.5))
show("ruin, gamma=0, x=2", estimate_ruin(cl, Constant(0.0), 2.0, 0.0, cfg),
     ruin_probability(sc0, Constant(0.0), 2.0))
show("npv of tax", estimate_npv(cl, heavy, 1.0, 0.0, cfg),
     npv_tax(sc0, heavy, 1.0))
show("creep at supremum", estimate_creep2(cl, heavy, 1.0, 0.0, cfg),
     creep2_laplace(sc0, heavy, 1.0))

bm = BrownianDrift(mu=1.0, sigma=math.sqrt(2.0))
print("\nbrownian model, Euler kernel, dt=1e-3:")
sb = make_scale(bm, 0.0)
show("exit-up, no tax", estimate_exit_up(bm, Constant(0.0), 1.0, 2.0, 0.0, cfg),
     two_sided_up(sb, Constant(0.0), 1.0, 2.0))

# one full path trace, to see the pieces move together
trace = simulate_path(cl, Constant(0.5), 1.0, seed=4, time_step=0.01, horizon=30.0)
i = len(trace["times"]) - 1
print(f"\none path, gamma=0.5: ran to t={trace['times'][i]:.2f}, "
      f"outcome={trace['outcome']}")
print(f"  final level={trace['level'][i]:+.4f} supremum={trace['supremum'][i]:.4f} "
      f"taxed surplus={trace['taxed'][i]:+.4f} tax collected={trace['tax_paid'][i]:.4f}")
