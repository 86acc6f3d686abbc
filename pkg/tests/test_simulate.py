import math

import numpy as np
import pytest

from levytax.errors import DomainError
from levytax.identities import (
    creep2_laplace,
    npv_tax,
    ruin_probability,
    two_sided_down,
    two_sided_up,
)
from levytax.models import BrownianDrift, CramerLundberg
from levytax.scale import make_scale
from levytax.simulate import (
    Estimate,
    McConfig,
    estimate_creep2,
    estimate_exit_down,
    estimate_exit_up,
    estimate_npv,
    estimate_ruin,
    simulate_path,
)
from levytax.tax import Constant, gamma_bar

CL = CramerLundberg(c=1.0, lam=0.5, claim_mean_inv=1.0)
BM = BrownianDrift(mu=1.0, sigma=math.sqrt(2.0))

# modest path counts keep this module fast; agreement gates live with the
# exact-kernel comparisons at 4 standard errors


def _within(est: Estimate, truth: float, n_se: float = 4.0) -> bool:
    return abs(est.value - truth) <= n_se * max(est.std_error, 1e-12)


def test_same_seed_bit_identical():
    cfg = McConfig(n_paths=2_000, seed=7)
    a = estimate_exit_up(CL, Constant(2.0), 1.0, 1.5, 0.0, cfg)
    b = estimate_exit_up(CL, Constant(2.0), 1.0, 1.5, 0.0, cfg)
    assert a == b  # bit-identical, not just close


def test_seed_changes_estimate():
    cfg1 = McConfig(n_paths=2_000, seed=7)
    cfg2 = McConfig(n_paths=2_000, seed=8)
    a = estimate_exit_up(CL, Constant(2.0), 1.0, 1.5, 0.0, cfg1)
    b = estimate_exit_up(CL, Constant(2.0), 1.0, 1.5, 0.0, cfg2)
    assert a.value != b.value


def test_std_error_scales_like_sqrt_n():
    small = estimate_ruin(CL, Constant(0.0), 1.0, 0.0, McConfig(n_paths=4_000, seed=3))
    big = estimate_ruin(CL, Constant(0.0), 1.0, 0.0, McConfig(n_paths=16_000, seed=3))
    ratio = small.std_error / big.std_error
    assert 1.6 < ratio < 2.4  # sqrt(4) with sampling noise


def test_exact_kernel_exit_up():
    profile = Constant(2.0)
    sc = make_scale(CL, 0.0)
    truth = two_sided_up(sc, profile, 1.0, 1.5)
    est = estimate_exit_up(CL, profile, 1.0, 1.5, 0.0, McConfig(n_paths=20_000, seed=11))
    assert _within(est, truth)
    assert est.n_effective == 20_000
    assert est.censored_fraction == 0.0


def test_exact_kernel_exit_up_discounted():
    profile = Constant(2.0)
    sc = make_scale(CL, 0.5)
    truth = two_sided_up(sc, profile, 1.0, 1.5)
    est = estimate_exit_up(CL, profile, 1.0, 1.5, 0.5, McConfig(n_paths=20_000, seed=11))
    assert _within(est, truth)


def test_exact_kernel_exit_down():
    profile = Constant(2.0)
    sc = make_scale(CL, 0.0)
    truth = two_sided_down(sc, profile, 1.0, 1.5)
    est = estimate_exit_down(CL, profile, 1.0, 1.5, 0.0, McConfig(n_paths=20_000, seed=5))
    assert _within(est, truth)


def test_exact_kernel_ruin():
    sc = make_scale(CL, 0.0)
    truth = ruin_probability(sc, Constant(0.0), 2.0)
    est = estimate_ruin(CL, Constant(0.0), 2.0, 0.0, McConfig(n_paths=20_000, seed=2))
    assert _within(est, truth)


def test_exact_kernel_creep2():
    profile = Constant(2.0)
    sc = make_scale(CL, 0.0)
    truth = creep2_laplace(sc, profile, 1.0)
    est = estimate_creep2(CL, profile, 1.0, 0.0, McConfig(n_paths=20_000, seed=13))
    assert _within(est, truth)


def test_exact_kernel_npv():
    profile = Constant(2.0)
    sc = make_scale(CL, 0.0)
    truth = npv_tax(sc, profile, 1.0)
    est = estimate_npv(CL, profile, 1.0, 0.0, McConfig(n_paths=20_000, seed=17))
    assert _within(est, truth)


def test_euler_kernel_exit_up():
    profile = Constant(0.0)
    sc = make_scale(BM, 0.0)
    truth = two_sided_up(sc, profile, 1.0, 2.0)
    est = estimate_exit_up(
        BM, profile, 1.0, 2.0, 0.0, McConfig(n_paths=8_000, seed=19, time_step=1e-3)
    )
    assert _within(est, truth)


def test_simulate_path_trace_invariants():
    profile = Constant(0.5)
    trace = simulate_path(CL, profile, 1.0, seed=42, time_step=1e-2, horizon=5.0)
    sups = trace["supremum"]
    levels = trace["level"]
    # supremum is the running max of the level and never falls
    assert np.all(np.diff(sups) >= 0)
    assert np.allclose(sups, np.maximum.accumulate(levels))
    # taxed surplus is gamma_bar(S) - (S - X) along the whole path
    gb = np.array([gamma_bar(profile, 1.0, s) for s in sups])
    assert np.allclose(trace["taxed"], gb - (sups - levels), atol=1e-12)
    # tax collected is the supremum increase minus the surplus increase
    want_paid = (sups - 1.0) - (gb - gamma_bar(profile, 1.0, 1.0))
    assert np.allclose(trace["tax_paid"], want_paid, atol=1e-12)
    assert trace["outcome"] in (0, 1)


def test_simulate_path_reproducible():
    t1 = simulate_path(BM, Constant(2.0), 1.0, seed=3, time_step=1e-2, horizon=2.0)
    t2 = simulate_path(BM, Constant(2.0), 1.0, seed=3, time_step=1e-2, horizon=2.0)
    assert np.array_equal(t1["level"], t2["level"])
    assert np.array_equal(t1["taxed"], t2["taxed"])


def test_config_validation():
    with pytest.raises(ValueError):
        McConfig(n_paths=0)
    with pytest.raises(ValueError):
        McConfig(time_step=0.0)
    with pytest.raises(ValueError):
        McConfig(horizon=-1.0)
    with pytest.raises(DomainError):
        estimate_exit_up(CL, Constant(0.0), 1.0, 0.5, 0.0, McConfig(n_paths=16))
    with pytest.raises(DomainError):
        estimate_ruin(CL, Constant(0.0), -1.0, 0.0, McConfig(n_paths=16))
    with pytest.raises(DomainError):
        estimate_ruin(CL, Constant(0.0), 1.0, -0.5, McConfig(n_paths=16))
