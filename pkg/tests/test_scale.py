import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levytax.errors import (
    DomainError,
    RepeatedPoleError,
    UnsupportedOperationError,
)
from levytax.models import BrownianDrift, CramerLundberg, MixedModel
from levytax.scale import (
    invert_laplace_reference,
    make_scale,
    w,
    w_prime,
    w_second,
    z,
)

BM = BrownianDrift(mu=0.0, sigma=math.sqrt(2.0))
CL = CramerLundberg(c=1.0, lam=0.5, claim_mean_inv=1.0)
MIXED = MixedModel(c=1.0, lam=0.5, claim_mean_inv=1.0, sigma=1.0)


def test_bm_hyperbolic_pair():
    # psi(theta) = theta^2, so the q = 1 transform inverts to sinh/cosh
    sc = make_scale(BM, 1.0)
    assert sc.phi_q == pytest.approx(1.0, abs=1e-12)
    assert sc.w(1.0) == pytest.approx(math.sinh(1.0), rel=1e-13)
    assert sc.w_prime(1.0) == pytest.approx(math.cosh(1.0), rel=1e-13)
    assert sc.w_second(1.0) == pytest.approx(math.sinh(1.0), rel=1e-13)
    assert sc.z(2.0) == pytest.approx(math.cosh(2.0), rel=1e-13)
    xs = np.array([0.25, 1.0, 3.0])
    assert np.allclose(sc.w(xs), np.sinh(xs), rtol=1e-13)
    assert np.allclose(sc.z(xs), np.cosh(xs), rtol=1e-13)


def test_cl_exponential_form():
    # net profit 0.5: W(x) = 2 - e^{-x/2} at q = 0
    sc = make_scale(CL, 0.0)
    x = np.array([0.0, 0.5, 1.0, 4.0])
    assert np.allclose(sc.w(x), 2.0 - np.exp(-0.5 * x), rtol=1e-13)
    assert sc.w_prime(1.0) == pytest.approx(0.5 * math.exp(-0.5), rel=1e-13)
    assert sc.w(0.0) == pytest.approx(1.0)
    # q = 0 makes Z identically one
    assert sc.z(3.0) == 1.0


def test_boundary_values():
    assert make_scale(CL, 0.7).w(0.0) == pytest.approx(1.0)   # 1/c
    assert make_scale(BM, 1.0).w(0.0) == 0.0
    assert make_scale(MIXED, 0.5).w(0.0) == 0.0
    # W vanishes on the negative axis, Z is one
    sc = make_scale(BM, 1.0)
    assert sc.w(-2.0) == 0.0
    assert sc.z(-2.0) == 1.0


def test_forced_series_small_x():
    # naive e^x - e^{-x} cancellation would lose half the bits here
    sc = make_scale(BM, 1.0)
    for k in (10, 20, 30):
        x = 2.0**-k
        assert sc.w(x) == pytest.approx(math.sinh(x), rel=1e-12)
        assert sc.w_prime(x) == pytest.approx(math.cosh(x), rel=1e-12)
    sc0 = make_scale(CL, 0.0)
    x = 2.0**-30
    assert sc0.w(x) == pytest.approx(2.0 - math.exp(-0.5 * x), rel=1e-12)


def test_dlog_w_stable_at_extremes():
    sc = make_scale(BM, 1.0)
    # coth(x) at tiny x ~ 1/x, at huge x -> 1; bare sums overflow near 710
    assert sc.dlog_w(1e-8) == pytest.approx(1e8, rel=1e-6)
    assert sc.dlog_w(900.0) == pytest.approx(1.0, rel=1e-12)
    assert sc.dlog_w(1.0) == pytest.approx(math.cosh(1.0) / math.sinh(1.0), rel=1e-13)


def test_driftless_zero_q_linear():
    # psi'(0+) = 0 at q = 0: double pole at the origin, W(x) = 2x/sigma^2
    sc = make_scale(BM, 0.0)
    xs = np.array([0.1, 1.0, 7.0])
    assert np.allclose(sc.w(xs), xs, rtol=1e-14)
    assert sc.w_prime(3.0) == pytest.approx(1.0, rel=1e-14)
    assert sc.phi_q == 0.0


def test_mixed_closed_vs_talbot():
    sc = make_scale(MIXED, 1.0)
    ref = make_scale(MIXED, 1.0, method="numeric")
    for x in (0.3, 1.0, 2.5):
        assert sc.w(x) == pytest.approx(ref.w(x), rel=1e-9)
        assert sc.w_prime(x) == pytest.approx(ref.w_prime(x), rel=1e-8)
        assert sc.z(x) == pytest.approx(ref.z(x), rel=1e-9)


def test_reference_inversion():
    assert invert_laplace_reference(BM, 1.0, 1.0) == pytest.approx(
        math.sinh(1.0), abs=3e-8
    )
    assert invert_laplace_reference(CL, 0.0, 2.0) == pytest.approx(
        2.0 - math.exp(-1.0), abs=1e-8
    )


def test_numeric_method_limits():
    ref = make_scale(CL, 0.5, method="numeric")
    with pytest.raises(UnsupportedOperationError):
        ref.w_second(1.0)
    # boundary values still exact at x = 0
    assert ref.w(0.0) == pytest.approx(1.0)
    assert ref.z(0.0) == 1.0


def test_module_level_aliases():
    sc = make_scale(BM, 1.0)
    assert w(sc, 1.0) == sc.w(1.0)
    assert w_prime(sc, 1.0) == sc.w_prime(1.0)
    assert w_second(sc, 1.0) == sc.w_second(1.0)
    assert z(sc, 1.0) == sc.z(1.0)


def test_domain_errors():
    sc = make_scale(BM, 1.0)
    with pytest.raises(DomainError):
        sc.w_prime(0.0)
    with pytest.raises(DomainError):
        sc.w_second(-1.0)
    with pytest.raises(DomainError):
        sc.dlog_w(0.0)
    with pytest.raises(DomainError):
        make_scale(BM, -0.5)
    with pytest.raises(ValueError):
        make_scale(BM, 1.0, method="magic")


def test_near_degenerate_poles_refused():
    # q = 0 with a barely positive drift puts a pole 1e-14 from the one at 0
    with pytest.raises(RepeatedPoleError):
        make_scale(BrownianDrift(mu=1e-14, sigma=math.sqrt(2.0)), 0.0)


@settings(max_examples=40, deadline=None)
@given(
    q=st.floats(min_value=0.0, max_value=5.0),
    x=st.floats(min_value=0.01, max_value=5.0),
)
def test_w_positive_increasing(q, x):
    sc = make_scale(CL, q)
    assert sc.w(x) > 0.0
    assert sc.w(x + 0.1) > sc.w(x)
    assert sc.z(x) >= 1.0


@settings(max_examples=40, deadline=None)
@given(x=st.floats(min_value=0.05, max_value=4.0))
def test_z_matches_integral_of_w(x):
    sc = make_scale(MIXED, 0.8)
    # trapezoid check of Z(x) = 1 + q int_0^x W, coarse on purpose
    grid = np.linspace(0.0, x, 2001)
    approx = 1.0 + 0.8 * np.trapezoid(sc.w(grid), grid)
    assert sc.z(x) == pytest.approx(approx, rel=5e-5)
